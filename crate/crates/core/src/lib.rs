//! Threshold analysis and single-fault verification for [[7,1,3]] circuits
//! on a bilinear nearest-neighbour qubit array.

pub mod census;
pub mod cli;
pub mod failure_model;
pub mod lattice;
pub mod threshold;
pub mod verify;
