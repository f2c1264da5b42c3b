//! Lattice circuits: layout, builders, exRec assembly and census extraction.

pub mod builders;
pub mod circuit;
pub mod exrec;
pub mod extract;

pub use builders::*;
pub use circuit::*;
pub use exrec::*;
pub use extract::*;
