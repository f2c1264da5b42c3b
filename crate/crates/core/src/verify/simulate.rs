//! Exact stabilizer simulation of Clifford lattice circuits.

use super::tableau::StabilizerTableau;
use super::{Pauli, PauliOperator, VerifyError};
use crate::lattice::{Circuit, ControlledGate, OpKind};

/// A measurement whose fault-free outcome is random. Its other outcome
/// is reached by flipping `records` and applying `pauli` to the qubits not
/// measured in `layer`, right after that layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gauge {
    pub layer: usize,
    pub records: Vec<u32>,
    pub pauli: PauliOperator,
}

/// Runs `c` from `|0...0>` on every site. Random measurement outcomes
/// resolve to 0. Returns the final state and all records.
pub fn simulate_stabilizer(c: &Circuit) -> Result<(StabilizerTableau, Vec<bool>), VerifyError> {
    let (t, rec, _) = run(c)?;
    Ok((t, rec))
}

/// Records whose fault-free outcome is random.
pub fn random_records(c: &Circuit) -> Result<Vec<u32>, VerifyError> {
    Ok(measurement_gauges(c)?
        .1
        .iter()
        .map(|g| g.records[0])
        .collect())
}

/// Fault-free records (random ones read 0) and one gauge per random outcome.
pub fn measurement_gauges(c: &Circuit) -> Result<(Vec<bool>, Vec<Gauge>), VerifyError> {
    let (_, rec, gauges) = run(c)?;
    Ok((rec, gauges))
}

fn run(c: &Circuit) -> Result<(StabilizerTableau, Vec<bool>, Vec<Gauge>), VerifyError> {
    let mut t = StabilizerTableau::zero_state(c.num_sites());
    let mut rec = vec![false; c.num_records as usize];
    let mut gauges = Vec::new();
    for (layer_idx, layer) in c.layers.iter().enumerate() {
        let mut measured = Vec::new();
        for op in &layer.ops {
            let a = c.site_index(op.a);
            let b = op.b.map(|s| c.site_index(s));
            match op.kind {
                OpKind::Identity => {}
                OpKind::PrepZero => t.reset(a),
                OpKind::H => t.h(a),
                OpKind::X => t.pauli_x(a),
                OpKind::Z => t.pauli_z(a),
                OpKind::S => t.s(a),
                OpKind::Sdg => t.sdg(a),
                OpKind::T | OpKind::Tdg => {
                    return Err(VerifyError::NonClifford { layer: layer_idx });
                }
                OpKind::Cnot => t.cnot(a, b.unwrap()),
                OpKind::Swap => t.swap(a, b.unwrap()),
                OpKind::CnotSwap => {
                    t.cnot(a, b.unwrap());
                    t.swap(a, b.unwrap());
                }
                OpKind::MeasureZ => measured.push((a, op.record.unwrap())),
                OpKind::Controlled(g) => {
                    if rec[op.record.unwrap() as usize] {
                        match g {
                            ControlledGate::X => t.pauli_x(a),
                            ControlledGate::Z => t.pauli_z(a),
                            ControlledGate::S => t.s(a),
                        }
                    }
                }
            }
        }
        // Operations in a layer touch disjoint qubits, so measuring last is exact.
        for (i, &(a, r)) in measured.iter().enumerate() {
            if let Some(mut g) = t.anticommuting_stabilizer(a) {
                let mut records = vec![r];
                records.extend(
                    measured[i + 1..]
                        .iter()
                        .filter(|(q, _)| g.x_bit(*q))
                        .map(|&(_, r2)| r2),
                );
                for &(q, _) in &measured {
                    g.set(q, Pauli::I);
                }
                gauges.push(Gauge {
                    layer: layer_idx,
                    records,
                    pauli: g,
                });
            }
            rec[r as usize] = t.measure(a).0;
        }
    }
    Ok((t, rec, gauges))
}
