//! Single-fault enumeration.

use serde::Serialize;

use super::frame::Frame;
use super::Pauli;
use crate::lattice::{Circuit, Granularity, OpKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FaultKind {
    Gate,
    Measurement,
    Preparation,
    Idle,
}

/// A circuit whose first `start` layers are ideal state preparation.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub circuit: Circuit,
    pub start: usize,
}

impl Prepared {
    /// Single faults at or after `start`.
    pub fn faults(&self, idle: bool) -> Vec<Fault> {
        let mut v = enumerate_single_faults(&self.circuit, idle);
        v.retain(|f| f.layer >= self.start);
        v
    }
}

/// One fault acting right after layer `layer`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub layer: usize,
    pub kind: FaultKind,
    /// Sites and the Pauli applied on each.
    pub paulis: Vec<(usize, Pauli)>,
    /// Measurement record flipped by a readout fault.
    pub flip: Option<u32>,
}

impl Fault {
    pub fn frame(&self, records: u32) -> Frame {
        let mut f = Frame::new(records);
        self.inject(&mut f);
        f
    }

    pub fn inject(&self, f: &mut Frame) {
        for &(s, p) in &self.paulis {
            let (x, z) = p.bits();
            f.inject(s, x, z);
        }
        if let Some(r) = self.flip {
            f.flip(r);
        }
    }

    pub fn describe(&self, c: &Circuit) -> String {
        let mut s = format!("{:?} after layer {}:", self.kind, self.layer);
        for &(i, p) in &self.paulis {
            s.push_str(&format!(" {}@{}", p.symbol(), c.site_at(i)));
        }
        if let Some(r) = self.flip {
            s.push_str(&format!(" flip record {r}"));
        }
        s
    }
}

/// Every single fault: three Paulis after each one-qubit gate, fifteen
/// after each two-qubit gate, a flipped outcome per measurement, an X after
/// each preparation and, optionally, three Paulis on each idle live qubit.
/// A logical SWAP is a single-error SWAP, so it gets only the six faults
/// acting on one of its qubits.
pub fn enumerate_single_faults(c: &Circuit, idle: bool) -> Vec<Fault> {
    let single_error_swaps = c.granularity == Granularity::Logical;
    let mut out = Vec::new();
    for (t, layer) in c.layers.iter().enumerate() {
        for op in &layer.ops {
            let a = c.site_index(op.a);
            match (op.kind, op.b) {
                (OpKind::MeasureZ, _) => out.push(Fault {
                    layer: t,
                    kind: FaultKind::Measurement,
                    paulis: vec![],
                    flip: op.record,
                }),
                (OpKind::PrepZero, _) => out.push(Fault {
                    layer: t,
                    kind: FaultKind::Preparation,
                    paulis: vec![(a, Pauli::X)],
                    flip: None,
                }),
                (_, Some(b)) => {
                    let b = c.site_index(b);
                    for pa in Pauli::ALL {
                        for pb in Pauli::ALL {
                            if pa == Pauli::I && pb == Pauli::I {
                                continue;
                            }
                            if single_error_swaps
                                && op.kind == OpKind::Swap
                                && pa != Pauli::I
                                && pb != Pauli::I
                            {
                                continue;
                            }
                            let paulis = [(a, pa), (b, pb)]
                                .into_iter()
                                .filter(|(_, p)| *p != Pauli::I)
                                .collect();
                            out.push(Fault {
                                layer: t,
                                kind: FaultKind::Gate,
                                paulis,
                                flip: None,
                            });
                        }
                    }
                }
                (_, None) => {
                    for p in Pauli::NONTRIVIAL {
                        out.push(Fault {
                            layer: t,
                            kind: FaultKind::Gate,
                            paulis: vec![(a, p)],
                            flip: None,
                        });
                    }
                }
            }
        }
    }
    if idle {
        for (t, qs) in c.idle_qubits().into_iter().enumerate() {
            for q in qs {
                for p in Pauli::NONTRIVIAL {
                    out.push(Fault {
                        layer: t,
                        kind: FaultKind::Idle,
                        paulis: vec![(q.site, p)],
                        flip: None,
                    });
                }
            }
        }
    }
    out
}
