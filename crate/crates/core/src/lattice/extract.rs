//! Location counts of an assembled exRec.

use std::collections::{BTreeMap, HashSet};

use super::circuit::{Circuit, Granularity, LabelTracker, LayoutError, OpKind, QubitLabel};
use super::exrec::synchronized_exrecs;
use crate::census::{AffineCount, CensusLevel, CensusSet, ExRecCensus, Gadget, LocationKind};

/// Counts every location of the exRec `c`.
///
/// Two-qubit gates count as swap-type locations. T and T-dagger count as
/// T locations at level n and as gates at level 1. A single-qubit Clifford
/// merges into a two-qubit gate on the same qubit in the previous or next
/// layer and otherwise counts as a gate. Measurements are readout
/// locations, preparations are free, and each idle live qubit is a memory
/// location. At level 1 a layer holding a measurement lasts `t_r`, so idle
/// qubits in it and the depth pick up slope terms.
pub fn extract_census(c: &Circuit, gadget: Gadget, level: CensusLevel) -> ExRecCensus {
    let n = c.layers.len();
    let mut tracker = LabelTracker::new(c);
    let mut two: Vec<HashSet<QubitLabel>> = Vec::with_capacity(n);
    let mut one_labels: Vec<Vec<Option<QubitLabel>>> = Vec::with_capacity(n);
    for layer in &c.layers {
        let mut s = HashSet::new();
        let mut v = Vec::with_capacity(layer.ops.len());
        for op in &layer.ops {
            if op.kind.arity() == 2 {
                s.extend(op.sites().filter_map(|x| tracker.label_at(x)));
            }
            v.push(tracker.label_at(op.a));
        }
        two.push(s);
        one_labels.push(v);
        tracker.apply(layer);
    }
    let idle = c.idle_qubits();
    let mut counts: BTreeMap<LocationKind, AffineCount> = LocationKind::ALL
        .iter()
        .map(|&k| (k, AffineCount::ZERO))
        .collect();
    let mut depth = AffineCount::ZERO;
    let mut add = |k: LocationKind, w: AffineCount| {
        let e = counts.get_mut(&k).unwrap();
        e.base += w.base;
        e.slope += w.slope;
    };
    let one = AffineCount::constant(1.0);
    for t in 0..n {
        let layer = &c.layers[t];
        let w = match (level, layer.long) {
            (CensusLevel::Level1, true) => AffineCount::new(0.0, 1.0),
            _ => one,
        };
        depth.base += w.base;
        depth.slope += w.slope;
        for (op, label) in layer.ops.iter().zip(&one_labels[t]) {
            match op.kind {
                OpKind::PrepZero => {}
                OpKind::Identity => add(LocationKind::Memory, w),
                OpKind::MeasureZ => add(LocationKind::Readout, one),
                OpKind::T | OpKind::Tdg => match level {
                    CensusLevel::LevelN => add(LocationKind::TGate, one),
                    CensusLevel::Level1 => add(LocationKind::Swap, one),
                },
                k if k.arity() == 2 => add(LocationKind::Swap, one),
                _ => {
                    let merged = label.is_some_and(|l| {
                        (t > 0 && two[t - 1].contains(&l)) || (t + 1 < n && two[t + 1].contains(&l))
                    });
                    if !merged {
                        add(LocationKind::Swap, one);
                    }
                }
            }
        }
        for _ in &idle[t] {
            add(LocationKind::Memory, w);
        }
    }
    if level == CensusLevel::Level1 {
        counts.remove(&LocationKind::TGate);
    }
    ExRecCensus {
        gadget,
        counts,
        depth,
    }
}

/// Census of the synchronised exRecs: level 1 from the physical circuits,
/// level n from the logical ones.
pub fn extract_census_set() -> Result<CensusSet, LayoutError> {
    let phys = synchronized_exrecs(Granularity::Physical)?;
    let logi = synchronized_exrecs(Granularity::Logical)?;
    Ok(CensusSet {
        level1: Gadget::ALL
            .iter()
            .map(|&g| (g, extract_census(&phys[g], g, CensusLevel::Level1)))
            .collect(),
        leveln: Gadget::ALL
            .iter()
            .map(|&g| (g, extract_census(&logi[g], g, CensusLevel::LevelN)))
            .collect(),
    })
}
