//! Steane-code weights and syndrome-to-recovery tables.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::faults::Prepared;
use super::frame::{Frame, FrameSimulator};
use super::simulate::{measurement_gauges, Gauge};
use super::{Pauli, VerifyError};
use crate::lattice::{Circuit, LabelTracker, QubitLabel, SyndromeKind, STABILIZER_SUPPORTS};

/// A Pauli on one code block: bit `i` of each mask acts on qubit `i`.
pub type BlockPauli = (u8, u8);

fn span(gens: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8];
    for &g in gens {
        let more: Vec<u8> = out.iter().map(|v| v ^ g).collect();
        out.extend(more);
    }
    out
}

struct Weights {
    stab: Vec<u8>,
    with_logical_z: Vec<u8>,
    /// Least weight of a 7-bit mask modulo the supports.
    classical: Vec<u8>,
    /// Same, with the all-ones word added.
    classical_with_ones: Vec<u8>,
}

fn weights() -> &'static Weights {
    static W: OnceLock<Weights> = OnceLock::new();
    W.get_or_init(|| {
        let s = span(&STABILIZER_SUPPORTS);
        let mut zs = s.clone();
        zs.extend(s.iter().map(|v| v ^ 0x7f));
        let build = |zgroup: &[u8]| {
            (0..1usize << 14)
                .map(|i| {
                    let (x, z) = ((i & 0x7f) as u8, (i >> 7) as u8);
                    let mut best = 7u8;
                    for &sx in &s {
                        for &sz in zgroup {
                            best = best.min(((x ^ sx) | (z ^ sz)).count_ones() as u8);
                        }
                    }
                    best
                })
                .collect()
        };
        let classical = |group: &[u8]| {
            (0..128u8)
                .map(|v| {
                    group
                        .iter()
                        .map(|g| (v ^ g).count_ones() as u8)
                        .min()
                        .unwrap()
                })
                .collect()
        };
        Weights {
            stab: build(&s),
            with_logical_z: build(&zs),
            classical: classical(&s),
            classical_with_ones: classical(&zs),
        }
    })
}

/// Least weight over the 64-element stabilizer coset of `p`.
pub fn steane_weight(p: BlockPauli) -> u8 {
    weights().stab[(p.0 & 0x7f) as usize | ((p.1 & 0x7f) as usize) << 7]
}

/// Least weight modulo the stabilizers of `|0_L>`, which include `Z^7`.
pub fn steane_weight_zero_state(p: BlockPauli) -> u8 {
    weights().with_logical_z[(p.0 & 0x7f) as usize | ((p.1 & 0x7f) as usize) << 7]
}

/// Larger of the X-part and Z-part weights modulo the stabilizers of
/// `|0_L>`. A block that is error corrected again before use only needs
/// each part to be correctable on its own.
pub fn split_weight_zero_state(p: BlockPauli) -> u8 {
    let w = weights();
    w.classical[(p.0 & 0x7f) as usize].max(w.classical_with_ones[(p.1 & 0x7f) as usize])
}

/// How a residual block error is weighed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Modulo the stabilizer group.
    Full,
    /// Modulo the stabilizers of `|0_L>`.
    ZeroState,
    /// X and Z parts separately, modulo the stabilizers of `|0_L>`.
    SplitZeroState,
}

impl Weighting {
    pub fn weigh(self, p: BlockPauli) -> u8 {
        match self {
            Weighting::Full => steane_weight(p),
            Weighting::ZeroState => steane_weight_zero_state(p),
            Weighting::SplitZeroState => split_weight_zero_state(p),
        }
    }
}

/// Least Hamming weight of a readout flip pattern modulo the classical
/// code spanned by the stabilizer supports.
pub fn readout_flip_weight(flips: u8) -> u8 {
    span(&STABILIZER_SUPPORTS)
        .iter()
        .map(|c| (flips ^ c).count_ones() as u8)
        .min()
        .unwrap()
}

pub fn block_label(p: BlockPauli) -> String {
    (0..7)
        .map(|i| Pauli::from_bits(p.0 >> i & 1 == 1, p.1 >> i & 1 == 1).symbol())
        .collect()
}

fn pattern_label(p: u8) -> String {
    (0..7)
        .map(|j| if p >> j & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Recovery for each 7-bit decode pattern of one extraction type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryTable {
    pub kind: SyndromeKind,
    entries: [Option<BlockPauli>; 128],
}

impl RecoveryTable {
    pub fn get(&self, pattern: u8) -> Option<BlockPauli> {
        self.entries[(pattern & 0x7f) as usize]
    }

    pub fn len(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Serialize for RecoveryTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = self
            .entries
            .iter()
            .enumerate()
            .filter_map(|(p, e)| e.map(|e| (pattern_label(p as u8), block_label(e))))
            .collect();
        m.serialize(s)
    }
}

/// Tables for X and Z extraction on encoded data, and for the X
/// extraction that turns a fresh `|0...0>` into `|0_L>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecoveryBook {
    pub x: RecoveryTable,
    pub z: RecoveryTable,
    pub prep: RecoveryTable,
}

impl RecoveryBook {
    pub fn lookup(&self, kind: SyndromeKind, fresh: bool, pattern: u8) -> Option<BlockPauli> {
        match (kind, fresh) {
            (SyndromeKind::X, false) => self.x.get(pattern),
            (SyndromeKind::Z, _) => self.z.get(pattern),
            (SyndromeKind::X, true) => self.prep.get(pattern),
        }
    }
}

/// Two errors with one pattern that no single recovery fixes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub kind: SyndromeKind,
    pub pattern: String,
    pub recovery: String,
    pub error: String,
    pub residual_weight: u8,
}

/// Sites of `block` at the start of layer `t`.
pub(crate) fn block_sites_at(c: &Circuit, block: u16, t: usize) -> Result<[usize; 7], VerifyError> {
    let mut tr = LabelTracker::new(c);
    for l in &c.layers[..t.min(c.layers.len())] {
        tr.apply(l);
    }
    let mut s = [0; 7];
    for (i, slot) in s.iter_mut().enumerate() {
        *slot = tr
            .index_of(QubitLabel {
                block,
                index: i as u8,
            })
            .ok_or(VerifyError::MissingBlock(block))?;
    }
    Ok(s)
}

/// Fault-free records and gauges of `c`, after checking that every
/// extraction reads the all-zero pattern when nothing goes wrong.
pub(crate) fn reference_gauges(c: &Circuit) -> Result<Vec<Gauge>, VerifyError> {
    let (reference, gauges) = measurement_gauges(c)?;
    for m in &c.extractions {
        if let Some(&r) = m.records.iter().find(|&&r| reference[r as usize]) {
            return Err(VerifyError::NonzeroReference(r));
        }
    }
    Ok(gauges)
}

/// An extraction gadget used to learn recoveries.
#[derive(Clone, Debug)]
pub struct TrainingGadget {
    pub prepared: Prepared,
    /// How the data error left after recovery is judged.
    pub weighting: Weighting,
}

/// Learn the recovery for `kind` from extraction gadgets holding one
/// extraction each on a prepared data block. Events are the
/// weight-0 and weight-1 data errors entering the gadget and every single
/// fault inside it, each combined with every branch of the random
/// fault-free outcomes. Each pattern gets the recovery minimising the worst
/// and then the total residual weight. An input error on encoded data must
/// be removed entirely from the component the extraction sees; any other
/// event may leave weight one. Patterns that cannot meet these bounds are
/// reported as conflicts.
pub fn build_recovery_table(
    kind: SyndromeKind,
    gadgets: &[TrainingGadget],
    idle: bool,
) -> Result<(RecoveryTable, Vec<Conflict>), VerifyError> {
    type Obs = (u8, BlockPauli);
    let mut groups: BTreeMap<u8, BTreeMap<(BlockPauli, Weighting, u8), usize>> = BTreeMap::new();
    for tg in gadgets {
        let g = &tg.prepared;
        let c = &g.circuit;
        let [mark] = c.extractions.as_slice() else {
            return Err(VerifyError::NoExtraction);
        };
        if mark.kind != kind {
            return Err(VerifyError::NoExtraction);
        }
        let sim = FrameSimulator::new(c)?;
        let gauges = reference_gauges(c)?;
        let start = block_sites_at(c, mark.data_block, g.start)?;
        let &(_, end) = sim
            .final_sites()
            .iter()
            .find(|(b, _)| *b == mark.data_block)
            .ok_or(VerifyError::MissingBlock(mark.data_block))?;
        let observe = |events: &[(usize, &Frame)], pre: Option<&Frame>| -> Obs {
            let mut f = pre.cloned().unwrap_or_else(|| sim.blank());
            sim.run_with(&mut f, 0, events, None);
            let mut pat = 0u8;
            for (j, &r) in mark.records.iter().enumerate() {
                pat |= (f.flipped(r) as u8) << j;
            }
            (pat, f.restrict(&end))
        };
        let mut branches: Vec<Obs> = vec![(0, (0, 0))];
        for gauge in &gauges {
            let (p, e) = observe(&[(gauge.layer, &sim.gauge_frame(gauge))], None);
            let more: Vec<Obs> = branches
                .iter()
                .map(|b| (b.0 ^ p, (b.1 .0 ^ e.0, b.1 .1 ^ e.1)))
                .collect();
            branches.extend(more);
        }
        let mut events = Vec::new();
        for (i, &s) in start.iter().enumerate() {
            for p in Pauli::ALL {
                if p == Pauli::I && i > 0 {
                    continue;
                }
                let mut f = sim.blank();
                let (x, z) = p.bits();
                f.inject(s, x, z);
                // An encoded input must lose the part this extraction sees.
                let unseen = match kind {
                    SyndromeKind::X => x,
                    SyndromeKind::Z => z,
                };
                let bound = if g.start == 0 || unseen { 1 } else { 0 };
                let (pat, e) = match g.start {
                    0 => observe(&[], Some(&f)),
                    t => observe(&[(t - 1, &f)], None),
                };
                events.push((pat, e, bound));
            }
        }
        let faults = g.faults(idle);
        events.par_extend(faults.par_iter().map(|fault| {
            let (pat, e) = observe(&[(fault.layer, &fault.frame(c.num_records))], None);
            (pat, e, 1)
        }));
        for (pat, e, bound) in events {
            for b in &branches {
                let e2 = (e.0 ^ b.1 .0, e.1 ^ b.1 .1);
                *groups
                    .entry(pat ^ b.0)
                    .or_default()
                    .entry((e2, tg.weighting, bound))
                    .or_default() += 1;
            }
        }
    }
    let singles: Vec<BlockPauli> = std::iter::once((0, 0))
        .chain((0..7).flat_map(|i| [(1 << i, 0), (0, 1 << i), (1 << i, 1 << i)]))
        .collect();
    let mut entries = [None; 128];
    let mut conflicts = Vec::new();
    for (pat, errs) in &groups {
        let mut cands: Vec<BlockPauli> = errs
            .keys()
            .map(|k| k.0)
            .chain(singles.iter().copied())
            .collect();
        cands.sort();
        cands.dedup();
        let score = |c: &BlockPauli| {
            let mut worst = 0u8;
            let mut total = 0usize;
            for (&(e, wt, bound), n) in errs {
                let w = wt.weigh((e.0 ^ c.0, e.1 ^ c.1));
                worst = worst.max(w.saturating_sub(bound));
                total += w as usize * n;
            }
            (worst, total, (c.0 | c.1).count_ones())
        };
        let best = *cands.iter().min_by_key(|c| score(c)).unwrap();
        entries[*pat as usize] = Some(best);
        for &(e, wt, bound) in errs.keys() {
            let w = wt.weigh((e.0 ^ best.0, e.1 ^ best.1));
            if w > bound {
                conflicts.push(Conflict {
                    kind,
                    pattern: pattern_label(*pat),
                    recovery: block_label(best),
                    error: block_label(e),
                    residual_weight: w,
                });
            }
        }
    }
    Ok((RecoveryTable { kind, entries }, conflicts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stabilizers_have_weight_zero() {
        for &g in &STABILIZER_SUPPORTS {
            assert_eq!(steane_weight((g, 0)), 0);
            assert_eq!(steane_weight((0, g)), 0);
            assert_eq!(steane_weight((g, g)), 0);
        }
        assert_eq!(span(&STABILIZER_SUPPORTS).len(), 8);
    }

    #[test]
    fn single_errors_stay_single() {
        for i in 0..7 {
            assert_eq!(steane_weight((1 << i, 0)), 1);
            assert_eq!(steane_weight((1 << i, 1 << i)), 1);
        }
        // Logical operators have distance three.
        assert_eq!(steane_weight((0x7f, 0)), 3);
        assert_eq!(steane_weight((0, 0x7f)), 3);
        assert_eq!(steane_weight_zero_state((0, 0x7f)), 0);
        assert_eq!(steane_weight_zero_state((0x7f, 0)), 3);
    }

    #[test]
    fn weights_match_brute_force_sample() {
        let s = span(&STABILIZER_SUPPORTS);
        for i in (0..1u32 << 14).step_by(97) {
            let (x, z) = ((i & 0x7f) as u8, (i >> 7) as u8);
            let brute = s
                .iter()
                .flat_map(|a| s.iter().map(move |b| ((x ^ a) | (z ^ b)).count_ones()))
                .min()
                .unwrap();
            assert_eq!(steane_weight((x, z)) as u32, brute);
        }
    }

    #[test]
    fn split_weight() {
        // Y on one qubit and X, Z on different qubits are both correctable.
        assert_eq!(split_weight_zero_state((1, 1)), 1);
        assert_eq!(split_weight_zero_state((1, 4)), 1);
        assert_eq!(steane_weight_zero_state((1, 4)), 2);
        assert_eq!(split_weight_zero_state((0, 0x7f)), 0);
        assert_eq!(split_weight_zero_state((3, 0)), 2);
    }

    #[test]
    fn readout_flips() {
        assert_eq!(readout_flip_weight(0), 0);
        assert_eq!(readout_flip_weight(0b000_1111), 0);
        assert_eq!(readout_flip_weight(0b000_0001), 1);
        assert_eq!(readout_flip_weight(0b111_1111), 3);
    }
}
