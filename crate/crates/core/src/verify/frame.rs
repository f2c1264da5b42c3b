//! Pauli-frame propagation through lattice circuits.

use super::recovery::RecoveryBook;
use super::simulate::Gauge;
use super::{PauliOperator, VerifyError};
use crate::lattice::{Circuit, ControlledGate, LabelTracker, OpKind, QubitLabel};

/// Frames use one bit per site.
pub const MAX_SITES: usize = 128;

#[derive(Clone, Copy, Debug)]
enum FOp {
    H(u8),
    S(u8),
    Cnot(u8, u8),
    Swap(u8, u8),
    CnotSwap(u8, u8),
    Meas(u8, u32),
    Prep(u8),
    If(ControlledGate, u8, u32),
}

/// Pauli error on every site plus the measurement records it flips.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Frame {
    pub x: u128,
    pub z: u128,
    pub flips: Vec<u64>,
    /// Syndromes with no entry in the recovery tables.
    pub unknown_patterns: u32,
}

impl Frame {
    pub fn new(records: u32) -> Self {
        Frame {
            x: 0,
            z: 0,
            flips: vec![0; (records as usize).div_ceil(64)],
            unknown_patterns: 0,
        }
    }

    pub fn flip(&mut self, r: u32) {
        self.flips[r as usize / 64] ^= 1 << (r % 64);
    }

    pub fn flipped(&self, r: u32) -> bool {
        self.flips[r as usize / 64] >> (r % 64) & 1 == 1
    }

    pub fn xor(&mut self, other: &Frame) {
        self.x ^= other.x;
        self.z ^= other.z;
        for (w, o) in self.flips.iter_mut().zip(&other.flips) {
            *w ^= o;
        }
    }

    pub fn inject(&mut self, site: usize, x: bool, z: bool) {
        self.x ^= (x as u128) << site;
        self.z ^= (z as u128) << site;
    }

    /// `(x, z)` bits on the listed sites, bit `i` for `sites[i]`.
    pub fn restrict(&self, sites: &[usize]) -> (u8, u8) {
        let mut x = 0u8;
        let mut z = 0u8;
        for (i, &s) in sites.iter().enumerate() {
            x |= ((self.x >> s & 1) as u8) << i;
            z |= ((self.z >> s & 1) as u8) << i;
        }
        (x, z)
    }
}

#[inline]
fn bit(v: u128, i: u8) -> bool {
    v >> i & 1 == 1
}

#[inline]
fn swap_bits(v: &mut u128, a: u8, b: u8) {
    if bit(*v, a) != bit(*v, b) {
        *v ^= (1u128 << a) | (1u128 << b);
    }
}

/// A circuit compiled for fast frame propagation.
#[derive(Clone, Debug)]
pub struct FrameSimulator {
    layers: Vec<Vec<FOp>>,
    num_records: u32,
    /// Extraction marks by layer, with the data sites at `apply_after`.
    marks: Vec<CompiledMark>,
    /// Final sites of each data block's qubits, by label index.
    final_sites: Vec<(u16, [usize; 7])>,
}

#[derive(Clone, Debug)]
struct CompiledMark {
    kind: crate::lattice::SyndromeKind,
    records: [u32; 7],
    apply_after: usize,
    layer: usize,
    fresh: bool,
    sites: [usize; 7],
}

impl FrameSimulator {
    pub fn new(c: &Circuit) -> Result<Self, VerifyError> {
        if c.num_sites() > MAX_SITES {
            return Err(VerifyError::TooLarge(c.num_sites()));
        }
        let mut layers = Vec::with_capacity(c.layers.len());
        for (t, layer) in c.layers.iter().enumerate() {
            let mut v = Vec::with_capacity(layer.ops.len());
            for op in &layer.ops {
                let a = c.site_index(op.a) as u8;
                let b = op.b.map(|s| c.site_index(s) as u8);
                v.push(match op.kind {
                    OpKind::Identity | OpKind::X | OpKind::Z => continue,
                    OpKind::H => FOp::H(a),
                    OpKind::S | OpKind::Sdg => FOp::S(a),
                    OpKind::T | OpKind::Tdg | OpKind::Controlled(ControlledGate::S) => {
                        return Err(VerifyError::NonClifford { layer: t })
                    }
                    OpKind::Cnot => FOp::Cnot(a, b.unwrap()),
                    OpKind::Swap => FOp::Swap(a, b.unwrap()),
                    OpKind::CnotSwap => FOp::CnotSwap(a, b.unwrap()),
                    OpKind::MeasureZ => FOp::Meas(a, op.record.unwrap()),
                    OpKind::PrepZero => FOp::Prep(a),
                    OpKind::Controlled(g) => FOp::If(g, a, op.record.unwrap()),
                });
            }
            layers.push(v);
        }
        let mut want: Vec<usize> = c.extractions.iter().map(|m| m.apply_after).collect();
        want.sort();
        want.dedup();
        let mut tracker = LabelTracker::new(c);
        let mut at_layer = std::collections::BTreeMap::new();
        for (t, layer) in c.layers.iter().enumerate() {
            tracker.apply(layer);
            if want.binary_search(&t).is_ok() {
                at_layer.insert(t, tracker.clone());
            }
        }
        let block_sites = |tr: &LabelTracker, block: u16| -> Result<[usize; 7], VerifyError> {
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
        };
        let mut marks = Vec::new();
        for m in &c.extractions {
            marks.push(CompiledMark {
                kind: m.kind,
                records: m.records,
                apply_after: m.apply_after,
                layer: m.layer,
                fresh: m.fresh,
                sites: block_sites(&at_layer[&m.apply_after], m.data_block)?,
            });
        }
        marks.sort_by_key(|m| m.layer);
        let mut final_sites = Vec::new();
        for b in c.data_blocks() {
            if c.block_sites(b).len() == 7 {
                final_sites.push((b, block_sites(&tracker, b)?));
            }
        }
        Ok(FrameSimulator {
            layers,
            num_records: c.num_records,
            marks,
            final_sites,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn blank(&self) -> Frame {
        Frame::new(self.num_records)
    }

    pub fn final_sites(&self) -> &[(u16, [usize; 7])] {
        &self.final_sites
    }

    fn apply(&self, f: &mut Frame, t: usize) {
        for op in &self.layers[t] {
            match *op {
                FOp::H(a) => {
                    let (xa, za) = (bit(f.x, a), bit(f.z, a));
                    if xa != za {
                        f.x ^= 1 << a;
                        f.z ^= 1 << a;
                    }
                }
                FOp::S(a) => f.z ^= f.x & (1 << a),
                FOp::Cnot(a, b) => {
                    f.x ^= ((f.x >> a) & 1) << b;
                    f.z ^= ((f.z >> b) & 1) << a;
                }
                FOp::Swap(a, b) => {
                    swap_bits(&mut f.x, a, b);
                    swap_bits(&mut f.z, a, b);
                }
                FOp::CnotSwap(a, b) => {
                    f.x ^= ((f.x >> a) & 1) << b;
                    f.z ^= ((f.z >> b) & 1) << a;
                    swap_bits(&mut f.x, a, b);
                    swap_bits(&mut f.z, a, b);
                }
                FOp::Meas(a, r) => {
                    if bit(f.x, a) {
                        f.flip(r);
                    }
                    f.z &= !(1 << a);
                }
                FOp::Prep(a) => {
                    f.x &= !(1 << a);
                    f.z &= !(1 << a);
                }
                FOp::If(g, a, r) => {
                    if f.flipped(r) {
                        match g {
                            ControlledGate::X => f.x ^= 1 << a,
                            ControlledGate::Z => f.z ^= 1 << a,
                            ControlledGate::S => unreachable!(),
                        }
                    }
                }
            }
        }
    }

    /// Handle extractions whose outcomes become known at the end of `t`.
    fn settle(&self, f: &mut Frame, t: usize, book: Option<&RecoveryBook>) {
        let Some(book) = book else { return };
        let lo = self.marks.partition_point(|m| m.layer < t);
        for m in self.marks[lo..].iter().take_while(|m| m.layer == t) {
            let mut pattern = 0u8;
            for (j, &r) in m.records.iter().enumerate() {
                pattern |= (f.flipped(r) as u8) << j;
            }
            let corr = match book.lookup(m.kind, m.fresh, pattern) {
                Some(c) => c,
                None => {
                    f.unknown_patterns += 1;
                    continue;
                }
            };
            if corr == (0, 0) {
                continue;
            }
            // The correction belongs right after the pass; carry it forward.
            let mut g = self.blank();
            for (i, &s) in m.sites.iter().enumerate() {
                g.inject(s, corr.0 >> i & 1 == 1, corr.1 >> i & 1 == 1);
            }
            for u in m.apply_after + 1..=t {
                self.apply(&mut g, u);
            }
            f.xor(&g);
        }
    }

    /// Propagate from the start of layer `from` to the end.
    pub fn run_from(&self, f: &mut Frame, from: usize, book: Option<&RecoveryBook>) {
        for t in from..self.layers.len() {
            self.apply(f, t);
            self.settle(f, t, book);
        }
    }

    /// Run from the start of layer `from`, adding each event's frame at the
    /// end of its layer before that layer's syndromes are handled. Events
    /// must be sorted by layer.
    pub fn run_with(
        &self,
        f: &mut Frame,
        from: usize,
        events: &[(usize, &Frame)],
        book: Option<&RecoveryBook>,
    ) {
        let mut k = events.partition_point(|e| e.0 < from);
        for t in from..self.layers.len() {
            self.apply(f, t);
            while k < events.len() && events[k].0 == t {
                f.xor(events[k].1);
                k += 1;
            }
            self.settle(f, t, book);
        }
    }

    /// The frame that turns the fault-free run into its other branch at a
    /// random measurement.
    pub fn gauge_frame(&self, g: &Gauge) -> Frame {
        let mut f = self.blank();
        for q in 0..g.pauli.num_qubits() {
            f.inject(q, g.pauli.x_bit(q), g.pauli.z_bit(q));
        }
        for &r in &g.records {
            f.flip(r);
        }
        f
    }

    /// `f` holds an error injected at the end of layer `t`; finish the run.
    pub fn run_after(&self, f: &mut Frame, t: usize, book: Option<&RecoveryBook>) {
        self.settle(f, t, book);
        self.run_from(f, t + 1, book);
    }
}

/// Propagate `p` (on all sites) injected after layer `after`, or before the
/// first layer when `None`, through the rest of `c`. Returns the final
/// error up to sign and the flipped records.
pub fn propagate_pauli(
    c: &Circuit,
    after: Option<usize>,
    p: &PauliOperator,
) -> Result<(PauliOperator, Vec<bool>), VerifyError> {
    let sim = FrameSimulator::new(c)?;
    if p.num_qubits() != c.num_sites() {
        return Err(VerifyError::Size(p.num_qubits(), c.num_sites()));
    }
    let mut f = sim.blank();
    for q in 0..c.num_sites() {
        f.inject(q, p.x_bit(q), p.z_bit(q));
    }
    match after {
        None => sim.run_from(&mut f, 0, None),
        Some(t) => sim.run_after(&mut f, t, None),
    }
    let out = PauliOperator::from_masks128(c.num_sites(), f.x, f.z);
    let flips = (0..c.num_records).map(|r| f.flipped(r)).collect();
    Ok((out, flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::*;
    use crate::verify::simulate::simulate_stabilizer;
    use crate::verify::{Pauli, StabilizerTableau};
    use proptest::prelude::*;

    fn decode_flips(err: &str) -> String {
        let mut c = build_encode();
        c.place(&build_decode(), ENCODE_DEPTH, 0).unwrap();
        let p: PauliOperator = err.parse().unwrap();
        let (_, flips) = propagate_pauli(&c, Some(ENCODE_DEPTH - 1), &p).unwrap();
        flips.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    #[test]
    fn single_error_signatures_after_decode() {
        let table = [
            ("ZIIIIII", "1010000"),
            ("IZIIIII", "1010100"),
            ("IIZIIII", "1000000"),
            ("IIIZIII", "1000100"),
            ("IIIIZII", "0010000"),
            ("IIIIIZI", "0010100"),
            ("IIIIIIZ", "0000100"),
            ("XIIIIII", "0100000"),
            ("IXIIIII", "0001000"),
            ("IIXIIII", "0101010"),
            ("IIIXIII", "0000010"),
            ("IIIIXII", "0101001"),
            ("IIIIIXI", "0000001"),
            ("IIIIIIX", "0001011"),
        ];
        let mut seen = std::collections::HashSet::new();
        for (e, want) in table {
            assert_eq!(decode_flips(e), want, "{e}");
            assert!(seen.insert(want));
        }
        // Stabilizers are invisible.
        assert_eq!(decode_flips("XXXXIII"), "0000000");
        assert_eq!(decode_flips("ZZIIZZI"), "0000000");
    }

    /// Random Clifford circuit on `n` line positions, no measurements.
    fn arb_circuit(n: u32) -> impl Strategy<Value = Circuit> {
        let gate = (0u8..6, 0..n, 0..n.saturating_sub(1).max(1));
        prop::collection::vec(gate, 1..40).prop_map(move |gs| {
            let mut c = Circuit::empty(Granularity::Logical, n);
            c.label_line(0, BlockKind::Data, 0..n);
            for (k, q, p) in gs {
                let op = match k {
                    0 => Operation::one(OpKind::H, Site::line(q)),
                    1 => Operation::one(OpKind::S, Site::line(q)),
                    2 if n > 1 => Operation::two(OpKind::Cnot, Site::line(p), Site::line(p + 1)),
                    3 if n > 1 => Operation::two(OpKind::Cnot, Site::line(p + 1), Site::line(p)),
                    4 if n > 1 => {
                        Operation::two(OpKind::CnotSwap, Site::line(p), Site::line(p + 1))
                    }
                    5 if n > 1 => Operation::two(OpKind::Swap, Site::line(p + 1), Site::line(p)),
                    _ => Operation::one(OpKind::Sdg, Site::line(q)),
                };
                c.push(vec![op]);
            }
            c
        })
    }

    fn run_tableau(
        c: &Circuit,
        prefix_h: &[bool],
        inject: Option<(&PauliOperator, usize)>,
    ) -> StabilizerTableau {
        let mut t = StabilizerTableau::zero_state(c.num_sites());
        for (q, &h) in prefix_h.iter().enumerate() {
            if h {
                t.h(q);
            }
        }
        let hit = |t: &mut StabilizerTableau, p: &PauliOperator| {
            for q in 0..p.num_qubits() {
                match p.get(q) {
                    Pauli::I => {}
                    Pauli::X => t.pauli_x(q),
                    Pauli::Z => t.pauli_z(q),
                    Pauli::Y => {
                        t.pauli_x(q);
                        t.pauli_z(q);
                    }
                }
            }
        };
        for (i, layer) in c.layers.iter().enumerate() {
            for op in &layer.ops {
                let a = op.a.col as usize;
                let b = op.b.map(|s| s.col as usize);
                match op.kind {
                    OpKind::H => t.h(a),
                    OpKind::S => t.s(a),
                    OpKind::Sdg => t.sdg(a),
                    OpKind::Cnot => t.cnot(a, b.unwrap()),
                    OpKind::Swap => t.swap(a, b.unwrap()),
                    OpKind::CnotSwap => {
                        t.cnot(a, b.unwrap());
                        t.swap(a, b.unwrap());
                    }
                    _ => unreachable!(),
                }
            }
            if let Some((p, at)) = inject {
                if at == i {
                    hit(&mut t, p);
                }
            }
        }
        t
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        /// The propagated frame maps the ideal output onto the faulty one.
        #[test]
        fn frame_matches_tableau(
            (c, prefix, err, at) in (1u32..=14).prop_flat_map(|n| (
                arb_circuit(n),
                prop::collection::vec(any::<bool>(), n as usize),
                prop::collection::vec(0u8..4, n as usize),
                any::<prop::sample::Index>(),
            ))
        ) {
            let n = c.num_sites();
            let at = at.index(c.depth());
            let err = PauliOperator::from_paulis(&err.iter().map(|&k| Pauli::ALL[k as usize]).collect::<Vec<_>>());
            let ideal = run_tableau(&c, &prefix, None);
            let faulty = run_tableau(&c, &prefix, Some((&err, at)));
            let (frame, _) = propagate_pauli(&c, Some(at), &err).unwrap();
            for g in ideal.stabilizers() {
                prop_assert_eq!(faulty.expectation(&g), Some(!frame.commutes(&g)));
            }
            prop_assert_eq!(n, frame.num_qubits());
        }
    }

    #[test]
    fn measurement_flips_match_tableau() {
        let mut c = build_encode();
        c.place(&build_decode(), ENCODE_DEPTH, 0).unwrap();
        let (_, ideal) = simulate_stabilizer(&c).unwrap();
        for q in 0..7 {
            for p in Pauli::NONTRIVIAL {
                let err = PauliOperator::single(7, q, p);
                let mut faulty = c.clone();
                let op = match p {
                    Pauli::X => vec![Operation::one(OpKind::X, Site::line(q as u32))],
                    Pauli::Z => vec![Operation::one(OpKind::Z, Site::line(q as u32))],
                    _ => vec![Operation::one(OpKind::X, Site::line(q as u32))],
                };
                faulty
                    .layers
                    .insert(ENCODE_DEPTH, crate::lattice::Layer::new(op));
                if p == Pauli::Y {
                    faulty.layers.insert(
                        ENCODE_DEPTH + 1,
                        crate::lattice::Layer::new(vec![Operation::one(
                            OpKind::Z,
                            Site::line(q as u32),
                        )]),
                    );
                }
                let (_, got) = simulate_stabilizer(&faulty).unwrap();
                let (_, flips) = propagate_pauli(&c, Some(ENCODE_DEPTH - 1), &err).unwrap();
                let diff: Vec<bool> = got.iter().zip(&ideal).map(|(a, b)| a != b).collect();
                assert_eq!(diff, flips, "{p:?} on {q}");
            }
        }
    }
}
