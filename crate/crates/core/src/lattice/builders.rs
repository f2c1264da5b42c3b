//! Gadget builders for the [[7,1,3]] code on a line.

use super::circuit::{
    BlockKind, Circuit, ExtractionMark, Granularity, LayoutError, OpKind, Operation, QubitLabel,
    QubitRole, Site, SyndromeKind,
};

/// Qubits per code block.
pub const BLOCK: u32 = 7;

/// Layers of [`build_encode`].
pub const ENCODE_DEPTH: usize = 9;
/// Layers of [`build_decode`], measurement included.
pub const DECODE_DEPTH: usize = 7;

/// Supports of the three X-type (and Z-type) generators on line positions.
pub const STABILIZER_SUPPORTS: [u8; 3] = [0b000_1111, 0b011_0011, 0b110_1010];

fn one(kind: OpKind, c: u32) -> Operation {
    Operation::one(kind, Site::line(c))
}

fn two(kind: OpKind, a: u32, b: u32) -> Operation {
    Operation::two(kind, Site::line(a), Site::line(b))
}

/// Prepares `|0_L>` on line positions `0..7` from fresh qubits, with each
/// preparation as late as possible.
pub fn build_encode() -> Circuit {
    use OpKind::*;
    let mut c = Circuit::empty(Granularity::Logical, BLOCK);
    c.label_line(0, BlockKind::Ancilla, 0..BLOCK);
    c.push(vec![one(PrepZero, 2), one(PrepZero, 4)]);
    c.push(vec![
        one(H, 2),
        one(H, 4),
        one(PrepZero, 3),
        one(PrepZero, 5),
    ]);
    c.push(vec![two(Cnot, 2, 3), two(Cnot, 4, 5), one(PrepZero, 6)]);
    c.push(vec![one(H, 6), one(PrepZero, 1)]);
    c.push(vec![
        two(CnotSwap, 2, 1),
        two(Swap, 3, 4),
        two(CnotSwap, 6, 5),
        one(PrepZero, 0),
    ]);
    c.push(vec![
        two(CnotSwap, 1, 0),
        two(CnotSwap, 3, 2),
        two(CnotSwap, 5, 4),
    ]);
    c.push(vec![two(Cnot, 2, 1), two(Cnot, 4, 3)]);
    c.push(vec![two(Swap, 0, 1), two(Swap, 2, 3), two(Swap, 4, 5)]);
    c.push(vec![two(Swap, 1, 2), two(Swap, 3, 4), two(Swap, 5, 6)]);
    debug_assert_eq!(c.depth(), ENCODE_DEPTH);
    c
}

/// Maps a codeword back to product form and measures every position.
/// Record `j` holds the outcome at line position `j`.
pub fn build_decode() -> Circuit {
    use OpKind::*;
    let mut c = Circuit::empty(Granularity::Logical, BLOCK);
    c.label_line(0, BlockKind::Ancilla, 0..BLOCK);
    c.push(vec![two(Cnot, 2, 3), two(Cnot, 4, 5)]);
    c.push(vec![
        two(CnotSwap, 2, 1),
        two(Swap, 3, 4),
        two(CnotSwap, 6, 5),
    ]);
    c.push(vec![
        two(CnotSwap, 1, 0),
        two(CnotSwap, 3, 2),
        two(CnotSwap, 5, 4),
    ]);
    c.push(vec![one(H, 0)]);
    c.push(vec![two(Cnot, 2, 1), two(Cnot, 4, 3)]);
    c.push(vec![one(H, 2), one(H, 4)]);
    let t = c.depth();
    c.put_measurements(t, &(0..BLOCK).collect::<Vec<_>>())
        .expect("decode fits");
    debug_assert_eq!(c.depth(), DECODE_DEPTH);
    c
}

/// Odd-even transposition layers interleaving `[b_1..b_k | a_1..a_k]`
/// into `b_1 a_1 b_2 a_2 ...`; `k - 1` layers and `k(k-1)/2` swaps.
pub fn mesh_layers(k: u32) -> Vec<Vec<(u32, u32)>> {
    (1..k)
        .map(|t| (0..t).map(|j| (k - t + 2 * j, k - t + 2 * j + 1)).collect())
        .collect()
}

fn mesh_circuit(k: u32, reverse: bool) -> Result<Circuit, LayoutError> {
    if k == 0 {
        return Err(LayoutError::Size("mesh needs k >= 1".into()));
    }
    let mut c = Circuit::empty(Granularity::Logical, 2 * k);
    c.label_line(0, BlockKind::Data, 0..k);
    c.label_line(1, BlockKind::Ancilla, k..2 * k);
    let mut layers = mesh_layers(k);
    if reverse {
        layers.reverse();
        c.label_line(0, BlockKind::Data, (0..k).map(|i| 2 * i));
        c.label_line(1, BlockKind::Ancilla, (0..k).map(|i| 2 * i + 1));
    }
    for l in layers {
        c.push(
            l.into_iter()
                .map(|(a, b)| two(OpKind::Swap, a, b))
                .collect(),
        );
    }
    Ok(c)
}

/// Interleaves two adjacent blocks of `k` logical qubits.
pub fn build_mesh(k: u32) -> Result<Circuit, LayoutError> {
    mesh_circuit(k, false)
}

/// Inverse of [`build_mesh`].
pub fn build_unmesh(k: u32) -> Result<Circuit, LayoutError> {
    mesh_circuit(k, true)
}

/// Cat state `(|0..0> + |1..1>)/sqrt2` grown outward from position 3.
pub fn build_cat_prep() -> Circuit {
    use OpKind::*;
    let mut c = Circuit::empty(Granularity::Logical, BLOCK);
    c.label_line(0, BlockKind::Ancilla, 0..BLOCK);
    c.push(vec![one(PrepZero, 3)]);
    c.push(vec![one(H, 3), one(PrepZero, 2)]);
    c.push(vec![two(Cnot, 3, 2), one(PrepZero, 1), one(PrepZero, 4)]);
    c.push(vec![
        two(Cnot, 2, 1),
        two(Cnot, 3, 4),
        one(PrepZero, 0),
        one(PrepZero, 5),
    ]);
    c.push(vec![two(Cnot, 1, 0), two(Cnot, 4, 5), one(PrepZero, 6)]);
    c.push(vec![two(Cnot, 5, 6)]);
    c
}

/// Undoes [`build_cat_prep`] and measures; record 3 carries the parity.
pub fn build_cat_measure() -> Circuit {
    use OpKind::*;
    let mut c = Circuit::empty(Granularity::Logical, BLOCK);
    c.label_line(0, BlockKind::Ancilla, 0..BLOCK);
    c.push(vec![two(Cnot, 5, 6)]);
    c.push(vec![two(Cnot, 1, 0), two(Cnot, 4, 5)]);
    c.push(vec![two(Cnot, 2, 1), two(Cnot, 3, 4)]);
    c.push(vec![two(Cnot, 3, 2)]);
    c.push(vec![one(H, 3)]);
    c.put_measurements(5, &(0..BLOCK).collect::<Vec<_>>())
        .expect("fits");
    c
}

/// Two-row role map for physical circuits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleMap {
    pub width: u32,
    roles: Vec<QubitRole>,
}

impl RoleMap {
    /// Row 0 computational, row 1 placeholders.
    pub fn standard(width: u32) -> Self {
        let mut roles = vec![QubitRole::Computational; width as usize];
        roles.extend(vec![QubitRole::Placeholder; width as usize]);
        RoleMap { width, roles }
    }

    pub fn from_roles(width: u32, roles: Vec<QubitRole>) -> Result<Self, LayoutError> {
        if roles.len() != 2 * width as usize {
            return Err(LayoutError::Size(format!(
                "{} roles for a 2x{} lattice",
                roles.len(),
                width
            )));
        }
        Ok(RoleMap { width, roles })
    }

    pub fn role(&self, s: Site) -> Option<QubitRole> {
        (s.row < 2 && s.col < self.width)
            .then(|| self.roles[s.row as usize * self.width as usize + s.col as usize])
    }
}

/// Exchanges computational qubits `c1` and `c2` with four physical SWAPs
/// around a 2x2 square whose other corners are placeholders. A single
/// faulty SWAP touches only one of the two qubits.
pub fn build_single_error_swap(
    roles: &RoleMap,
    c1: Site,
    c2: Site,
) -> Result<Circuit, LayoutError> {
    for s in [c1, c2] {
        match roles.role(s) {
            None => {
                return Err(LayoutError::OutOfBounds {
                    site: s,
                    rows: 2,
                    width: roles.width,
                })
            }
            Some(QubitRole::Placeholder) => return Err(LayoutError::NotComputational(s)),
            Some(QubitRole::Computational) => {}
        }
    }
    let mut c = Circuit::empty(Granularity::Physical, roles.width);
    c.blocks.push(BlockKind::Data);
    let mut k = 0u8;
    for (i, r) in roles.roles.iter().enumerate() {
        if *r == QubitRole::Computational {
            c.labels[i] = Some(QubitLabel { block: 0, index: k });
            k += 1;
        }
    }
    if c1 == c2 {
        return Ok(c);
    }
    if !c1.adjacent(c2) {
        return Err(LayoutError::NotAdjacent { c1, c2 });
    }
    let is_ph = |s: Site| roles.role(s) == Some(QubitRole::Placeholder);
    // Corners D (next to c1) and C (next to c2).
    let candidates: Vec<(Site, Site)> = if c1.row == c2.row {
        let r = 1 - c1.row;
        vec![(Site::new(r, c1.col), Site::new(r, c2.col))]
    } else {
        let mut v = vec![];
        for dc in [1i64, -1] {
            let col = c1.col as i64 + dc;
            if col >= 0 {
                v.push((Site::new(c1.row, col as u32), Site::new(c2.row, col as u32)));
            }
        }
        v
    };
    let (d, cc) = candidates
        .into_iter()
        .find(|&(d, cc)| is_ph(d) && is_ph(cc))
        .ok_or(LayoutError::NoPlaceholder { c1, c2 })?;
    c.push(vec![Operation::two(OpKind::Swap, c1, d)]);
    c.push(vec![
        Operation::two(OpKind::Swap, c2, c1),
        Operation::two(OpKind::Swap, d, cc),
    ]);
    c.push(vec![Operation::two(OpKind::Swap, cc, c2)]);
    Ok(c)
}

/// A bare SWAP of two computational neighbours; violates the role rule
/// and spreads one fault to both qubits.
pub fn build_naive_swap() -> Circuit {
    let mut c = Circuit::empty(Granularity::Physical, 2);
    c.blocks.push(BlockKind::Data);
    c.labels[0] = Some(QubitLabel { block: 0, index: 0 });
    c.labels[1] = Some(QubitLabel { block: 0, index: 1 });
    c.push(vec![Operation::two(
        OpKind::Swap,
        Site::new(0, 0),
        Site::new(0, 1),
    )]);
    c
}

/// Transversal interaction applied while two blocks are meshed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PassGate {
    /// CNOT from one block into the other.
    Cnot { control_left: bool },
    /// CNOT followed by H on the target block.
    CnotThenH { control_left: bool },
    /// Plain block exchange.
    Exchange,
    /// T on the target after the CNOT and T-dagger before it.
    ConjugatedCnot { control_left: bool },
}

impl PassGate {
    pub fn depth(self) -> usize {
        let extra = match self {
            PassGate::Cnot { .. } | PassGate::Exchange => 0,
            PassGate::CnotThenH { .. } => 1,
            PassGate::ConjugatedCnot { .. } => 2,
        };
        2 * (BLOCK as usize - 1) + 1 + extra
    }
}

/// Meshes the blocks at `left..left+7` and `left+7..left+14`, applies the
/// pairwise gate fused with a SWAP, and unmeshes. The two blocks trade
/// places. Returns the number of layers used.
pub fn place_pass(
    c: &mut Circuit,
    t0: usize,
    left: u32,
    gate: PassGate,
) -> Result<usize, LayoutError> {
    let mut t = t0;
    for layer in mesh_layers(BLOCK) {
        for (a, b) in layer {
            c.put(t, two(OpKind::Swap, left + a, left + b))?;
        }
        t += 1;
    }
    // Pair i: left block at left+2i, right block at left+2i+1.
    let pair = |i: u32| (left + 2 * i, left + 2 * i + 1);
    let control_left = match gate {
        PassGate::Cnot { control_left }
        | PassGate::CnotThenH { control_left }
        | PassGate::ConjugatedCnot { control_left } => control_left,
        PassGate::Exchange => true,
    };
    let ctrl = |i: u32| if control_left { pair(i).0 } else { pair(i).1 };
    let tgt = |i: u32| if control_left { pair(i).1 } else { pair(i).0 };
    if let PassGate::ConjugatedCnot { .. } = gate {
        for i in 0..BLOCK {
            c.put(t, one(OpKind::Tdg, tgt(i)))?;
        }
        t += 1;
    }
    for i in 0..BLOCK {
        let op = match gate {
            PassGate::Exchange => two(OpKind::Swap, pair(i).0, pair(i).1),
            _ => two(OpKind::CnotSwap, ctrl(i), tgt(i)),
        };
        c.put(t, op)?;
    }
    t += 1;
    // After the fused swap the target sits where the control was.
    match gate {
        PassGate::CnotThenH { .. } => {
            for i in 0..BLOCK {
                c.put(t, one(OpKind::H, ctrl(i)))?;
            }
            t += 1;
        }
        PassGate::ConjugatedCnot { .. } => {
            for i in 0..BLOCK {
                c.put(t, one(OpKind::T, ctrl(i)))?;
            }
            t += 1;
        }
        _ => {}
    }
    let mut un = mesh_layers(BLOCK);
    un.reverse();
    for layer in un {
        for (a, b) in layer {
            c.put(t, two(OpKind::Swap, left + a, left + b))?;
        }
        t += 1;
    }
    debug_assert_eq!(t - t0, gate.depth());
    Ok(t - t0)
}

/// Timing of one placed syndrome extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractionTiming {
    /// First layer of the pass.
    pub pass_start: usize,
    /// First layer after the pass; the data is free from here.
    pub data_ready: usize,
    /// First layer after the ancilla is measured.
    pub ancilla_done: usize,
}

/// Layers needed on the ancilla slot before the pass can start.
pub fn ancilla_lead(kind: SyndromeKind) -> usize {
    ENCODE_DEPTH + matches!(kind, SyndromeKind::Z) as usize
}

/// Pass-through syndrome extraction of the block sitting at `data_col`
/// using a fresh ancilla at the adjacent block `anc_col`. The data ends at
/// `anc_col`; the ancilla is decoded at `data_col`. A recovery mark is
/// recorded when the data carries a block label.
pub fn place_extraction(
    c: &mut Circuit,
    kind: SyndromeKind,
    data_block: Option<u16>,
    data_col: u32,
    anc_col: u32,
    data_ready: usize,
    anc_free: usize,
) -> Result<ExtractionTiming, LayoutError> {
    if data_col.abs_diff(anc_col) != BLOCK {
        return Err(LayoutError::Violation(format!(
            "blocks at {data_col} and {anc_col} are not adjacent"
        )));
    }
    let lead = ancilla_lead(kind);
    let p = data_ready.max(anc_free + lead);
    c.place(&build_encode(), p - lead, anc_col)?;
    if kind == SyndromeKind::Z {
        for i in 0..BLOCK {
            c.put(p - 1, one(OpKind::H, anc_col + i))?;
        }
    }
    let anc_left = anc_col < data_col;
    let gate = match kind {
        SyndromeKind::X => PassGate::Cnot {
            control_left: anc_left,
        },
        SyndromeKind::Z => PassGate::CnotThenH {
            control_left: !anc_left,
        },
    };
    let left = anc_col.min(data_col);
    let len = place_pass(c, p, left, gate)?;
    let end = p + len;
    let base = c.place(&build_decode(), end, data_col)?;
    if let Some(data_block) = data_block {
        c.extractions.push(ExtractionMark {
            kind,
            data_block,
            records: std::array::from_fn(|j| base + j as u32),
            apply_after: end - 1,
            layer: end + DECODE_DEPTH - 1,
            fresh: false,
        });
    }
    Ok(ExtractionTiming {
        pass_start: p,
        data_ready: end,
        ancilla_done: end + DECODE_DEPTH,
    })
}

/// One syndrome extraction on an ideal data block (block 0) with the
/// ancilla (block 1) on the chosen side.
pub fn build_syndrome_extraction(
    kind: SyndromeKind,
    ancilla_left: bool,
) -> Result<Circuit, LayoutError> {
    let mut c = Circuit::empty(Granularity::Logical, 2 * BLOCK);
    let (anc, data) = if ancilla_left { (0, BLOCK) } else { (BLOCK, 0) };
    c.label_line(0, BlockKind::Data, data..data + BLOCK);
    c.label_line(1, BlockKind::Ancilla, anc..anc + BLOCK);
    place_extraction(&mut c, kind, Some(0), data, anc, 0, 0)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::circuit::LabelTracker;

    #[test]
    fn encode_decode_are_valid_layouts() {
        for c in [
            build_encode(),
            build_decode(),
            build_cat_prep(),
            build_cat_measure(),
        ] {
            assert!(c.check_layout().is_empty(), "{:?}", c.check_layout());
            assert!(
                c.lower().check_layout().is_empty(),
                "{:?}",
                c.lower().check_layout()
            );
        }
    }

    #[test]
    fn mesh_interleaves_in_order() {
        for k in 1..=7 {
            let m = build_mesh(k).unwrap();
            assert_eq!(m.depth(), (k - 1) as usize);
            assert_eq!(m.num_ops(), (k * (k - 1) / 2) as usize);
            let mut tr = LabelTracker::new(&m);
            for l in &m.layers {
                tr.apply(l);
            }
            for i in 0..k {
                assert_eq!(
                    tr.label_at(Site::line(2 * i)),
                    Some(QubitLabel {
                        block: 0,
                        index: i as u8
                    })
                );
                assert_eq!(
                    tr.label_at(Site::line(2 * i + 1)),
                    Some(QubitLabel {
                        block: 1,
                        index: i as u8
                    })
                );
            }
            let u = build_unmesh(k).unwrap();
            let mut tr = LabelTracker::new(&u);
            for l in &u.layers {
                tr.apply(l);
            }
            for i in 0..k {
                assert_eq!(
                    tr.label_at(Site::line(i)),
                    Some(QubitLabel {
                        block: 0,
                        index: i as u8
                    })
                );
                assert_eq!(
                    tr.label_at(Site::line(k + i)),
                    Some(QubitLabel {
                        block: 1,
                        index: i as u8
                    })
                );
            }
        }
        assert!(build_mesh(0).is_err());
    }

    #[test]
    fn physical_mesh_obeys_roles() {
        let m = build_mesh(3).unwrap().lower();
        assert!(m.check_layout().is_empty());
        assert_eq!(m.num_ops(), 12);
    }

    #[test]
    fn ses_on_every_square() {
        let roles = RoleMap::standard(2);
        let c = build_single_error_swap(&roles, Site::new(0, 0), Site::new(0, 1)).unwrap();
        assert_eq!(c.num_ops(), 4);
        assert_eq!(c.depth(), 3);
        assert!(c.check_layout().is_empty());
        // Vertical pair with placeholders to the right.
        let r = RoleMap::from_roles(
            2,
            vec![
                QubitRole::Computational,
                QubitRole::Placeholder,
                QubitRole::Computational,
                QubitRole::Placeholder,
            ],
        )
        .unwrap();
        let v = build_single_error_swap(&r, Site::new(0, 0), Site::new(1, 0)).unwrap();
        assert!(v.check_layout().is_empty());
        let mut tr = LabelTracker::new(&v);
        for l in &v.layers {
            tr.apply(l);
        }
        assert_eq!(tr.label_at(Site::new(0, 0)).unwrap().index, 1);
        assert_eq!(tr.label_at(Site::new(1, 0)).unwrap().index, 0);
    }

    #[test]
    fn ses_same_site_is_empty() {
        let roles = RoleMap::standard(2);
        let c = build_single_error_swap(&roles, Site::new(0, 1), Site::new(0, 1)).unwrap();
        assert_eq!(c.depth(), 0);
    }

    #[test]
    fn ses_rejects_bad_input() {
        let roles = RoleMap::standard(3);
        assert!(matches!(
            build_single_error_swap(&roles, Site::new(0, 0), Site::new(0, 2)),
            Err(LayoutError::NotAdjacent { .. })
        ));
        assert!(matches!(
            build_single_error_swap(&roles, Site::new(0, 0), Site::new(1, 0)),
            Err(LayoutError::NotComputational(_))
        ));
        let all = RoleMap::from_roles(2, vec![QubitRole::Computational; 4]).unwrap();
        assert!(matches!(
            build_single_error_swap(&all, Site::new(0, 0), Site::new(0, 1)),
            Err(LayoutError::NoPlaceholder { .. })
        ));
    }

    #[test]
    fn naive_swap_breaks_role_rule() {
        let v = build_naive_swap().check_layout();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, crate::lattice::circuit::ViolationKind::SwapRole);
    }

    #[test]
    fn extraction_moves_data_through() {
        for kind in [SyndromeKind::X, SyndromeKind::Z] {
            for left in [true, false] {
                let c = build_syndrome_extraction(kind, left).unwrap();
                assert!(c.check_layout().is_empty());
                let p = c.lower();
                assert!(p.check_layout().is_empty(), "{:?}", p.check_layout());
                let mut tr = LabelTracker::new(&c);
                for l in &c.layers {
                    tr.apply(l);
                }
                let start = if left { 0 } else { BLOCK };
                for i in 0..BLOCK {
                    assert_eq!(
                        tr.label_at(Site::line(start + i)),
                        Some(QubitLabel {
                            block: 0,
                            index: i as u8
                        })
                    );
                }
                assert_eq!(c.num_records, 7);
                assert_eq!(c.extractions.len(), 1);
            }
        }
    }
}
