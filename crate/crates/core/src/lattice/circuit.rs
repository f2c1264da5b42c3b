//! Time-stepped circuits on a one- or two-row qubit lattice.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Lattice coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Site {
    pub row: u8,
    pub col: u32,
}

impl Site {
    pub const fn new(row: u8, col: u32) -> Self {
        Site { row, col }
    }

    /// Logical line position `c` lives on row 0.
    pub const fn line(col: u32) -> Self {
        Site { row: 0, col }
    }

    /// Differ by one in exactly one coordinate.
    pub fn adjacent(self, other: Site) -> bool {
        let dr = self.row.abs_diff(other.row) as u32;
        let dc = self.col.abs_diff(other.col);
        dr + dc == 1
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}c{}", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QubitRole {
    Computational,
    Placeholder,
}

/// Logical circuits act on a line of logical qubits; a SWAP there is a
/// single-error SWAP and counts as one location. Physical circuits use two
/// rows and their SWAPs are elementary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Granularity {
    Logical,
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BlockKind {
    Data,
    Ancilla,
}

/// Identity of a computational qubit; travels with SWAPs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QubitLabel {
    pub block: u16,
    pub index: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ControlledGate {
    X,
    Z,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OpKind {
    Identity,
    PrepZero,
    H,
    X,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Cnot,
    Swap,
    /// CNOT followed by SWAP of the same pair, executed as one compound gate.
    CnotSwap,
    MeasureZ,
    Controlled(ControlledGate),
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Cnot | OpKind::Swap | OpKind::CnotSwap => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, OpKind::T | OpKind::Tdg)
    }

    pub fn moves_qubits(self) -> bool {
        matches!(self, OpKind::Swap | OpKind::CnotSwap)
    }

    pub fn is_single_qubit_gate(self) -> bool {
        matches!(
            self,
            OpKind::H | OpKind::X | OpKind::Z | OpKind::S | OpKind::Sdg | OpKind::Controlled(_)
        )
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            OpKind::Identity => "I",
            OpKind::PrepZero => "PREP",
            OpKind::H => "H",
            OpKind::X => "X",
            OpKind::Z => "Z",
            OpKind::S => "S",
            OpKind::Sdg => "SDG",
            OpKind::T => "T",
            OpKind::Tdg => "TDG",
            OpKind::Cnot => "CNOT",
            OpKind::Swap => "SWAP",
            OpKind::CnotSwap => "CNOTSWAP",
            OpKind::MeasureZ => "MEAS",
            OpKind::Controlled(ControlledGate::X) => "CX?",
            OpKind::Controlled(ControlledGate::Z) => "CZ?",
            OpKind::Controlled(ControlledGate::S) => "CS?",
        }
    }
}

/// One gate. `a` is the control for CNOT-type gates. `record` is the
/// measurement record written by `MeasureZ` or read by a controlled gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Operation {
    pub kind: OpKind,
    pub a: Site,
    pub b: Option<Site>,
    pub record: Option<u32>,
}

impl Operation {
    pub fn one(kind: OpKind, a: Site) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Operation {
            kind,
            a,
            b: None,
            record: None,
        }
    }

    pub fn two(kind: OpKind, a: Site, b: Site) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        Operation {
            kind,
            a,
            b: Some(b),
            record: None,
        }
    }

    pub fn measure(a: Site, record: u32) -> Self {
        Operation {
            kind: OpKind::MeasureZ,
            a,
            b: None,
            record: Some(record),
        }
    }

    pub fn controlled(g: ControlledGate, a: Site, record: u32) -> Self {
        Operation {
            kind: OpKind::Controlled(g),
            a,
            b: None,
            record: Some(record),
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> {
        std::iter::once(self.a).chain(self.b)
    }

    fn token(&self) -> String {
        let mut s = self.kind.mnemonic().to_string();
        if let Some(r) = self.record {
            s.push_str(&r.to_string());
        }
        s.push('@');
        s.push_str(&self.a.to_string());
        if let Some(b) = self.b {
            s.push(',');
            s.push_str(&b.to_string());
        }
        s
    }

    fn shifted(&self, col: u32, record_base: u32) -> Operation {
        let mv = |s: Site| Site::new(s.row, s.col + col);
        Operation {
            kind: self.kind,
            a: mv(self.a),
            b: self.b.map(mv),
            record: self.record.map(|r| r + record_base),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SyndromeKind {
    /// Ancilla controls the transversal CNOT; detects Z errors.
    X,
    /// Data controls the transversal CNOT; detects X errors.
    Z,
}

impl fmt::Display for SyndromeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyndromeKind::X => "X",
            SyndromeKind::Z => "Z",
        })
    }
}

/// A syndrome extraction. Its outcomes are known after `layer`; the
/// recovery acts on the data as it stood after `apply_after`.
/// `records[j]` is the decode outcome of ancilla line position `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExtractionMark {
    pub kind: SyndromeKind,
    pub data_block: u16,
    pub records: [u32; 7],
    pub apply_after: usize,
    pub layer: usize,
    /// The data block is a fresh `|0...0>` being prepared as `|0_L>`.
    pub fresh: bool,
}

/// Transversal readout of a data block; `records[i]` reads qubit `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReadoutMark {
    pub data_block: u16,
    pub records: [u32; 7],
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct Layer {
    pub ops: Vec<Operation>,
    /// Lasts one readout time rather than one gate time.
    pub long: bool,
}

impl Layer {
    pub fn new(ops: Vec<Operation>) -> Self {
        let long = ops.iter().any(|o| o.kind == OpKind::MeasureZ);
        Layer { ops, long }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    pub granularity: Granularity,
    pub rows: u8,
    pub width: u32,
    pub layers: Vec<Layer>,
    /// Initial label of each site, indexed by [`Circuit::site_index`].
    pub labels: Vec<Option<QubitLabel>>,
    pub blocks: Vec<BlockKind>,
    pub num_records: u32,
    pub extractions: Vec<ExtractionMark>,
    pub readouts: Vec<ReadoutMark>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("layer {layer}: site {site} used twice")]
    Conflict { layer: usize, site: Site },
    #[error("site {site} outside the {rows}x{width} lattice")]
    OutOfBounds { site: Site, rows: u8, width: u32 },
    #[error("no placeholder square next to {c1} and {c2}")]
    NoPlaceholder { c1: Site, c2: Site },
    #[error("sites {c1} and {c2} are not adjacent")]
    NotAdjacent { c1: Site, c2: Site },
    #[error("site {0} is not computational")]
    NotComputational(Site),
    #[error("invalid size: {0}")]
    Size(String),
    #[error("layout violation: {0}")]
    Violation(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    NotAdjacent,
    DoubleTouch,
    OutOfBounds,
    /// A physical SWAP must pair exactly one computational qubit with a placeholder.
    SwapRole,
    /// Non-SWAP gate applied to a placeholder.
    PlaceholderGate,
    FutureRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutViolation {
    pub layer: usize,
    pub site: Site,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for LayoutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "layer {} at {}: {:?} ({})",
            self.layer, self.site, self.kind, self.detail
        )
    }
}

/// Where every labelled qubit currently sits.
#[derive(Clone, Debug)]
pub struct LabelTracker {
    at: Vec<Option<QubitLabel>>,
    pos: BTreeMap<QubitLabel, usize>,
    width: u32,
}

impl LabelTracker {
    pub fn new(c: &Circuit) -> Self {
        let pos = c
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|l| (l, i)))
            .collect();
        LabelTracker {
            at: c.labels.clone(),
            pos,
            width: c.width,
        }
    }

    pub fn label_at(&self, s: Site) -> Option<QubitLabel> {
        self.at[s.row as usize * self.width as usize + s.col as usize]
    }

    pub fn index_of(&self, l: QubitLabel) -> Option<usize> {
        self.pos.get(&l).copied()
    }

    pub fn labels_at_index(&self) -> &[Option<QubitLabel>] {
        &self.at
    }

    /// Move qubits through one layer.
    pub fn apply(&mut self, layer: &Layer) {
        for op in &layer.ops {
            if let (true, Some(b)) = (op.kind.moves_qubits(), op.b) {
                let i = op.a.row as usize * self.width as usize + op.a.col as usize;
                let j = b.row as usize * self.width as usize + b.col as usize;
                self.at.swap(i, j);
                for k in [i, j] {
                    if let Some(l) = self.at[k] {
                        self.pos.insert(l, k);
                    }
                }
            }
        }
    }
}

/// A live qubit with no operation in some layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdleQubit {
    pub site: usize,
    pub label: QubitLabel,
}

impl Circuit {
    /// Idle live qubits per layer. Data qubits are always live; ancilla
    /// qubits are live from preparation to measurement.
    pub fn idle_qubits(&self) -> Vec<Vec<IdleQubit>> {
        let mut tracker = LabelTracker::new(self);
        let mut live: std::collections::BTreeSet<QubitLabel> = Default::default();
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let mut touched = vec![false; self.num_sites()];
            for op in &layer.ops {
                for s in op.sites() {
                    touched[self.site_index(s)] = true;
                }
            }
            let mut idle = Vec::new();
            for (i, l) in tracker.labels_at_index().iter().enumerate() {
                let Some(l) = *l else { continue };
                if touched[i] {
                    continue;
                }
                let data = self.blocks.get(l.block as usize) == Some(&BlockKind::Data);
                if data || live.contains(&l) {
                    idle.push(IdleQubit { site: i, label: l });
                }
            }
            out.push(idle);
            for op in &layer.ops {
                let Some(l) = tracker.label_at(op.a) else {
                    continue;
                };
                match op.kind {
                    OpKind::PrepZero => {
                        live.insert(l);
                    }
                    OpKind::MeasureZ => {
                        live.remove(&l);
                    }
                    _ => {}
                }
            }
            tracker.apply(layer);
        }
        out
    }

    pub fn empty(granularity: Granularity, width: u32) -> Self {
        let rows = match granularity {
            Granularity::Logical => 1,
            Granularity::Physical => 2,
        };
        Circuit {
            granularity,
            rows,
            width,
            layers: Vec::new(),
            labels: vec![None; rows as usize * width as usize],
            blocks: Vec::new(),
            num_records: 0,
            extractions: Vec::new(),
            readouts: Vec::new(),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.rows as usize * self.width as usize
    }

    pub fn site_index(&self, s: Site) -> usize {
        s.row as usize * self.width as usize + s.col as usize
    }

    pub fn site_at(&self, i: usize) -> Site {
        Site::new(
            (i / self.width as usize) as u8,
            (i % self.width as usize) as u32,
        )
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `(gate-time layers, readout-time layers)`.
    pub fn duration(&self) -> (usize, usize) {
        let long = self.layers.iter().filter(|l| l.long).count();
        (self.depth() - long, long)
    }

    pub fn num_ops(&self) -> usize {
        self.layers.iter().map(|l| l.ops.len()).sum()
    }

    pub fn ops(&self) -> impl Iterator<Item = (usize, &Operation)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(t, l)| l.ops.iter().map(move |o| (t, o)))
    }

    pub fn is_clifford(&self) -> bool {
        self.ops().all(|(_, o)| o.kind.is_clifford())
    }

    /// Label block 0 on line positions `0..n` as `kind`.
    pub fn label_line(&mut self, block: u16, kind: BlockKind, cols: impl IntoIterator<Item = u32>) {
        while self.blocks.len() <= block as usize {
            self.blocks.push(kind);
        }
        self.blocks[block as usize] = kind;
        for (i, c) in cols.into_iter().enumerate() {
            let idx = self.site_index(Site::line(c));
            self.labels[idx] = Some(QubitLabel {
                block,
                index: i as u8,
            });
        }
    }

    pub fn push(&mut self, ops: Vec<Operation>) {
        self.layers.push(Layer::new(ops));
    }

    /// Sites that hold `block` initially, ordered by label index.
    pub fn block_sites(&self, block: u16) -> Vec<usize> {
        let mut v: Vec<(u8, usize)> = self
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.filter(|l| l.block == block).map(|l| (l.index, i)))
            .collect();
        v.sort();
        v.into_iter().map(|(_, i)| i).collect()
    }

    pub fn data_blocks(&self) -> Vec<u16> {
        (0..self.blocks.len() as u16)
            .filter(|&b| self.blocks[b as usize] == BlockKind::Data)
            .collect()
    }

    /// Every rule check: bounds, adjacency, one touch per site per layer,
    /// SWAP roles on physical circuits, and causal classical control.
    pub fn check_layout(&self) -> Vec<LayoutViolation> {
        let mut out = Vec::new();
        let mut tracker = LabelTracker::new(self);
        let mut produced = 0u32;
        for (t, layer) in self.layers.iter().enumerate() {
            let mut touched = vec![false; self.num_sites()];
            let mut produced_here = 0;
            for op in &layer.ops {
                let mut bad_bounds = false;
                for s in op.sites() {
                    if s.row >= self.rows || s.col >= self.width {
                        out.push(LayoutViolation {
                            layer: t,
                            site: s,
                            kind: ViolationKind::OutOfBounds,
                            detail: format!("{} outside {}x{}", s, self.rows, self.width),
                        });
                        bad_bounds = true;
                    }
                }
                if bad_bounds {
                    continue;
                }
                for s in op.sites() {
                    let i = self.site_index(s);
                    if touched[i] {
                        out.push(LayoutViolation {
                            layer: t,
                            site: s,
                            kind: ViolationKind::DoubleTouch,
                            detail: op.token(),
                        });
                    }
                    touched[i] = true;
                }
                if let Some(b) = op.b {
                    if !op.a.adjacent(b) {
                        out.push(LayoutViolation {
                            layer: t,
                            site: op.a,
                            kind: ViolationKind::NotAdjacent,
                            detail: op.token(),
                        });
                    }
                }
                let comp = |s: Site| tracker.label_at(s).is_some();
                if self.granularity == Granularity::Physical {
                    match (op.kind, op.b) {
                        (OpKind::Swap, Some(b)) => {
                            if comp(op.a) == comp(b) {
                                out.push(LayoutViolation {
                                    layer: t,
                                    site: op.a,
                                    kind: ViolationKind::SwapRole,
                                    detail: format!(
                                        "{} pairs {} qubits",
                                        op.token(),
                                        if comp(op.a) {
                                            "two computational"
                                        } else {
                                            "two placeholder"
                                        }
                                    ),
                                });
                            }
                        }
                        _ => {
                            for s in op.sites() {
                                if !comp(s) {
                                    out.push(LayoutViolation {
                                        layer: t,
                                        site: s,
                                        kind: ViolationKind::PlaceholderGate,
                                        detail: op.token(),
                                    });
                                }
                            }
                        }
                    }
                }
                match op.kind {
                    OpKind::MeasureZ => produced_here += 1,
                    OpKind::Controlled(_) if op.record.is_none_or(|r| r >= produced) => {
                        out.push(LayoutViolation {
                            layer: t,
                            site: op.a,
                            kind: ViolationKind::FutureRecord,
                            detail: op.token(),
                        });
                    }
                    _ => {}
                }
            }
            produced += produced_here;
            tracker.apply(layer);
        }
        out
    }

    /// Line-oriented text: one layer per line, tokens ordered by site.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        for layer in &self.layers {
            let mut ops: Vec<&Operation> = layer.ops.iter().collect();
            ops.sort_by_key(|o| (o.a.min(o.b.unwrap_or(o.a)), o.a));
            let toks: Vec<String> = ops.iter().map(|o| o.token()).collect();
            s.push_str(&toks.join(" "));
            s.push('\n');
        }
        s
    }

    /// Replace each single-error SWAP of a logical circuit by four physical
    /// SWAPs through the placeholder row, spread over three layers.
    pub fn lower(&self) -> Circuit {
        assert_eq!(
            self.granularity,
            Granularity::Logical,
            "only logical circuits lower"
        );
        let mut out = Circuit::empty(Granularity::Physical, self.width);
        out.blocks = self.blocks.clone();
        out.num_records = self.num_records;
        out.readouts = self.readouts.clone();
        for (i, l) in self.labels.iter().enumerate() {
            out.labels[i] = *l;
        }
        let mut map = Vec::with_capacity(self.layers.len() + 1);
        for layer in &self.layers {
            map.push(out.layers.len());
            let mut first = Vec::new();
            let mut second = Vec::new();
            let mut third = Vec::new();
            for op in &layer.ops {
                if op.kind == OpKind::Swap {
                    let (p, q) = (op.a.min(op.b.unwrap()), op.a.max(op.b.unwrap()));
                    let (c, d) = (Site::new(1, p.col), Site::new(1, q.col));
                    let sw = |x, y| Operation::two(OpKind::Swap, x, y);
                    first.push(sw(p, c));
                    second.push(sw(q, p));
                    second.push(sw(c, d));
                    third.push(sw(d, q));
                } else {
                    first.push(*op);
                }
            }
            let long = layer.long;
            out.layers.push(Layer { ops: first, long });
            if !second.is_empty() {
                out.layers.push(Layer {
                    ops: second,
                    long: false,
                });
                out.layers.push(Layer {
                    ops: third,
                    long: false,
                });
            }
        }
        map.push(out.layers.len());
        // Recovery is applied after the last sub-layer of the marked layer.
        out.extractions = self
            .extractions
            .iter()
            .map(|m| ExtractionMark {
                layer: map[m.layer + 1] - 1,
                apply_after: map[m.apply_after + 1] - 1,
                ..*m
            })
            .collect();
        out
    }

    /// Append idle layers: `gate` of gate duration and `long` of readout duration.
    pub fn pad(&mut self, gate: usize, long: usize) {
        for _ in 0..gate {
            self.layers.push(Layer {
                ops: Vec::new(),
                long: false,
            });
        }
        for _ in 0..long {
            self.layers.push(Layer {
                ops: Vec::new(),
                long: true,
            });
        }
    }

    /// Copy `sub`'s operations into this circuit starting at layer `at`
    /// and shifted right by `col`. Returns the record offset applied.
    pub fn place(&mut self, sub: &Circuit, at: usize, col: u32) -> Result<u32, LayoutError> {
        let base = self.num_records;
        for (t, layer) in sub.layers.iter().enumerate() {
            for op in &layer.ops {
                self.put(at + t, op.shifted(col, base))?;
            }
        }
        for m in &sub.extractions {
            let mut m = *m;
            m.layer += at;
            m.apply_after += at;
            m.records = m.records.map(|r| r + base);
            self.extractions.push(m);
        }
        for m in &sub.readouts {
            let mut m = *m;
            m.records = m.records.map(|r| r + base);
            self.readouts.push(m);
        }
        self.num_records += sub.num_records;
        Ok(base)
    }

    /// Add one operation at layer `t`, growing the circuit as needed.
    pub fn put(&mut self, t: usize, op: Operation) -> Result<(), LayoutError> {
        while self.layers.len() <= t {
            self.layers.push(Layer::default());
        }
        for s in op.sites() {
            if s.row >= self.rows || s.col >= self.width {
                return Err(LayoutError::OutOfBounds {
                    site: s,
                    rows: self.rows,
                    width: self.width,
                });
            }
            if self.layers[t].ops.iter().any(|o| o.sites().any(|x| x == s)) {
                return Err(LayoutError::Conflict { layer: t, site: s });
            }
        }
        if op.kind == OpKind::MeasureZ {
            self.layers[t].long = true;
        }
        self.layers[t].ops.push(op);
        Ok(())
    }

    /// Measure line positions `cols` at layer `t`, records in column order.
    pub fn put_measurements(&mut self, t: usize, cols: &[u32]) -> Result<Vec<u32>, LayoutError> {
        let mut recs = Vec::new();
        for &c in cols {
            let r = self.num_records;
            self.num_records += 1;
            self.put(t, Operation::measure(Site::line(c), r))?;
            recs.push(r);
        }
        Ok(recs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency() {
        assert!(Site::new(0, 3).adjacent(Site::new(0, 4)));
        assert!(Site::new(0, 3).adjacent(Site::new(1, 3)));
        assert!(!Site::new(0, 0).adjacent(Site::new(1, 1)));
        assert!(!Site::new(0, 3).adjacent(Site::new(0, 3)));
        assert!(!Site::new(0, 3).adjacent(Site::new(0, 5)));
    }

    #[test]
    fn diagonal_gate_flagged() {
        let mut c = Circuit::empty(Granularity::Physical, 2);
        c.labels[0] = Some(QubitLabel { block: 0, index: 0 });
        c.labels[3] = Some(QubitLabel { block: 0, index: 1 });
        c.blocks.push(BlockKind::Data);
        c.push(vec![Operation::two(
            OpKind::Cnot,
            Site::new(0, 0),
            Site::new(1, 1),
        )]);
        let v = c.check_layout();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NotAdjacent);
    }

    #[test]
    fn double_touch_flagged() {
        let mut c = Circuit::empty(Granularity::Logical, 3);
        c.label_line(0, BlockKind::Data, 0..3);
        c.push(vec![
            Operation::one(OpKind::H, Site::line(1)),
            Operation::two(OpKind::Cnot, Site::line(1), Site::line(2)),
        ]);
        assert!(c
            .check_layout()
            .iter()
            .any(|v| v.kind == ViolationKind::DoubleTouch));
    }

    #[test]
    fn controlled_needs_earlier_record() {
        let mut c = Circuit::empty(Granularity::Logical, 2);
        c.label_line(0, BlockKind::Data, 0..2);
        c.push(vec![
            Operation::measure(Site::line(0), 0),
            Operation::controlled(ControlledGate::X, Site::line(1), 0),
        ]);
        c.num_records = 1;
        assert!(c
            .check_layout()
            .iter()
            .any(|v| v.kind == ViolationKind::FutureRecord));
        let mut ok = Circuit::empty(Granularity::Logical, 2);
        ok.label_line(0, BlockKind::Data, 0..2);
        ok.push(vec![Operation::measure(Site::line(0), 0)]);
        ok.push(vec![Operation::controlled(
            ControlledGate::X,
            Site::line(1),
            0,
        )]);
        ok.num_records = 1;
        assert!(ok.check_layout().is_empty());
    }

    #[test]
    fn lowering_a_single_error_swap() {
        let mut c = Circuit::empty(Granularity::Logical, 2);
        c.label_line(0, BlockKind::Data, 0..2);
        c.push(vec![Operation::two(
            OpKind::Swap,
            Site::line(0),
            Site::line(1),
        )]);
        let p = c.lower();
        assert_eq!(p.depth(), 3);
        assert_eq!(p.num_ops(), 4);
        assert!(p.check_layout().is_empty(), "{:?}", p.check_layout());
        let mut tr = LabelTracker::new(&p);
        for l in &p.layers {
            tr.apply(l);
        }
        assert_eq!(
            tr.label_at(Site::new(0, 0)),
            Some(QubitLabel { block: 0, index: 1 })
        );
        assert_eq!(
            tr.label_at(Site::new(0, 1)),
            Some(QubitLabel { block: 0, index: 0 })
        );
    }

    #[test]
    fn export_is_sorted() {
        let mut c = Circuit::empty(Granularity::Logical, 3);
        c.push(vec![
            Operation::one(OpKind::H, Site::line(2)),
            Operation::two(OpKind::Cnot, Site::line(1), Site::line(0)),
        ]);
        c.put_measurements(1, &[0]).unwrap();
        assert_eq!(c.export_text(), "CNOT@r0c1,r0c0 H@r0c2\nMEAS0@r0c0\n");
    }

    #[test]
    fn put_rejects_conflicts() {
        let mut c = Circuit::empty(Granularity::Logical, 2);
        c.put(0, Operation::one(OpKind::H, Site::line(0))).unwrap();
        assert!(matches!(
            c.put(0, Operation::one(OpKind::X, Site::line(0))),
            Err(LayoutError::Conflict { .. })
        ));
        assert!(matches!(
            c.put(0, Operation::one(OpKind::X, Site::line(5))),
            Err(LayoutError::OutOfBounds { .. })
        ));
    }
}
