//! Exhaustive single-fault verification with JSON reports.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::faults::Prepared;
use super::frame::{Frame, FrameSimulator};
use super::recovery::{
    build_recovery_table, readout_flip_weight, reference_gauges, Conflict, RecoveryBook,
    TrainingGadget, Weighting,
};
use super::VerifyError;
use crate::census::Gadget;
use crate::lattice::{
    build_encode, build_mesh, build_naive_swap, build_single_error_swap, build_syndrome_extraction,
    natural_exrec, Circuit, Granularity, LabelTracker, RoleMap, Site, SyndromeKind, BLOCK,
};

/// Circuits the verifier knows how to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    SwapRoutine,
    EncodeDecode,
    Mesh,
    MemoryExrec,
    SwapExrec,
    ReadoutExrec,
    NaiveSwap,
}

impl Component {
    pub const ALL: [Component; 7] = [
        Component::SwapRoutine,
        Component::EncodeDecode,
        Component::Mesh,
        Component::MemoryExrec,
        Component::SwapExrec,
        Component::ReadoutExrec,
        Component::NaiveSwap,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Component::SwapRoutine => "swap-routine",
            Component::EncodeDecode => "encode-decode",
            Component::Mesh => "mesh",
            Component::MemoryExrec => "memory-exrec",
            Component::SwapExrec => "swap-exrec",
            Component::ReadoutExrec => "readout-exrec",
            Component::NaiveSwap => "naive-swap",
        }
    }

    /// Whether a correct construction passes. The naive swap is a negative control.
    pub fn expected_pass(self) -> bool {
        self != Component::NaiveSwap
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Component {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Component::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| format!("unknown component '{s}'"))
    }
}

/// How the residual error of a run is weighed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// Qubits in error per labelled block, no code.
    BlockWeight,
    /// Weight of each final data block, plus readout flips modulo the
    /// classical code.
    Code(Weighting),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaultRecord {
    pub step: usize,
    pub site: String,
    pub fault: String,
    pub residual_weight: u8,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaultSummary {
    pub component: String,
    pub granularity: Granularity,
    pub faults: usize,
    pub failure_count: usize,
    pub max_weight: u8,
    /// Some fault reaches the weight bound of one.
    pub tight: bool,
    pub conflicts: usize,
    pub unknown_patterns: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaultReport {
    pub summary: FaultSummary,
    pub conflicts: Vec<Conflict>,
    pub records: Vec<FaultRecord>,
}

impl FaultReport {
    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &FaultRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Merge the reports of several circuits that make up one component.
    fn combine(
        component: &str,
        granularity: Granularity,
        parts: Vec<FaultReport>,
        conflicts: Vec<Conflict>,
    ) -> Self {
        let mut records = Vec::new();
        let mut unknown = 0;
        for p in parts {
            unknown += p.summary.unknown_patterns;
            records.extend(p.records);
        }
        FaultReport::new(component, granularity, records, conflicts, unknown)
    }

    fn new(
        component: &str,
        granularity: Granularity,
        records: Vec<FaultRecord>,
        conflicts: Vec<Conflict>,
        unknown_patterns: usize,
    ) -> Self {
        let max_weight = records.iter().map(|r| r.residual_weight).max().unwrap_or(0);
        let failure_count = records.iter().filter(|r| !r.pass).count();
        FaultReport {
            summary: FaultSummary {
                component: component.to_string(),
                granularity,
                faults: records.len(),
                failure_count,
                max_weight,
                tight: max_weight == 1,
                conflicts: conflicts.len(),
                unknown_patterns,
                pass: failure_count == 0 && conflicts.is_empty() && unknown_patterns == 0,
            },
            conflicts,
            records,
        }
    }
}

fn final_block_sites(c: &Circuit) -> Vec<Vec<usize>> {
    let mut tr = LabelTracker::new(c);
    for l in &c.layers {
        tr.apply(l);
    }
    let at = tr.labels_at_index();
    (0..c.blocks.len() as u16)
        .map(|b| {
            (0..at.len())
                .filter(|&i| at[i].is_some_and(|l| l.block == b))
                .collect()
        })
        .collect()
}

fn residual(
    c: &Circuit,
    sim: &FrameSimulator,
    blocks: &[Vec<usize>],
    criterion: Criterion,
    f: &Frame,
) -> u8 {
    match criterion {
        Criterion::BlockWeight => blocks
            .iter()
            .map(|sites| sites.iter().filter(|&&s| (f.x | f.z) >> s & 1 == 1).count() as u8)
            .max()
            .unwrap_or(0),
        Criterion::Code(w) => {
            let data = sim
                .final_sites()
                .iter()
                .map(|(_, s)| w.weigh(f.restrict(s)));
            let reads = c.readouts.iter().map(|m| {
                let mut flips = 0u8;
                for (j, &r) in m.records.iter().enumerate() {
                    flips |= (f.flipped(r) as u8) << j;
                }
                readout_flip_weight(flips)
            });
            data.chain(reads).max().unwrap_or(0)
        }
    }
}

/// Most random fault-free outcomes a circuit may have; every fault is
/// run on each of the `2^k` branches.
pub const MAX_GAUGES: usize = 12;

/// Inject every single fault of `p` (including idle faults when `idle`)
/// on every branch of the random fault-free outcomes, apply recoveries
/// from `book` as syndromes arrive and weigh the final residual. A fault
/// passes when its worst branch has weight at most one.
pub fn verify_single_fault_tolerance(
    component: &str,
    p: &Prepared,
    criterion: Criterion,
    book: Option<&RecoveryBook>,
    idle: bool,
) -> Result<FaultReport, VerifyError> {
    let c = &p.circuit;
    let sim = FrameSimulator::new(c)?;
    let gauges = reference_gauges(c)?;
    if gauges.len() > MAX_GAUGES {
        return Err(VerifyError::TooManyGauges(gauges.len()));
    }
    let gauge_frames: Vec<(usize, Frame)> = gauges
        .iter()
        .map(|g| (g.layer, sim.gauge_frame(g)))
        .collect();
    let blocks = final_block_sites(c);
    let faults = p.faults(idle);
    let runs: Vec<(FaultRecord, bool)> = faults
        .par_iter()
        .map(|fault| {
            let ff = fault.frame(c.num_records);
            let mut worst = 0u8;
            let mut unknown = false;
            for mask in 0..1usize << gauge_frames.len() {
                let mut events: Vec<(usize, &Frame)> = vec![(fault.layer, &ff)];
                events.extend(
                    gauge_frames
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, (l, f))| (*l, f)),
                );
                events.sort_by_key(|e| e.0);
                let mut f = sim.blank();
                sim.run_with(&mut f, 0, &events, book);
                worst = worst.max(residual(c, &sim, &blocks, criterion, &f));
                unknown |= f.unknown_patterns > 0;
            }
            let site = if fault.paulis.is_empty() {
                fault
                    .flip
                    .map(|r| format!("record {r}"))
                    .unwrap_or_default()
            } else {
                fault
                    .paulis
                    .iter()
                    .map(|&(s, _)| c.site_at(s).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let label = match fault.flip {
                Some(_) => "flip".to_string(),
                None => fault.paulis.iter().map(|&(_, p)| p.symbol()).collect(),
            };
            (
                FaultRecord {
                    step: fault.layer,
                    site,
                    fault: label,
                    residual_weight: worst,
                    pass: worst <= 1,
                },
                unknown,
            )
        })
        .collect();
    let unknown = runs.iter().filter(|r| r.1).count();
    let records = runs.into_iter().map(|r| r.0).collect();
    Ok(FaultReport::new(
        component,
        c.granularity,
        records,
        Vec::new(),
        unknown,
    ))
}

/// `c` (logical) with every data block first encoded ideally, at the
/// requested granularity.
pub fn prepare(c: &Circuit, granularity: Granularity) -> Result<Prepared, VerifyError> {
    let mut prefix = Circuit::empty(Granularity::Logical, c.width);
    prefix.labels = c.labels.clone();
    prefix.blocks = c.blocks.clone();
    for b in c.data_blocks() {
        let sites = c.block_sites(b);
        if sites.len() != BLOCK as usize {
            return Err(VerifyError::MissingBlock(b));
        }
        prefix.place(&build_encode(), 0, sites[0] as u32)?;
    }
    let mut full = prefix.clone();
    full.place(c, prefix.depth(), 0)?;
    Ok(match granularity {
        Granularity::Logical => Prepared {
            start: prefix.depth(),
            circuit: full,
        },
        Granularity::Physical => Prepared {
            start: prefix.lower().depth(),
            circuit: full.lower(),
        },
    })
}

/// Standalone extraction gadgets of `kind` with the ancilla on either
/// side, acting on an encoded data block.
pub fn extraction_gadgets(
    kind: SyndromeKind,
    granularity: Granularity,
) -> Result<Vec<TrainingGadget>, VerifyError> {
    let mut out = Vec::new();
    for left in [false, true] {
        let g = build_syndrome_extraction(kind, left)?;
        out.push(TrainingGadget {
            prepared: prepare(&g, granularity)?,
            weighting: Weighting::Full,
        });
    }
    Ok(out)
}

/// X extractions on a raw `|0...0>` block, the way a fresh `|0_L>` is made.
pub fn preparation_gadgets(granularity: Granularity) -> Result<Vec<TrainingGadget>, VerifyError> {
    let mut out = Vec::new();
    for left in [false, true] {
        let mut g = build_syndrome_extraction(SyndromeKind::X, left)?;
        g.extractions[0].fresh = true;
        out.push(TrainingGadget {
            prepared: Prepared {
                circuit: at(granularity, g),
                start: 0,
            },
            weighting: Weighting::SplitZeroState,
        });
    }
    Ok(out)
}

fn at(granularity: Granularity, c: Circuit) -> Circuit {
    match granularity {
        Granularity::Logical => c,
        Granularity::Physical => c.lower(),
    }
}

/// Recovery tables learned from the standalone extraction gadgets.
pub fn recovery_book(
    granularity: Granularity,
    idle: bool,
) -> Result<(RecoveryBook, Vec<Conflict>), VerifyError> {
    let (x, mut conflicts) = build_recovery_table(
        SyndromeKind::X,
        &extraction_gadgets(SyndromeKind::X, granularity)?,
        idle,
    )?;
    let (z, cz) = build_recovery_table(
        SyndromeKind::Z,
        &extraction_gadgets(SyndromeKind::Z, granularity)?,
        idle,
    )?;
    let (prep, cp) =
        build_recovery_table(SyndromeKind::X, &preparation_gadgets(granularity)?, idle)?;
    conflicts.extend(cz);
    conflicts.extend(cp);
    Ok((RecoveryBook { x, z, prep }, conflicts))
}

/// Builds and verifies `component` at `granularity`. Routing circuits
/// exist only at physical granularity and ignore the argument.
pub fn verify_component(
    component: Component,
    granularity: Granularity,
) -> Result<FaultReport, VerifyError> {
    let key = component.key();
    let exrec = |g: Gadget| -> Result<FaultReport, VerifyError> {
        let (book, conflicts) = recovery_book(granularity, true)?;
        let p = prepare(&natural_exrec(g)?, granularity)?;
        let criterion = Criterion::Code(match g {
            Gadget::Readout => Weighting::ZeroState,
            _ => Weighting::Full,
        });
        let r = verify_single_fault_tolerance(key, &p, criterion, Some(&book), true)?;
        Ok(FaultReport::combine(key, granularity, vec![r], conflicts))
    };
    let routing = |circuit: Circuit| {
        verify_single_fault_tolerance(
            key,
            &Prepared { circuit, start: 0 },
            Criterion::BlockWeight,
            None,
            false,
        )
    };
    match component {
        Component::SwapRoutine => routing(build_single_error_swap(
            &RoleMap::standard(2),
            Site::new(0, 0),
            Site::new(0, 1),
        )?),
        Component::NaiveSwap => routing(build_naive_swap()),
        Component::Mesh => routing(build_mesh(BLOCK)?.lower()),
        Component::EncodeDecode => {
            let (book, conflicts) = recovery_book(granularity, true)?;
            let mut parts = Vec::new();
            let mut gadgets = extraction_gadgets(SyndromeKind::X, granularity)?;
            gadgets.extend(extraction_gadgets(SyndromeKind::Z, granularity)?);
            gadgets.extend(preparation_gadgets(granularity)?);
            for g in gadgets {
                let crit = Criterion::Code(g.weighting);
                parts.push(verify_single_fault_tolerance(
                    key,
                    &g.prepared,
                    crit,
                    Some(&book),
                    true,
                )?);
            }
            Ok(FaultReport::combine(key, granularity, parts, conflicts))
        }
        Component::MemoryExrec => exrec(Gadget::Memory),
        Component::SwapExrec => exrec(Gadget::Swap),
        Component::ReadoutExrec => exrec(Gadget::Readout),
    }
}
