//! Level-n pseudothresholds, the asymptotic threshold, failure curves and
//! parameter sweeps.
//!
//! The level-n threshold is the base rate `p` at which the level-n failure
//! probability of the reference gadget (the T gadget by default) equals its
//! level-1 failure probability: `g(p) = p_n(p) - p_1(p) = 0`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::census::{CensusSet, Gadget, LocationKind};
use crate::failure_model::{level1_failures, next_level, ModelError, PhysicalSetting};

/// The ratio triple of a physical setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ratios {
    pub rm: f64,
    pub rr: f64,
    pub tr: f64,
}

impl Ratios {
    pub const fn new(rm: f64, rr: f64, tr: f64) -> Self {
        Ratios { rm, rr, tr }
    }

    pub fn setting(&self, p0s: f64) -> Result<PhysicalSetting, ModelError> {
        PhysicalSetting::new(p0s, self.rm, self.rr, self.tr)
    }

    pub fn with(&self, param: Param, value: f64) -> Ratios {
        let mut r = *self;
        match param {
            Param::Rm => r.rm = value,
            Param::Rr => r.rr = value,
            Param::Tr => r.tr = value,
        }
        r
    }
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios::new(0.1, 1.0, 10.0)
    }
}

/// A sweepable ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Rm,
    Rr,
    Tr,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Rm => "rm",
            Param::Rr => "rr",
            Param::Tr => "tr",
        }
    }

    /// Default sweep range.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            Param::Rm => (1e-3, 1.0),
            Param::Rr => (1e-1, 1e2),
            Param::Tr => (1.0, 1e3),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rm" => Ok(Param::Rm),
            "rr" => Ok(Param::Rr),
            "tr" => Ok(Param::Tr),
            _ => Err(format!("unknown parameter {s:?}; expected rm, rr or tr")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub lo: f64,
    pub hi: f64,
    pub scan_points: usize,
    pub rel_tol: f64,
    pub max_iterations: u32,
    pub asymptotic_level: u32,
    /// Gadget whose level-n and level-1 failure rates are compared.
    pub reference: Gadget,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lo: 1e-9,
            hi: 1e-3,
            scan_points: 200,
            rel_tol: 1e-10,
            max_iterations: 200,
            asymptotic_level: 100,
            reference: LocationKind::TGate,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("no threshold in range [{lo:e}, {hi:e}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("level must be at least 2, got {0}")]
    Level(u32),
    #[error("invalid range: {0}")]
    Range(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub level: u32,
    pub ratios: Ratios,
    pub threshold: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    /// `|p_n - p_1|` at the returned point.
    pub residual: f64,
    /// Reference-gadget level-1 failure probability at the returned point.
    pub reference_failure: f64,
    /// Both the bracket-width and residual criteria were met.
    pub converged: bool,
    /// Number of sign changes found by the scan; above 1 means several roots.
    pub sign_changes: usize,
}

impl ThresholdResult {
    pub fn multiple_roots(&self) -> bool {
        self.sign_changes > 1
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else if i == 0 {
                lo
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `(p_n - p_1, p_1)` for the reference gadget.
pub fn gap(
    ratios: &Ratios,
    n: u32,
    censuses: &CensusSet,
    reference: Gadget,
    p: f64,
) -> Result<(f64, f64), ModelError> {
    let v1 = level1_failures(&ratios.setting(p)?, censuses)?;
    let mut v = v1;
    while v.level < n {
        v = next_level(&v, censuses)?;
    }
    Ok((v.get(reference) - v1.get(reference), v1.get(reference)))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn level_threshold(
    ratios: Ratios,
    n: u32,
    censuses: &CensusSet,
) -> Result<ThresholdResult, SolverError> {
    level_threshold_with(ratios, n, censuses, &SolverConfig::default())
}

/// Solve `p_n(p) = p_1(p)` by a log-spaced sign scan followed by bisection.
pub fn level_threshold_with(
    ratios: Ratios,
    n: u32,
    censuses: &CensusSet,
    cfg: &SolverConfig,
) -> Result<ThresholdResult, SolverError> {
    if n < 2 {
        return Err(SolverError::Level(n));
    }
    if !(cfg.lo > 0.0 && cfg.hi > cfg.lo && cfg.scan_points >= 2) {
        return Err(SolverError::Range(format!(
            "bracket [{}, {}] with {} points",
            cfg.lo, cfg.hi, cfg.scan_points
        )));
    }
    ratios.setting(0.0)?;
    // Past this point p_m or p_r would exceed one.
    let hi = cfg.hi.min(1.0 / ratios.rm.max(ratios.rr).max(1.0));
    if hi <= cfg.lo {
        return Err(SolverError::NoRoot { lo: cfg.lo, hi });
    }
    let g = |p: f64| gap(&ratios, n, censuses, cfg.reference, p);
    let grid = log_grid(cfg.lo, hi, cfg.scan_points);
    let mut brackets = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for &p in &grid {
        let s = sign(g(p)?.0);
        if s == 0 {
            continue;
        }
        if let Some((q, t)) = last {
            if t != s {
                brackets.push((q, p, t));
            }
        }
        last = Some((p, s));
    }
    let Some(&(mut a, mut b, sa)) = brackets.first() else {
        return Err(SolverError::NoRoot { lo: cfg.lo, hi });
    };
    let mut iterations = 0;
    let mut converged = false;
    let mut mid = 0.5 * (a + b);
    let (mut gm, mut p1) = g(mid)?;
    while iterations < cfg.max_iterations {
        iterations += 1;
        if (b - a) <= cfg.rel_tol * mid && gm.abs() <= cfg.rel_tol * p1 {
            converged = true;
            break;
        }
        match sign(gm) {
            0 => {
                converged = true;
                break;
            }
            s if s == sa => a = mid,
            _ => b = mid,
        }
        let next = 0.5 * (a + b);
        if !(next > a && next < b) {
            break;
        }
        mid = next;
        (gm, p1) = g(mid)?;
    }
    Ok(ThresholdResult {
        level: n,
        ratios,
        threshold: mid,
        bracket: (a, b),
        iterations,
        residual: gm.abs(),
        reference_failure: p1,
        converged,
        sign_changes: brackets.len(),
    })
}

/// Level-`asymptotic_level` threshold (level 100 by default).
pub fn asymptotic_threshold(
    ratios: Ratios,
    censuses: &CensusSet,
) -> Result<ThresholdResult, SolverError> {
    let cfg = SolverConfig::default();
    level_threshold_with(ratios, cfg.asymptotic_level, censuses, &cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub p0s: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureCurve {
    pub ratios: Ratios,
    pub levels: Vec<u32>,
    pub gadget: Gadget,
    pub rows: Vec<CurveRow>,
}

/// Reference-gadget failure probability at each requested level for each grid point.
pub fn failure_curve(
    ratios: Ratios,
    levels: &[u32],
    grid: &[f64],
    censuses: &CensusSet,
) -> Result<FailureCurve, SolverError> {
    failure_curve_for(ratios, levels, grid, censuses, LocationKind::TGate)
}

pub fn failure_curve_for(
    ratios: Ratios,
    levels: &[u32],
    grid: &[f64],
    censuses: &CensusSet,
    gadget: Gadget,
) -> Result<FailureCurve, SolverError> {
    if levels.is_empty() || levels.contains(&0) {
        return Err(SolverError::Range(
            "levels must be nonempty and at least 1".into(),
        ));
    }
    if let Some(p) = grid.iter().find(|&&p| !(p > 0.0 && p <= 1e-2)) {
        return Err(SolverError::Range(format!(
            "grid value {p} outside (0, 1e-2]"
        )));
    }
    let top = *levels.iter().max().unwrap();
    let rows = grid
        .par_iter()
        .map(|&p| {
            let mut v = level1_failures(&ratios.setting(p)?, censuses)?;
            let mut by_level = vec![v.get(gadget)];
            while v.level < top {
                v = next_level(&v, censuses)?;
                by_level.push(v.get(gadget));
            }
            Ok(CurveRow {
                p0s: p,
                values: levels.iter().map(|&l| by_level[l as usize - 1]).collect(),
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(FailureCurve {
        ratios,
        levels: levels.to_vec(),
        gadget,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub result: Result<ThresholdResult, SolverError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub varied: Param,
    pub fixed: Ratios,
    pub level: u32,
    pub rows: Vec<SweepRow>,
}

/// Thresholds along a log-spaced grid of one ratio, the others held fixed.
/// Points are solved in parallel; a failing point is recorded in its row.
pub fn sweep(
    varied: Param,
    range: (f64, f64),
    points: usize,
    fixed: Ratios,
    n: u32,
    censuses: &CensusSet,
) -> Result<SweepTable, SolverError> {
    sweep_with(
        varied,
        range,
        points,
        fixed,
        n,
        censuses,
        &SolverConfig::default(),
    )
}

pub fn sweep_with(
    varied: Param,
    range: (f64, f64),
    points: usize,
    fixed: Ratios,
    n: u32,
    censuses: &CensusSet,
    cfg: &SolverConfig,
) -> Result<SweepTable, SolverError> {
    let (lo, hi) = range;
    if points < 2 {
        return Err(SolverError::Range(format!(
            "points must be at least 2, got {points}"
        )));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(SolverError::Range(format!(
            "need 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(SolverError::Level(n));
    }
    let rows = log_grid(lo, hi, points)
        .into_par_iter()
        .map(|value| SweepRow {
            value,
            result: level_threshold_with(fixed.with(varied, value), n, censuses, cfg),
        })
        .collect();
    Ok(SweepTable {
        varied,
        fixed,
        level: n,
        rows,
    })
}
