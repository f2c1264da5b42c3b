//! Location censuses of extended rectangles.
//!
//! A census lists, for each gadget, how many locations of each kind its
//! extended rectangle contains and how deep its rectangle is. Level-1 counts
//! may depend affinely on the readout-time ratio `t_r`; logical-level counts
//! are constants shared by every level `n >= 2`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Kind of a circuit location. Also indexes the four gadgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocationKind {
    Memory,
    Swap,
    #[serde(rename = "tgate")]
    TGate,
    Readout,
}

/// Gadgets share the location-kind tags.
pub type Gadget = LocationKind;

impl LocationKind {
    pub const ALL: [LocationKind; 4] = [
        LocationKind::Memory,
        LocationKind::Swap,
        LocationKind::TGate,
        LocationKind::Readout,
    ];

    pub fn index(self) -> usize {
        match self {
            LocationKind::Memory => 0,
            LocationKind::Swap => 1,
            LocationKind::TGate => 2,
            LocationKind::Readout => 3,
        }
    }

    /// Schema key: `memory`, `swap`, `tgate`, `readout`.
    pub fn key(self) -> &'static str {
        match self {
            LocationKind::Memory => "memory",
            LocationKind::Swap => "swap",
            LocationKind::TGate => "tgate",
            LocationKind::Readout => "readout",
        }
    }

    /// One-letter symbol: m, S, T, r.
    pub fn symbol(self) -> &'static str {
        match self {
            LocationKind::Memory => "m",
            LocationKind::Swap => "S",
            LocationKind::TGate => "T",
            LocationKind::Readout => "r",
        }
    }

    pub fn from_key(s: &str) -> Option<Self> {
        match s {
            "memory" | "m" => Some(LocationKind::Memory),
            "swap" | "S" | "s" => Some(LocationKind::Swap),
            "tgate" | "T" | "t" => Some(LocationKind::TGate),
            "readout" | "r" => Some(LocationKind::Readout),
            _ => None,
        }
    }
}

impl fmt::Display for LocationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Fixed-size map keyed by [`LocationKind`].
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PerKind<T>(pub [T; 4]);

impl<T> PerKind<T> {
    pub fn from_fn(mut f: impl FnMut(LocationKind) -> T) -> Self {
        PerKind(LocationKind::ALL.map(&mut f))
    }
}

impl<T: Copy> PerKind<T> {
    pub fn splat(v: T) -> Self {
        PerKind([v; 4])
    }

    pub fn iter(&self) -> impl Iterator<Item = (LocationKind, T)> + '_ {
        LocationKind::ALL
            .iter()
            .map(move |&k| (k, self.0[k.index()]))
    }
}

impl<T> std::ops::Index<LocationKind> for PerKind<T> {
    type Output = T;
    fn index(&self, k: LocationKind) -> &T {
        &self.0[k.index()]
    }
}

impl<T> std::ops::IndexMut<LocationKind> for PerKind<T> {
    fn index_mut(&mut self, k: LocationKind) -> &mut T {
        &mut self.0[k.index()]
    }
}

/// `base + slope * t_r`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineCount {
    pub base: f64,
    pub slope: f64,
}

impl AffineCount {
    pub const ZERO: AffineCount = AffineCount {
        base: 0.0,
        slope: 0.0,
    };

    pub const fn new(base: f64, slope: f64) -> Self {
        AffineCount { base, slope }
    }

    pub const fn constant(base: f64) -> Self {
        AffineCount { base, slope: 0.0 }
    }

    pub fn at(&self, tr: f64) -> f64 {
        self.base + self.slope * tr
    }

    pub fn scale(&self, k: f64) -> Self {
        AffineCount::new(self.base * k, self.slope * k)
    }

    fn is_nonnegative(&self) -> bool {
        self.base >= 0.0 && self.slope >= 0.0
    }
}

impl fmt::Display for AffineCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slope == 0.0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}+{}t_r", self.base, self.slope)
        }
    }
}

/// One row of a census table.
#[derive(Clone, Debug, PartialEq)]
pub struct ExRecCensus {
    pub gadget: Gadget,
    /// Absent kinds count as zero.
    pub counts: BTreeMap<LocationKind, AffineCount>,
    pub depth: AffineCount,
}

impl ExRecCensus {
    pub fn new(gadget: Gadget, counts: &[(LocationKind, AffineCount)], depth: AffineCount) -> Self {
        ExRecCensus {
            gadget,
            counts: counts.iter().copied().collect(),
            depth,
        }
    }

    pub fn count(&self, kind: LocationKind) -> AffineCount {
        self.counts.get(&kind).copied().unwrap_or(AffineCount::ZERO)
    }

    /// Counts of every kind evaluated at `tr`.
    pub fn counts_at(&self, tr: f64) -> PerKind<f64> {
        PerKind::from_fn(|k| self.count(k).at(tr))
    }
}

/// `base + slope * t_r` for `kind`, or 0 when the kind is absent.
pub fn count_at(census: &ExRecCensus, kind: LocationKind, tr: f64) -> f64 {
    census.count(kind).at(tr)
}

/// Level-1 and logical-level rows for every gadget.
#[derive(Clone, Debug, PartialEq)]
pub struct CensusSet {
    pub level1: BTreeMap<Gadget, ExRecCensus>,
    pub leveln: BTreeMap<Gadget, ExRecCensus>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusLevel {
    #[serde(rename = "level1")]
    Level1,
    #[serde(rename = "leveln")]
    LevelN,
}

impl CensusLevel {
    pub fn key(self) -> &'static str {
        match self {
            CensusLevel::Level1 => "level1",
            CensusLevel::LevelN => "leveln",
        }
    }
}

impl fmt::Display for CensusLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl CensusSet {
    pub fn rows(&self, level: CensusLevel) -> &BTreeMap<Gadget, ExRecCensus> {
        match level {
            CensusLevel::Level1 => &self.level1,
            CensusLevel::LevelN => &self.leveln,
        }
    }

    pub fn rows_mut(&mut self, level: CensusLevel) -> &mut BTreeMap<Gadget, ExRecCensus> {
        match level {
            CensusLevel::Level1 => &mut self.level1,
            CensusLevel::LevelN => &mut self.leveln,
        }
    }

    pub fn get(&self, level: CensusLevel, gadget: Gadget) -> Result<&ExRecCensus, CensusError> {
        self.rows(level)
            .get(&gadget)
            .ok_or(CensusError::MissingGadget {
                level: level.key(),
                gadget: gadget.key(),
            })
    }
}

/// The published level-1 and level-n tables.
pub fn paper_census() -> CensusSet {
    use LocationKind::*;
    let a = AffineCount::new;
    let c = AffineCount::constant;
    let level1 = [
        ExRecCensus::new(
            Memory,
            &[
                (Memory, a(654.0, 28.0)),
                (Swap, c(408.0)),
                (Readout, c(40.0)),
            ],
            a(41.0, 2.0),
        ),
        ExRecCensus::new(
            Swap,
            &[
                (Memory, a(1002.0, 56.0)),
                (Swap, c(1122.0)),
                (Readout, c(80.0)),
            ],
            a(41.0, 2.0),
        ),
        ExRecCensus::new(
            TGate,
            &[
                (Memory, a(3032.0, 133.0)),
                (Swap, c(1228.0)),
                (Readout, c(128.0)),
            ],
            a(205.0, 10.0),
        ),
        ExRecCensus::new(
            Readout,
            &[
                (Memory, a(1045.0, 42.0)),
                (Swap, c(510.0)),
                (Readout, c(57.0)),
            ],
            a(82.0, 4.0),
        ),
    ];
    let leveln = [
        ExRecCensus::new(
            Memory,
            &[
                (Memory, c(558.0)),
                (Swap, c(204.0)),
                (TGate, c(0.0)),
                (Readout, c(28.0)),
            ],
            c(38.0),
        ),
        ExRecCensus::new(
            Swap,
            &[
                (Memory, c(824.0)),
                (Swap, c(603.0)),
                (TGate, c(0.0)),
                (Readout, c(56.0)),
            ],
            c(38.0),
        ),
        ExRecCensus::new(
            TGate,
            &[
                (Memory, c(2605.0)),
                (Swap, c(619.0)),
                (TGate, c(28.0)),
                (Readout, c(98.0)),
            ],
            c(190.0),
        ),
        ExRecCensus::new(
            Readout,
            &[
                (Memory, c(974.0)),
                (Swap, c(255.0)),
                (TGate, c(0.0)),
                (Readout, c(42.0)),
            ],
            c(76.0),
        ),
    ];
    CensusSet {
        level1: level1.into_iter().map(|r| (r.gadget, r)).collect(),
        leveln: leveln.into_iter().map(|r| (r.gadget, r)).collect(),
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CensusError {
    #[error("malformed census document: {0}")]
    Malformed(String),
    #[error("negative count at {field}: {value}")]
    NegativeCount { field: String, value: f64 },
    #[error("missing gadget {level}.{gadget}")]
    MissingGadget {
        level: &'static str,
        gadget: &'static str,
    },
    #[error("unknown key {path}")]
    UnknownKey { path: String },
    #[error("nonzero slope at {field}: logical-level rows must be constant")]
    NonZeroSlope { field: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// One failed census rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub level: CensusLevel,
    pub gadget: Gadget,
    pub rule: String,
    pub observed: String,
    pub expected: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}: {} (observed {}, expected {})",
            self.level, self.gadget, self.rule, self.observed, self.expected
        )
    }
}

/// Check every row against the census rules. An empty list means valid.
pub fn validate(set: &CensusSet) -> Vec<Violation> {
    let mut out = Vec::new();
    for level in [CensusLevel::Level1, CensusLevel::LevelN] {
        let rows = set.rows(level);
        for g in LocationKind::ALL {
            let Some(row) = rows.get(&g) else {
                out.push(Violation {
                    level,
                    gadget: g,
                    rule: "missing gadget".into(),
                    observed: "absent".into(),
                    expected: "present".into(),
                });
                continue;
            };
            for (&k, c) in &row.counts {
                if !c.is_nonnegative() {
                    out.push(Violation {
                        level,
                        gadget: g,
                        rule: format!("negative count ({k})"),
                        observed: c.to_string(),
                        expected: ">= 0".into(),
                    });
                }
                if level == CensusLevel::LevelN && c.slope != 0.0 {
                    out.push(Violation {
                        level,
                        gadget: g,
                        rule: format!("nonzero slope ({k})"),
                        observed: c.to_string(),
                        expected: "slope 0".into(),
                    });
                }
            }
            if !row.depth.is_nonnegative() {
                out.push(Violation {
                    level,
                    gadget: g,
                    rule: "negative depth".into(),
                    observed: row.depth.to_string(),
                    expected: ">= 0".into(),
                });
            }
            if level == CensusLevel::LevelN && row.depth.slope != 0.0 {
                out.push(Violation {
                    level,
                    gadget: g,
                    rule: "nonzero depth slope".into(),
                    observed: row.depth.to_string(),
                    expected: "slope 0".into(),
                });
            }
            if level == CensusLevel::Level1 && row.count(LocationKind::TGate) != AffineCount::ZERO {
                out.push(Violation {
                    level,
                    gadget: g,
                    rule: "tgate count at level 1".into(),
                    observed: row.count(LocationKind::TGate).to_string(),
                    expected: "absent".into(),
                });
            }
            if level == CensusLevel::LevelN
                && matches!(g, LocationKind::Memory | LocationKind::Swap)
            {
                let r = row.count(LocationKind::Readout).base;
                if r % 14.0 != 0.0 {
                    out.push(Violation {
                        level,
                        gadget: g,
                        rule: "readout count not a multiple of 14".into(),
                        observed: r.to_string(),
                        expected: format!("{}", (r / 14.0).round().max(1.0) * 14.0),
                    });
                }
            }
        }
        if let Some(m) = rows.get(&LocationKind::Memory) {
            for (g, ratio) in [
                (LocationKind::Swap, 1.0),
                (LocationKind::TGate, 5.0),
                (LocationKind::Readout, 2.0),
            ] {
                if let Some(row) = rows.get(&g) {
                    let want = m.depth.scale(ratio);
                    if row.depth != want {
                        out.push(Violation {
                            level,
                            gadget: g,
                            rule: format!("depth ratio {ratio}x memory"),
                            observed: row.depth.to_string(),
                            expected: want.to_string(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn affine_to_value(c: AffineCount) -> Value {
    let mut m = Map::new();
    m.insert("base".into(), Value::from(c.base));
    m.insert("slope".into(), Value::from(c.slope));
    Value::Object(m)
}

/// Census set as a JSON value in the canonical schema.
pub fn to_json(set: &CensusSet) -> Value {
    let mut top = Map::new();
    for level in [CensusLevel::Level1, CensusLevel::LevelN] {
        let mut rows = Map::new();
        for (g, row) in set.rows(level) {
            let mut r = Map::new();
            for (k, c) in &row.counts {
                r.insert(k.key().into(), affine_to_value(*c));
            }
            r.insert("depth".into(), affine_to_value(row.depth));
            rows.insert(g.key().into(), Value::Object(r));
        }
        top.insert(level.key().into(), Value::Object(rows));
    }
    Value::Object(top)
}

pub fn save_census(set: &CensusSet, mut sink: impl Write) -> Result<(), CensusError> {
    let mut s =
        serde_json::to_string_pretty(&to_json(set)).map_err(|e| CensusError::Io(e.to_string()))?;
    s.push('\n');
    sink.write_all(s.as_bytes())
        .map_err(|e| CensusError::Io(e.to_string()))
}

pub fn load_census(mut source: impl Read) -> Result<CensusSet, CensusError> {
    let mut buf = String::new();
    source
        .read_to_string(&mut buf)
        .map_err(|e| CensusError::Io(e.to_string()))?;
    let v: Value = serde_json::from_str(&buf).map_err(|e| CensusError::Malformed(e.to_string()))?;
    from_json(&v)
}

fn parse_affine(v: &Value, path: &str, constant: bool) -> Result<AffineCount, CensusError> {
    let obj = v
        .as_object()
        .ok_or_else(|| CensusError::Malformed(format!("{path} must be an object")))?;
    for key in obj.keys() {
        if key != "base" && key != "slope" {
            return Err(CensusError::UnknownKey {
                path: format!("{path}.{key}"),
            });
        }
    }
    let num = |key: &str| -> Result<f64, CensusError> {
        match obj.get(key) {
            None => Err(CensusError::Malformed(format!("{path}.{key} missing"))),
            Some(x) => x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| {
                CensusError::Malformed(format!("{path}.{key} must be a finite number"))
            }),
        }
    };
    let base = num("base")?;
    let slope = num("slope")?;
    for (name, x) in [("base", base), ("slope", slope)] {
        if x < 0.0 {
            return Err(CensusError::NegativeCount {
                field: format!("{path}.{name}"),
                value: x,
            });
        }
    }
    if constant && slope != 0.0 {
        return Err(CensusError::NonZeroSlope {
            field: format!("{path}.slope"),
        });
    }
    Ok(AffineCount { base, slope })
}

/// Parse a census from a JSON value, rejecting unknown keys.
pub fn from_json(v: &Value) -> Result<CensusSet, CensusError> {
    let top = v
        .as_object()
        .ok_or_else(|| CensusError::Malformed("document must be an object".into()))?;
    for key in top.keys() {
        if key != "level1" && key != "leveln" {
            return Err(CensusError::UnknownKey { path: key.clone() });
        }
    }
    let mut set = CensusSet {
        level1: BTreeMap::new(),
        leveln: BTreeMap::new(),
    };
    for level in [CensusLevel::Level1, CensusLevel::LevelN] {
        let rows = top
            .get(level.key())
            .ok_or_else(|| CensusError::Malformed(format!("{} missing", level.key())))?
            .as_object()
            .ok_or_else(|| CensusError::Malformed(format!("{} must be an object", level.key())))?;
        for key in rows.keys() {
            if LocationKind::ALL.iter().all(|g| g.key() != key) {
                return Err(CensusError::UnknownKey {
                    path: format!("{}.{key}", level.key()),
                });
            }
        }
        let constant = level == CensusLevel::LevelN;
        for g in LocationKind::ALL {
            let path = format!("{}.{}", level.key(), g.key());
            let row = rows
                .get(g.key())
                .ok_or(CensusError::MissingGadget {
                    level: level.key(),
                    gadget: g.key(),
                })?
                .as_object()
                .ok_or_else(|| CensusError::Malformed(format!("{path} must be an object")))?;
            let mut counts = BTreeMap::new();
            let mut depth = None;
            for (key, val) in row {
                let field = format!("{path}.{key}");
                if key == "depth" {
                    depth = Some(parse_affine(val, &field, constant)?);
                } else if let Some(k) = LocationKind::ALL.iter().find(|k| k.key() == key) {
                    counts.insert(*k, parse_affine(val, &field, constant)?);
                } else {
                    return Err(CensusError::UnknownKey { path: field });
                }
            }
            for required in [
                LocationKind::Memory,
                LocationKind::Swap,
                LocationKind::Readout,
            ] {
                if !counts.contains_key(&required) {
                    return Err(CensusError::Malformed(format!(
                        "{path}.{} missing",
                        required.key()
                    )));
                }
            }
            let depth =
                depth.ok_or_else(|| CensusError::Malformed(format!("{path}.depth missing")))?;
            set.rows_mut(level).insert(
                g,
                ExRecCensus {
                    gadget: g,
                    counts,
                    depth,
                },
            );
        }
    }
    Ok(set)
}
