//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 usage or I/O error, 2 no threshold in range,
//! 3 invalid census, 4 verification failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::census::{
    load_census, paper_census, save_census, validate, AffineCount, CensusLevel, CensusSet, Gadget,
    LocationKind,
};
use crate::lattice::{extract_census, natural_exrec, synchronized_exrecs, Granularity};
use crate::threshold::{
    failure_curve, level_threshold, log_grid, sweep, Param, Ratios, SolverError, ThresholdResult,
};
use crate::verify::{verify_component, Component};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_ROOT: i32 = 2;
pub const EXIT_CENSUS_INVALID: i32 = 3;
pub const EXIT_VERIFY_FAIL: i32 = 4;

/// Default census path when `--census` is absent.
pub const CENSUS_ENV: &str = "FTLAB_CENSUS";

#[derive(Parser, Debug)]
#[command(
    name = "ftlab",
    version,
    about = "Thresholds and fault-tolerance checks for [[7,1,3]] lattice circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Level-n threshold for one physical setting.
    Threshold(ThresholdArgs),
    /// Reference-gadget failure probability against p0S for several levels.
    Curve(CurveArgs),
    /// Thresholds along one ratio.
    Sweep(SweepArgs),
    /// Print, validate or extract censuses.
    Census {
        #[command(subcommand)]
        action: CensusAction,
    },
    /// Emit an assembled exRec circuit as JSON.
    Circuit(CircuitArgs),
    /// Exhaustive single-fault verification of a component.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct CensusOpt {
    /// Census file; defaults to $FTLAB_CENSUS, then the built-in table.
    #[arg(long)]
    census: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OutputOpt {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    rm: f64,
    #[arg(long)]
    rr: f64,
    #[arg(long)]
    tr: f64,
    #[arg(long)]
    level: u32,
    #[command(flatten)]
    census: CensusOpt,
    #[command(flatten)]
    output: OutputOpt,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,100")]
    levels: Vec<u32>,
    #[arg(long, default_value_t = 1e-7)]
    pmin: f64,
    #[arg(long, default_value_t = 1e-4)]
    pmax: f64,
    #[arg(long, default_value_t = 61)]
    points: usize,
    #[arg(long, default_value_t = 0.1)]
    rm: f64,
    #[arg(long, default_value_t = 1.0)]
    rr: f64,
    #[arg(long, default_value_t = 10.0)]
    tr: f64,
    #[command(flatten)]
    census: CensusOpt,
    #[command(flatten)]
    output: OutputOpt,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    vary: Param,
    /// Defaults to the low end of the parameter's standard range.
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long, default_value_t = 25)]
    points: usize,
    #[arg(long, default_value_t = 0.1)]
    rm: f64,
    #[arg(long, default_value_t = 1.0)]
    rr: f64,
    #[arg(long, default_value_t = 10.0)]
    tr: f64,
    #[arg(long, default_value_t = 100)]
    level: u32,
    #[command(flatten)]
    census: CensusOpt,
    #[command(flatten)]
    output: OutputOpt,
}

#[derive(Subcommand, Debug)]
enum CensusAction {
    /// Emit the built-in census.
    Print {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a census file; defaults to $FTLAB_CENSUS.
    Validate { file: Option<PathBuf> },
    /// Count the locations of a built exRec and compare with the built-in row.
    Extract {
        #[arg(long, value_parser = parse_gadget)]
        gadget: Gadget,
        #[arg(long, value_enum, default_value_t = LevelArg::N)]
        level: LevelArg,
        /// t_r used for the relative deltas of level-1 rows.
        #[arg(long, default_value_t = 10.0)]
        tr: f64,
        #[command(flatten)]
        output: OutputOpt,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    #[value(name = "1")]
    One,
    #[value(name = "n")]
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GranularityArg {
    Logical,
    Physical,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Logical => Granularity::Logical,
            GranularityArg::Physical => Granularity::Physical,
        }
    }
}

#[derive(Args, Debug)]
struct CircuitArgs {
    #[arg(long, value_parser = parse_gadget)]
    gadget: Gadget,
    #[arg(long, value_enum, default_value_t = GranularityArg::Logical)]
    granularity: GranularityArg,
    /// Pad to the common exRec duration.
    #[arg(long)]
    synchronized: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    component: Component,
    #[arg(long, value_enum, default_value_t = GranularityArg::Logical)]
    granularity: GranularityArg,
    /// Write the full JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_gadget(s: &str) -> Result<Gadget, String> {
    LocationKind::from_key(&s.to_ascii_lowercase())
        .ok_or_else(|| format!("unknown gadget {s:?}; expected memory, swap, readout or t"))
}

/// Error carrying its exit code.
struct Fail(i32, String);

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail(EXIT_USAGE, msg.into())
    }
}

impl From<SolverError> for Fail {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NoRoot { .. } => Fail(EXIT_NO_ROOT, e.to_string()),
            _ => Fail::usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::usage(e.to_string())
    }
}

/// Runs the command line with the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Runs the command line, writing results to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let res = match cli.command {
        Command::Threshold(a) => cmd_threshold(a, out, err),
        Command::Curve(a) => cmd_curve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Census { action } => cmd_census(action, out, err),
        Command::Circuit(a) => cmd_circuit(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
    };
    match res {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

/// Full-precision float text; parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn load_censuses(opt: &CensusOpt) -> Result<CensusSet, Fail> {
    let path = opt
        .census
        .clone()
        .or_else(|| std::env::var_os(CENSUS_ENV).map(PathBuf::from));
    let Some(path) = path else {
        return Ok(paper_census());
    };
    let set = read_census(&path)?;
    let v = validate(&set);
    if !v.is_empty() {
        let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        return Err(Fail(
            EXIT_CENSUS_INVALID,
            format!("{}: invalid census\n{}", path.display(), list.join("\n")),
        ));
    }
    Ok(set)
}

fn read_census(path: &Path) -> Result<CensusSet, Fail> {
    let f = File::open(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
    load_census(BufReader::new(f)).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn emit(out_path: &Option<PathBuf>, out: &mut dyn Write, text: &str) -> Result<(), Fail> {
    match out_path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Fail::usage(format!("{}: {e}", p.display())))
        }
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn check_ratios(r: &Ratios) -> Result<(), Fail> {
    r.setting(0.0)
        .map(|_| ())
        .map_err(|e| Fail::usage(e.to_string()))
}

const THRESHOLD_HEADER: &str = "level,rm,rr,tr,threshold,iterations,residual,converged";

fn threshold_row(r: &ThresholdResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        r.level,
        fmt_f64(r.ratios.rm),
        fmt_f64(r.ratios.rr),
        fmt_f64(r.ratios.tr),
        fmt_f64(r.threshold),
        r.iterations,
        fmt_f64(r.residual),
        r.converged
    )
}

fn cmd_threshold(a: ThresholdArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fail> {
    let ratios = Ratios::new(a.rm, a.rr, a.tr);
    check_ratios(&ratios)?;
    let set = load_censuses(&a.census)?;
    let r = level_threshold(ratios, a.level, &set)?;
    let text = match a.output.format {
        Format::Csv => format!("{THRESHOLD_HEADER}\n{}", threshold_row(&r)),
        Format::Json => to_json(&r),
    };
    emit(&a.output.out, out, &text)?;
    writeln!(err, "level {} threshold {:.3e}", r.level, r.threshold)?;
    if r.multiple_roots() {
        writeln!(
            err,
            "warning: {} sign changes in the scan; returned the lowest root",
            r.sign_changes
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_curve(a: CurveArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    if a.points < 2 {
        return Err(Fail::usage(format!(
            "--points must be at least 2, got {}",
            a.points
        )));
    }
    if !(a.pmin > 0.0 && a.pmax > a.pmin) {
        return Err(Fail::usage(format!(
            "need 0 < pmin < pmax, got {} and {}",
            a.pmin, a.pmax
        )));
    }
    let ratios = Ratios::new(a.rm, a.rr, a.tr);
    check_ratios(&ratios)?;
    let set = load_censuses(&a.census)?;
    let curve = failure_curve(ratios, &a.levels, &log_grid(a.pmin, a.pmax, a.points), &set)
        .map_err(|e| Fail::usage(e.to_string()))?;
    let text = match a.output.format {
        Format::Json => to_json(&curve),
        Format::Csv => {
            let mut s = String::from("p0S");
            for l in &curve.levels {
                s.push_str(&format!(",p{l}T"));
            }
            s.push('\n');
            for row in &curve.rows {
                s.push_str(&fmt_f64(row.p0s));
                for v in &row.values {
                    s.push(',');
                    s.push_str(&fmt_f64(*v));
                }
                s.push('\n');
            }
            s
        }
    };
    emit(&a.output.out, out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fail> {
    let (lo, hi) = a.vary.default_range();
    let range = (a.from.unwrap_or(lo), a.to.unwrap_or(hi));
    let fixed = Ratios::new(a.rm, a.rr, a.tr);
    let set = load_censuses(&a.census)?;
    let table = sweep(a.vary, range, a.points, fixed, a.level, &set)
        .map_err(|e| Fail::usage(e.to_string()))?;
    let mut missing = 0;
    let text = match a.output.format {
        Format::Csv => {
            let mut s = format!("{},threshold,iterations,residual\n", a.vary);
            for row in &table.rows {
                match &row.result {
                    Ok(r) => s.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_f64(row.value),
                        fmt_f64(r.threshold),
                        r.iterations,
                        fmt_f64(r.residual)
                    )),
                    Err(_) => {
                        missing += 1;
                        s.push_str(&format!("{},NaN,0,NaN\n", fmt_f64(row.value)));
                    }
                }
            }
            s
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| match &row.result {
                    Ok(r) => serde_json::json!({ "value": row.value, "result": r }),
                    Err(e) => {
                        missing += 1;
                        serde_json::json!({ "value": row.value, "error": e.to_string() })
                    }
                })
                .collect();
            to_json(&serde_json::json!({
                "varied": table.varied,
                "fixed": table.fixed,
                "level": table.level,
                "rows": rows,
            }))
        }
    };
    emit(&a.output.out, out, &text)?;
    for row in &table.rows {
        if let Err(e) = &row.result {
            writeln!(err, "{}={}: {e}", a.vary, row.value)?;
        }
    }
    Ok(if missing > 0 { EXIT_NO_ROOT } else { EXIT_OK })
}

fn cmd_census(action: CensusAction, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fail> {
    match action {
        CensusAction::Print { out: path } => {
            let mut buf = Vec::new();
            save_census(&paper_census(), &mut buf).map_err(|e| Fail::usage(e.to_string()))?;
            emit(&path, out, &String::from_utf8_lossy(&buf))?;
            Ok(EXIT_OK)
        }
        CensusAction::Validate { file } => {
            let path = file
                .or_else(|| std::env::var_os(CENSUS_ENV).map(PathBuf::from))
                .ok_or_else(|| {
                    Fail::usage(format!("no census file given and ${CENSUS_ENV} is unset"))
                })?;
            let set = read_census(&path)?;
            let v = validate(&set);
            for x in &v {
                writeln!(out, "{x}")?;
            }
            if v.is_empty() {
                writeln!(err, "{}: valid", path.display())?;
                Ok(EXIT_OK)
            } else {
                writeln!(err, "{}: {} violation(s)", path.display(), v.len())?;
                Ok(EXIT_CENSUS_INVALID)
            }
        }
        CensusAction::Extract {
            gadget,
            level,
            tr,
            output,
        } => {
            let (gran, lvl) = match level {
                LevelArg::One => (Granularity::Physical, CensusLevel::Level1),
                LevelArg::N => (Granularity::Logical, CensusLevel::LevelN),
            };
            let circuits = synchronized_exrecs(gran).map_err(|e| Fail::usage(e.to_string()))?;
            let got = extract_census(&circuits[gadget], gadget, lvl);
            let builtin = paper_census();
            let want = builtin
                .get(lvl, gadget)
                .map_err(|e| Fail::usage(e.to_string()))?;
            let mut rows: Vec<(String, AffineCount, AffineCount)> = Vec::new();
            for k in LocationKind::ALL {
                if lvl == CensusLevel::Level1 && k == LocationKind::TGate {
                    continue;
                }
                rows.push((k.key().to_string(), got.count(k), want.count(k)));
            }
            rows.push(("depth".into(), got.depth, want.depth));
            let rel = |e: &AffineCount, p: &AffineCount| {
                let pv = p.at(tr);
                if pv == 0.0 {
                    if e.at(tr) == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (e.at(tr) - pv) / pv
                }
            };
            let text = match output.format {
                Format::Csv => {
                    let mut s = String::from("kind,extracted_base,extracted_slope,builtin_base,builtin_slope,relative_delta\n");
                    for (k, e, p) in &rows {
                        s.push_str(&format!(
                            "{k},{},{},{},{},{}\n",
                            fmt_f64(e.base),
                            fmt_f64(e.slope),
                            fmt_f64(p.base),
                            fmt_f64(p.slope),
                            fmt_f64(rel(e, p))
                        ));
                    }
                    s
                }
                Format::Json => {
                    let v: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(k, e, p)| {
                            serde_json::json!({
                                "kind": k,
                                "extracted": { "base": e.base, "slope": e.slope },
                                "builtin": { "base": p.base, "slope": p.slope },
                                "relative_delta": rel(e, p),
                            })
                        })
                        .collect();
                    to_json(
                        &serde_json::json!({ "gadget": gadget, "level": lvl, "tr": tr, "rows": v }),
                    )
                }
            };
            emit(&output.out, out, &text)?;
            for (k, e, p) in &rows {
                writeln!(err, "{k}: {e} vs {p} ({:+.1}%)", 100.0 * rel(e, p))?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_circuit(a: CircuitArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let gran: Granularity = a.granularity.into();
    let c = if a.synchronized {
        synchronized_exrecs(gran).map_err(|e| Fail::usage(e.to_string()))?[a.gadget].clone()
    } else {
        let c = natural_exrec(a.gadget).map_err(|e| Fail::usage(e.to_string()))?;
        match gran {
            Granularity::Logical => c,
            Granularity::Physical => c.lower(),
        }
    };
    emit(&a.out, out, &to_json(&c))?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fail> {
    let report = verify_component(a.component, a.granularity.into())
        .map_err(|e| Fail::usage(e.to_string()))?;
    if let Some(p) = &a.report {
        std::fs::write(p, to_json(&report))
            .map_err(|e| Fail::usage(format!("{}: {e}", p.display())))?;
    }
    let s = &report.summary;
    writeln!(
        out,
        "{} {}: {} faults, {} failing, max residual weight {}, conflicts {}, unknown patterns {}",
        s.component,
        if report.pass() { "PASS" } else { "FAIL" },
        s.faults,
        s.failure_count,
        s.max_weight,
        s.conflicts,
        s.unknown_patterns
    )?;
    for f in report.failures().take(5) {
        writeln!(
            err,
            "  step {} {} {}: residual weight {}",
            f.step, f.site, f.fault, f.residual_weight
        )?;
    }
    Ok(if report.pass() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAIL
    })
}
