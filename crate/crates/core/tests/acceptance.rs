//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftlab::census::{paper_census, CensusLevel, Gadget, LocationKind, PerKind};
use ftlab::failure_model::{gadget_failure, mc_oracle};
use ftlab::lattice::*;
use ftlab::threshold::{asymptotic_threshold, level_threshold, sweep, Param, Ratios};
use ftlab::verify::{simulate_stabilizer, verify_component, Component, PauliOperator};

const TOL: f64 = 0.03;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want) / want
}

fn anchor_line(label: &str, got: f64, want: f64) -> (bool, String) {
    let r = rel(got, want);
    (
        r.abs() <= TOL,
        format!("{label} {got:.3e} vs {want:.2e} ({:+.1}%)", 100.0 * r),
    )
}

fn threshold_reproduction() -> Outcome {
    let set = paper_census();
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, want) in [
        (2, 1.36e-6),
        (3, 1.72e-6),
        (4, 1.85e-6),
        (5, 1.91e-6),
        (100, 1.96e-6),
    ] {
        match level_threshold(Ratios::new(0.1, 1.0, 10.0), n, &set) {
            Ok(r) => {
                let (ok, s) = anchor_line(&format!("n={n}"), r.threshold, want);
                pass &= ok;
                parts.push(s);
            }
            Err(e) => {
                pass = false;
                parts.push(format!("n={n} error {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn setting_anchors() -> Outcome {
    let set = paper_census();
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, want) in [
        (Ratios::new(0.0, 1.0, 1.0), 2.88e-6),
        (Ratios::new(0.1, 1.0, 1.0), 2.05e-6),
        (Ratios::new(1.0, 100.0, 1000.0), 3.78e-8),
    ] {
        let label = format!("({}, {}, {})", r.rm, r.rr, r.tr);
        match asymptotic_threshold(r, &set) {
            Ok(t) => {
                let (ok, s) = anchor_line(&label, t.threshold, want);
                pass &= ok;
                parts.push(s);
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label} error {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

/// Probability of two or more faults by walking every subset of the
/// locations. Subtree sums are added pairwise to keep rounding small.
fn subset_enumeration(probs: &[f64]) -> f64 {
    fn walk(probs: &[f64], i: usize, weight: f64, faults: usize) -> f64 {
        if i == probs.len() {
            return if faults >= 2 { weight } else { 0.0 };
        }
        walk(probs, i + 1, weight * (1.0 - probs[i]), faults)
            + walk(probs, i + 1, weight * probs[i], faults + 1)
    }
    walk(probs, 0, 1.0, 0)
}

fn polynomial_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let total = rng.gen_range(2..=20usize);
        let mut counts = PerKind::splat(0.0);
        for _ in 0..total {
            counts[LocationKind::ALL[rng.gen_range(0..4)]] += 1.0;
        }
        let probs = PerKind::from_fn(|_| 10f64.powf(rng.gen_range(-6.0..-0.5)));
        let flat: Vec<f64> = LocationKind::ALL
            .iter()
            .flat_map(|&k| std::iter::repeat_n(probs[k], counts[k] as usize))
            .collect();
        let exact = subset_enumeration(&flat);
        let got = gadget_failure(&counts, &probs).unwrap();
        worst = worst.max(if exact == 0.0 {
            got.abs()
        } else {
            (got / exact - 1.0).abs()
        });
    }
    let mut mc_worst = 0.0f64;
    for _ in 0..20 {
        let counts = PerKind::from_fn(|_| rng.gen_range(0..400u32) as f64);
        let probs = PerKind::from_fn(|_| 10f64.powf(rng.gen_range(-4.0..-2.0)));
        let got = gadget_failure(&counts, &probs).unwrap();
        let (est, se) = mc_oracle(&counts, &probs, 1_000_000, rng.gen()).unwrap();
        mc_worst = mc_worst.max((est - got).abs() / se);
    }
    Outcome {
        pass: worst <= 1e-12 && mc_worst <= 3.0,
        detail: format!("max relative error vs enumeration {worst:.1e} (limit 1e-12); max Monte-Carlo deviation {mc_worst:.2} SE (limit 3)"),
    }
}

fn sweep_monotonicity() -> Outcome {
    let set = paper_census();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [Param::Rm, Param::Rr, Param::Tr] {
        let table = sweep(
            p,
            p.default_range(),
            25,
            Ratios::new(0.1, 1.0, 10.0),
            100,
            &set,
        )
        .unwrap();
        let vals: Vec<Option<f64>> = table
            .rows
            .iter()
            .map(|r| r.result.as_ref().ok().map(|t| t.threshold))
            .collect();
        let missing = vals.iter().filter(|v| v.is_none()).count();
        let rises = vals
            .windows(2)
            .filter(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => b > a * (1.0 + 1e-9),
                _ => false,
            })
            .count();
        pass &= missing == 0 && rises == 0;
        parts.push(format!("{p}: {rises} rises, {missing} unsolved"));
    }
    let mut prev = 0.0;
    let mut drops = 0;
    for n in [2, 3, 4, 5, 10, 50, 100] {
        match level_threshold(Ratios::new(0.1, 1.0, 10.0), n, &set) {
            Ok(r) => {
                if r.threshold < prev * (1.0 - 1e-9) {
                    drops += 1;
                }
                prev = r.threshold;
            }
            Err(_) => drops += 1,
        }
    }
    pass &= drops == 0;
    parts.push(format!("pseudothreshold over n: {drops} drops"));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn circuit_correctness() -> Outcome {
    let mut problems = Vec::new();
    let (t, _) = simulate_stabilizer(&build_encode()).unwrap();
    for g in [
        "XXXXIII", "XXIIXXI", "IXIXIXX", "ZZZZIII", "ZZIIZZI", "IZIZIZZ", "ZZZZZZZ",
    ] {
        let p: PauliOperator = g.parse().unwrap();
        if !t.is_stabilized_by(&p) {
            problems.push(format!("encode not stabilized by {g}"));
        }
    }
    for k in 1..=7 {
        let mut c = build_mesh(k).unwrap();
        let d = c.depth();
        if d > 0 {
            c.place(&build_unmesh(k).unwrap(), d, 0).unwrap();
        }
        let mut tr = LabelTracker::new(&c);
        for l in &c.layers {
            tr.apply(l);
        }
        let initial = LabelTracker::new(&c);
        if (0..2 * k).any(|i| tr.label_at(Site::line(i)) != initial.label_at(Site::line(i))) {
            problems.push(format!("unmesh does not invert mesh for k={k}"));
        }
    }
    let mut builders: Vec<(String, Circuit)> = vec![
        ("encode".into(), build_encode()),
        ("decode".into(), build_decode()),
        ("cat-prep".into(), build_cat_prep()),
        ("cat-measure".into(), build_cat_measure()),
        (
            "single-error-swap".into(),
            build_single_error_swap(&RoleMap::standard(2), Site::line(0), Site::line(1)).unwrap(),
        ),
    ];
    for k in 1..=7 {
        builders.push((format!("mesh({k})"), build_mesh(k).unwrap()));
        builders.push((format!("unmesh({k})"), build_unmesh(k).unwrap()));
    }
    for kind in [SyndromeKind::X, SyndromeKind::Z] {
        for left in [false, true] {
            builders.push((
                format!("extraction {kind} left={left}"),
                build_syndrome_extraction(kind, left).unwrap(),
            ));
        }
    }
    for g in Gadget::ALL {
        builders.push((format!("{g} exrec"), natural_exrec(g).unwrap()));
    }
    let mut checked = 0;
    for (name, c) in &builders {
        let mut forms = vec![(format!("{:?}", c.granularity), c.clone())];
        if c.granularity == Granularity::Logical {
            forms.push(("Physical".into(), c.lower()));
        }
        for (gran, c) in forms {
            checked += 1;
            let v = c.check_layout();
            if !v.is_empty() {
                problems.push(format!("{name} ({gran}): {} layout violations", v.len()));
            }
        }
    }
    let mut ratios = Vec::new();
    for gran in [Granularity::Logical, Granularity::Physical] {
        let cs = synchronized_exrecs(gran).unwrap();
        let unit = match gran {
            Granularity::Logical => (cs[Gadget::Memory].depth(), 0),
            Granularity::Physical => cs[Gadget::Memory].duration(),
        };
        for (g, r) in [(Gadget::TGate, 5), (Gadget::Readout, 2), (Gadget::Swap, 1)] {
            let d = match gran {
                Granularity::Logical => (cs[g].depth(), 0),
                Granularity::Physical => cs[g].duration(),
            };
            if d != (r * unit.0, r * unit.1) {
                problems.push(format!("{g} {gran:?} duration {d:?} is not {r} x {unit:?}"));
            }
        }
        ratios.push(format!("{gran:?} memory unit {unit:?}"));
    }
    Outcome {
        pass: problems.is_empty(),
        detail: format!(
            "{checked} layouts checked, mesh/unmesh k=1..7, {}; {}",
            ratios.join(", "),
            if problems.is_empty() {
                "no problems".to_string()
            } else {
                problems.join("; ")
            }
        ),
    }
}

fn fault_tolerance() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let runs = [
        (Component::SwapRoutine, Granularity::Physical),
        (Component::NaiveSwap, Granularity::Physical),
        (Component::EncodeDecode, Granularity::Logical),
        (Component::EncodeDecode, Granularity::Physical),
        (Component::MemoryExrec, Granularity::Logical),
        (Component::MemoryExrec, Granularity::Physical),
        (Component::SwapExrec, Granularity::Logical),
        (Component::SwapExrec, Granularity::Physical),
    ];
    for (comp, gran) in runs {
        match verify_component(comp, gran) {
            Ok(r) => {
                let ok = r.pass() == comp.expected_pass() && (!r.pass() || r.summary.tight);
                pass &= ok;
                parts.push(format!(
                    "{comp}/{gran:?} {} ({} faults, max weight {})",
                    if r.pass() { "pass" } else { "fail" },
                    r.summary.faults,
                    r.summary.max_weight
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{comp}/{gran:?} error {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn census_plausibility() -> Outcome {
    let builtin = paper_census();
    let cs = synchronized_exrecs(Granularity::Logical).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, readouts) in [
        (Gadget::Memory, 28.0),
        (Gadget::Swap, 56.0),
        (Gadget::Readout, 42.0),
    ] {
        let got = extract_census(&cs[g], g, CensusLevel::LevelN);
        let want = builtin.get(CensusLevel::LevelN, g).unwrap();
        let mut kinds = Vec::new();
        for k in LocationKind::ALL {
            let (e, p) = (got.count(k).base, want.count(k).base);
            let d = if p == 0.0 {
                if e == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                rel(e, p)
            };
            if d.abs() > 0.25 {
                pass = false;
            }
            if k != LocationKind::TGate || e != 0.0 || p != 0.0 {
                kinds.push(format!("{}={e} vs {p} ({:+.0}%)", k.symbol(), 100.0 * d));
            }
        }
        if got.count(LocationKind::Readout).base != readouts {
            pass = false;
        }
        kinds.push(format!("depth={} vs {}", got.depth.base, want.depth.base));
        parts.push(format!("{g}: {}", kinds.join(" ")));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        (
            "threshold reproduction",
            Duration::from_secs(5),
            threshold_reproduction,
        ),
        ("setting anchors", Duration::from_secs(5), setting_anchors),
        (
            "polynomial oracle equivalence",
            Duration::from_secs(300),
            polynomial_oracles,
        ),
        (
            "sweep monotonicity",
            Duration::from_secs(300),
            sweep_monotonicity,
        ),
        (
            "circuit correctness",
            Duration::from_secs(300),
            circuit_correctness,
        ),
        (
            "fault-tolerance verification",
            Duration::from_secs(180),
            fault_tolerance,
        ),
        (
            "census plausibility",
            Duration::from_secs(300),
            census_plausibility,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {}. {name} [{:.2}s, limit {}s]: {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
