//! Pessimistic gadget failure probabilities and the level recursion.
//!
//! A gadget fails when two or more of its locations fault. With independent
//! faults of probability `q_i` at `n_i` locations of kind `i`,
//!
//! ```text
//! P = 1 - prod (1-q_i)^n_i - sum_i n_i q_i (1-q_i)^(n_i-1) prod_{k!=i} (1-q_k)^n_k
//! ```
//!
//! Counts may be real. Each kind's own "two or more" probability is evaluated
//! with a cancellation-free series, and kinds are then merged by tracking the
//! probabilities of zero, one, and two-or-more faults, so every step adds
//! nonnegative terms and relative precision survives rates near 1e-9.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::census::{CensusError, CensusLevel, CensusSet, LocationKind, PerKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: String, value: f64 },
    #[error("count {name} = {value} is negative or not finite")]
    Count { name: String, value: f64 },
    #[error("parameter {name} = {value} is negative or not finite")]
    Parameter { name: String, value: f64 },
    #[error("count {name} = {value} is not an integer")]
    NonInteger { name: String, value: f64 },
    #[error("level must be at least 1")]
    Level,
    #[error("sample count must be at least 1")]
    Samples,
    #[error(transparent)]
    Census(#[from] CensusError),
}

/// Physical setting: base two-qubit failure rate plus the ratio triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalSetting {
    pub p0s: f64,
    pub rm: f64,
    pub rr: f64,
    pub tr: f64,
}

impl PhysicalSetting {
    pub fn new(p0s: f64, rm: f64, rr: f64, tr: f64) -> Result<Self, ModelError> {
        let s = PhysicalSetting { p0s, rm, rr, tr };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        for (name, v) in [("rm", self.rm), ("rr", self.rr), ("tr", self.tr)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::Parameter {
                    name: name.into(),
                    value: v,
                });
            }
        }
        for (name, v) in [
            ("p0S", self.p0s),
            ("p0m", self.p_memory()),
            ("p0r", self.p_readout()),
        ] {
            check_prob(name, v)?;
        }
        Ok(())
    }

    pub fn p_memory(&self) -> f64 {
        self.rm * self.p0s
    }

    pub fn p_readout(&self) -> f64 {
        self.rr * self.p0s
    }

    /// Per-kind physical failure probabilities. Level 1 has no T locations.
    pub fn location_probs(&self) -> PerKind<f64> {
        PerKind([self.p_memory(), self.p0s, 0.0, self.p_readout()])
    }
}

/// Gadget failure probabilities at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FailureVector {
    pub level: u32,
    pub probs: PerKind<f64>,
}

impl FailureVector {
    pub fn get(&self, g: LocationKind) -> f64 {
        self.probs[g]
    }
}

fn check_prob(name: &str, q: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(ModelError::Probability {
            name: name.into(),
            value: q,
        })
    }
}

/// `x - ln(1+x)` for `x >= 0`.
fn phi(x: f64) -> f64 {
    if x > 0.1 {
        return x - x.ln_1p();
    }
    let mut sum = 0.0;
    let mut pow = x * x;
    for k in 2..42 {
        let term = pow / k as f64;
        sum += if k % 2 == 0 { term } else { -term };
        pow *= x;
        if pow == 0.0 {
            break;
        }
    }
    sum
}

/// `ln P(fewer than two faults)` for `n` locations at odds `v = q/(1-q)`,
/// i.e. `n*phi(v) - phi(n*v)`.
fn log_at_most_one(n: f64, v: f64) -> f64 {
    let a = n * v;
    if a > 0.1 || v > 0.1 {
        return n * phi(v) - phi(a);
    }
    // sum_k (-1)^k v^k (n - n^k) / k with n - n^k = -n * expm1((k-1) ln n).
    let ln_n = n.ln();
    let mut sum = 0.0;
    let mut pow = v * v;
    for k in 2..42 {
        let coeff = -n * (((k - 1) as f64) * ln_n).exp_m1();
        let term = pow * coeff / k as f64;
        sum += if k % 2 == 0 { term } else { -term };
        pow *= v;
        if pow == 0.0 {
            break;
        }
    }
    sum
}

/// Probability of two or more faults among independent locations.
///
/// `terms` holds `(count, probability)` pairs; counts may be fractional.
pub fn failure_probability(terms: &[(f64, f64)]) -> Result<f64, ModelError> {
    for (i, &(n, q)) in terms.iter().enumerate() {
        if !(n.is_finite() && n >= 0.0) {
            return Err(ModelError::Count {
                name: format!("n[{i}]"),
                value: n,
            });
        }
        check_prob(&format!("q[{i}]"), q)?;
    }
    let live: Vec<(f64, f64)> = terms
        .iter()
        .copied()
        .filter(|&(n, q)| n > 0.0 && q > 0.0)
        .collect();
    if live.iter().any(|&(_, q)| q >= 1.0) {
        return Ok(certain_fault_case(&live));
    }
    // Running probabilities of zero, exactly one, and two or more faults.
    let (mut zero, mut one, mut many) = (1.0f64, 0.0f64, 0.0f64);
    for &(n, q) in &live {
        let log_none = n * (-q).ln_1p();
        let z = log_none.exp();
        let o = n * q * ((n - 1.0) * (-q).ln_1p()).exp();
        let any = -log_none.exp_m1();
        let t = -log_at_most_one(n, q / (1.0 - q)).exp_m1();
        many += zero * t + one * any;
        one = zero * o + one * z;
        zero *= z;
    }
    Ok(many.clamp(0.0, 1.0) + 0.0)
}

/// Direct evaluation when some location faults with certainty.
fn certain_fault_case(live: &[(f64, f64)]) -> f64 {
    let certain: Vec<usize> = (0..live.len()).filter(|&i| live[i].1 >= 1.0).collect();
    if certain.len() > 1 {
        return 1.0;
    }
    let i = certain[0];
    let (ni, _) = live[i];
    if ni > 1.0 {
        return 1.0;
    }
    let rest: f64 = live
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &(n, q))| n * (-q).ln_1p())
        .sum();
    // Zero other faults happen with probability exp(rest); the single certain
    // location contributes n_i * 0^(n_i - 1).
    let one_fault = if ni == 1.0 { rest.exp() } else { f64::INFINITY };
    (1.0 - one_fault).clamp(0.0, 1.0) + 0.0
}

/// Failure probability of one gadget given per-kind counts and probabilities.
pub fn gadget_failure(counts: &PerKind<f64>, probs: &PerKind<f64>) -> Result<f64, ModelError> {
    for (k, n) in counts.iter() {
        if !(n.is_finite() && n >= 0.0) {
            return Err(ModelError::Count {
                name: k.key().into(),
                value: n,
            });
        }
    }
    for (k, q) in probs.iter() {
        check_prob(k.key(), q)?;
    }
    let terms: Vec<(f64, f64)> = LocationKind::ALL
        .iter()
        .map(|&k| (counts[k], probs[k]))
        .collect();
    failure_probability(&terms)
}

/// Level-1 failure vector for every gadget.
pub fn level1_failures(
    setting: &PhysicalSetting,
    censuses: &CensusSet,
) -> Result<FailureVector, ModelError> {
    setting.check()?;
    let q = setting.location_probs();
    let mut probs = PerKind::splat(0.0);
    for g in LocationKind::ALL {
        let row = censuses.get(CensusLevel::Level1, g)?;
        probs[g] = gadget_failure(&row.counts_at(setting.tr), &q)?;
    }
    Ok(FailureVector { level: 1, probs })
}

/// One application of the logical-level recursion.
pub fn next_level(prev: &FailureVector, censuses: &CensusSet) -> Result<FailureVector, ModelError> {
    let mut probs = PerKind::splat(0.0);
    for g in LocationKind::ALL {
        let row = censuses.get(CensusLevel::LevelN, g)?;
        probs[g] = gadget_failure(&row.counts_at(0.0), &prev.probs)?;
    }
    Ok(FailureVector {
        level: prev.level + 1,
        probs,
    })
}

/// Failure vectors for levels `1..=n`.
pub fn failure_ladder(
    setting: &PhysicalSetting,
    censuses: &CensusSet,
    n: u32,
) -> Result<Vec<FailureVector>, ModelError> {
    if n == 0 {
        return Err(ModelError::Level);
    }
    let mut out = Vec::with_capacity(n as usize);
    out.push(level1_failures(setting, censuses)?);
    for _ in 1..n {
        let v = next_level(out.last().unwrap(), censuses)?;
        out.push(v);
    }
    Ok(out)
}

/// Failure vector at level `n`.
pub fn recurse_failures(
    setting: &PhysicalSetting,
    censuses: &CensusSet,
    n: u32,
) -> Result<FailureVector, ModelError> {
    if n == 0 {
        return Err(ModelError::Level);
    }
    let mut v = level1_failures(setting, censuses)?;
    while v.level < n {
        v = next_level(&v, censuses)?;
    }
    Ok(v)
}

/// Monte-Carlo estimate of the probability of two or more faults.
///
/// Each location faults independently. Fault positions within a kind are
/// drawn by geometric skipping, so a trial costs O(1) when faults are rare.
/// Returns `(estimate, standard error)`.
pub fn mc_oracle(
    counts: &PerKind<f64>,
    probs: &PerKind<f64>,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64), ModelError> {
    if samples == 0 {
        return Err(ModelError::Samples);
    }
    let mut n = [0u64; 4];
    for (k, c) in counts.iter() {
        if !(c.is_finite() && c >= 0.0) {
            return Err(ModelError::Count {
                name: k.key().into(),
                value: c,
            });
        }
        if c.fract() != 0.0 {
            return Err(ModelError::NonInteger {
                name: k.key().into(),
                value: c,
            });
        }
        n[k.index()] = c as u64;
    }
    for (k, q) in probs.iter() {
        check_prob(k.key(), q)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut faults = 0u32;
        'kinds: for k in LocationKind::ALL {
            let (nk, q) = (n[k.index()], probs[k]);
            if nk == 0 || q == 0.0 {
                continue;
            }
            if q >= 1.0 {
                faults += nk.min(2) as u32;
                if faults >= 2 {
                    break 'kinds;
                }
                continue;
            }
            let log1mq = (-q).ln_1p();
            let mut pos = 0u64;
            loop {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let gap = (u.ln() / log1mq).floor();
                if gap >= (nk - pos) as f64 {
                    break;
                }
                pos += gap as u64 + 1;
                faults += 1;
                if faults >= 2 {
                    break 'kinds;
                }
            }
        }
        if faults >= 2 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    Ok((p, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::paper_census;
    use proptest::prelude::*;
    use LocationKind::*;

    fn kinds(pairs: &[(LocationKind, f64)]) -> PerKind<f64> {
        let mut p = PerKind::splat(0.0);
        for &(k, v) in pairs {
            p[k] = v;
        }
        p
    }

    /// Sum over every fault subset of size >= 2, one location at a time.
    fn subset_oracle(qs: &[f64]) -> f64 {
        let n = qs.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let mut p = 1.0;
            for (i, q) in qs.iter().enumerate() {
                p *= if mask >> i & 1 == 1 { *q } else { 1.0 - q };
            }
            total += p;
        }
        total
    }

    #[test]
    fn two_swaps() {
        let p = gadget_failure(&kinds(&[(Swap, 2.0)]), &kinds(&[(Swap, 0.1)])).unwrap();
        assert!((p - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_probabilities() {
        let c = kinds(&[(Memory, 934.0), (Swap, 408.0), (Readout, 40.0)]);
        assert_eq!(gadget_failure(&c, &PerKind::splat(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn small_enumeration() {
        let c = kinds(&[(Memory, 3.0), (Swap, 2.0)]);
        let q = kinds(&[(Memory, 0.01), (Swap, 0.02)]);
        let want = subset_oracle(&[0.01, 0.01, 0.01, 0.02, 0.02]);
        let got = gadget_failure(&c, &q).unwrap();
        assert!((got - want).abs() <= 1e-13 * want, "{got} vs {want}");
    }

    #[test]
    fn single_location_never_fails() {
        for q in [0.0, 1e-9, 0.3, 1.0] {
            assert_eq!(
                gadget_failure(&kinds(&[(Readout, 1.0)]), &kinds(&[(Readout, q)])).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn certain_faults() {
        assert_eq!(failure_probability(&[(2.0, 1.0)]).unwrap(), 1.0);
        assert_eq!(failure_probability(&[(1.0, 1.0), (1.0, 1.0)]).unwrap(), 1.0);
        let p = failure_probability(&[(1.0, 1.0), (3.0, 0.2)]).unwrap();
        assert!((p - (1.0 - 0.8f64.powi(3))).abs() < 1e-15);
        assert_eq!(failure_probability(&[(0.0, 1.0), (1.0, 0.5)]).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            failure_probability(&[(1.0, 1.5)]),
            Err(ModelError::Probability { .. })
        ));
        assert!(matches!(
            failure_probability(&[(-1.0, 0.5)]),
            Err(ModelError::Count { .. })
        ));
        assert!(PhysicalSetting::new(0.5, 3.0, 1.0, 1.0).is_err());
        assert!(PhysicalSetting::new(1e-6, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tiny_rates_keep_precision() {
        // Leading term of the expansion: (a^2 - sum n q^2) / 2.
        let n = 1000.0;
        let q = 1e-9;
        let p = failure_probability(&[(n, q)]).unwrap();
        let lead = n * (n - 1.0) / 2.0 * q * q;
        assert!((p / lead - 1.0).abs() < 1e-5, "{p} vs {lead}");
    }

    #[test]
    fn level1_zero_setting() {
        let s = PhysicalSetting::new(0.0, 0.1, 1.0, 10.0).unwrap();
        let v = level1_failures(&s, &paper_census()).unwrap();
        assert_eq!(v.probs, PerKind::splat(0.0));
        assert_eq!(
            recurse_failures(&s, &paper_census(), 5).unwrap().probs,
            PerKind::splat(0.0)
        );
    }

    #[test]
    fn base_case_matches_level1() {
        let s = PhysicalSetting::new(1e-6, 0.1, 1.0, 10.0).unwrap();
        let c = paper_census();
        assert_eq!(
            recurse_failures(&s, &c, 1).unwrap(),
            level1_failures(&s, &c).unwrap()
        );
        assert!(recurse_failures(&s, &c, 0).is_err());
    }

    #[test]
    fn gadget_ordering_on_grid() {
        let c = paper_census();
        for i in 0..=60 {
            let p = 1e-9 * 10f64.powf(i as f64 / 10.0);
            let v = level1_failures(&PhysicalSetting::new(p, 0.1, 1.0, 10.0).unwrap(), &c).unwrap();
            assert!(
                v.get(TGate) >= v.get(Swap) && v.get(Swap) >= v.get(Memory),
                "p0S={p}: {v:?}"
            );
        }
    }

    #[test]
    fn sub_threshold_suppression() {
        let s = PhysicalSetting::new(1e-7, 0.1, 1.0, 10.0).unwrap();
        let ladder = failure_ladder(&s, &paper_census(), 8).unwrap();
        for w in ladder[..7].windows(2) {
            assert!(w[1].get(TGate) < w[0].get(TGate));
        }
        // Level 8 lies below the smallest positive double and clamps to 0.
        assert!(ladder[7].get(TGate) <= ladder[6].get(TGate));
    }

    #[test]
    fn mc_two_swaps() {
        let c = kinds(&[(Swap, 2.0)]);
        let q = kinds(&[(Swap, 0.1)]);
        let (est, se) = mc_oracle(&c, &q, 1_000_000, 7).unwrap();
        assert!((est - 0.01).abs() <= 3.0 * se, "{est} ± {se}");
        assert_eq!(mc_oracle(&c, &q, 1_000_000, 7).unwrap(), (est, se));
    }

    #[test]
    fn mc_rejects_fractional_counts() {
        let c = kinds(&[(Swap, 2.5)]);
        assert!(matches!(
            mc_oracle(&c, &PerKind::splat(0.1), 10, 1),
            Err(ModelError::NonInteger { .. })
        ));
        assert!(matches!(
            mc_oracle(&c, &PerKind::splat(0.1), 0, 1),
            Err(ModelError::Samples)
        ));
    }

    #[test]
    fn mc_memory_census() {
        let c = paper_census();
        let counts = c.level1[&Memory].counts_at(10.0);
        assert_eq!(counts.0, [934.0, 408.0, 0.0, 40.0]);
        let q = PhysicalSetting::new(1e-4, 0.1, 1.0, 10.0)
            .unwrap()
            .location_probs();
        let exact = gadget_failure(&counts, &q).unwrap();
        let (est, se) = mc_oracle(&counts, &q, 1_000_000, 11).unwrap();
        assert!((est - exact).abs() <= 3.0 * se, "{est} ± {se} vs {exact}");
    }

    proptest! {
        #[test]
        fn matches_subset_enumeration(
            n in prop::array::uniform4(0u32..5),
            q in prop::array::uniform4(0.0f64..1.0),
        ) {
            let counts = PerKind(n.map(|x| x as f64));
            let probs = PerKind(q);
            let mut flat = Vec::new();
            for k in 0..4 {
                flat.extend(std::iter::repeat_n(q[k], n[k] as usize));
            }
            let want = subset_oracle(&flat);
            let got = gadget_failure(&counts, &probs).unwrap();
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{} vs {}", got, want);
        }

        #[test]
        fn monotone_in_each_rate(
            g in 0usize..4,
            k in 0usize..4,
            base in prop::array::uniform4(0.0f64..0.1),
            bump in 0.0f64..0.01,
        ) {
            let c = paper_census();
            let counts = c.leveln[&LocationKind::ALL[g]].counts_at(0.0);
            let lo = PerKind(base);
            let mut hi = lo;
            hi.0[k] = (hi.0[k] + bump).min(0.1);
            let (a, b) = (gadget_failure(&counts, &lo).unwrap(), gadget_failure(&counts, &hi).unwrap());
            // Near P = 1 the last bit can wobble; allow rounding-level slack only.
            prop_assert!(b >= a * (1.0 - 1e-12), "{} < {}", b, a);
        }

        #[test]
        fn quadratic_bound(g in 0usize..4, q in prop::array::uniform4(0.0f64..1e-6), tr in 0.0f64..1000.0) {
            let c = paper_census();
            let counts = c.level1[&LocationKind::ALL[g]].counts_at(tr);
            let probs = PerKind(q);
            let a: f64 = (0..4).map(|i| counts.0[i] * q[i]).sum();
            prop_assert!(gadget_failure(&counts, &probs).unwrap() <= a * a);
        }

        #[test]
        fn stays_in_unit_interval(n in prop::array::uniform4(0.0f64..1e4), q in prop::array::uniform4(0.0f64..=1.0)) {
            let p = gadget_failure(&PerKind(n), &PerKind(q)).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
