//! Log-concavity classes, the scaled score, and generators of class members.
//!
//! A sequence u is log-concave (LC) when u(i)² ≥ u(i+1)u(i−1) and ultra
//! log-concave (ULC) when i·u(i)² ≥ (i+1)u(i+1)u(i−1). For a law P with
//! mean λ, ULC is equivalent to the score
//! ρ(i) = (i+1)P(i+1)/(λP(i)) − 1 being decreasing; ρ ≡ 0 exactly for
//! Poisson(λ).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::pmf::{Pmf, TruncationPolicy};

/// Relative tolerance under which an inequality is reported as tight.
pub const TIGHT_REL_TOL: f64 = 1e-9;

/// Tolerance used by [`is_score_decreasing`], relative to max(1, |ρ|).
pub const SCORE_SLACK: f64 = 1e-9;

/// Outcome of an LC/ULC check over the interior of the support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub pass: bool,
    /// Smallest lhs − rhs over interior indices (0 when there are none).
    pub min_margin: f64,
    pub argmin: Option<usize>,
    pub slack: f64,
    /// Every interior inequality holds with equality, up to [`TIGHT_REL_TOL`].
    #[serde(skip)]
    pub all_tight: bool,
    /// min(0, smallest (lhs − rhs)/max(1, |lhs|, |rhs|)); the check passes
    /// iff this is ≥ −slack.
    #[serde(skip)]
    pub min_relative_margin: f64,
}

fn check_interior<F>(p: &Pmf, slack: f64, op: &'static str, sides: F) -> Result<MarginReport>
where
    F: Fn(usize) -> (f64, f64),
{
    if !(slack >= 0.0) {
        return Err(domain(op, format!("slack must be ≥ 0, got {slack}")));
    }
    let support = p.interval_support(op)?;
    let mut report = MarginReport {
        pass: true,
        min_margin: 0.0,
        argmin: None,
        slack,
        all_tight: true,
        min_relative_margin: 0.0,
    };
    // Boundary indices have a zero right-hand side and hold trivially.
    for i in support.lo + 1..support.hi {
        let (lhs, rhs) = sides(i);
        let margin = lhs - rhs;
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        if margin < -slack * scale {
            report.pass = false;
        }
        report.min_relative_margin = report.min_relative_margin.min(margin / scale);
        if margin.abs() > TIGHT_REL_TOL * lhs.abs().max(rhs.abs()) {
            report.all_tight = false;
        }
        if report.argmin.is_none() || margin < report.min_margin {
            report.min_margin = margin;
            report.argmin = Some(i);
        }
    }
    Ok(report)
}

/// u(i)² ≥ u(i+1)u(i−1), up to `slack · max(1, |lhs|, |rhs|)`.
pub fn is_log_concave(p: &Pmf, slack: f64) -> Result<MarginReport> {
    check_interior(p, slack, "is_log_concave", |i| {
        (p.at(i) * p.at(i), p.at(i + 1) * p.at(i - 1))
    })
}

/// i·u(i)² ≥ (i+1)u(i+1)u(i−1), up to `slack · max(1, |lhs|, |rhs|)`.
pub fn is_ultra_log_concave(p: &Pmf, slack: f64) -> Result<MarginReport> {
    check_interior(p, slack, "is_ultra_log_concave", |i| {
        (
            i as f64 * p.at(i) * p.at(i),
            (i + 1) as f64 * p.at(i + 1) * p.at(i - 1),
        )
    })
}

/// Newton-inequality margins i(n−i)P(i)² − (i+1)(n−i+1)P(i+1)P(i−1) for
/// i = 1..n−1. All of them are ≥ 0 exactly when P/C(n, ·) is log-concave.
pub fn ulc_order_n_margin(p: &Pmf, n: usize) -> Result<Vec<f64>> {
    if p.support().hi > n {
        return Err(domain(
            "ulc_order_n_margin",
            format!("support reaches {} beyond n = {n}", p.support().hi),
        ));
    }
    Ok((1..n)
        .map(|i| {
            let lhs = (i * (n - i)) as f64 * p.at(i) * p.at(i);
            let rhs = ((i + 1) * (n - i + 1)) as f64 * p.at(i + 1) * p.at(i - 1);
            lhs - rhs
        })
        .collect())
}

/// ρ on the support interval [lo, hi]; ρ(hi) = −1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector {
    pub lo: usize,
    pub values: Vec<f64>,
    pub lambda: f64,
}

impl ScoreVector {
    /// ρ(i), or `None` outside the support.
    pub fn get(&self, i: usize) -> Option<f64> {
        i.checked_sub(self.lo)
            .and_then(|k| self.values.get(k).copied())
    }

    pub fn hi(&self) -> usize {
        self.lo + self.values.len() - 1
    }
}

fn check_lambda(op: &'static str, lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(
            op,
            format!("λ must be positive and finite, got {lambda}"),
        ))
    }
}

/// ρ(i) = (i+1)P(i+1)/(λP(i)) − 1 for lo ≤ i ≤ hi.
pub fn score(p: &Pmf, lambda: f64) -> Result<ScoreVector> {
    check_lambda("score", lambda)?;
    let support = p.interval_support("score")?;
    let values = (support.lo..=support.hi)
        .map(|i| (i + 1) as f64 * p.at(i + 1) / (lambda * p.at(i)) - 1.0)
        .collect();
    Ok(ScoreVector {
        lo: support.lo,
        values,
        lambda,
    })
}

/// The product P(z)ρ(z) = (z+1)P(z+1)/λ − P(z) for z = 0..=hi, written so
/// that it stays finite where P(z) = 0.
pub fn score_times_mass(p: &Pmf, lambda: f64) -> Vec<f64> {
    (0..p.len())
        .map(|z| (z + 1) as f64 * p.at(z + 1) / lambda - p.at(z))
        .collect()
}

/// True iff ρ(i+1) ≤ ρ(i) + [`SCORE_SLACK`]·max(1, |ρ(i)|, |ρ(i+1)|) on the support.
pub fn is_score_decreasing(p: &Pmf, lambda: f64) -> Result<bool> {
    let rho = score(p, lambda)?;
    Ok(rho.values.windows(2).all(|w| {
        let scale = 1f64.max(w[0].abs()).max(w[1].abs());
        w[1] <= w[0] + SCORE_SLACK * scale
    }))
}

/// Law of a sum of independent Bernoulli(pᵢ).
pub fn bernoulli_sum(ps: &[f64]) -> Result<Pmf> {
    if let Some(bad) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(domain(
            "bernoulli_sum",
            format!("parameter {bad} outside [0, 1]"),
        ));
    }
    let mut probs = vec![1.0];
    for &p in ps {
        let mut next = vec![0.0; probs.len() + 1];
        for (k, &m) in probs.iter().enumerate() {
            next[k] += m * (1.0 - p);
            next[k + 1] += m * p;
        }
        probs = next;
    }
    Ok(Pmf::from_raw(probs, 0.0))
}

/// Exponential tilt P_θ(i) ∝ exp(log_masses[i])·θⁱ solved for mean λ by
/// bisection on ln θ. Masses that underflow are dropped from the tail.
fn tilt_log_masses(log_masses: &[f64], lambda: f64) -> Result<Pmf> {
    let top = (log_masses.len() - 1) as f64;
    if !(lambda > 0.0 && lambda < top) {
        return Err(Error::Sampler {
            target: lambda,
            detail: format!("mean must lie strictly inside (0, {top})"),
        });
    }
    let tilted = |t: f64| -> Vec<f64> {
        let logs: Vec<f64> = log_masses
            .iter()
            .enumerate()
            .map(|(i, &l)| l + i as f64 * t)
            .collect();
        let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    };
    let mean_at = |t: f64| -> f64 {
        tilted(t)
            .iter()
            .enumerate()
            .map(|(i, &p)| i as f64 * p)
            .sum()
    };

    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while mean_at(lo) >= lambda {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::Sampler {
                target: lambda,
                detail: "lower bracket not found".into(),
            });
        }
    }
    while mean_at(hi) <= lambda {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Sampler {
                target: lambda,
                detail: "upper bracket not found".into(),
            });
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_at(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut probs = tilted(0.5 * (lo + hi));
    for p in probs.iter_mut() {
        if *p < f64::MIN_POSITIVE {
            *p = 0.0;
        }
    }
    let pmf = Pmf::from_raw(probs, 0.0);
    if !pmf.support().interval {
        return Err(Error::Sampler {
            target: lambda,
            detail: "tilted masses underflowed inside the support".into(),
        });
    }
    Ok(pmf)
}

/// Exponentially tilts an interval-supported law to have mean λ. Tilting
/// multiplies every ratio (i+1)P(i+1)/P(i) by θ, so LC and ULC are kept.
pub fn tilt_to_mean(p: &Pmf, lambda: f64) -> Result<Pmf> {
    p.interval_support("tilt_to_mean")?;
    let logs: Vec<f64> = p.probs().iter().map(|&x| x.ln()).collect();
    tilt_log_masses(&logs, lambda)
}

/// The ULC law on {0, …, ratios.len()} whose ratios (i+1)P(i+1)/P(i) are
/// proportional to `ratios`, tilted to mean λ. Ratios must be positive and
/// non-increasing.
pub fn ulc_from_ratios(ratios: &[f64], lambda: f64) -> Result<Pmf> {
    if ratios.is_empty() {
        return Err(domain("ulc_from_ratios", "need at least one ratio"));
    }
    if ratios.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(domain(
            "ulc_from_ratios",
            "ratios must be positive and finite",
        ));
    }
    if ratios.windows(2).any(|w| w[1] > w[0]) {
        return Err(domain("ulc_from_ratios", "ratios must be non-increasing"));
    }
    let mut logs = Vec::with_capacity(ratios.len() + 1);
    logs.push(0.0);
    for (i, &r) in ratios.iter().enumerate() {
        let prev = logs[i];
        logs.push(prev + r.ln() - ((i + 1) as f64).ln());
    }
    tilt_log_masses(&logs, lambda)
}

/// Deterministic RNG used by every sampler in this crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random ULC law with mean λ on {0, …, M}, M ≤ `max_support`.
///
/// Ratios are r(i) = b + s·Σ_{j>i} eⱼ with eⱼ ~ Exp(1), a baseline b ≥ 0 and
/// a log-uniform spread s; small s relative to b gives near-Poisson laws
/// and b = 0 gives binomial-like ones.
pub fn random_ulc(lambda: f64, max_support: usize, seed: u64) -> Result<Pmf> {
    check_lambda("random_ulc", lambda)?;
    let lower = lambda.floor() as usize + 2;
    if lower > max_support {
        return Err(Error::Sampler {
            target: lambda,
            detail: format!("max_support {max_support} cannot hold mean {lambda}"),
        });
    }
    let mut rng = seeded_rng(seed);
    let m = rng.random_range(lower..=max_support);
    let spread = 10f64.powf(rng.random_range(-2.0..1.0));
    let baseline: f64 = rng.sample::<f64, _>(Exp1) * rng.random_range(0.0..1.0);
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let mut ratios = vec![0.0; m];
    let mut acc = 0.0;
    for i in (0..m).rev() {
        acc += spread * draws[i];
        ratios[i] = baseline + acc;
    }
    ulc_from_ratios(&ratios, lambda)
}

/// A random log-concave law on {0, …, M}, M ≤ `max_support`: log-masses with
/// decreasing increments.
pub fn random_log_concave(max_support: usize, seed: u64) -> Result<Pmf> {
    if max_support == 0 {
        return Err(domain("random_log_concave", "max_support must be ≥ 1"));
    }
    let mut rng = seeded_rng(seed);
    let m = rng.random_range(1..=max_support);
    let start = rng.random_range(-1.0..1.5);
    let spread = 10f64.powf(rng.random_range(-2.0..0.0));
    let mut logs = vec![0.0];
    let mut step = start;
    for _ in 0..m {
        let prev = *logs.last().unwrap();
        logs.push(prev + step);
        step -= spread * rng.sample::<f64, _>(Exp1);
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    // Drop an underflowed tail so the support stays an interval.
    while w.len() > 1 && w[w.len() - 1] < 1e-280 {
        w.pop();
    }
    Pmf::from_weights(&w)
}

/// A random interval-supported law on {0, …, M}, M ≤ `max_support`, with no
/// shape constraint.
pub fn random_interval_pmf(max_support: usize, seed: u64) -> Result<Pmf> {
    let mut rng = seeded_rng(seed);
    let m = rng.random_range(1..=max_support.max(1));
    let w: Vec<f64> = (0..=m).map(|_| rng.random_range(0.02..1.0)).collect();
    Pmf::from_weights(&w)
}

/// max_w |ρ_{U+V}(w) − E[αρ_U(U) + (1−α)ρ_V(V) | U+V = w]| with
/// α = E U/(E U + E V), for independent U and V supported on intervals
/// starting at 0.
pub fn score_projection_residual(u: &Pmf, v: &Pmf) -> Result<f64> {
    const OP: &str = "score_projection_residual";
    for p in [u, v] {
        let s = p.interval_support(OP)?;
        if s.lo != 0 {
            return Err(domain(OP, "support must start at 0"));
        }
        if p.mean() <= 0.0 {
            return Err(domain(OP, "means must be positive"));
        }
    }
    let (lu, lv) = (u.mean(), v.mean());
    let alpha = lu / (lu + lv);
    let rho_u = score(u, lu)?;
    let rho_v = score(v, lv)?;
    let policy = TruncationPolicy::new(TruncationPolicy::MAX_TAIL_EPSILON, u.len() + v.len())?;
    let w = u.convolve(v, &policy)?;
    let rho_w = score(&w, lu + lv)?;
    let mut worst = 0.0f64;
    for s in 0..w.len() {
        let mut num = 0.0;
        let mut den = 0.0;
        for a in s.saturating_sub(v.len() - 1)..=s.min(u.len() - 1) {
            let joint = u.at(a) * v.at(s - a);
            let proj = alpha * rho_u.get(a).unwrap() + (1.0 - alpha) * rho_v.get(s - a).unwrap();
            num += proj * joint;
            den += joint;
        }
        let lhs = rho_w.get(s).unwrap();
        worst = worst.max((lhs - num / den).abs());
    }
    Ok(worst)
}

/// P(X ≥ 2)/P(X > 0), from the stored masses.
pub fn conditional_tail_ratio(p: &Pmf) -> Result<f64> {
    let positive: f64 = p.probs().iter().skip(1).sum();
    if positive <= 0.0 {
        return Err(domain("conditional_tail_ratio", "P(X > 0) = 0"));
    }
    let two_plus: f64 = p.probs().iter().skip(2).sum();
    Ok(two_plus / positive)
}

/// (e^λ − λ − 1)/λ, the bound on P(X ≥ 2 | X > 0) over ULC laws of mean λ.
pub fn conditional_tail_bound(lambda: f64) -> f64 {
    (lambda.exp_m1() - lambda) / lambda
}
