//! Dense probability mass functions on {0, …, N}.
//!
//! A [`Pmf`] stores the masses of a law on the non-negative integers up to
//! its last positive index, together with the tail mass that was cut off
//! when an infinite-support law (Poisson, geometric) was truncated. The
//! deficit is carried explicitly and never renormalized away, so
//! downstream tolerances can be stated as an analytic tolerance plus the
//! recorded deficit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{binomial_row, ln_factorial};

/// Allowed slack on `Σ probs + deficit = 1` for constructor outputs.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Slack accepted on deserialized input, which may have passed through
/// decimal text of limited precision.
pub const INPUT_NORMALIZATION_TOL: f64 = 1e-9;

/// Controls where infinite-support laws and convolutions are cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    tail_epsilon: f64,
    max_support: usize,
}

impl TruncationPolicy {
    pub const MAX_TAIL_EPSILON: f64 = 1e-6;

    pub fn new(tail_epsilon: f64, max_support: usize) -> Result<Self> {
        if !(tail_epsilon > 0.0 && tail_epsilon <= Self::MAX_TAIL_EPSILON) {
            return Err(domain(
                "TruncationPolicy",
                format!("tail_epsilon must lie in (0, 1e-6], got {tail_epsilon}"),
            ));
        }
        if max_support == 0 {
            return Err(domain("TruncationPolicy", "max_support must be at least 1"));
        }
        Ok(TruncationPolicy {
            tail_epsilon,
            max_support,
        })
    }

    pub fn tail_epsilon(&self) -> f64 {
        self.tail_epsilon
    }

    pub fn max_support(&self) -> usize {
        self.max_support
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_epsilon: 1e-12,
            max_support: 4096,
        }
    }
}

/// Indices of the first and last strictly positive masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Support {
    pub lo: usize,
    pub hi: usize,
    /// Every mass between `lo` and `hi` is strictly positive.
    pub interval: bool,
}

impl Support {
    fn scan(probs: &[f64]) -> Support {
        let lo = probs.iter().position(|&p| p > 0.0).unwrap_or(0);
        let hi = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let interval = probs[lo..=hi].iter().all(|&p| p > 0.0);
        Support { lo, hi, interval }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    probs: Vec<f64>,
    deficit: f64,
}

/// A probability mass function on {0, …, N} with a recorded truncation deficit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct Pmf {
    probs: Vec<f64>,
    deficit: f64,
    support: Support,
}

impl TryFrom<PmfRepr> for Pmf {
    type Error = Error;

    fn try_from(repr: PmfRepr) -> Result<Self> {
        Pmf::from_parts(repr.probs, repr.deficit)
    }
}

impl From<Pmf> for PmfRepr {
    fn from(p: Pmf) -> Self {
        PmfRepr {
            probs: p.probs,
            deficit: p.deficit,
        }
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("empty weight vector".into()));
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::InvalidWeights(format!("weight {i} is not finite")));
        }
        if w < 0.0 {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is negative ({w})"
            )));
        }
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::InvalidWeights("all weights are zero".into()));
    }
    Ok(())
}

impl Pmf {
    /// Wraps already-normalized masses. Trailing zeros are dropped.
    pub(crate) fn from_raw(mut probs: Vec<f64>, deficit: f64) -> Pmf {
        while probs.len() > 1 && probs[probs.len() - 1] == 0.0 {
            probs.pop();
        }
        if probs.is_empty() {
            probs.push(0.0);
        }
        let support = Support::scan(&probs);
        Pmf {
            probs,
            deficit: deficit.max(0.0),
            support,
        }
    }

    /// Normalizes non-negative weights into a law with zero deficit.
    pub fn from_weights(weights: &[f64]) -> Result<Pmf> {
        check_weights(weights)?;
        let total: f64 = weights.iter().sum();
        Ok(Pmf::from_raw(
            weights.iter().map(|w| w / total).collect(),
            0.0,
        ))
    }

    /// Validates masses and a deficit that already sum to one.
    pub fn from_parts(probs: Vec<f64>, deficit: f64) -> Result<Pmf> {
        check_weights(&probs)?;
        if !(deficit.is_finite() && deficit >= 0.0) {
            return Err(Error::InvalidWeights(format!(
                "deficit must be finite and non-negative, got {deficit}"
            )));
        }
        let total = probs.iter().sum::<f64>() + deficit;
        if (total - 1.0).abs() > INPUT_NORMALIZATION_TOL {
            return Err(Error::InvalidWeights(format!(
                "masses plus deficit sum to {total}, not 1"
            )));
        }
        Ok(Pmf::from_raw(probs, deficit))
    }

    /// δ_k.
    pub fn point_mass(k: usize) -> Pmf {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Pmf::from_raw(probs, 0.0)
    }

    /// Poisson(λ), cut at the smallest N whose tail beyond N is below
    /// `policy.tail_epsilon()`. Masses are evaluated in log-space.
    pub fn poisson(lambda: f64, policy: &TruncationPolicy) -> Result<Pmf> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(domain(
                "poisson",
                format!("rate must be finite and ≥ 0, got {lambda}"),
            ));
        }
        if lambda == 0.0 {
            return Ok(Pmf::point_mass(0));
        }
        let eps = policy.tail_epsilon;
        let ln_rate = lambda.ln();
        let limit = 2 * policy.max_support + 64;
        let mut terms = Vec::new();
        let mut remainder = None;
        for x in 0..=limit {
            let p = (-lambda + x as f64 * ln_rate - ln_factorial(x)).exp();
            terms.push(p);
            if x as f64 + 2.0 > lambda {
                // Σ_{y>x} P(y) ≤ P(x)·r/(1−r) with r = λ/(x+2) once terms decay.
                let r = lambda / (x as f64 + 2.0);
                let bound = p * r / (1.0 - r);
                if bound < eps * 1e-6 && p < eps {
                    remainder = Some(bound);
                    break;
                }
            }
        }
        let Some(remainder) = remainder else {
            return Err(Error::TruncationOverflow {
                max_support: policy.max_support,
                epsilon: eps,
                tail: f64::NAN,
            });
        };
        cut_tail(terms, remainder, policy)
    }

    /// Binomial(n, p).
    pub fn binomial(n: usize, p: f64) -> Result<Pmf> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain("binomial", format!("p must lie in [0, 1], got {p}")));
        }
        Ok(Pmf::from_raw(binomial_row(n, p), 0.0))
    }

    /// Geometric law P(k) = p(1−p)^k on {0, 1, …}, truncated like [`Pmf::poisson`].
    pub fn geometric(p: f64, policy: &TruncationPolicy) -> Result<Pmf> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(domain(
                "geometric",
                format!("p must lie in (0, 1], got {p}"),
            ));
        }
        if p == 1.0 {
            return Ok(Pmf::point_mass(0));
        }
        let q = 1.0 - p;
        let eps = policy.tail_epsilon;
        // Tail beyond N is exactly q^(N+1).
        let mut m = ((eps.ln() / q.ln()).ceil().max(1.0)) as usize;
        while q.powi(m as i32) >= eps {
            m += 1;
        }
        while m > 1 && q.powi(m as i32 - 1) < eps {
            m -= 1;
        }
        let n = m - 1;
        if n > policy.max_support {
            return Err(Error::TruncationOverflow {
                max_support: policy.max_support,
                epsilon: eps,
                tail: q.powi(policy.max_support as i32 + 1),
            });
        }
        let probs = (0..=n).map(|k| p * q.powi(k as i32)).collect();
        Ok(Pmf::from_raw(probs, q.powi(m as i32)))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P(i), reading indices past the stored range as zero.
    pub fn at(&self, i: usize) -> f64 {
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    /// Number of stored masses (N + 1).
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Support, or an error naming `op` if it has interior zeros.
    pub fn interval_support(&self, op: &'static str) -> Result<Support> {
        if self.support.interval {
            Ok(self.support)
        } else {
            Err(Error::NotIntervalSupported { op })
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(x, &p)| x as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(x, &p)| {
                let d = x as f64 - m;
                d * d * p
            })
            .sum()
    }

    /// E[X(X−1)⋯(X−r+1)].
    pub fn falling_moment(&self, r: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .skip(r)
            .map(|(x, &p)| (0..r).map(|j| (x - j) as f64).product::<f64>() * p)
            .sum()
    }

    /// Law of the independent sum, re-truncated to `policy.max_support()`.
    pub fn convolve(&self, other: &Pmf, policy: &TruncationPolicy) -> Result<Pmf> {
        let (a, b) = (&self.probs, &other.probs);
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &pa) in a.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (j, &pb) in b.iter().enumerate() {
                out[i + j] += pa * pb;
            }
        }
        let deficit = self.deficit + other.deficit - self.deficit * other.deficit;
        retruncate(out, deficit, policy)
    }

    /// Σ P(x) tᵡ by Horner's rule.
    pub fn pgf(&self, t: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, &p| acc * t + p)
    }

    /// ½ Σ |P(x) − Q(x)| plus ½ |deficit_P − deficit_Q|.
    pub fn total_variation(&self, other: &Pmf) -> f64 {
        let n = self.len().max(other.len());
        let body: f64 = (0..n).map(|i| (self.at(i) - other.at(i)).abs()).sum();
        0.5 * body + 0.5 * (self.deficit - other.deficit).abs()
    }
}

/// Cuts a full term list at the first index whose tail is below epsilon.
fn cut_tail(terms: Vec<f64>, remainder: f64, policy: &TruncationPolicy) -> Result<Pmf> {
    let eps = policy.tail_epsilon;
    // tail[n] = Σ_{x>n} terms[x] + remainder, accumulated from the small end.
    let mut tail = vec![0.0; terms.len()];
    let mut acc = remainder;
    for n in (0..terms.len()).rev() {
        tail[n] = acc;
        acc += terms[n];
    }
    let cut = tail
        .iter()
        .position(|&t| t < eps)
        .unwrap_or(terms.len() - 1);
    if cut > policy.max_support {
        return Err(Error::TruncationOverflow {
            max_support: policy.max_support,
            epsilon: eps,
            tail: tail[policy.max_support.min(tail.len() - 1)],
        });
    }
    let deficit = tail[cut];
    let mut terms = terms;
    terms.truncate(cut + 1);
    Ok(Pmf::from_raw(terms, deficit))
}

/// Moves mass beyond `max_support` into the deficit.
pub(crate) fn retruncate(
    mut probs: Vec<f64>,
    deficit: f64,
    policy: &TruncationPolicy,
) -> Result<Pmf> {
    let cap = policy.max_support + 1;
    if probs.len() > cap {
        let moved: f64 = probs[cap..].iter().sum();
        if moved >= policy.tail_epsilon {
            return Err(Error::TruncationOverflow {
                max_support: policy.max_support,
                epsilon: policy.tail_epsilon,
                tail: moved,
            });
        }
        probs.truncate(cap);
        return Ok(Pmf::from_raw(probs, deficit + moved));
    }
    Ok(Pmf::from_raw(probs, deficit))
}
