//! Thinning, Poisson addition and the mean-preserving map `U_α`.
//!
//! * `T_α` replaces a count X by Binomial(X, α) ([`thin`]).
//! * `S_β` adds an independent Poisson(β) ([`add_poisson`]).
//! * `V_{α,β} = S_β ∘ T_α` ([`v_map`]) and `U_α = V_{α, λ(1−α)}` ([`u_map`]),
//!   which keeps the mean λ fixed and interpolates between X (α = 1) and
//!   Poisson(λ) (α = 0), with `U_{α₁} ∘ U_{α₂} = U_{α₁α₂}`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::pmf::{Pmf, TruncationPolicy};
use crate::special::binomial_row;

/// Largest |mean(P) − λ| accepted by [`u_map`] before deficit slack.
pub const MEAN_MATCH_TOL: f64 = 1e-9;

fn check_alpha(op: &'static str, alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(domain(op, format!("α must lie in [0, 1], got {alpha}")))
    }
}

/// Binomial thinning `T_α`: (T_α P)(z) = Σ_{x≥z} P(x) C(x,z) αᶻ (1−α)^{x−z}.
pub fn thin(p: &Pmf, alpha: f64) -> Result<Pmf> {
    check_alpha("thin", alpha)?;
    if alpha == 1.0 {
        return Ok(p.clone());
    }
    let mut out = vec![0.0; p.len()];
    if alpha == 0.0 {
        out[0] = p.total_mass();
    } else {
        for (x, &px) in p.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (z, b) in binomial_row(x, alpha).into_iter().enumerate() {
                out[z] += px * b;
            }
        }
    }
    Ok(Pmf::from_raw(out, p.deficit()))
}

/// `S_β`: convolution with Poisson(β).
pub fn add_poisson(p: &Pmf, beta: f64, policy: &TruncationPolicy) -> Result<Pmf> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(domain(
            "add_poisson",
            format!("β must be finite and ≥ 0, got {beta}"),
        ));
    }
    if beta == 0.0 {
        return Ok(p.clone());
    }
    p.convolve(&Pmf::poisson(beta, policy)?, policy)
}

/// `V_{α,β} = S_β ∘ T_α`.
pub fn v_map(p: &Pmf, alpha: f64, beta: f64, policy: &TruncationPolicy) -> Result<Pmf> {
    add_poisson(&thin(p, alpha)?, beta, policy)
}

/// Mean slack granted to inputs that carry a truncation deficit.
pub(crate) fn mean_slack(p: &Pmf) -> f64 {
    MEAN_MATCH_TOL + p.deficit() * p.len() as f64
}

/// `U_α = V_{α, λ(1−α)}`. Refuses inputs whose mean is not λ.
pub fn u_map(p: &Pmf, alpha: f64, lambda: f64, policy: &TruncationPolicy) -> Result<Pmf> {
    check_alpha("u_map", alpha)?;
    let measured = p.mean();
    if !((measured - lambda).abs() <= mean_slack(p)) {
        return Err(Error::MeanMismatch {
            expected: lambda,
            measured,
        });
    }
    v_map(p, alpha, lambda * (1.0 - alpha), policy)
}

/// (z+1)P(z+1)/λ for z = 0..N−1; an unnormalized sequence unless λ = mean(P).
pub(crate) fn size_biased_masses(p: &Pmf, lambda: f64) -> Vec<f64> {
    (0..p.len().saturating_sub(1))
        .map(|z| (z + 1) as f64 * p.at(z + 1) / lambda)
        .collect()
}

/// (z+2)(z+1)P(z+2)/λ² for z = 0..N−2.
pub(crate) fn second_size_biased_masses(p: &Pmf, lambda: f64) -> Vec<f64> {
    (0..p.len().saturating_sub(2))
        .map(|z| ((z + 2) * (z + 1)) as f64 * p.at(z + 2) / (lambda * lambda))
        .collect()
}

/// Size-biased law P̃(z) = (z+1)P(z+1)/λ with λ = mean(P).
pub fn size_bias(p: &Pmf) -> Result<Pmf> {
    let lambda = p.mean();
    if lambda <= 0.0 {
        return Err(domain("size_bias", "mean must be positive"));
    }
    let mut masses = size_biased_masses(p, lambda);
    if masses.is_empty() {
        masses.push(0.0);
    }
    Ok(Pmf::from_raw(masses, 0.0))
}

/// Output of [`size_bias2`]; `total` is E X(X−1)/λ² and need not equal one.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondSizeBias {
    pub masses: Vec<f64>,
    pub total: f64,
}

/// P̃̃(z) = (z+2)(z+1)P(z+2)/λ² with λ = mean(P), left unnormalized.
pub fn size_bias2(p: &Pmf) -> Result<SecondSizeBias> {
    let lambda = p.mean();
    if lambda <= 0.0 || p.falling_moment(2) <= 0.0 {
        return Err(domain(
            "size_bias2",
            "mean and second falling moment must be positive",
        ));
    }
    let masses = second_size_biased_masses(p, lambda);
    let total = masses.iter().sum();
    Ok(SecondSizeBias { masses, total })
}

/// Which Poisson-rate path α ↦ f(α) a [`FlowPath`] follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// f ≡ 0: pure thinning.
    ConstantZero,
    /// f(α) = λ(1−α): the mean-preserving `U_α`.
    UFlow,
    Custom,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A path α ↦ `V_{α, f(α)}` together with g(α) = f(α)/α − f′(α).
#[derive(Clone)]
pub struct FlowPath {
    lambda: f64,
    kind: PathKind,
    rate: ScalarFn,
    drift: ScalarFn,
}

impl fmt::Debug for FlowPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowPath")
            .field("lambda", &self.lambda)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// Tolerance for the g-consistency check on custom paths.
pub const PATH_CONSISTENCY_TOL: f64 = 1e-6;

impl FlowPath {
    pub fn constant_zero(lambda: f64) -> FlowPath {
        FlowPath {
            lambda,
            kind: PathKind::ConstantZero,
            rate: Arc::new(|_| 0.0),
            drift: Arc::new(|_| 0.0),
        }
    }

    pub fn u_flow(lambda: f64) -> Result<FlowPath> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(domain(
                "FlowPath::u_flow",
                format!("λ must be ≥ 0, got {lambda}"),
            ));
        }
        Ok(FlowPath {
            lambda,
            kind: PathKind::UFlow,
            rate: Arc::new(move |a| lambda * (1.0 - a)),
            drift: Arc::new(move |a| lambda / a),
        })
    }

    /// A caller-supplied path. `drift` must equal f(α)/α − f′(α); this is
    /// checked against a central-difference derivative on α ∈ {0.1, …, 0.9}.
    pub fn custom<F, G>(lambda: f64, rate: F, drift: G) -> Result<FlowPath>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        const H: f64 = 1e-5;
        for k in 1..10 {
            let a = k as f64 / 10.0;
            let f = rate(a);
            if !(f.is_finite() && f >= 0.0) {
                return Err(domain(
                    "FlowPath::custom",
                    format!("f({a}) = {f} is not a rate"),
                ));
            }
            let df = (rate(a + H) - rate(a - H)) / (2.0 * H);
            let expected = f / a - df;
            let got = drift(a);
            if !((got - expected).abs() <= PATH_CONSISTENCY_TOL) {
                return Err(domain(
                    "FlowPath::custom",
                    format!("g({a}) = {got} but f/α − f′ = {expected}"),
                ));
            }
        }
        Ok(FlowPath {
            lambda,
            kind: PathKind::Custom,
            rate: Arc::new(rate),
            drift: Arc::new(drift),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// f(α).
    pub fn rate(&self, alpha: f64) -> f64 {
        (self.rate)(alpha)
    }

    /// g(α).
    pub fn drift(&self, alpha: f64) -> f64 {
        (self.drift)(alpha)
    }

    /// `V_{α, f(α)} X`.
    pub fn state(&self, x: &Pmf, alpha: f64, policy: &TruncationPolicy) -> Result<Pmf> {
        v_map(x, alpha, self.rate(alpha).max(0.0), policy)
    }
}
