//! Entropy and information functionals, in nats, plus the difference
//! operators Δ, Δ* and the M/M/∞ generator.
//!
//! Sums use the 0·log 0 = 0 convention. Divergences whose support condition
//! fails evaluate to `f64::INFINITY` instead of erroring, so candidates can
//! still be ranked.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::pmf::Pmf;
use crate::special::ln_factorial;

/// A functional value together with the slack it inherits from truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub deficit_budget: f64,
}

impl FunctionalValue {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// Bound on what a truncated tail of mass d can contribute to an entropy-type
/// sum over a support of `len` points: d·(1 + ln len + ln(1/d)).
pub fn deficit_budget(deficit: f64, len: usize) -> f64 {
    if deficit <= 0.0 {
        0.0
    } else {
        deficit * (1.0 + (len.max(1) as f64).ln() - deficit.ln())
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// H(P) = −Σ P log P.
pub fn entropy(p: &Pmf) -> FunctionalValue {
    FunctionalValue {
        value: -p.probs().iter().map(|&x| xlogx(x)).sum::<f64>(),
        deficit_budget: deficit_budget(p.deficit(), p.len()),
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

/// −log Π_λ(x) = λ − x log λ + log x!.
pub fn neg_log_poisson(x: usize, lambda: f64) -> f64 {
    lambda - x as f64 * lambda.ln() + ln_factorial(x)
}

/// Λ(P) = −Σ P(x) log Π_λ(x).
pub fn lambda_functional(p: &Pmf, lambda: f64) -> Result<FunctionalValue> {
    check_lambda("lambda_functional", lambda)?;
    let value = p
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(x, &m)| m * neg_log_poisson(x, lambda))
        .sum();
    Ok(FunctionalValue {
        value,
        deficit_budget: deficit_budget(p.deficit(), p.len()),
    })
}

/// D(P‖Q) = Σ P log(P/Q); infinite when P charges a point Q does not.
pub fn relative_entropy(p: &Pmf, q: &Pmf) -> FunctionalValue {
    let mut value = 0.0;
    for (x, &a) in p.probs().iter().enumerate() {
        if a > 0.0 {
            let b = q.at(x);
            if b <= 0.0 {
                value = f64::INFINITY;
                break;
            }
            value += a * (a / b).ln();
        }
    }
    FunctionalValue {
        value,
        deficit_budget: deficit_budget(p.deficit() + q.deficit(), p.len().max(q.len())),
    }
}

/// D(P‖Π_λ), with log Π_λ evaluated analytically rather than from a table.
pub fn relative_entropy_to_poisson(p: &Pmf, lambda: f64) -> Result<FunctionalValue> {
    check_lambda("relative_entropy_to_poisson", lambda)?;
    let value = p
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(x, &m)| m * (m.ln() + neg_log_poisson(x, lambda)))
        .sum();
    Ok(FunctionalValue {
        value,
        deficit_budget: deficit_budget(p.deficit(), p.len()),
    })
}

/// Σ (a − b) log(a/b) over two mass sequences, infinite on a one-sided zero.
pub(crate) fn symmetrized_sum(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let mut total = 0.0;
    for x in 0..n {
        let u = a.get(x).copied().unwrap_or(0.0);
        let v = b.get(x).copied().unwrap_or(0.0);
        match (u > 0.0, v > 0.0) {
            (true, true) => total += (u - v) * (u / v).ln(),
            (false, false) => {}
            _ => return f64::INFINITY,
        }
    }
    total
}

/// D(P‖Q) + D(Q‖P) = Σ (P − Q) log(P/Q).
pub fn symmetrized_kl(p: &Pmf, q: &Pmf) -> FunctionalValue {
    FunctionalValue {
        value: symmetrized_sum(p.probs(), q.probs()),
        deficit_budget: deficit_budget(p.deficit() + q.deficit(), p.len().max(q.len())),
    }
}

/// Σ_z (z+1)²P(z+1)²/(λ²P(z)). Equals 1 + Σ Pρ² when λ = mean(P), so it is
/// ≥ 1 with equality only at Π_λ.
pub fn cr_functional_1(p: &Pmf, lambda: f64) -> Result<f64> {
    check_lambda("cr_functional_1", lambda)?;
    let support = p.interval_support("cr_functional_1")?;
    if support.lo != 0 {
        return Err(domain("cr_functional_1", "support must start at 0"));
    }
    Ok((0..=support.hi)
        .map(|z| {
            let r = (z + 1) as f64 * p.at(z + 1) / lambda;
            r * r / p.at(z)
        })
        .sum())
}

/// Σ_{z≥1} P(z−1)²/(z P(z)), ≥ 1/λ when λ = mean(P).
///
/// If P has no deficit its support really ends at hi, and the z = hi+1 term
/// P(hi)²/((hi+1)·0) makes the sum +∞. With a deficit that term depends on
/// the truncated tail and is left out.
pub fn cr_functional_2(p: &Pmf, lambda: f64) -> Result<f64> {
    check_lambda("cr_functional_2", lambda)?;
    let support = p.interval_support("cr_functional_2")?;
    if p.deficit() == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((support.lo.max(1)..=support.hi)
        .map(|z| {
            let prev = p.at(z - 1);
            prev * prev / (z as f64 * p.at(z))
        })
        .sum())
}

/// (Δf)(x) = f(x+1) − f(x) for x = 0..f.len(), reading f beyond its end as 0.
pub fn delta(f: &[f64]) -> Vec<f64> {
    (0..f.len())
        .map(|x| f.get(x + 1).copied().unwrap_or(0.0) - f[x])
        .collect()
}

/// (Δ*f)(x) = f(x−1) − f(x) for x = 0..=f.len(), reading f(−1) and f(len) as 0.
pub fn delta_star(f: &[f64]) -> Vec<f64> {
    (0..=f.len())
        .map(|x| {
            let prev = if x == 0 { 0.0 } else { f[x - 1] };
            prev - f.get(x).copied().unwrap_or(0.0)
        })
        .collect()
}

/// (Lf)(z) = −λ(ΔΔ*f)(z) + (z−λ)(Δ*f)(z) = λ(Δf)(z) + z(Δ*f)(z), for
/// z = 0..f.len() with f zero-extended.
pub fn mm_infty_generator(f: &[f64], lambda: f64) -> Vec<f64> {
    let ds = delta_star(f);
    let dds = delta(&ds);
    (0..f.len())
        .map(|z| -lambda * dds[z] + (z as f64 - lambda) * ds[z])
        .collect()
}
