//! Derivatives along α ↦ `V_{α,f(α)} X`, in particular the mean-preserving
//! flow P_α = U_α X.
//!
//! The closed forms here are cross-checked against the finite-difference
//! helpers in this module. Along the u-flow
//! ∂P_α/∂α = (λ/α) Δ*(P_α ρ_α), and with it
//!
//! * ∂Λ/∂α = (λ/α) Σ Pρ log((z+1)/λ),
//! * ∂²Λ/∂α² = (λ²/α²) Σ Pρ (z/λ·log((z+1)/z) − log((z+2)/(z+1))),
//! * ∂D/∂α = (λ/α) Σ (P̃ − P) log(P̃/P),
//! * ∂²D/∂α² = (λ²/α²) Σ (P̃̃ − 2P̃ + P) log(P̃̃P/P̃²) + Σ (∂P/∂α)²/P.
//!
//! A state with zero deficit has genuinely finite support; the D terms that
//! reach past its top are then infinite and reported as `f64::INFINITY`.
//! With a positive deficit, terms that would read masses beyond the stored
//! range are dropped, which is within the truncation budget.

use serde::Serialize;

use crate::concavity::score_times_mass;
use crate::error::{domain, Error, Result};
use crate::functionals::{
    deficit_budget, entropy, lambda_functional, neg_log_poisson, relative_entropy_to_poisson,
    symmetrized_sum,
};
use crate::pmf::{Pmf, TruncationPolicy};
use crate::transforms::{
    mean_slack, second_size_biased_masses, size_biased_masses, u_map, FlowPath, PathKind,
};

/// Step used for the heat residual recorded in a [`FlowCurve`].
pub const CURVE_HEAT_STEP: f64 = 1e-4;

fn check_alpha(op: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(domain(op, format!("α must lie in (0, 1], got {alpha}")))
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

/// Checks a step for a stencil that reaches `reach` steps below α.
fn check_step(op: &'static str, alpha: f64, h: f64, reach: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(domain(op, format!("step must be positive, got {h}")));
    }
    if alpha - reach * h <= 0.0 {
        return Err(domain(
            op,
            format!("stencil leaves (0, 1]: α = {alpha}, h = {h}"),
        ));
    }
    Ok(())
}

/// First derivative of `f` at α: central difference, or the second-order
/// backward stencil when α + h > 1.
pub fn first_difference<F>(f: F, alpha: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if alpha + h <= 1.0 {
        check_step("first_difference", alpha, h, 1.0)?;
        Ok((f(alpha + h)? - f(alpha - h)?) / (2.0 * h))
    } else {
        check_step("first_difference", alpha, h, 2.0)?;
        Ok((3.0 * f(alpha)? - 4.0 * f(alpha - h)? + f(alpha - 2.0 * h)?) / (2.0 * h))
    }
}

/// Second derivative of `f` at α: central, or second-order backward when
/// α + h > 1.
pub fn second_difference<F>(f: F, alpha: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if alpha + h <= 1.0 {
        check_step("second_difference", alpha, h, 1.0)?;
        Ok((f(alpha + h)? - 2.0 * f(alpha)? + f(alpha - h)?) / (h * h))
    } else {
        check_step("second_difference", alpha, h, 3.0)?;
        let v =
            2.0 * f(alpha)? - 5.0 * f(alpha - h)? + 4.0 * f(alpha - 2.0 * h)? - f(alpha - 3.0 * h)?;
        Ok(v / (h * h))
    }
}

/// Step for Richardson second differences at α: 1e−2, shrunk near α = 1
/// where tail masses of U_α X vary on the scale 1 − α, but not below 1e−3
/// so that round-off (≈ ε/h²) stays small.
pub fn second_difference_step(alpha: f64) -> f64 {
    (1e-2f64).min((1.0 - alpha) / 20.0).max(1e-3)
}

/// Richardson extrapolation (4·D(h/2) − D(h))/3 of [`first_difference`].
pub fn richardson_first<F>(f: F, alpha: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = first_difference(&f, alpha, h)?;
    let fine = first_difference(&f, alpha, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Richardson extrapolation of [`second_difference`].
pub fn richardson_second<F>(f: F, alpha: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = second_difference(&f, alpha, h)?;
    let fine = second_difference(&f, alpha, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// g(α)(P(z) − P(z−1)) − (1/α)((z+1)P(z+1) − zP(z)) for z = 0..=len.
pub fn heat_rhs(p: &Pmf, drift: f64, alpha: f64) -> Vec<f64> {
    (0..=p.len())
        .map(|z| {
            let prev = if z == 0 { 0.0 } else { p.at(z - 1) };
            let flux = (z + 1) as f64 * p.at(z + 1) - z as f64 * p.at(z);
            drift * (p.at(z) - prev) - flux / alpha
        })
        .collect()
}

/// (λ/α)Δ*(Pρ)(z) for z = 0..=len, the u-flow right-hand side.
pub fn u_flow_rhs(p: &Pmf, lambda: f64, alpha: f64) -> Vec<f64> {
    let pr = score_times_mass(p, lambda);
    (0..=pr.len())
        .map(|z| {
            let prev = if z == 0 { 0.0 } else { pr[z - 1] };
            lambda / alpha * (prev - pr.get(z).copied().unwrap_or(0.0))
        })
        .collect()
}

/// (λ/α)Δ*(Π_λ Δ(P/Π_λ))(z), the same right-hand side written through the
/// likelihood ratio to Π_λ.
pub fn u_flow_rhs_ratio_form(p: &Pmf, lambda: f64, alpha: f64) -> Vec<f64> {
    let log_pi = |z: usize| -neg_log_poisson(z, lambda);
    let inner: Vec<f64> = (0..p.len())
        .map(|z| {
            // Π(z)·P(z+1)/Π(z+1) − P(z).
            p.at(z + 1) * (log_pi(z) - log_pi(z + 1)).exp() - p.at(z)
        })
        .collect();
    (0..=inner.len())
        .map(|z| {
            let prev = if z == 0 { 0.0 } else { inner[z - 1] };
            lambda / alpha * (prev - inner.get(z).copied().unwrap_or(0.0))
        })
        .collect()
}

/// max_z |∂P_α(z)/∂α − RHS(z)| with the derivative taken by finite
/// differences of step h (backward stencil when α + h > 1).
pub fn heat_residual(
    x: &Pmf,
    path: &FlowPath,
    alpha: f64,
    h: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    check_alpha("heat_residual", alpha)?;
    let backward = alpha + h > 1.0;
    check_step("heat_residual", alpha, h, if backward { 2.0 } else { 1.0 })?;
    let state = path.state(x, alpha, policy)?;
    let rhs = match path.kind() {
        PathKind::UFlow => u_flow_rhs(&state, path.lambda(), alpha),
        _ => heat_rhs(&state, path.drift(alpha), alpha),
    };
    let (fd, len): (Box<dyn Fn(usize) -> f64>, usize) = if backward {
        let a = state.clone();
        let b = path.state(x, alpha - h, policy)?;
        let c = path.state(x, alpha - 2.0 * h, policy)?;
        let len = a.len().max(b.len()).max(c.len());
        (
            Box::new(move |z| (3.0 * a.at(z) - 4.0 * b.at(z) + c.at(z)) / (2.0 * h)),
            len,
        )
    } else {
        let up = path.state(x, alpha + h, policy)?;
        let down = path.state(x, alpha - h, policy)?;
        let len = up.len().max(down.len());
        (Box::new(move |z| (up.at(z) - down.at(z)) / (2.0 * h)), len)
    };
    let n = len.max(rhs.len()) + 1;
    Ok((0..n)
        .map(|z| (fd(z) - rhs.get(z).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max))
}

fn preflight(op: &'static str, lambda: f64, alpha: f64) -> Result<()> {
    check_lambda(op, lambda)?;
    check_alpha(op, alpha)
}

/// ∂Λ(P_α)/∂α = (λ/α) Σ_z P(z)ρ(z) log((z+1)/λ).
pub fn d_lambda_formula(p: &Pmf, lambda: f64, alpha: f64) -> Result<f64> {
    preflight("d_lambda_formula", lambda, alpha)?;
    let sum: f64 = score_times_mass(p, lambda)
        .iter()
        .enumerate()
        .map(|(z, &pr)| pr * ((z + 1) as f64 / lambda).ln())
        .sum();
    Ok(lambda / alpha * sum)
}

/// ∂²Λ(P_α)/∂α² = (λ²/α²) Σ_z P(z)ρ(z)(z/λ·log((z+1)/z) − log((z+2)/(z+1))),
/// with the z = 0 value of z·log((z+1)/z) read as 0. Non-positive along the
/// u-flow of a ULC law.
pub fn d2_lambda_formula(p: &Pmf, lambda: f64, alpha: f64) -> Result<f64> {
    preflight("d2_lambda_formula", lambda, alpha)?;
    let sum: f64 = score_times_mass(p, lambda)
        .iter()
        .enumerate()
        .map(|(z, &pr)| {
            let zf = z as f64;
            let first = if z == 0 {
                0.0
            } else {
                zf / lambda * (1.0 / zf).ln_1p()
            };
            pr * (first - (1.0 / (zf + 1.0)).ln_1p())
        })
        .sum();
    Ok(lambda * lambda / (alpha * alpha) * sum)
}

/// ∂D(P_α‖Π_λ)/∂α = (λ/α)·(D(P‖P̃) + D(P̃‖P)) with P̃ the size-biased law.
pub fn d_d_formula(p: &Pmf, lambda: f64, alpha: f64) -> Result<f64> {
    preflight("d_D_formula", lambda, alpha)?;
    let tilde = size_biased_masses(p, lambda);
    let sum = if p.deficit() == 0.0 {
        symmetrized_sum(p.probs(), &tilde)
    } else {
        symmetrized_sum(&p.probs()[..tilde.len()], &tilde)
    };
    Ok(lambda / alpha * sum)
}

/// The same derivative as (λ/α) Σ P(z)ρ(z) log(1 + ρ(z)). Points with
/// ρ(z) = −1 are skipped; [`d_d_formula`] is authoritative there.
pub fn d_d_score_form(p: &Pmf, lambda: f64, alpha: f64) -> Result<f64> {
    preflight("d_D_score_form", lambda, alpha)?;
    let top = if p.deficit() == 0.0 {
        p.len()
    } else {
        p.len() - 1
    };
    let sum: f64 = (0..top)
        .filter(|&z| p.at(z) > 0.0)
        .map(|z| {
            let rho = (z + 1) as f64 * p.at(z + 1) / (lambda * p.at(z)) - 1.0;
            if rho <= -1.0 {
                0.0
            } else {
                p.at(z) * rho * rho.ln_1p()
            }
        })
        .sum();
    Ok(lambda / alpha * sum)
}

/// ∂²D(P_α‖Π_λ)/∂α², with ∂P/∂α taken from the closed form (λ/α)Δ*(Pρ).
pub fn d2_d_formula(p: &Pmf, lambda: f64, alpha: f64) -> Result<f64> {
    preflight("d2_D_formula", lambda, alpha)?;
    if p.deficit() == 0.0 {
        return Ok(f64::INFINITY);
    }
    let tilde = size_biased_masses(p, lambda);
    let tilde2 = second_size_biased_masses(p, lambda);
    let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };

    let mut curvature = 0.0;
    for (z, &t2) in tilde2.iter().enumerate() {
        let (t, q) = (tilde[z], p.at(z));
        let weight = t2 - 2.0 * t + q;
        if weight == 0.0 {
            continue;
        }
        let log_ratio = ln(t2) + ln(q) - 2.0 * ln(t);
        if log_ratio.is_nan() {
            continue;
        }
        curvature += weight * log_ratio;
    }

    let pr = score_times_mass(p, lambda);
    let mut fisher = 0.0;
    for z in 0..p.len() - 1 {
        let q = p.at(z);
        let prev = if z == 0 { 0.0 } else { pr[z - 1] };
        let dp = lambda / alpha * (prev - pr[z]);
        if q > 0.0 {
            fisher += dp * dp / q;
        } else if dp != 0.0 {
            return Ok(f64::INFINITY);
        }
    }
    Ok(lambda * lambda / (alpha * alpha) * curvature + fisher)
}

/// One α-row of a [`FlowCurve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRow {
    pub alpha: f64,
    pub h: f64,
    pub lambda_functional: f64,
    pub d: f64,
    pub d_lambda: f64,
    pub d_d: f64,
    pub d2_lambda: f64,
    pub d2_d: f64,
    pub heat_residual: f64,
    pub deficit_budget: f64,
}

/// Entropy and its companions along U_α X over an α-grid in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowCurve {
    pub lambda: f64,
    pub alphas: Vec<f64>,
    pub rows: Vec<FlowRow>,
}

pub const CSV_HEADER: &str = "alpha,H,Lambda,D,dLambda,dD,d2Lambda,d2D,heat_residual";

impl FlowCurve {
    /// CSV with [`CSV_HEADER`]; values carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let cells = [
                r.alpha,
                r.h,
                r.lambda_functional,
                r.d,
                r.d_lambda,
                r.d_d,
                r.d2_lambda,
                r.d2_d,
                r.heat_residual,
            ];
            let line: Vec<String> = cells.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Largest H(α_{k+1}) − H(α_k); ≤ 0 for a non-increasing H column.
    pub fn max_first_difference(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].h - w[0].h)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest H(α_{k+1}) − 2H(α_k) + H(α_{k−1}); ≤ 0 for a concave H column
    /// on a uniform grid.
    pub fn max_second_difference(&self) -> f64 {
        self.rows
            .windows(3)
            .map(|w| w[2].h - 2.0 * w[1].h + w[0].h)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates every row independently from X at each α of `grid`.
pub fn entropy_curve(
    x: &Pmf,
    lambda: f64,
    grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<FlowCurve> {
    check_lambda("entropy_curve", lambda)?;
    if grid.is_empty() {
        return Err(domain("entropy_curve", "empty α-grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain(
            "entropy_curve",
            "α-grid must be strictly increasing",
        ));
    }
    for &a in grid {
        check_alpha("entropy_curve", a)?;
    }
    let measured = x.mean();
    if !((measured - lambda).abs() <= mean_slack(x)) {
        return Err(Error::MeanMismatch {
            expected: lambda,
            measured,
        });
    }
    let path = FlowPath::u_flow(lambda)?;
    let rows = grid
        .iter()
        .map(|&alpha| {
            let p = u_map(x, alpha, lambda, policy)?;
            let step = CURVE_HEAT_STEP.min(alpha / 4.0);
            Ok(FlowRow {
                alpha,
                h: entropy(&p).value,
                lambda_functional: lambda_functional(&p, lambda)?.value,
                d: relative_entropy_to_poisson(&p, lambda)?.value,
                d_lambda: d_lambda_formula(&p, lambda, alpha)?,
                d_d: d_d_formula(&p, lambda, alpha)?,
                d2_lambda: d2_lambda_formula(&p, lambda, alpha)?,
                d2_d: d2_d_formula(&p, lambda, alpha)?,
                heat_residual: heat_residual(x, &path, alpha, step, policy)?,
                deficit_budget: deficit_budget(p.deficit(), p.len()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowCurve {
        lambda,
        alphas: grid.to_vec(),
        rows,
    })
}
