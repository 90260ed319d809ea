//! The `name:param,param` grammar for named families.

use pmaxent_core::concavity::{bernoulli_sum, random_ulc};
use pmaxent_core::{Pmf, TruncationPolicy};

use crate::error::CliError;

fn numbers(name: &str, params: &str, arity: usize) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = params
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{name}: cannot parse '{s}' as a number")))
        })
        .collect::<Result<_, _>>()?;
    if arity != usize::MAX && values.len() != arity {
        return Err(CliError::Usage(format!(
            "{name} takes {arity} parameter(s), got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn count(name: &str, x: f64) -> Result<usize, CliError> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(CliError::Usage(format!(
            "{name}: expected a non-negative integer, got {x}"
        )))
    }
}

/// Builds a member of a named family.
///
/// Recognized: `poisson:λ`, `binomial:n,p`, `bernoulli:p`, `geometric:p`,
/// `point:k`, `bernoulli-sum:p1,p2,…` and `ulc:λ,max_support,seed`.
pub fn parse_family(spec: &str, policy: &TruncationPolicy) -> Result<Pmf, CliError> {
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let pmf = match name {
        "poisson" => Pmf::poisson(numbers(name, params, 1)?[0], policy)?,
        "binomial" => {
            let v = numbers(name, params, 2)?;
            Pmf::binomial(count(name, v[0])?, v[1])?
        }
        "bernoulli" => Pmf::binomial(1, numbers(name, params, 1)?[0])?,
        "geometric" => Pmf::geometric(numbers(name, params, 1)?[0], policy)?,
        "point" => Pmf::point_mass(count(name, numbers(name, params, 1)?[0])?),
        "bernoulli-sum" => bernoulli_sum(&numbers(name, params, usize::MAX)?)?,
        "ulc" => {
            let v = numbers(name, params, 3)?;
            random_ulc(v[0], count(name, v[1])?, count(name, v[2])? as u64)?
        }
        other => return Err(CliError::Usage(format!("unknown family '{other}'"))),
    };
    Ok(pmf)
}

/// Parses `lo:hi:step` into an increasing grid; `hi` is included when it
/// lies on the grid up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("grid '{spec}' is not lo:hi:step")));
    }
    let v = numbers("grid", &parts.join(","), 3)?;
    let (lo, hi, step) = (v[0], v[1], v[2]);
    if !(step > 0.0 && lo <= hi) {
        return Err(CliError::Usage(format!(
            "grid '{spec}' needs lo ≤ hi and step > 0"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - hi).abs() <= 1e-9 * step.max(1.0) {
            *last = hi;
        }
    }
    Ok(grid)
}
