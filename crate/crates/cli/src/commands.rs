//! Subcommand implementations. Each returns the text to emit and an exit
//! code; the binary only handles argument parsing and I/O.

use std::time::Instant;

use serde::Serialize;

use pmaxent_core::concavity::{bernoulli_sum, is_ultra_log_concave, seeded_rng};
use pmaxent_core::flow::entropy_curve;
use pmaxent_core::functionals::{deficit_budget, entropy};
use pmaxent_core::transforms::MEAN_MATCH_TOL;
use pmaxent_core::{Pmf, TruncationPolicy};

use crate::error::{CliError, EXIT_PASS, EXIT_PROPERTY};
use crate::family::parse_family;
use crate::report::VerificationReport;
use crate::suites::{flow_policy, random_p_vector, run, Suite};

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
    /// Diagnostic for stderr, set on property failures.
    pub message: Option<String>,
}

impl Output {
    fn pass(body: String) -> Self {
        Output {
            body,
            exit_code: EXIT_PASS,
            message: None,
        }
    }

    fn fail(body: String, message: String) -> Self {
        Output {
            body,
            exit_code: EXIT_PROPERTY,
            message: Some(message),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub struct VerifyArgs {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub only_case: Option<usize>,
    pub timing: bool,
}

pub fn verify(args: &VerifyArgs) -> Output {
    let start = Instant::now();
    let tally = run(args.suite, args.seed, args.cases, args.only_case);
    let pass = tally.pass();
    let report = VerificationReport {
        suite: args.suite.name().to_string(),
        seed: args.seed,
        cases: args.cases,
        pass,
        checks: tally.into_checks(),
        wall_time: args.timing.then(|| start.elapsed().as_secs_f64()),
    };
    let body = to_json(&report);
    if pass {
        Output::pass(body)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect();
        Output::fail(body, format!("failing checks: {}", failed.join(", ")))
    }
}

/// Where the curve input comes from.
pub enum CurveInput {
    Family(String),
    Json(String),
}

pub struct CurveArgs {
    pub input: CurveInput,
    pub lambda: Option<f64>,
    pub grid: Vec<f64>,
    pub check: bool,
}

pub fn curve(args: &CurveArgs) -> Result<Output, CliError> {
    let policy = flow_policy();
    let x = match &args.input {
        CurveInput::Family(spec) => parse_family(spec, &policy)?,
        CurveInput::Json(text) => serde_json::from_str::<Pmf>(text)
            .map_err(|e| CliError::Precondition(format!("invalid Pmf JSON: {e}")))?,
    };
    let lambda = args.lambda.unwrap_or_else(|| x.mean());
    let slack = MEAN_MATCH_TOL + x.deficit() * x.len() as f64;
    if !((x.mean() - lambda).abs() <= slack) {
        return Err(CliError::Precondition(format!(
            "input mean {} does not match λ = {lambda}",
            x.mean()
        )));
    }
    if args.check {
        let ulc = is_ultra_log_concave(&x, 1e-9)?;
        if !ulc.pass {
            return Ok(Output::fail(
                String::new(),
                format!(
                    "input is not ultra log-concave: margin {:e} at i = {}",
                    ulc.min_margin,
                    ulc.argmin.unwrap_or(0)
                ),
            ));
        }
    }
    let c = entropy_curve(&x, lambda, &args.grid, &policy)?;
    let body = c.to_csv();
    if args.check {
        let first = c.max_first_difference();
        let second = c.max_second_difference();
        if first > 1e-10 {
            return Ok(Output::fail(
                body,
                format!("entropy increases by {first:e} along the grid"),
            ));
        }
        if second > 1e-8 {
            return Ok(Output::fail(
                body,
                format!("entropy second difference {second:e} > 1e-8"),
            ));
        }
    }
    Ok(Output::pass(body))
}

/// Base family for `accumulate`; `member(θ)` has mean θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Base {
    Bernoulli,
    Binomial(usize),
    Poisson,
}

impl Base {
    pub fn parse(spec: &str) -> Result<Base, CliError> {
        match spec.split_once(':') {
            None if spec == "bernoulli" => Ok(Base::Bernoulli),
            None if spec == "poisson" => Ok(Base::Poisson),
            Some(("binomial", m)) => m
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&m| m > 0)
                .map(Base::Binomial)
                .ok_or_else(|| CliError::Usage(format!("binomial base needs m ≥ 1, got '{m}'"))),
            _ => Err(CliError::Usage(format!("unknown base '{spec}'"))),
        }
    }

    fn member(self, theta: f64, policy: &TruncationPolicy) -> pmaxent_core::Result<Pmf> {
        match self {
            Base::Bernoulli => Pmf::binomial(1, theta),
            Base::Binomial(m) => Pmf::binomial(m, theta / m as f64),
            Base::Poisson => Pmf::poisson(theta, policy),
        }
    }
}

/// n-fold convolution power by repeated squaring.
fn convolution_power(p: &Pmf, n: usize, policy: &TruncationPolicy) -> pmaxent_core::Result<Pmf> {
    let mut result = Pmf::point_mass(0);
    let mut base = p.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = result.convolve(&base, policy)?;
        }
        k >>= 1;
        if k > 0 {
            base = base.convolve(&base, policy)?;
        }
    }
    Ok(result)
}

pub const ACCUMULATE_HEADER: &str = "n,tv";

/// TV(base(λ/n)^{*n}, Π_λ) for each n. Fails if a base member is not ULC
/// with mean λ/n, or if the TV column increases beyond truncation slack.
pub fn accumulate(lambda: f64, ns: &[usize], base: Base) -> Result<Output, CliError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CliError::Usage(format!("λ must be positive, got {lambda}")));
    }
    if ns.contains(&0) {
        return Err(CliError::Usage("n must be ≥ 1".into()));
    }
    let policy = TruncationPolicy::default();
    let target = Pmf::poisson(lambda, &policy)?;
    let mut body = format!("{ACCUMULATE_HEADER}\n");
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for &n in ns {
        let theta = lambda / n as f64;
        let member = match base.member(theta, &policy) {
            Ok(m) => m,
            Err(e) => return Ok(Output::fail(body, format!("base member at {theta}: {e}"))),
        };
        let ulc = is_ultra_log_concave(&member, 1e-9)?;
        let mean_gap = (member.mean() - theta).abs();
        if !ulc.pass || mean_gap > MEAN_MATCH_TOL + member.deficit() * member.len() as f64 {
            return Ok(Output::fail(
                body,
                format!("base member at {theta} violates the ULC/mean contract"),
            ));
        }
        let sum = convolution_power(&member, n, &policy)?;
        let tv = sum.total_variation(&target);
        body.push_str(&format!("{n},{tv:.16e}\n"));
        rows.push((n, tv, sum.deficit() + target.deficit()));
    }
    for w in rows.windows(2) {
        let ((n0, tv0, _), (n1, tv1, slack)) = (w[0], w[1]);
        if n1 > n0 && tv1 > tv0 + slack {
            return Ok(Output::fail(
                body,
                format!("TV rose from {tv0:e} at n = {n0} to {tv1:e} at n = {n1}"),
            ));
        }
    }
    Ok(Output::pass(body))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub n: usize,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    pub pass: bool,
    pub violations: usize,
    pub binomial_entropy: f64,
    pub poisson_entropy: f64,
    pub max_entropy: Option<f64>,
    pub max_entropy_p: Option<Vec<f64>>,
    /// H(Binomial(n, λ/n)) − max observed H.
    pub gap: Option<f64>,
}

/// Random probing of H over Bernoulli sums with n summands and mean λ.
pub fn maxent_probe(n: usize, lambda: f64, trials: usize, seed: u64) -> Result<Output, CliError> {
    if n == 0 || !(lambda > 0.0 && lambda < n as f64) {
        return Err(CliError::Usage(format!(
            "need 0 < λ < n, got λ = {lambda}, n = {n}"
        )));
    }
    let policy = TruncationPolicy::default();
    let hb = entropy(&Pmf::binomial(n, lambda / n as f64)?).value;
    let pois = Pmf::poisson(lambda, &policy)?;
    let hz = entropy(&pois).value;
    let hz_slack = deficit_budget(pois.deficit(), pois.len());
    let mut rng = seeded_rng(seed);
    let mut violations = usize::from(hb > hz + hz_slack + 1e-10);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..trials {
        let p = random_p_vector(n, lambda, &mut rng);
        let h = entropy(&bernoulli_sum(&p)?).value;
        if h > hb + 1e-10 || h > hz + hz_slack + 1e-10 {
            violations += 1;
        }
        if best.as_ref().is_none_or(|(bh, _)| h > *bh) {
            best = Some((h, p));
        }
    }
    let report = ProbeReport {
        n,
        lambda,
        trials,
        seed,
        pass: violations == 0,
        violations,
        binomial_entropy: hb,
        poisson_entropy: hz,
        max_entropy: best.as_ref().map(|b| b.0),
        gap: best.as_ref().map(|b| hb - b.0),
        max_entropy_p: best.map(|b| b.1),
    };
    let body = to_json(&report);
    Ok(if report.pass {
        Output::pass(body)
    } else {
        Output::fail(
            body,
            format!("{violations} draw(s) exceeded the entropy bound"),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::EXIT_PRECONDITION;

    #[test]
    fn accumulate_bernoulli_improves() {
        let out = accumulate(1.0, &[1, 2, 4, 8, 16, 32], Base::Bernoulli).unwrap();
        assert_eq!(out.exit_code, EXIT_PASS);
        let tvs: Vec<f64> = out
            .body
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]));
        assert!(tvs[0] >= 10.0 * tvs[5]);
    }

    #[test]
    fn accumulate_poisson_is_flat() {
        let out = accumulate(1.0, &[1, 2, 4, 8], Base::Poisson).unwrap();
        assert_eq!(out.exit_code, EXIT_PASS);
        for line in out.body.lines().skip(1) {
            let tv: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!(tv < 1e-11);
        }
    }

    #[test]
    fn accumulate_rejects_bad_members() {
        let out = accumulate(2.0, &[1, 2], Base::Bernoulli).unwrap();
        assert_eq!(out.exit_code, EXIT_PROPERTY);
        assert!(out.body.starts_with(ACCUMULATE_HEADER));
        assert!(matches!(Base::parse("binomial:0"), Err(CliError::Usage(_))));
        assert_eq!(Base::parse("binomial:3").unwrap(), Base::Binomial(3));
    }

    #[test]
    fn probe_examples() {
        let out = maxent_probe(4, 1.0, 500, 1).unwrap();
        assert_eq!(out.exit_code, EXIT_PASS);
        let r: serde_json::Value = serde_json::from_str(&out.body).unwrap();
        assert!(r["gap"].as_f64().unwrap() >= -1e-10);
        let empty = maxent_probe(4, 1.0, 0, 1).unwrap();
        assert_eq!(empty.exit_code, EXIT_PASS);
        let one = maxent_probe(1, 0.3, 20, 2).unwrap();
        let r: serde_json::Value = serde_json::from_str(&one.body).unwrap();
        assert!(r["gap"].as_f64().unwrap().abs() < 1e-15);
        assert!(matches!(
            maxent_probe(3, 3.0, 1, 0),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn curve_preconditions() {
        let grid = vec![0.5, 1.0];
        let bad = CurveArgs {
            input: CurveInput::Family("binomial:20,0.25".into()),
            lambda: Some(4.0),
            grid: grid.clone(),
            check: false,
        };
        assert_eq!(curve(&bad).unwrap_err().exit_code(), EXIT_PRECONDITION);
        let geo = CurveArgs {
            input: CurveInput::Family("geometric:0.5".into()),
            lambda: None,
            grid,
            check: true,
        };
        assert_eq!(curve(&geo).unwrap().exit_code, EXIT_PROPERTY);
    }
}
