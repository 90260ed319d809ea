//! Aggregation of per-instance observations into per-check outcomes.

use serde::Serialize;

/// One observation that failed its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub case: usize,
    pub case_seed: u64,
    pub value: f64,
    pub tolerance: f64,
    pub note: String,
}

/// All observations of one named check. An observation passes when
/// `value ≤ tolerance`; the recorded worst is the one with the least room.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub pass: bool,
    pub instances: usize,
    pub failures: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub worst_case: Option<usize>,
    pub first_failure: Option<Failure>,
}

impl CheckOutcome {
    fn new(id: &str) -> Self {
        CheckOutcome {
            id: id.to_string(),
            pass: true,
            instances: 0,
            failures: 0,
            residual: f64::NEG_INFINITY,
            tolerance: 0.0,
            worst_case: None,
            first_failure: None,
        }
    }
}

/// Identifies the randomized case an observation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case {
    pub index: usize,
    pub seed: u64,
}

/// Ordered collection of checks, in first-use order.
#[derive(Debug, Default)]
pub struct Tally {
    checks: Vec<CheckOutcome>,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&mut self, id: &str) -> &mut CheckOutcome {
        match self.checks.iter().position(|c| c.id == id) {
            Some(i) => &mut self.checks[i],
            None => {
                self.checks.push(CheckOutcome::new(id));
                self.checks.last_mut().unwrap()
            }
        }
    }

    /// Records `value ≤ tolerance`. NaN counts as a failure.
    pub fn observe(&mut self, id: &str, case: Case, value: f64, tolerance: f64) -> bool {
        self.observe_with(id, case, value, tolerance, String::new)
    }

    pub fn observe_with<F>(
        &mut self,
        id: &str,
        case: Case,
        value: f64,
        tolerance: f64,
        note: F,
    ) -> bool
    where
        F: FnOnce() -> String,
    {
        let ok = value <= tolerance;
        let c = self.slot(id);
        c.instances += 1;
        let room = tolerance - value;
        let worst_room = c.tolerance - c.residual;
        if c.worst_case.is_none() || !(room >= worst_room) {
            c.residual = value;
            c.tolerance = tolerance;
            c.worst_case = Some(case.index);
        }
        if !ok {
            c.pass = false;
            c.failures += 1;
            if c.first_failure.is_none() {
                c.first_failure = Some(Failure {
                    case: case.index,
                    case_seed: case.seed,
                    value,
                    tolerance,
                    note: note(),
                });
            }
        }
        ok
    }

    /// Records a case that could not be evaluated at all.
    pub fn error(&mut self, id: &str, case: Case, err: impl std::fmt::Display) {
        let msg = err.to_string();
        self.observe_with(id, case, f64::INFINITY, 0.0, || msg);
    }

    /// Runs `f`, which returns `(value, tolerance)`, and records the result.
    pub fn check<F>(&mut self, id: &str, case: Case, f: F) -> bool
    where
        F: FnOnce() -> pmaxent_core::Result<(f64, f64)>,
    {
        match f() {
            Ok((value, tolerance)) => self.observe(id, case, value, tolerance),
            Err(e) => {
                self.error(id, case, e);
                false
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn into_checks(self) -> Vec<CheckOutcome> {
        self.checks
    }

    pub fn checks(&self) -> &[CheckOutcome] {
        &self.checks
    }
}

/// Full output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}
