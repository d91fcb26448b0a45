use std::time::Instant;

use serde::Serialize;

/// Outcome of one check over a batch of trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub n: Option<usize>,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_seconds: f64,
}

impl CheckResult {
    /// `pass` is derived: `max_residual < tolerance` (NaN fails).
    pub fn new(
        name: &str,
        n: Option<usize>,
        trials: usize,
        max_residual: f64,
        tolerance: f64,
        started: Instant,
    ) -> Self {
        Self {
            name: name.to_string(),
            n,
            trials,
            max_residual,
            tolerance,
            pass: max_residual < tolerance,
            wall_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    /// Free-form `key = value` lines (calibrated signs, matrices, ...).
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        Self { suite: suite.to_string(), seed, checks: Vec::new(), notes: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            #[serde(flatten)]
            report: &'a SuiteReport,
            pass: bool,
        }
        serde_json::to_string_pretty(&Wire { report: self, pass: self.pass() }).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "name", "n", "trials", "max_residual", "tolerance", "pass", "wall_seconds"])
            .expect("in-memory csv");
        for c in &self.checks {
            w.write_record([
                self.suite.clone(),
                c.name.clone(),
                c.n.map(|n| n.to_string()).unwrap_or_default(),
                c.trials.to_string(),
                format!("{:e}", c.max_residual),
                format!("{:e}", c.tolerance),
                c.pass.to_string(),
                format!("{:.6}", c.wall_seconds),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let n = c.n.map(|n| format!(" n={n}")).unwrap_or_default();
            out.push_str(&format!(
                "{} {}{}: max residual {:.3e} (tol {:.1e}, {} trials)\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                n,
                c.max_residual,
                c.tolerance,
                c.trials
            ));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        let failed = self.failures().count();
        out.push_str(&format!("{}: {} checks, {} failed\n", self.suite, self.checks.len(), failed));
        out
    }
}
