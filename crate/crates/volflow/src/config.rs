use std::path::PathBuf;
use std::str::FromStr;

use crate::error::CliError;

/// Inclusive range of matrix sizes, written `4` or `2..5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn single(n: usize) -> Self {
        Self { lo: n, hi: n }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("invalid size `{x}`"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if lo < 2 {
            return Err("sizes must be at least 2".into());
        }
        if hi < lo {
            return Err(format!("empty size range {lo}..{hi}"));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities.
    pub algebra: f64,
    /// Cross-oracle comparisons.
    pub cross: f64,
    /// Solver residuals.
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { algebra: 1e-9, cross: 1e-10, solver: 1e-12 }
    }
}

impl Tolerances {
    /// A single `--tol` overrides every class.
    pub fn uniform(tol: f64) -> Self {
        Self { algebra: tol, cross: tol, solver: tol }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: NRange,
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: NRange { lo: 2, hi: 5 },
            trials: 100,
            seed: 0,
            tol: Tolerances::default(),
            input: None,
            output: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if self.n.lo < 2 {
            return Err(CliError::Usage("--n must be at least 2".into()));
        }
        let t = self.tol;
        if !(t.algebra > 0.0 && t.cross > 0.0 && t.solver > 0.0) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        Ok(())
    }
}
