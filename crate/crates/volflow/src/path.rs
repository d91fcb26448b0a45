//! Path files for the figure-eight experiments and their reports.
//!
//! `{"u0": [re, im], "kind": "radial" | "circle", "samples": 33}` or
//! `{"kind": "list", "samples": [{"t": 0.0, "u": [re, im]}, ...]}`.

use serde::Serialize;
use serde_json::Value;
use volflow_core::fig8::{
    cusp_shape, deformation_experiment, quartic_decay_diagnostic, DeformationPath, DeformationReport,
    QuarticDiagnostic, ShapePair, S_NZ,
};
use volflow_core::Complex64;

use crate::error::CliError;
use crate::jets::parse_complex;

#[derive(Clone, Debug, PartialEq)]
pub enum PathSpec {
    Radial { u0: Complex64, samples: usize },
    Circle { u0: Complex64, samples: usize },
    List { t: Vec<f64>, u: Vec<Complex64> },
}

fn sample_count(obj: &serde_json::Map<String, Value>) -> Result<usize, CliError> {
    let s = obj
        .get("samples")
        .ok_or_else(|| CliError::schema("samples", "missing"))?
        .as_u64()
        .ok_or_else(|| CliError::schema("samples", "expected an integer"))? as usize;
    if s < 9 {
        return Err(CliError::schema("samples", "need at least 9 samples"));
    }
    Ok(s)
}

impl PathSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let root: Value = serde_json::from_str(text).map_err(|e| CliError::schema("$", e.to_string()))?;
        let obj = root.as_object().ok_or_else(|| CliError::schema("$", "expected an object"))?;
        let kind = obj
            .get("kind")
            .ok_or_else(|| CliError::schema("kind", "missing"))?
            .as_str()
            .ok_or_else(|| CliError::schema("kind", "expected a string"))?;
        let u0 = || parse_complex(obj.get("u0").ok_or_else(|| CliError::schema("u0", "missing"))?, "u0");
        match kind {
            "radial" => Ok(Self::Radial { u0: u0()?, samples: sample_count(obj)? }),
            "circle" => Ok(Self::Circle { u0: u0()?, samples: sample_count(obj)? }),
            "list" => {
                let arr = obj
                    .get("samples")
                    .ok_or_else(|| CliError::schema("samples", "missing"))?
                    .as_array()
                    .ok_or_else(|| CliError::schema("samples", "expected an array of {t, u}"))?;
                if arr.len() < 9 {
                    return Err(CliError::schema("samples", "need at least 9 samples"));
                }
                let (mut t, mut u) = (Vec::new(), Vec::new());
                for (i, s) in arr.iter().enumerate() {
                    let f = format!("samples[{i}]");
                    let ti = s
                        .get("t")
                        .and_then(Value::as_f64)
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| CliError::schema(format!("{f}.t"), "expected a finite number"))?;
                    if t.last().is_some_and(|&prev| ti <= prev) {
                        return Err(CliError::schema(format!("{f}.t"), "times must increase"));
                    }
                    let ui = parse_complex(
                        s.get("u").ok_or_else(|| CliError::schema(format!("{f}.u"), "missing"))?,
                        &format!("{f}.u"),
                    )?;
                    t.push(ti);
                    u.push(ui);
                }
                Ok(Self::List { t, u })
            }
            other => Err(CliError::schema("kind", format!("unknown kind `{other}` (radial, circle or list)"))),
        }
    }

    pub fn to_path(&self) -> Result<DeformationPath, CliError> {
        let bad = |e: volflow_core::Error| CliError::schema("samples", e.to_string());
        match self {
            Self::Radial { u0, samples } => DeformationPath::radial(*u0, *samples).map_err(bad),
            Self::Circle { u0, samples } => DeformationPath::circle(*u0, *samples).map_err(bad),
            Self::List { t, u } => DeformationPath::from_samples(t.clone(), u.clone()).map_err(bad),
        }
    }

    /// Largest `|u|` visited.
    pub fn max_modulus(&self) -> f64 {
        match self {
            Self::Radial { u0, .. } | Self::Circle { u0, .. } => u0.norm(),
            Self::List { u, .. } => u.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

/// Radii for the quartic diagnostic around `r`: `{r/2, r, 2r}`, shifted
/// down to `{r/4, r/2, r}` when `2r` would leave the solver's range.
pub fn diagnostic_radii(r: f64) -> Vec<f64> {
    if 2.0 * r >= 0.45 {
        vec![r / 4.0, r / 2.0, r]
    } else {
        vec![r / 2.0, r, 2.0 * r]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig8Row {
    pub t: f64,
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub z: [f64; 2],
    pub w: [f64; 2],
    pub vol: f64,
    pub rate: f64,
    pub rate_fd: f64,
    pub int_rate: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig8Summary {
    pub integral: f64,
    pub nz_prediction: f64,
    pub discrepancy: f64,
    pub volume_change: f64,
    pub max_residual: f64,
    pub max_rate_gap: f64,
    pub s_nz: f64,
    pub tau: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig8Quartic {
    pub radii: Vec<f64>,
    pub discrepancies: Vec<f64>,
    pub slope: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig8Report {
    pub rows: Vec<Fig8Row>,
    pub summary: Fig8Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartic: Option<Fig8Quartic>,
    pub solver_tolerance: f64,
    pub pass: bool,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub const SLOPE_WINDOW: (f64, f64) = (3.5, 4.5);

impl Fig8Report {
    pub fn run(spec: &PathSpec, solver_tolerance: f64) -> Result<Self, CliError> {
        if spec.max_modulus() >= 0.5 {
            return Err(CliError::schema("u0", "path leaves |u| < 0.5"));
        }
        let path = spec.to_path()?;
        let rep: DeformationReport = deformation_experiment(&path, &ShapePair::complete()).map_err(CliError::Solver)?;
        let rows: Vec<Fig8Row> = rep
            .rows
            .iter()
            .map(|r| Fig8Row {
                t: r.t,
                u: pair(r.u),
                v: pair(r.v),
                z: pair(r.shapes.z),
                w: pair(r.shapes.w),
                vol: r.volume,
                rate: r.rate,
                rate_fd: r.rate_fd,
                int_rate: r.int_rate,
                residual: r.residual,
            })
            .collect();
        let max_residual = rep.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        let max_rate_gap = rep.rows.iter().map(|r| (r.rate + r.rate_fd).abs()).fold(0.0, f64::max);
        let tau = cusp_shape(1e-3).map_err(CliError::Solver)?;
        let quartic = match spec {
            PathSpec::Radial { u0, samples } if u0.norm() > 0.0 => {
                let q: QuarticDiagnostic =
                    quartic_decay_diagnostic(*u0, &diagnostic_radii(u0.norm()), *samples).map_err(CliError::Solver)?;
                let pass = q.slope > SLOPE_WINDOW.0 && q.slope < SLOPE_WINDOW.1;
                Some(Fig8Quartic { radii: q.radii, discrepancies: q.discrepancies, slope: q.slope, pass })
            }
            _ => None,
        };
        let pass = max_residual < solver_tolerance && quartic.as_ref().is_none_or(|q| q.pass);
        Ok(Self {
            rows,
            summary: Fig8Summary {
                integral: rep.integral,
                nz_prediction: rep.nz_prediction,
                discrepancy: rep.discrepancy,
                volume_change: rep.volume_change,
                max_residual,
                max_rate_gap,
                s_nz: S_NZ,
                tau: pair(tau),
            },
            quartic,
            solver_tolerance,
            pass,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fig8 report serializes")
    }

    /// Per-sample table, `t,u_re,u_im,v_re,v_im,vol,rate,rate_fd,int_rate`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "u_re", "u_im", "v_re", "v_im", "vol", "rate", "rate_fd", "int_rate"])
            .expect("in-memory csv");
        for r in &self.rows {
            let vals = [r.t, r.u[0], r.u[1], r.v[0], r.v[1], r.vol, r.rate, r.rate_fd, r.int_rate];
            w.write_record(vals.iter().map(|x| format!("{x:e}"))).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn summary(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "integral of rate {:.10e}, quadratic law {:.10e}, discrepancy {:.3e}\n\
             volume change {:.10e}, max |rate + dvol/dt| {:.3e}, max solver residual {:.3e} (tol {:.1e})\n\
             s_nz = {}, tau = {:.10} + {:.10}i\n",
            s.integral,
            s.nz_prediction,
            s.discrepancy,
            s.volume_change,
            s.max_rate_gap,
            s.max_residual,
            self.solver_tolerance,
            s.s_nz,
            s.tau[0],
            s.tau[1]
        );
        if let Some(q) = &self.quartic {
            out.push_str(&format!(
                "{} quartic decay: radii {:?}, discrepancies {:?}, slope {:.4} (window {:?})\n",
                if q.pass { "PASS" } else { "FAIL" },
                q.radii,
                q.discrepancies,
                q.slope,
                SLOPE_WINDOW
            ));
        }
        out.push_str(if self.pass { "fig8: pass\n" } else { "fig8: FAIL\n" });
        out
    }
}
