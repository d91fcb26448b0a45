//! Jet files: `{"n": 2, "cusps": [{"a": M, "b": M, "da": M, "db": M}, ...]}`.
//!
//! A matrix `M` is either a row-major array of rows of `[re, im]` pairs or
//! `{"diag": [[re, im], ...]}`. A cusp may instead be given as
//! `{"hodgson": {"l1": .., "theta1": .., ...}}` (n = 2 only).

use serde::Serialize;
use serde_json::Value;
use volflow_core::forms::Zeta;
use volflow_core::lie::BorelElement;
use volflow_core::variation::{cusp_rate, hodgson_rate, torus_pair_eval, CuspJet, HodgsonData};
use volflow_core::{Complex64, ComplexMatrix};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct JetFile {
    pub n: usize,
    pub cusps: Vec<CuspJet>,
    /// Hodgson parameters of each cusp, when given in that form.
    pub hodgson: Vec<Option<HodgsonData>>,
}

pub fn parse_complex(v: &Value, field: &str) -> Result<Complex64, CliError> {
    let arr = v.as_array().ok_or_else(|| CliError::schema(field, "expected [re, im]"))?;
    if arr.len() != 2 {
        return Err(CliError::schema(field, format!("expected [re, im], got {} entries", arr.len())));
    }
    let num = |x: &Value, part: &str| {
        x.as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| CliError::schema(field, format!("{part} is not a finite number")))
    };
    Ok(Complex64::new(num(&arr[0], "re")?, num(&arr[1], "im")?))
}

fn parse_matrix(v: &Value, n: usize, field: &str) -> Result<ComplexMatrix, CliError> {
    if let Some(obj) = v.as_object() {
        let d = obj.get("diag").ok_or_else(|| CliError::schema(field, "expected rows or {\"diag\": [...]}"))?;
        let sub = format!("{field}.diag");
        let entries = d.as_array().ok_or_else(|| CliError::schema(&sub, "expected an array"))?;
        if entries.len() != n {
            return Err(CliError::schema(&sub, format!("expected {n} entries, got {}", entries.len())));
        }
        let diag = entries
            .iter()
            .enumerate()
            .map(|(i, x)| parse_complex(x, &format!("{sub}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(ComplexMatrix::diagonal(&diag));
    }
    let rows = v.as_array().ok_or_else(|| CliError::schema(field, "expected a matrix"))?;
    if rows.len() != n {
        return Err(CliError::schema(field, format!("expected {n} rows, got {}", rows.len())));
    }
    let mut m = ComplexMatrix::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let rf = format!("{field}[{i}]");
        let row = row.as_array().ok_or_else(|| CliError::schema(&rf, "expected a row"))?;
        if row.len() != n {
            return Err(CliError::schema(&rf, format!("expected {n} entries, got {}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(x, &format!("{rf}[{j}]"))?;
        }
    }
    Ok(m)
}

fn parse_borel(v: Option<&Value>, n: usize, field: &str) -> Result<BorelElement, CliError> {
    let v = v.ok_or_else(|| CliError::schema(field, "missing"))?;
    let m = parse_matrix(v, n, field)?;
    BorelElement::new_log(m).map_err(|e| CliError::schema(field, e.to_string()))
}

fn parse_hodgson(v: &Value, field: &str) -> Result<HodgsonData, CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::schema(field, "expected an object"))?;
    let get = |k: &str| {
        let f = format!("{field}.{k}");
        obj.get(k)
            .ok_or_else(|| CliError::schema(&f, "missing"))?
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::schema(&f, "not a finite number"))
    };
    Ok(HodgsonData {
        l1: get("l1")?,
        theta1: get("theta1")?,
        l2: get("l2")?,
        theta2: get("theta2")?,
        dl1: get("dl1")?,
        dtheta1: get("dtheta1")?,
        dl2: get("dl2")?,
        dtheta2: get("dtheta2")?,
    })
}

impl JetFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let root: Value = serde_json::from_str(text).map_err(|e| CliError::schema("$", e.to_string()))?;
        let obj = root.as_object().ok_or_else(|| CliError::schema("$", "expected an object"))?;
        let n = obj
            .get("n")
            .ok_or_else(|| CliError::schema("n", "missing"))?
            .as_u64()
            .ok_or_else(|| CliError::schema("n", "expected a positive integer"))? as usize;
        if n < 2 {
            return Err(CliError::schema("n", "must be at least 2"));
        }
        let cusps = obj
            .get("cusps")
            .ok_or_else(|| CliError::schema("cusps", "missing"))?
            .as_array()
            .ok_or_else(|| CliError::schema("cusps", "expected an array"))?;
        if cusps.is_empty() {
            return Err(CliError::schema("cusps", "needs at least one cusp"));
        }
        let mut out = JetFile { n, cusps: Vec::new(), hodgson: Vec::new() };
        for (k, cusp) in cusps.iter().enumerate() {
            let field = format!("cusps[{k}]");
            let c = cusp.as_object().ok_or_else(|| CliError::schema(&field, "expected an object"))?;
            if let Some(h) = c.get("hodgson") {
                if n != 2 {
                    return Err(CliError::schema(format!("{field}.hodgson"), "only valid for n = 2"));
                }
                let d = parse_hodgson(h, &format!("{field}.hodgson"))?;
                out.cusps.push(d.to_jet().map_err(|e| CliError::schema(&field, e.to_string()))?);
                out.hodgson.push(Some(d));
                continue;
            }
            let part = |name: &str| parse_borel(c.get(name), n, &format!("{field}.{name}"));
            let jet = CuspJet::new(part("a")?, part("b")?, part("da")?, part("db")?)
                .map_err(|e| CliError::schema(&field, e.to_string()))?;
            out.cusps.push(jet);
            out.hodgson.push(None);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuspRate {
    pub index: usize,
    pub rate: f64,
    pub zeta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hodgson: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub cusps: Vec<CuspRate>,
    pub total: f64,
    pub zeta_total: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RateReport {
    pub fn compute(file: &JetFile, tolerance: f64) -> Result<Self, CliError> {
        let mut cusps = Vec::with_capacity(file.cusps.len());
        for (index, (jet, h)) in file.cusps.iter().zip(&file.hodgson).enumerate() {
            let zeta = torus_pair_eval(&Zeta { n: file.n }, jet).map_err(CliError::Compute)?;
            cusps.push(CuspRate { index, rate: cusp_rate(jet), zeta, hodgson: h.map(|d| hodgson_rate(&[d])) });
        }
        let total: f64 = cusps.iter().map(|c| c.rate).sum();
        let zeta_total: f64 = cusps.iter().map(|c| c.zeta).sum();
        let difference = (total - zeta_total).abs();
        Ok(Self { n: file.n, cusps, total, zeta_total, difference, tolerance, pass: difference < tolerance })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rate report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cusp", "rate", "zeta", "hodgson"]).expect("in-memory csv");
        for c in &self.cusps {
            w.write_record([
                c.index.to_string(),
                format!("{:e}", c.rate),
                format!("{:e}", c.zeta),
                c.hodgson.map(|h| format!("{h:e}")).unwrap_or_default(),
            ])
            .expect("in-memory csv");
        }
        w.write_record([
            "total".to_string(),
            format!("{:e}", self.total),
            format!("{:e}", self.zeta_total),
            String::new(),
        ])
        .expect("in-memory csv");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.cusps {
            s.push_str(&format!("cusp {}: rate {:.12e}, zeta {:.12e}", c.index, c.rate, c.zeta));
            if let Some(h) = c.hodgson {
                s.push_str(&format!(", hodgson {h:.12e}"));
            }
            s.push('\n');
        }
        s.push_str(&format!(
            "{} total {:.12e}, zeta path {:.12e}, difference {:.3e} (tol {:.1e})\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.total,
            self.zeta_total,
            self.difference,
            self.tolerance
        ));
        s
    }
}
