//! The check suites behind `verify`, `compare` and `veronese`.
//!
//! Every trial draws from its own generator seeded by
//! `(base seed, check name, n, trial)`, so results do not depend on the
//! thread count or on which other checks ran.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use volflow_core::forms::{
    beta_eval, borel_invariant_two_form_dimension, ce_diff_dual, ce_diff_scalar, gamma_eval,
    invariant_two_form_dimension, omega_eval, omega_full_expansion_eval, var_map, zeta_eval, Beta, DualCochain, Gamma,
    Omega,
};
use volflow_core::lie::{
    adjoint_action, bracket, pr_isu, pr_su, random_borel, random_sl, random_unitary, BorelElement, SlElement,
};
use volflow_core::variation::{
    bfg_coords, bfg_rate, binomial, dgg_coords, dgg_rate, hodgson_rate, veronese_algebra, veronese_cross_sum,
    veronese_jet, veronese_square_sum, volume_rate, zeta_rate, CuspJet, HodgsonData, S_BFG, S_DGG,
};
use volflow_core::{Complex64, ComplexMatrix};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{CheckResult, SuiteReport};

type Core<T> = volflow_core::Result<T>;

/// Sizes for which the invariant-form dimensions are computed.
pub const DIMENSION_SIZES: std::ops::RangeInclusive<usize> = 2..=4;

/// Last `n` for the Veronese integer-sum identities.
pub const INTEGER_SUM_LIMIT: u64 = 12;

/// Threshold below which a rate is too small to read a sign from.
const SIGN_FLOOR: f64 = 1e-6;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Per-trial seed; the tag is folded in with FNV-1a.
pub fn trial_seed(base: u64, tag: &str, n: usize, trial: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    splitmix(splitmix(splitmix(base ^ h) ^ n as u64) ^ trial as u64)
}

/// Maximum that lets a NaN through instead of discarding it.
fn nan_max(acc: f64, x: f64) -> f64 {
    if acc.is_nan() || x.is_nan() {
        f64::NAN
    } else {
        acc.max(x)
    }
}

/// Runs `f` on `trials` independent generators in parallel; residuals are
/// reduced in trial order.
fn per_trial<T, F>(cfg: &RunConfig, tag: &str, n: usize, trials: usize, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Core<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, tag, n, k));
            f(&mut rng)
        })
        .collect::<Core<Vec<T>>>()
        .map_err(CliError::Compute)
}

fn residual_check<F>(cfg: &RunConfig, name: &str, n: usize, tol: f64, f: F) -> Result<CheckResult, CliError>
where
    F: Fn(&mut ChaCha8Rng) -> Core<f64> + Sync,
{
    let started = Instant::now();
    let r = per_trial(cfg, name, n, cfg.trials, f)?;
    Ok(CheckResult::new(name, Some(n), cfg.trials, r.into_iter().fold(0.0, nan_max), tol, started))
}

fn exact_check(name: &str, n: Option<usize>, mismatches: usize, started: Instant) -> CheckResult {
    // Exact identities report the number of mismatches against tolerance 1.
    CheckResult::new(name, n, 1, mismatches as f64, 1.0, started)
}

fn borel_triple(n: usize, rng: &mut ChaCha8Rng) -> Core<[BorelElement; 3]> {
    Ok([random_borel(n, rng)?, random_borel(n, rng)?, random_borel(n, rng)?])
}

fn sl_triple(n: usize, rng: &mut ChaCha8Rng) -> Core<[SlElement; 3]> {
    Ok([random_sl(n, rng)?, random_sl(n, rng)?, random_sl(n, rng)?])
}

pub fn random_jet(n: usize, rng: &mut ChaCha8Rng) -> Core<CuspJet> {
    CuspJet::new(random_borel(n, rng)?, random_borel(n, rng)?, random_borel(n, rng)?, random_borel(n, rng)?)
}

pub fn random_hodgson(rng: &mut ChaCha8Rng) -> HodgsonData {
    let mut r = || rng.random_range(-2.0..2.0);
    HodgsonData { l1: r(), theta1: r(), l2: r(), theta2: r(), dl1: r(), dtheta1: r(), dl2: r(), dtheta2: r() }
}

fn diagonal_jet(n: usize, rng: &mut ChaCha8Rng) -> Core<CuspJet> {
    let j = random_jet(n, rng)?;
    let d = |x: &BorelElement| x.matrix().diag();
    CuspJet::diagonal(&d(&j.a), &d(&j.b), &d(&j.da), &d(&j.db))
}

fn strip_diagonal(j: &CuspJet) -> Core<CuspJet> {
    let s = |x: &BorelElement| BorelElement::new(x.matrix().strictly_upper_part());
    CuspJet::new(s(&j.a)?, s(&j.b)?, s(&j.da)?, s(&j.db)?)
}

fn sl(m: ComplexMatrix) -> Core<SlElement> {
    SlElement::new(m)
}

fn cochain_checks(cfg: &RunConfig, n: usize, out: &mut Vec<CheckResult>) -> Result<(), CliError> {
    let tol = cfg.tol;
    out.push(residual_check(cfg, "delta_beta", n, tol.algebra, |rng| {
        let [x, y, z] = borel_triple(n, rng)?;
        let args = [x.into_sl(), y.into_sl(), z.into_sl()];
        Ok((ce_diff_scalar(&Beta { n }, &args)? - omega_eval(n, &args[0], &args[1], &args[2])?).abs())
    })?);
    out.push(residual_check(cfg, "d_gamma", n, tol.algebra, |rng| {
        let [a, b, c] = sl_triple(n, rng)?;
        let lhs = ce_diff_dual(&Gamma { n }, &[a.clone(), b.clone()], &c)?;
        Ok((lhs - var_map(Omega { n })?.eval(&[a, b], &c)?).abs())
    })?);
    out.push(residual_check(cfg, "zeta_identity", n, tol.algebra, |rng| {
        let [x, y, _] = borel_triple(n, rng)?;
        let z = zeta_eval(n, &x, &y)?;
        Ok((z - (gamma_eval(n, x.as_sl(), y.as_sl())? - beta_eval(n, &x, &y)?)).abs())
    })?);
    out.push(residual_check(cfg, "omega_closed", n, tol.algebra, |rng| {
        let xs: Vec<SlElement> = (0..4).map(|_| random_sl(n, rng)).collect::<Core<_>>()?;
        Ok(ce_diff_scalar(&Omega { n }, &xs)?.abs())
    })?);
    Ok(())
}

fn structure_checks(cfg: &RunConfig, n: usize, out: &mut Vec<CheckResult>) -> Result<(), CliError> {
    let tol = cfg.tol;
    out.push(residual_check(cfg, "su_invariance", n, tol.algebra, |rng| {
        let [a, b, c] = sl_triple(n, rng)?;
        let k = random_unitary(n, rng)?;
        let ad = |x: &SlElement| adjoint_action(&k, x);
        Ok((omega_eval(n, &a, &b, &c)? - omega_eval(n, &ad(&a)?, &ad(&b)?, &ad(&c)?)?).abs())
    })?);
    out.push(residual_check(cfg, "stability", n, tol.cross, |rng| {
        let [a, b, c] = sl_triple(n, rng)?;
        let e = |x: &SlElement| x.embed_corner(n + 1);
        Ok((omega_eval(n, &a, &b, &c)? - omega_eval(n + 1, &e(&a)?, &e(&b)?, &e(&c)?)?).abs())
    })?);
    out.push(residual_check(cfg, "full_expansion", n, tol.cross, |rng| {
        let [a, b, c] = sl_triple(n, rng)?;
        Ok((omega_eval(n, &a, &b, &c)? - omega_full_expansion_eval(n, &a, &b, &c)?).abs())
    })?);
    out.push(residual_check(cfg, "bracket_projections", n, tol.algebra, |rng| {
        let [a, b, _] = sl_triple(n, rng)?;
        let (sa, ia) = (pr_su(a.matrix()), pr_isu(a.matrix()));
        let (sb, ib) = (pr_su(b.matrix()), pr_isu(b.matrix()));
        let ab = bracket(&a, &b)?.into_matrix();
        let su = &sa.commutator(&sb) + &ia.commutator(&ib);
        let isu = &sa.commutator(&ib) + &ia.commutator(&sb);
        Ok(pr_su(&ab).max_diff(&su).max(pr_isu(&ab).max_diff(&isu)))
    })?);
    out.push(residual_check(cfg, "beta_torus_invariance", n, tol.algebra, |rng| {
        let [x, y, _] = borel_triple(n, rng)?;
        let mut d: Vec<Complex64> = (0..n).map(|_| Complex64::new(0.0, rng.random_range(-1.0..1.0))).collect();
        let mean = d.iter().map(|z| z.im).sum::<f64>() / n as f64;
        d.iter_mut().for_each(|z| z.im -= mean);
        let t = BorelElement::diagonal(&d)?;
        let tx = BorelElement::new(bracket(t.as_sl(), x.as_sl())?.into_matrix())?;
        let ty = BorelElement::new(bracket(t.as_sl(), y.as_sl())?.into_matrix())?;
        Ok((beta_eval(n, &tx, &y)? + beta_eval(n, &x, &ty)?).abs())
    })?);
    if DIMENSION_SIZES.contains(&n) {
        let started = Instant::now();
        let d = invariant_two_form_dimension(n).map_err(CliError::Compute)?;
        out.push(exact_check("invariant_two_form_dimension", Some(n), d, started));
        let started = Instant::now();
        let d = borel_invariant_two_form_dimension(n).map_err(CliError::Compute)?;
        out.push(exact_check("borel_invariant_two_form_dimension", Some(n), d.abs_diff((n - 1) * (n - 1)), started));
    }
    Ok(())
}

fn rate_checks(cfg: &RunConfig, n: usize, out: &mut Vec<CheckResult>) -> Result<(), CliError> {
    let tol = cfg.tol;
    out.push(residual_check(cfg, "rate_zeta_agreement", n, tol.solver, |rng| {
        let j = random_jet(n, rng)?;
        Ok((volume_rate(std::slice::from_ref(&j))? - zeta_rate(&[j])?).abs())
    })?);
    out.push(residual_check(cfg, "unipotent_rate", n, tol.solver, |rng| {
        Ok(volume_rate(&[strip_diagonal(&random_jet(n, rng)?)?])?.abs())
    })?);
    out.push(residual_check(cfg, "shift_invariance", n, tol.solver, |rng| {
        let j = random_jet(n, rng)?;
        let mut shift = |x: &BorelElement| -> Core<BorelElement> {
            let mut m = x.matrix().clone();
            for i in 0..n {
                m[(i, i)].im += 2.0 * std::f64::consts::PI * rng.random_range(-3i32..=3) as f64;
            }
            BorelElement::new_log(m)
        };
        let shifted = CuspJet::new(shift(&j.a)?, shift(&j.b)?, j.da.clone(), j.db.clone())?;
        Ok((volume_rate(&[shifted])? - volume_rate(&[j])?).abs())
    })?);
    out.push(residual_check(cfg, "permutation_invariance", n, tol.solver, |rng| {
        let j = diagonal_jet(n, rng)?;
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        Ok((volume_rate(&[j.permuted_diagonal(&p)?])? - volume_rate(&[j])?).abs())
    })?);
    if n == 2 {
        out.push(residual_check(cfg, "hodgson_reduction", n, tol.solver, |rng| {
            let d = random_hodgson(rng);
            Ok((volume_rate(&[d.to_jet()?])? - hodgson_rate(&[d])).abs())
        })?);
    }
    Ok(())
}

fn veronese_trace_check(cfg: &RunConfig, n: usize) -> Result<CheckResult, CliError> {
    let scale = binomial(n as u64 + 1, 3) as f64;
    residual_check(cfg, "veronese_trace", n, cfg.tol.cross, move |rng| {
        let (x, y) = (random_sl(2, rng)?, random_sl(2, rng)?);
        let lhs = (veronese_algebra(n, &x)?.matrix() * veronese_algebra(n, &y)?.matrix()).trace();
        let rhs = (x.matrix() * y.matrix()).trace() * scale;
        Ok((lhs - rhs).norm())
    })
}

fn veronese_checks(cfg: &RunConfig, n: usize, out: &mut Vec<CheckResult>) -> Result<(), CliError> {
    out.push(veronese_trace_check(cfg, n)?);
    let scale = binomial(n as u64 + 1, 3) as f64;
    out.push(residual_check(cfg, "veronese_rate_scaling", n, cfg.tol.cross, move |rng| {
        let j = random_jet(2, rng)?;
        Ok((volume_rate(&[veronese_jet(n, &j)?])? - scale * volume_rate(&[j])?).abs())
    })?);
    Ok(())
}

/// Mismatches of the two Veronese integer identities over `2..=limit`.
pub fn integer_sum_mismatches(limit: u64) -> usize {
    (2..=limit)
        .filter(|&n| {
            let c = binomial(n + 1, 3);
            veronese_square_sum(n) != 2 * c || veronese_cross_sum(n) != c
        })
        .count()
}

/// `ϖ₂` on `(½[[0,1],[1,0]], ½[[0,i],[−i,0]], ½·diag(1,−1))`.
pub fn normalization_residual() -> Core<f64> {
    let h = |re: f64, im: f64| Complex64::new(re, im);
    let a = sl(ComplexMatrix::from_rows(&[&[h(0.0, 0.0), h(0.5, 0.0)], &[h(0.5, 0.0), h(0.0, 0.0)]])?)?;
    let b = sl(ComplexMatrix::from_rows(&[&[h(0.0, 0.0), h(0.0, 0.5)], &[h(0.0, -0.5), h(0.0, 0.0)]])?)?;
    let c = sl(ComplexMatrix::diagonal(&[h(0.5, 0.0), h(-0.5, 0.0)]))?;
    Ok((omega_eval(2, &a, &b, &c)? - 1.0).abs())
}

pub fn verify(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    cfg.validate()?;
    let mut report = SuiteReport::new("verify", cfg.seed);
    let started = Instant::now();
    let r = normalization_residual().map_err(CliError::Compute)?;
    report.checks.push(CheckResult::new("normalization", Some(2), 1, r, cfg.tol.solver, started));
    for n in cfg.n.iter() {
        cochain_checks(cfg, n, &mut report.checks)?;
        structure_checks(cfg, n, &mut report.checks)?;
        rate_checks(cfg, n, &mut report.checks)?;
        veronese_checks(cfg, n, &mut report.checks)?;
    }
    let started = Instant::now();
    report.checks.push(exact_check("veronese_integer_sums", None, integer_sum_mismatches(INTEGER_SUM_LIMIT), started));
    Ok(report)
}

/// Result of comparing a formula against `volume_rate` under one sign.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub sign: f64,
    pub max_residual: f64,
    pub flips: usize,
}

/// Reads the sign from the first trial with a usable rate, then measures
/// `|formula − sign·rate|` and the trials whose sign disagrees.
pub fn calibrate(pairs: &[(f64, f64)]) -> Calibration {
    let sign = pairs
        .iter()
        .find(|(_, r)| r.abs() > SIGN_FLOOR)
        .map(|(f, r)| if f * r < 0.0 { -1.0 } else { 1.0 })
        .unwrap_or(1.0);
    let max_residual = pairs.iter().map(|(f, r)| (f - sign * r).abs()).fold(0.0, nan_max);
    let flips =
        pairs.iter().filter(|(f, r)| r.abs() > SIGN_FLOOR && f.abs() > SIGN_FLOOR && f * r * sign < 0.0).count();
    Calibration { sign, max_residual, flips }
}

fn comparator<F>(
    cfg: &RunConfig,
    report: &mut SuiteReport,
    name: &str,
    n: usize,
    expected_sign: f64,
    f: F,
) -> Result<(), CliError>
where
    F: Fn(&mut ChaCha8Rng) -> Core<(f64, f64)> + Sync,
{
    let started = Instant::now();
    let pairs = per_trial(cfg, name, n, cfg.trials, f)?;
    let cal = calibrate(&pairs);
    report.checks.push(CheckResult::new(name, Some(n), cfg.trials, cal.max_residual, cfg.tol.cross, started));
    let mismatch = cal.flips + usize::from(cal.sign != expected_sign);
    report.checks.push(CheckResult::new(&format!("{name}_sign"), Some(n), cfg.trials, mismatch as f64, 1.0, started));
    report.notes.push(format!(
        "{name} n={n}: calibrated sign {:+}, expected {:+}, flips {}",
        cal.sign, expected_sign, cal.flips
    ));
    Ok(())
}

pub fn compare(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    cfg.validate()?;
    let mut report = SuiteReport::new("compare", cfg.seed);
    for n in cfg.n.iter() {
        if n == 2 {
            comparator(cfg, &mut report, "hodgson", n, 1.0, |rng| {
                let d = random_hodgson(rng);
                Ok((hodgson_rate(&[d]), volume_rate(&[d.to_jet()?])?))
            })?;
            comparator(cfg, &mut report, "dgg_vs_hodgson", n, S_DGG, |rng| {
                let d = random_hodgson(rng);
                Ok((dgg_rate(2, &dgg_coords(&d.to_jet()?))?, hodgson_rate(&[d])))
            })?;
        }
        if n == 3 {
            comparator(cfg, &mut report, "bfg", n, S_BFG, |rng| {
                let j = random_jet(3, rng)?;
                Ok((4.0 * bfg_rate(&bfg_coords(&j)?), volume_rate(&[j])?))
            })?;
        }
        comparator(cfg, &mut report, "dgg", n, S_DGG, |rng| {
            let j = random_jet(n, rng)?;
            Ok((dgg_rate(n, &dgg_coords(&j))?, volume_rate(&[j])?))
        })?;
    }
    Ok(report)
}

fn format_matrix(m: &ComplexMatrix) -> String {
    let fmt = |z: Complex64| {
        if z.im == 0.0 {
            format!("{}", z.re)
        } else {
            format!("{}{:+}i", z.re, z.im)
        }
    };
    let rows: Vec<String> = (0..m.n())
        .map(|i| format!("[{}]", (0..m.n()).map(|j| fmt(m[(i, j)])).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

/// `σ_n(H)`, `σ_n(E)`, `σ_n(F)` for the standard `sl_2` triple.
pub fn veronese_triple(n: usize) -> Core<[ComplexMatrix; 3]> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let h = ComplexMatrix::diagonal(&[one, -one]);
    let e = ComplexMatrix::from_rows(&[&[o, one], &[o, o]])?;
    let f = ComplexMatrix::from_rows(&[&[o, o], &[one, o]])?;
    Ok([
        veronese_algebra(n, &sl(h)?)?.into_matrix(),
        veronese_algebra(n, &sl(e)?)?.into_matrix(),
        veronese_algebra(n, &sl(f)?)?.into_matrix(),
    ])
}

pub fn veronese(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    cfg.validate()?;
    let mut report = SuiteReport::new("veronese", cfg.seed);
    for n in cfg.n.iter() {
        let [h, e, f] = veronese_triple(n).map_err(CliError::Compute)?;
        for (name, m) in [("H", &h), ("E", &e), ("F", &f)] {
            report.notes.push(format!("sigma_{n}({name}) = {}", format_matrix(m)));
        }
        report.checks.push(veronese_trace_check(cfg, n)?);
        let started = Instant::now();
        let c = binomial(n as u64 + 1, 3);
        let bad = usize::from(veronese_square_sum(n as u64) != 2 * c) + usize::from(veronese_cross_sum(n as u64) != c);
        report.checks.push(exact_check("veronese_integer_sums", Some(n), bad, started));
    }
    Ok(report)
}

/// Caps the global thread pool at `VOLFLOW_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("VOLFLOW_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("VOLFLOW_THREADS must be a positive integer, got `{v}`")))?;
    if k == 0 {
        return Err(CliError::Usage("VOLFLOW_THREADS must be at least 1".into()));
    }
    // A pool that already exists (tests, repeated calls) is left alone.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    Ok(())
}
