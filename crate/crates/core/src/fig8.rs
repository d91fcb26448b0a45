//! Figure-eight knot complement: two ideal tetrahedra, the Dehn-surgery
//! deformation space near the complete structure, and the volume-rate
//! experiment along paths in the meridian log-holonomy `u`.
//!
//! Conventions: the edge equation is `z(1−z)·w(1−w) = 1`, the meridian
//! holonomy is `w(1−z) = e^u` and the longitude log-holonomy is
//! `v = 2·(log z + log(1−z))`. The complete structure is
//! `z = w = e^{iπ/3}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::variation::{volume_rate, CuspJet};

/// Sign of the integrated-rate law: `∫rate = S_NZ·¼·Im(ū·v) + O(|u|⁴)`.
pub const S_NZ: f64 = 1.0;

/// Step for re-solve finite differences along the path.
pub const FD_STEP: f64 = 1e-4;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `b_n = B_n/n!` with `B_1 = −1/2`, from `Σ_{k≤m} b_k/(m−k+1)! = 0`.
fn bernoulli_over_factorial(count: usize) -> Vec<f64> {
    let mut inv_fact = Vec::with_capacity(count + 2);
    inv_fact.push(1.0);
    for k in 1..=(count + 1) {
        let prev: f64 = inv_fact[k - 1];
        inv_fact.push(prev / k as f64);
    }
    let mut b = Vec::with_capacity(count);
    b.push(1.0);
    for m in 1..count {
        let s: f64 = (0..m).map(|k| b[k] * inv_fact[m - k + 1]).sum();
        b.push(-s);
    }
    b
}

/// `Li₂(z)` for `|z| ≤ 1`, `Re z ≤ 1/2` via the series in `−log(1−z)`.
fn li2_reduced(z: Complex64) -> Complex64 {
    let u = -(ONE - z).ln();
    let b = bernoulli_over_factorial(40);
    let mut pow = u;
    let mut s = c(0.0, 0.0);
    for (n, bn) in b.iter().enumerate() {
        if *bn != 0.0 {
            s += pow * (*bn / (n as f64 + 1.0));
        }
        pow *= u;
    }
    s
}

/// Bloch–Wigner dilogarithm `D(z) = Im Li₂(z) + arg(1−z)·log|z|`, the
/// volume of the ideal tetrahedron with shape `z`.
pub fn bloch_wigner(z: Complex64) -> Result<f64> {
    if z.norm() == 0.0 || (z - ONE).norm() == 0.0 {
        return Err(Error::Singular("Bloch–Wigner dilogarithm at 0 or 1"));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidArgument("non-finite shape"));
    }
    if z.im == 0.0 {
        return Ok(0.0);
    }
    // D(1/z) = −D(z) and D(1−z) = −D(z).
    let mut sign = 1.0;
    let mut w = z;
    if w.norm() > 1.0 {
        w = ONE / w;
        sign = -sign;
    }
    if w.re > 0.5 {
        w = ONE - w;
        sign = -sign;
    }
    let d = li2_reduced(w).im + (ONE - w).arg() * w.norm().ln();
    Ok(sign * d)
}

/// Tetrahedron shapes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapePair {
    pub z: Complex64,
    pub w: Complex64,
}

impl ShapePair {
    pub fn complete() -> Self {
        let e = Complex64::from_polar(1.0, PI / 3.0);
        Self { z: e, w: e }
    }

    pub fn conj(&self) -> Self {
        Self { z: self.z.conj(), w: self.w.conj() }
    }

    pub fn is_geometric(&self) -> bool {
        self.z.im > 0.0 && self.w.im > 0.0
    }
}

/// Meridian and longitude log-holonomies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolonomyPair {
    pub u: Complex64,
    pub v: Complex64,
}

fn checked_ln(x: Complex64) -> Result<Complex64> {
    if x.norm() == 0.0 {
        return Err(Error::Singular("degenerate shape"));
    }
    if x.re < 0.0 && x.im.abs() <= 1e-12 * x.norm() {
        return Err(Error::BranchAmbiguity("shape logarithm on the branch cut"));
    }
    Ok(x.ln())
}

/// `(r₁, r₂)` with `r₁ = log z + log(1−z) + log w + log(1−w)` (edge) and
/// `r₂ = log w + log(1−z) − u` (meridian).
///
/// Logarithms are principal; near the complete structure every argument
/// stays within `±π/2` of its value there, so no branch is crossed.
pub fn gluing_residual(s: &ShapePair, u_target: Complex64) -> Result<(Complex64, Complex64)> {
    let (lz, l1z) = (checked_ln(s.z)?, checked_ln(ONE - s.z)?);
    let (lw, l1w) = (checked_ln(s.w)?, checked_ln(ONE - s.w)?);
    Ok((lz + l1z + lw + l1w, lw + l1z - u_target))
}

/// Newton's method on [`gluing_residual`].
pub fn solve_shapes(u_target: Complex64, seed: &ShapePair) -> Result<ShapePair> {
    if !(u_target.norm() < 0.5) {
        return Err(Error::InvalidArgument("meridian holonomy outside the surgery neighbourhood |u| < 0.5"));
    }
    let mut s = *seed;
    for _ in 0..50 {
        let (r1, r2) = gluing_residual(&s, u_target)?;
        if r1.norm().max(r2.norm()) < 1e-13 {
            if !s.is_geometric() {
                return Err(Error::DegenerateShape { z_im: s.z.im, w_im: s.w.im });
            }
            return Ok(s);
        }
        let (z, w) = (s.z, s.w);
        let j11 = ONE / z - ONE / (ONE - z);
        let j12 = ONE / w - ONE / (ONE - w);
        let j21 = -ONE / (ONE - z);
        let j22 = ONE / w;
        let det = j11 * j22 - j12 * j21;
        if det.norm() < 1e-14 {
            return Err(Error::Singular("gluing Jacobian"));
        }
        let dz = (j22 * r1 - j12 * r2) / det;
        let dw = (j11 * r2 - j21 * r1) / det;
        s = ShapePair { z: z - dz, w: w - dw };
    }
    let (r1, r2) = gluing_residual(&s, u_target)?;
    if r1.norm().max(r2.norm()) < 1e-12 && s.is_geometric() {
        return Ok(s);
    }
    Err(Error::NoConvergence { what: "gluing equations", iterations: 50 })
}

/// Longitude log-holonomy `v = 2·(log z + log(1−z))`.
pub fn holonomy_v(s: &ShapePair) -> Result<Complex64> {
    Ok((checked_ln(s.z)? + checked_ln(ONE - s.z)?) * 2.0)
}

/// Meridian log-holonomy `u = log w + log(1−z)`.
pub fn holonomy_u(s: &ShapePair) -> Result<Complex64> {
    Ok(checked_ln(s.w)? + checked_ln(ONE - s.z)?)
}

pub fn holonomies(s: &ShapePair) -> Result<HolonomyPair> {
    Ok(HolonomyPair { u: holonomy_u(s)?, v: holonomy_v(s)? })
}

/// `D(z) + D(w)`.
pub fn volume_of(s: &ShapePair) -> Result<f64> {
    Ok(bloch_wigner(s.z)? + bloch_wigner(s.w)?)
}

/// `v(u)` solved from the complete structure.
pub fn v_of_u(u: Complex64) -> Result<Complex64> {
    holonomy_v(&solve_shapes(u, &ShapePair::complete())?)
}

/// Cusp shape estimate `(v(h) − v(−h))/(2h)`.
pub fn cusp_shape(h: f64) -> Result<Complex64> {
    Ok((v_of_u(c(h, 0.0))? - v_of_u(c(-h, 0.0))?) / (2.0 * h))
}

/// A path `t ↦ u(t)` sampled at increasing `t`, with `du/dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationPath {
    pub t: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
}

impl DeformationPath {
    /// `u(t) = t·u₀` on `[0, 1]`.
    pub fn radial(u0: Complex64, samples: usize) -> Result<Self> {
        check_samples(samples)?;
        let t: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect();
        let u = t.iter().map(|&s| u0 * s).collect();
        Ok(Self { du: alloc::vec![u0; samples], t, u })
    }

    /// `u(t) = u₀·e^{2πit}` on `[0, 1]`.
    pub fn circle(u0: Complex64, samples: usize) -> Result<Self> {
        check_samples(samples)?;
        let t: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect();
        let u = t.iter().map(|&s| u0 * Complex64::from_polar(1.0, 2.0 * PI * s)).collect();
        let du = t.iter().map(|&s| u0 * c(0.0, 2.0 * PI) * Complex64::from_polar(1.0, 2.0 * PI * s)).collect();
        Ok(Self { t, u, du })
    }

    /// Explicit samples; `du/dt` by three-point differences.
    pub fn from_samples(t: Vec<f64>, u: Vec<Complex64>) -> Result<Self> {
        if t.len() != u.len() {
            return Err(Error::SizeMismatch { expected: t.len(), found: u.len() });
        }
        check_samples(t.len())?;
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("path times must increase"));
        }
        let m = t.len();
        let du = (0..m)
            .map(|i| {
                let (a, b, cc) = if i == 0 {
                    (0, 1, 2)
                } else if i == m - 1 {
                    (m - 3, m - 2, m - 1)
                } else {
                    (i - 1, i, i + 1)
                };
                let w = lagrange_derivative_weights([t[a], t[b], t[cc]], t[i]);
                u[a] * w[0] + u[b] * w[1] + u[cc] * w[2]
            })
            .collect();
        Ok(Self { t, u, du })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 9 {
        return Err(Error::InvalidArgument("deformation paths need at least 9 samples"));
    }
    Ok(())
}

/// Weights of the derivative at `x` of the quadratic interpolant on `ts`.
fn lagrange_derivative_weights(ts: [f64; 3], x: f64) -> [f64; 3] {
    let [a, b, cc] = ts;
    [
        ((x - b) + (x - cc)) / ((a - b) * (a - cc)),
        ((x - a) + (x - cc)) / ((b - a) * (b - cc)),
        ((x - a) + (x - b)) / ((cc - a) * (cc - b)),
    ]
}

/// `∫_lo^hi` of the quadratic through `(ts_k, fs_k)`.
fn quadratic_integral(ts: [f64; 3], fs: [f64; 3], lo: f64, hi: f64) -> f64 {
    // ∫ of each Lagrange basis polynomial via antiderivative of
    // (x−p)(x−q) = x² − (p+q)x + pq.
    let basis = |p: f64, q: f64, den: f64| {
        let anti = |x: f64| x * x * x / 3.0 - (p + q) * x * x / 2.0 + p * q * x;
        (anti(hi) - anti(lo)) / den
    };
    let [a, b, cc] = ts;
    fs[0] * basis(b, cc, (a - b) * (a - cc))
        + fs[1] * basis(a, cc, (b - a) * (b - cc))
        + fs[2] * basis(a, b, (cc - a) * (cc - b))
}

/// Running integral of `f` over `t`: composite Simpson at even indices, and
/// the matching quadratic's partial integral in between.
pub fn running_integral(t: &[f64], f: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut out = alloc::vec![0.0; m];
    if m < 3 {
        for i in 1..m {
            out[i] = out[i - 1] + 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
        }
        return out;
    }
    let mut base = 0.0;
    let mut i = 0;
    while i + 2 < m {
        let ts = [t[i], t[i + 1], t[i + 2]];
        let fs = [f[i], f[i + 1], f[i + 2]];
        out[i + 1] = base + quadratic_integral(ts, fs, t[i], t[i + 1]);
        base += quadratic_integral(ts, fs, t[i], t[i + 2]);
        out[i + 2] = base;
        i += 2;
    }
    if i + 1 < m {
        // Even sample count: close the last interval with the trailing quadratic.
        let ts = [t[m - 3], t[m - 2], t[m - 1]];
        let fs = [f[m - 3], f[m - 2], f[m - 1]];
        out[m - 1] = base + quadratic_integral(ts, fs, t[m - 2], t[m - 1]);
    }
    out
}

/// One sample of a deformation experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationRow {
    pub t: f64,
    pub shapes: ShapePair,
    pub u: Complex64,
    pub v: Complex64,
    pub volume: f64,
    /// Rate formula on the jet `a = diag(v/2, −v/2)`, `b = diag(u/2, −u/2)`.
    pub rate: f64,
    /// `d(D(z)+D(w))/dt` by re-solve central differences.
    pub rate_fd: f64,
    /// Running integral of `rate`.
    pub int_rate: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformationReport {
    pub rows: Vec<DeformationRow>,
    /// `∫rate dt` over the whole path.
    pub integral: f64,
    /// `S_NZ·¼·(Im(ū v)|_end − Im(ū v)|_start)`.
    pub nz_prediction: f64,
    /// `|integral − nz_prediction|`.
    pub discrepancy: f64,
    /// `vol(end) − vol(start)`.
    pub volume_change: f64,
}

fn nz_quadratic(h: &HolonomyPair) -> f64 {
    0.25 * (h.u.conj() * h.v).im
}

fn jet_from_holonomy(u: Complex64, v: Complex64, du: Complex64, dv: Complex64) -> Result<CuspJet> {
    let half = |x: Complex64| [x / 2.0, -x / 2.0];
    CuspJet::diagonal(&half(v), &half(u), &half(dv), &half(du))
}

/// Solves along the path (each sample seeding the next) and compares the
/// rate formula with the volume and with the quadratic law.
pub fn deformation_experiment(path: &DeformationPath, seed: &ShapePair) -> Result<DeformationReport> {
    check_samples(path.len())?;
    let mut rows = Vec::with_capacity(path.len());
    let mut prev = *seed;
    for i in 0..path.len() {
        let wrap = |e: Error| Error::AtSample { index: i, source: alloc::boxed::Box::new(e) };
        let (u, du) = (path.u[i], path.du[i]);
        let s = solve_shapes(u, &prev).map_err(wrap)?;
        let h = HolonomyPair { u, v: holonomy_v(&s).map_err(wrap)? };
        let (rate, rate_fd) = if du.norm() == 0.0 {
            (0.0, 0.0)
        } else {
            let plus = solve_shapes(u + du * FD_STEP, &s).map_err(wrap)?;
            let minus = solve_shapes(u - du * FD_STEP, &s).map_err(wrap)?;
            let dv = (holonomy_v(&plus).map_err(wrap)? - holonomy_v(&minus).map_err(wrap)?) / (2.0 * FD_STEP);
            let dvol = (volume_of(&plus).map_err(wrap)? - volume_of(&minus).map_err(wrap)?) / (2.0 * FD_STEP);
            let jet = jet_from_holonomy(u, h.v, du, dv).map_err(wrap)?;
            (volume_rate(&[jet]).map_err(wrap)?, dvol)
        };
        let (r1, r2) = gluing_residual(&s, u).map_err(wrap)?;
        rows.push(DeformationRow {
            t: path.t[i],
            shapes: s,
            u,
            v: h.v,
            volume: volume_of(&s).map_err(wrap)?,
            rate,
            rate_fd,
            int_rate: 0.0,
            residual: r1.norm().max(r2.norm()),
        });
        prev = s;
    }
    let rates: Vec<f64> = rows.iter().map(|r| r.rate).collect();
    let running = running_integral(&path.t, &rates);
    for (r, v) in rows.iter_mut().zip(&running) {
        r.int_rate = *v;
    }
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let integral = last.int_rate;
    let nz_prediction = S_NZ
        * (nz_quadratic(&HolonomyPair { u: last.u, v: last.v })
            - nz_quadratic(&HolonomyPair { u: first.u, v: first.v }));
    Ok(DeformationReport {
        integral,
        nz_prediction,
        discrepancy: (integral - nz_prediction).abs(),
        volume_change: last.volume - first.volume,
        rows,
    })
}

/// Discrepancies of radial experiments at several `|u₀|` and the fitted
/// log-log slope.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticDiagnostic {
    pub radii: Vec<f64>,
    pub discrepancies: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs radial experiments along `direction` (normalized) at each radius.
pub fn quartic_decay_diagnostic(direction: Complex64, radii: &[f64], samples: usize) -> Result<QuarticDiagnostic> {
    if radii.len() < 2 || direction.norm() == 0.0 {
        return Err(Error::InvalidArgument("need a nonzero direction and at least two radii"));
    }
    let dir = direction / direction.norm();
    let mut discrepancies = Vec::with_capacity(radii.len());
    for &r in radii {
        let path = DeformationPath::radial(dir * r, samples)?;
        discrepancies.push(deformation_experiment(&path, &ShapePair::complete())?.discrepancy);
    }
    let slope = log_log_slope(radii, &discrepancies);
    Ok(QuarticDiagnostic { radii: radii.to_vec(), discrepancies, slope })
}

/// Fit of `vol(u) − vol(0) = c·|2cosh(u/2) − 2|` over the given points.
pub fn nondifferentiability_fit(points: &[Complex64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("nondifferentiability fit needs sample points"));
    }
    let vol0 = volume_of(&ShapePair::complete())?;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &u in points {
        let s = solve_shapes(u, &ShapePair::complete())?;
        let x = ((u / 2.0).cosh() * 2.0 - 2.0).norm();
        let y = volume_of(&s)? - vol0;
        sxy += x * y;
        sxx += x * x;
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `D(z)` by adaptive Simpson on `Im Li₂(z) = −∫₀¹ Im log(1 − z·t)/t dt`.
    fn bw_quadrature(z: Complex64) -> f64 {
        fn f(z: Complex64, t: f64) -> f64 {
            if t == 0.0 {
                return -(-z).im;
            }
            -(ONE - z * t).ln().im / t
        }
        #[allow(clippy::too_many_arguments)]
        fn simpson(z: Complex64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(z, lm), f(z, rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(z, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + simpson(z, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(z, 0.0), f(z, 0.5), f(z, 1.0));
        let whole = (fa + 4.0 * fm + fb) / 6.0;
        let im_li2 = simpson(z, 0.0, 1.0, fa, fm, fb, whole, 1e-14, 40);
        im_li2 + (ONE - z).arg() * z.norm().ln()
    }

    #[test]
    fn bloch_wigner_values() {
        assert_eq!(bloch_wigner(c(0.5, 0.0)).unwrap(), 0.0);
        let e = Complex64::from_polar(1.0, PI / 3.0);
        assert!((bloch_wigner(e).unwrap() - 1.0149416064096536).abs() < 1e-12);
        assert!((bloch_wigner(c(0.0, 1.0)).unwrap() - 0.915_965_594_177_219).abs() < 1e-12);
        assert!(bloch_wigner(c(0.0, 0.0)).is_err());
        assert!(bloch_wigner(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn bloch_wigner_matches_quadrature() {
        for z in [c(0.3, 0.4), c(-1.5, 0.2), c(2.0, 3.0), c(0.9, -0.1), c(0.5, 0.866), c(-0.2, -2.0)] {
            // The integral representation is valid off the cut [1, ∞).
            let q = bw_quadrature(z);
            assert!((bloch_wigner(z).unwrap() - q).abs() < 1e-10, "{z}: {} vs {q}", bloch_wigner(z).unwrap());
        }
    }

    #[test]
    fn bernoulli_coefficients() {
        let b = bernoulli_over_factorial(6);
        let expected = [1.0, -0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0, 0.0];
        for (x, y) in b.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn complete_structure() {
        let s = ShapePair::complete();
        let (r1, r2) = gluing_residual(&s, c(0.0, 0.0)).unwrap();
        assert!(r1.norm() < 1e-15 && r2.norm() < 1e-15);
        let solved = solve_shapes(c(0.0, 0.0), &ShapePair { z: c(0.45, 0.9), w: c(0.55, 0.8) }).unwrap();
        assert!((solved.z - s.z).norm() < 1e-12 && (solved.w - s.w).norm() < 1e-12);
        assert!((volume_of(&s).unwrap() - 2.029_883_212_819_307).abs() < 1e-12);
        assert!(holonomy_v(&s).unwrap().norm() < 1e-15);
        assert!((volume_of(&s.conj()).unwrap() + volume_of(&s).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn residual_conjugation_symmetry() {
        let s = ShapePair { z: c(0.4, 0.8), w: c(0.6, 0.9) };
        let u = c(0.1, -0.05);
        let (r1, r2) = gluing_residual(&s, u).unwrap();
        let (q1, q2) = gluing_residual(&s.conj(), u.conj()).unwrap();
        assert!((r1.conj() - q1).norm() < 1e-15 && (r2.conj() - q2).norm() < 1e-15);
        assert!(r1.norm() > 1e-3);
    }

    #[test]
    fn solver_output_is_valid() {
        let s = solve_shapes(c(0.1, 0.0), &ShapePair::complete()).unwrap();
        let (r1, r2) = gluing_residual(&s, c(0.1, 0.0)).unwrap();
        assert!(r1.norm() < 1e-12 && r2.norm() < 1e-12);
        assert!(s.is_geometric());
        assert!((holonomy_u(&s).unwrap() - c(0.1, 0.0)).norm() < 1e-12);
        assert!(solve_shapes(c(0.6, 0.0), &ShapePair::complete()).is_err());
    }

    #[test]
    fn v_is_odd() {
        for k in 0..16 {
            let u = Complex64::from_polar(0.3 * (k % 4 + 1) as f64 / 4.0, 2.0 * PI * k as f64 / 16.0);
            assert!((v_of_u(u).unwrap() + v_of_u(-u).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn cusp_shape_is_stable() {
        let t1 = cusp_shape(1e-3).unwrap();
        let t2 = cusp_shape(5e-4).unwrap();
        assert!(t1.im > 0.0);
        assert!((t1 - t2).norm() < 1e-6);
        assert!((t1 - c(0.0, 2.0 * 3f64.sqrt())).norm() < 1e-5);
    }

    #[test]
    fn volume_decreases_along_real_u() {
        let v0 = volume_of(&ShapePair::complete()).unwrap();
        for u in [0.05, -0.05] {
            let s = solve_shapes(c(u, 0.0), &ShapePair::complete()).unwrap();
            assert!(volume_of(&s).unwrap() < v0);
        }
    }

    #[test]
    fn running_integral_is_exact_on_cubics() {
        let t: Vec<f64> = (0..9).map(|k| k as f64 / 8.0).collect();
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x * x - 2.0 * x + 1.0).collect();
        let r = running_integral(&t, &f);
        for (x, v) in t.iter().zip(&r) {
            assert!((v - (x * x * x - x * x + x)).abs() < 1e-14);
        }
        let g: Vec<f64> = t.iter().map(|x| x * x * x).collect();
        assert!((running_integral(&t, &g)[8] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn zero_path_gives_zero_report() {
        let p = DeformationPath::radial(c(0.0, 0.0), 9).unwrap();
        let r = deformation_experiment(&p, &ShapePair::complete()).unwrap();
        assert!(r.rows.iter().all(|row| row.rate == 0.0 && row.int_rate == 0.0));
        assert_eq!(r.discrepancy, 0.0);
    }

    #[test]
    fn rate_is_minus_volume_derivative() {
        let p = DeformationPath::radial(c(0.1, 0.05), 17).unwrap();
        let r = deformation_experiment(&p, &ShapePair::complete()).unwrap();
        for row in &r.rows {
            assert!((row.rate + row.rate_fd).abs() < 1e-7, "{} vs {}", row.rate, row.rate_fd);
            assert!(row.residual < 1e-12);
        }
        assert!((r.integral + r.volume_change).abs() < 1e-8);
    }

    #[test]
    fn integrated_rate_matches_quadratic_law() {
        let p = DeformationPath::radial(c(0.1, 0.05), 33).unwrap();
        let r = deformation_experiment(&p, &ShapePair::complete()).unwrap();
        assert!(r.nz_prediction > 0.0);
        assert!(r.discrepancy < 1e-3 * r.nz_prediction);
    }

    #[test]
    fn circle_path_runs() {
        let p = DeformationPath::circle(c(0.05, 0.0), 17).unwrap();
        let r = deformation_experiment(&p, &ShapePair::complete()).unwrap();
        assert!(r.volume_change.abs() < 1e-10);
        let q = DeformationPath::from_samples(p.t.clone(), p.u.clone()).unwrap();
        assert!(q.du.iter().zip(&p.du).all(|(a, b)| (a - b).norm() < 0.1 * b.norm()));
        assert!(DeformationPath::radial(c(0.1, 0.0), 5).is_err());
    }

    #[test]
    fn quartic_decay() {
        let d = quartic_decay_diagnostic(c(0.1, 0.05), &[0.05, 0.1, 0.2], 33).unwrap();
        assert!(d.slope > 3.5 && d.slope < 4.5, "slope {}", d.slope);
    }

    #[test]
    fn nondifferentiability_exhibit() {
        let pts: Vec<Complex64> =
            (0..8).flat_map(|k| [0.02, 0.04].map(|r| Complex64::from_polar(r, PI * k as f64 / 4.0 + 0.1))).collect();
        let cfit = nondifferentiability_fit(&pts).unwrap();
        let tau = cusp_shape(1e-3).unwrap();
        assert!((cfit + S_NZ * tau.im).abs() < 1e-2 * tau.im, "c = {cfit}, Im τ = {}", tau.im);
    }

    #[test]
    fn experiment_is_deterministic() {
        let p = DeformationPath::radial(c(0.07, -0.02), 9).unwrap();
        let a = deformation_experiment(&p, &ShapePair::complete()).unwrap();
        let b = deformation_experiment(&p, &ShapePair::complete()).unwrap();
        assert_eq!(a, b);
    }

    fn gen_point() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, 0.05f64..3.0).prop_map(|(x, y)| c(x, y))
    }

    proptest! {
        #[test]
        fn bloch_wigner_symmetries(z in gen_point()) {
            let d = bloch_wigner(z).unwrap();
            prop_assert!((bloch_wigner(z.conj()).unwrap() + d).abs() < 1e-10);
            prop_assert!((bloch_wigner(ONE - ONE / z).unwrap() - d).abs() < 1e-10);
            prop_assert!((bloch_wigner(ONE / (ONE - z)).unwrap() - d).abs() < 1e-10);
            prop_assert!((bloch_wigner(ONE / z).unwrap() + d).abs() < 1e-10);
        }

        #[test]
        fn bloch_wigner_five_term(x in gen_point(), y in gen_point()) {
            let xy = x * y;
            prop_assume!((ONE - xy).norm() > 1e-3);
            let terms = [x, y, (ONE - x) / (ONE - xy), ONE - xy, (ONE - y) / (ONE - xy)];
            prop_assume!(terms.iter().all(|t| t.norm() > 1e-6 && (t - ONE).norm() > 1e-6));
            let s: f64 = terms.iter().map(|t| bloch_wigner(*t).unwrap()).sum();
            prop_assert!(s.abs() < 1e-10, "five-term sum {}", s);
        }
    }
}
