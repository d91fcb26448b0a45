//! Dense square complex matrices and the numerical linear algebra the rest
//! of the crate needs: LU inversion, complex Schur form, one-sided Jacobi
//! SVD and numerical rank.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major `n × n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row-major entries; the length must be a square.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::SizeMismatch { expected: n, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    /// Entrywise real part, as a complex matrix with zero imaginary part.
    pub fn re(&self) -> Self {
        self.map(|z| Complex64::new(z.re, 0.0))
    }

    /// Entrywise imaginary part, as a complex matrix with zero imaginary part.
    pub fn im(&self) -> Self {
        self.map(|z| Complex64::new(z.im, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus among strictly-lower-triangular entries.
    pub fn lower_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                d = d.max(self[(i, j)].norm());
            }
        }
        d
    }

    pub fn upper_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| if j >= i { self[(i, j)] } else { ZERO })
    }

    pub fn strictly_upper_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| if j > i { self[(i, j)] } else { ZERO })
    }

    pub fn diagonal_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i == j { self[(i, j)] } else { ZERO })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `‖self − other‖_max`; panics on size mismatch.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "max_diff on matrices of different size");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Embeds into the upper-left corner of a larger zero matrix.
    pub fn embed_corner(&self, n: usize) -> Self {
        assert!(n >= self.n);
        Self::from_fn(n, |i, j| if i < self.n && j < self.n { self[(i, j)] } else { ZERO })
    }

    /// Permutes rows and columns simultaneously: `out[(i,j)] = self[(p[i],p[j])]`.
    pub fn permuted(&self, p: &[usize]) -> Self {
        Self::from_fn(self.n, |i, j| self[(p[i], p[j])])
    }

    /// LU factorization with partial pivoting; returns `(lu, perm, sign)`.
    fn lu(&self) -> Result<(Self, Vec<usize>, f64)> {
        let n = self.n;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, best) =
                (k..n).map(|i| (i, a[(i, k)].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 1e-14 * scale {
                return Err(Error::Singular("LU pivot vanished"));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                for j in (k + 1)..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Ok((a, perm, sign))
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            Ok((lu, _, sign)) => (0..self.n).map(|i| lu[(i, i)]).product::<Complex64>() * sign,
            Err(_) => ZERO,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let (lu, perm, _) = self.lu()?;
        let mut inv = Self::zeros(n);
        for col in 0..n {
            // Solve L U x = P e_col.
            let mut x: Vec<Complex64> = (0..n).map(|i| if perm[i] == col { ONE } else { ZERO }).collect();
            for i in 0..n {
                for k in 0..i {
                    let l = lu[(i, k)];
                    x[i] = x[i] - l * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let u = lu[(i, k)];
                    x[i] = x[i] - u * x[k];
                }
                x[i] /= lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Ok(inv)
    }

    /// `‖A^H A − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.n)).max_abs()
    }

    fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch in +");
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.n, rhs.n, "matrix size mismatch in +=");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch in -");
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch in *");
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

/// Complex Givens rotation `G = [[c, s], [−s̄, c]]` with `G·(x, y)ᵀ = (r, 0)ᵀ`.
#[derive(Clone, Copy, Debug)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn zeroing(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let rho = ax.hypot(y.norm());
        if rho == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Self { c: 0.0, s: ONE };
        }
        Self { c: ax / rho, s: (x / ax) * y.conj() / rho }
    }

    /// Rows `i`, `i+1` of `m` ← `G · rows`, over columns `cols`.
    fn apply_rows(&self, m: &mut ComplexMatrix, i: usize, cols: core::ops::Range<usize>) {
        for j in cols {
            let a = m[(i, j)];
            let b = m[(i + 1, j)];
            m[(i, j)] = a * self.c + self.s * b;
            m[(i + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Columns `i`, `i+1` of `m` ← `cols · Gᴴ`, over rows `rows`.
    fn apply_cols(&self, m: &mut ComplexMatrix, i: usize, rows: core::ops::Range<usize>) {
        for r in rows {
            let a = m[(r, i)];
            let b = m[(r, i + 1)];
            m[(r, i)] = a * self.c + b * self.s.conj();
            m[(r, i + 1)] = -a * self.s + b * self.c;
        }
    }
}

/// Complex Schur decomposition `A = Q T Qᴴ` with `Q` unitary and `T` upper
/// triangular.
#[derive(Clone, Debug)]
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl Schur {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.n;
        let (mut q, mut h) = hessenberg(a);
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let eps = f64::EPSILON;
        let max_iter = 60 * n.max(1);
        let mut hi = n.saturating_sub(1);
        let mut iter = 0usize;
        let mut total = 0usize;
        while hi > 0 {
            let mut l = hi;
            while l > 0 {
                let sub = h[(l, l - 1)].norm();
                let local = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
                if sub <= eps * local.max(1e-3 * scale) {
                    h[(l, l - 1)] = ZERO;
                    break;
                }
                l -= 1;
            }
            if l == hi {
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > max_iter {
                return Err(Error::NoConvergence { what: "complex Schur QR", iterations: total });
            }
            let mu = if iter.is_multiple_of(11) {
                // Exceptional shift to break cycles.
                h[(hi, hi)] + Complex64::new(0.75, 0.3) * h[(hi, hi - 1)].norm()
            } else {
                wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
            };
            for k in l..hi {
                let g = if k == l {
                    Givens::zeroing(h[(l, l)] - mu, h[(l + 1, l)])
                } else {
                    Givens::zeroing(h[(k, k - 1)], h[(k + 1, k - 1)])
                };
                let start = if k == l { l } else { k - 1 };
                g.apply_rows(&mut h, k, start..n);
                g.apply_cols(&mut h, k, 0..(k + 3).min(hi + 1));
                g.apply_cols(&mut q, k, 0..n);
                if k > l {
                    h[(k + 1, k - 1)] = ZERO;
                }
            }
        }
        let t = h.upper_part();
        Ok(Self { q, t })
    }

    /// Swaps the adjacent diagonal entries `i`, `i+1` of `T`, updating `Q`
    /// and any matrices `others` already triangularized by `Q`.
    pub fn swap_adjacent(&mut self, i: usize, others: &mut [ComplexMatrix]) {
        let g = swap_rotation(&self.t, i);
        let n = self.t.n;
        for m in core::iter::once(&mut self.t).chain(others.iter_mut()) {
            g.apply_rows(m, i, 0..n);
            g.apply_cols(m, i, 0..n);
            m[(i + 1, i)] = ZERO;
        }
        g.apply_cols(&mut self.q, i, 0..n);
    }
}

/// Rotation exchanging diagonal entries `i`, `i+1` of an upper-triangular `t`.
fn swap_rotation(t: &ComplexMatrix, i: usize) -> Givens {
    let a = t[(i, i)];
    let b = t[(i + 1, i + 1)];
    let x = t[(i, i + 1)];
    // Eigenvector of the 2×2 block for `b` is (x, b − a); G must map it to e₁.
    let (v1, v2) = (x, b - a);
    let g = Givens::zeroing(v1, v2);
    if v1.norm() == 0.0 && v2.norm() == 0.0 {
        return Givens { c: 1.0, s: ZERO };
    }
    g
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Householder reduction to upper Hessenberg form, `A = Q H Qᴴ`.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.n;
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // h ← P h P with P = I − 2 v vᴴ acting on indices k+1..n.
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= vr * dot * 2.0;
            }
        }
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(r, vr)| m[(i, k + 1 + r)] * vr).sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= dot * vr.conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    (q, h)
}

/// One-sided Jacobi SVD of a column-stored `m × k` matrix.
///
/// Returns the singular values (unsorted, one per column) and the right
/// singular vectors as columns of a `k × k` matrix.
pub fn jacobi_svd(mut cols: Vec<Vec<Complex64>>) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let k = cols.len();
    let mut v: Vec<Vec<Complex64>> =
        (0..k).map(|j| (0..k).map(|i| if i == j { ONE } else { ZERO }).collect()).collect();
    let tol = 1e-15;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let eb = e.conj();
                for m in [&mut cols, &mut v] {
                    let (left, right) = m.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let a = *x;
                        let b = *y;
                        *x = a * c - b * eb * s;
                        *y = a * s + b * eb * c;
                    }
                }
            }
        }
        if !rotated {
            let sv = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
            return Ok((sv, v));
        }
    }
    Err(Error::NoConvergence { what: "Jacobi SVD", iterations: 80 })
}

/// Orthonormal basis (as columns) of the numerical null space of `a`:
/// right singular vectors whose singular value is below `tol`.
pub fn null_space(a: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<Complex64>>> {
    let cols = (0..a.n).map(|j| a.col(j)).collect();
    let (sv, v) = jacobi_svd(cols)?;
    Ok(sv.iter().zip(v).filter(|(s, _)| **s < tol).map(|(_, c)| c).collect())
}

/// Numerical rank of a real `m × k` matrix given by rows.
///
/// Rows are normalized to unit length first (zero rows are dropped); the
/// rank is the number of singular values above `threshold`.
pub fn real_rank(rows: &[Vec<f64>], k: usize, threshold: f64) -> Result<usize> {
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .filter_map(|r| {
            let nrm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            (nrm > 1e-300).then(|| r.iter().map(|x| x / nrm).collect())
        })
        .collect();
    if a.is_empty() || k == 0 {
        return Ok(0);
    }
    // Householder QR (row-wise) down to a k × k triangle.
    let m = a.len();
    for col in 0..k.min(m) {
        let xnorm = (col..m).map(|i| a[i][col] * a[i][col]).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = if a[col][col] > 0.0 { -xnorm } else { xnorm };
        let mut v: Vec<f64> = (col..m).map(|i| a[i][col]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        for j in col..k {
            let dot: f64 = v.iter().enumerate().map(|(r, vr)| vr * a[col + r][j]).sum();
            for (r, vr) in v.iter().enumerate() {
                a[col + r][j] -= 2.0 * vr * dot;
            }
        }
    }
    let r_rows = k.min(m);
    let cols: Vec<Vec<Complex64>> = (0..k)
        .map(|j| (0..r_rows).map(|i| Complex64::new(if j >= i { a[i][j] } else { 0.0 }, 0.0)).collect())
        .collect();
    let (sv, _) = jacobi_svd(cols)?;
    Ok(sv.iter().filter(|&&s| s > threshold).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn inverse_round_trip() {
        let a = random(5, 3);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).max_diff(&ComplexMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(2.0, 0.0)], &[c(2.0, 0.0), c(4.0, 0.0)]]).unwrap();
        assert!(matches!(a.inverse(), Err(Error::Singular(_))));
        assert!(a.det().norm() < 1e-15);
    }

    #[test]
    fn determinant_of_triangular() {
        let a = ComplexMatrix::from_rows(&[&[c(2.0, 1.0), c(5.0, 0.0)], &[c(0.0, 0.0), c(0.0, 3.0)]]).unwrap();
        assert!((a.det() - c(2.0, 1.0) * c(0.0, 3.0)).norm() < 1e-14);
    }

    #[test]
    fn schur_reconstructs() {
        for (n, seed) in [(2, 1), (3, 2), (5, 3), (7, 4), (9, 5)] {
            let a = random(n, seed);
            let s = Schur::new(&a).unwrap();
            assert!(s.q.unitarity_defect() < 1e-12);
            assert!(s.t.lower_defect() == 0.0);
            let back = &(&s.q * &s.t) * &s.q.adjoint();
            assert!(back.max_diff(&a) < 1e-12, "n={n}: {}", back.max_diff(&a));
        }
    }

    #[test]
    fn schur_of_triangular_is_trivial() {
        let a = ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let s = Schur::new(&a).unwrap();
        assert!(s.q.max_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(s.t.max_diff(&a) < 1e-15);
    }

    #[test]
    fn swap_exchanges_diagonal() {
        let a = random(4, 9);
        let mut s = Schur::new(&a).unwrap();
        let d = s.t.diag();
        s.swap_adjacent(1, &mut []);
        assert!((s.t[(1, 1)] - d[2]).norm() < 1e-12);
        assert!((s.t[(2, 2)] - d[1]).norm() < 1e-12);
        let back = &(&s.q * &s.t) * &s.q.adjoint();
        assert!(back.max_diff(&a) < 1e-12);
    }

    #[test]
    fn null_space_of_rank_deficient() {
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0), c(2.0, 1.0)]);
        let u = Schur::new(&random(3, 11)).unwrap().q;
        let a = &(&u * &d) * &u.adjoint();
        let ns = null_space(&a, 1e-10).unwrap();
        assert_eq!(ns.len(), 1);
    }

    #[test]
    fn rank_of_real_rows() {
        let rows = alloc::vec![
            alloc::vec![1.0, 0.0, 1.0],
            alloc::vec![0.0, 1.0, 1.0],
            alloc::vec![1.0, 1.0, 2.0],
            alloc::vec![2.0, 2.0, 4.0],
            alloc::vec![0.0, 0.0, 0.0],
        ];
        assert_eq!(real_rank(&rows, 3, 1e-8).unwrap(), 2);
    }
}
