//! Real-Lie-algebra arithmetic for `sl_n(C)`, `su_n`, `i·su_n` and the
//! Borel subalgebra `b_n` of upper-triangular traceless matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::{jacobi_svd, ComplexMatrix, Schur};

/// Tolerance for algebraic membership tests (traceless, anti-Hermitian, ...).
pub const EPS_ALG: f64 = 1e-10;
/// Tolerance for commutation of holonomy matrices.
pub const EPS_COMM: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSize { n, reason: "matrices must be at least 2×2" });
    }
    Ok(())
}

fn same_size(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch { expected: a.n(), found: b.n() });
    }
    Ok(())
}

/// Traceless complex matrix: an element of `sl_n(C)`.
///
/// Logarithms of holonomies are allowed a trace in `2πi·Z`
/// ([`SlElement::new_log`]); every formula built on them is invariant under
/// such shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct SlElement(ComplexMatrix);

impl SlElement {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_size(m.n())?;
        let t = m.trace().norm();
        if t > EPS_ALG * (1.0 + m.max_abs()) {
            return Err(Error::NotInSpace { space: "sl_n", defect: t });
        }
        Ok(Self(m))
    }

    /// Accepts a trace in `2πi·Z` (branch-shifted logarithms).
    pub fn new_log(m: ComplexMatrix) -> Result<Self> {
        check_size(m.n())?;
        let t = m.trace();
        let k = (t.im / (2.0 * PI)).round();
        let defect = (t - c(0.0, 2.0 * PI * k)).norm();
        if defect > EPS_ALG * (1.0 + m.max_abs()) {
            return Err(Error::NotInSpace { space: "sl_n (mod 2πi)", defect });
        }
        Ok(Self(m))
    }

    /// Removes the trace: `m − (tr m / n)·I`.
    pub fn traceless_part(m: &ComplexMatrix) -> Result<Self> {
        check_size(m.n())?;
        let shift = m.trace() / m.n() as f64;
        Ok(Self(m - &ComplexMatrix::identity(m.n()).scale(shift)))
    }

    pub fn zero(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self(ComplexMatrix::zeros(n)))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_size(&self.0, &other.0)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_size(&self.0, &other.0)?;
        Ok(Self(&self.0 - &other.0))
    }

    /// Real scalar multiple (the algebras here are real vector spaces).
    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_re(s))
    }

    /// Multiplication by `i`; maps `su_n` onto `i·su_n`.
    pub fn times_i(&self) -> Self {
        Self(self.0.scale(I))
    }

    /// Block embedding `sl_n → sl_m` into the upper-left corner.
    pub fn embed_corner(&self, m: usize) -> Result<Self> {
        if m < self.n() {
            return Err(Error::InvalidSize { n: m, reason: "corner embedding needs m ≥ n" });
        }
        Ok(Self(self.0.embed_corner(m)))
    }
}

/// Anti-Hermitian traceless matrix: an element of `su_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuElement(SlElement);

impl SuElement {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = (&m + &m.adjoint()).max_abs();
        if defect > EPS_ALG * (1.0 + m.max_abs()) {
            return Err(Error::NotInSpace { space: "su_n", defect });
        }
        Ok(Self(SlElement::new(m)?))
    }

    pub fn as_sl(&self) -> &SlElement {
        &self.0
    }

    pub fn into_sl(self) -> SlElement {
        self.0
    }
}

impl Deref for SuElement {
    type Target = SlElement;
    fn deref(&self) -> &SlElement {
        &self.0
    }
}

/// Upper-triangular element of `sl_n`: an element of `b_n`.
///
/// Strictly-lower entries are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BorelElement(SlElement);

impl BorelElement {
    /// Accepts lower entries up to `EPS_ALG` (and zeroes them).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::checked(m, SlElement::new)
    }

    /// As [`BorelElement::new`] but the trace may lie in `2πi·Z`.
    pub fn new_log(m: ComplexMatrix) -> Result<Self> {
        Self::checked(m, SlElement::new_log)
    }

    fn checked(m: ComplexMatrix, ctor: fn(ComplexMatrix) -> Result<SlElement>) -> Result<Self> {
        let defect = m.lower_defect();
        if defect > EPS_ALG * (1.0 + m.max_abs()) {
            return Err(Error::NotInSpace { space: "b_n", defect });
        }
        Ok(Self(ctor(m.upper_part())?))
    }

    pub fn zero(n: usize) -> Result<Self> {
        Ok(Self(SlElement::zero(n)?))
    }

    /// Builds `diag(d)`; the trace may lie in `2πi·Z`.
    pub fn diagonal(d: &[Complex64]) -> Result<Self> {
        Self::new_log(ComplexMatrix::diagonal(d))
    }

    pub fn as_sl(&self) -> &SlElement {
        &self.0
    }

    pub fn into_sl(self) -> SlElement {
        self.0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }
}

impl Deref for BorelElement {
    type Target = SlElement;
    fn deref(&self) -> &SlElement {
        &self.0
    }
}

impl TryFrom<SlElement> for BorelElement {
    type Error = Error;
    fn try_from(x: SlElement) -> Result<Self> {
        BorelElement::new_log(x.into_matrix())
    }
}

/// Label of a standard basis element: `h_s`, `e_st`, `f_st` of `su_n`, and
/// `h_s`, `i·h_s`, `ur_st`, `ui_st` of `b_n`. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisIndex {
    H(usize),
    E(usize, usize),
    F(usize, usize),
    IH(usize),
    UR(usize, usize),
    UI(usize, usize),
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |s| ((s + 1)..=n).map(move |t| (s, t)))
}

/// Labels of [`su_basis`], in order.
pub fn su_basis_labels(n: usize) -> Vec<BasisIndex> {
    let mut v: Vec<BasisIndex> = (1..n).map(BasisIndex::H).collect();
    v.extend(pairs(n).map(|(s, t)| BasisIndex::E(s, t)));
    v.extend(pairs(n).map(|(s, t)| BasisIndex::F(s, t)));
    v
}

/// Labels of [`borel_basis`], in order.
pub fn borel_basis_labels(n: usize) -> Vec<BasisIndex> {
    let mut v: Vec<BasisIndex> = (1..n).map(BasisIndex::H).collect();
    v.extend((1..n).map(BasisIndex::IH));
    v.extend(pairs(n).map(|(s, t)| BasisIndex::UR(s, t)));
    v.extend(pairs(n).map(|(s, t)| BasisIndex::UI(s, t)));
    v
}

/// The matrix of a basis label in `sl_n`.
pub fn basis_matrix(n: usize, idx: BasisIndex) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    match idx {
        BasisIndex::H(s) => {
            m[(s - 1, s - 1)] = c(0.0, 0.5);
            m[(n - 1, n - 1)] = c(0.0, -0.5);
        }
        BasisIndex::IH(s) => {
            m[(s - 1, s - 1)] = c(-0.5, 0.0);
            m[(n - 1, n - 1)] = c(0.5, 0.0);
        }
        BasisIndex::E(s, t) => {
            m[(s - 1, t - 1)] = c(0.5, 0.0);
            m[(t - 1, s - 1)] = c(-0.5, 0.0);
        }
        BasisIndex::F(s, t) => {
            m[(s - 1, t - 1)] = c(0.0, 0.5);
            m[(t - 1, s - 1)] = c(0.0, 0.5);
        }
        BasisIndex::UR(s, t) => m[(s - 1, t - 1)] = c(1.0, 0.0),
        BasisIndex::UI(s, t) => m[(s - 1, t - 1)] = c(0.0, 1.0),
    }
    m
}

/// Real basis of `su_n`: `h_1..h_{n−1}`, then `e_st`, then `f_st`.
pub fn su_basis(n: usize) -> Result<Vec<SuElement>> {
    check_size(n)?;
    su_basis_labels(n).into_iter().map(|l| SuElement::new(basis_matrix(n, l))).collect()
}

/// Real basis of `b_n`: `h_s`, `i·h_s`, then `ur_kl`, then `ui_kl`.
pub fn borel_basis(n: usize) -> Result<Vec<BorelElement>> {
    check_size(n)?;
    borel_basis_labels(n).into_iter().map(|l| BorelElement::new(basis_matrix(n, l))).collect()
}

/// `h_st = h_s − h_t` as a literal matrix (`i/2` at `s`, `−i/2` at `t`).
pub fn h_difference(n: usize, s: usize, t: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    m[(s - 1, s - 1)] += c(0.0, 0.5);
    m[(t - 1, t - 1)] -= c(0.0, 0.5);
    m
}

pub fn bracket(x: &SlElement, y: &SlElement) -> Result<SlElement> {
    same_size(x.matrix(), y.matrix())?;
    Ok(SlElement(x.matrix().commutator(y.matrix())))
}

/// Bracket of two Borel elements (again Borel).
pub fn borel_bracket(x: &BorelElement, y: &BorelElement) -> Result<BorelElement> {
    same_size(x.matrix(), y.matrix())?;
    Ok(BorelElement(SlElement(x.matrix().commutator(y.matrix()).upper_part())))
}

/// `(A − Aᴴ)/2`, the projection onto `su_n`.
pub fn pr_su(m: &ComplexMatrix) -> ComplexMatrix {
    (m - &m.adjoint()).scale_re(0.5)
}

/// `(A + Aᴴ)/2`, the projection onto `i·su_n`.
pub fn pr_isu(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_re(0.5)
}

/// Splits `x = su_part + isu_part` with `isu_part` Hermitian.
pub fn split_hermitian(x: &SlElement) -> (SuElement, SlElement) {
    let su = SuElement(SlElement(pr_su(x.matrix())));
    let isu = SlElement(pr_isu(x.matrix()));
    (su, isu)
}

/// Diagonal/unipotent decomposition of a Borel element.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSplit {
    pub re_diag: Vec<f64>,
    pub im_diag: Vec<f64>,
    pub unipotent: BorelElement,
}

/// `x = diag(re + i·im) + unipotent`; `re` is the `i·h` component and
/// `i·im` the `h` component.
pub fn split_diagonal(x: &BorelElement) -> DiagonalSplit {
    let d = x.matrix().diag();
    DiagonalSplit {
        re_diag: d.iter().map(|z| z.re).collect(),
        im_diag: d.iter().map(|z| z.im).collect(),
        unipotent: BorelElement(SlElement(x.matrix().strictly_upper_part())),
    }
}

/// `k·x·k⁻¹`.
pub fn adjoint_action(k: &ComplexMatrix, x: &SlElement) -> Result<SlElement> {
    same_size(k, x.matrix())?;
    let kinv = k.inverse()?;
    Ok(SlElement(&(k * x.matrix()) * &kinv))
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn matrix_exp(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.n();
    let norm = x.frobenius_norm();
    let mut s = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.25 {
        scaled_norm /= 2.0;
        s += 1;
    }
    let a = x.scale_re(1.0 / f64::powi(2.0, s as i32));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=30 {
        term = (&term * &a).scale_re(1.0 / k as f64);
        sum += &term;
        if term.max_abs() < 1e-18 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Result of simultaneously triangularizing a commuting family:
/// `conjugatorᴴ · m · conjugator = upper` for each input.
#[derive(Clone, Debug)]
pub struct Triangularization {
    /// Unitary conjugator.
    pub conjugator: ComplexMatrix,
    pub uppers: Vec<ComplexMatrix>,
}

fn check_commuting(ms: &[ComplexMatrix]) -> Result<()> {
    for (i, a) in ms.iter().enumerate() {
        for b in &ms[i + 1..] {
            same_size(a, b)?;
            let defect = a.commutator(b).max_abs();
            if defect > EPS_COMM * (1.0 + a.max_abs() * b.max_abs()) {
                return Err(Error::NonCommuting { defect });
            }
        }
    }
    Ok(())
}

/// Fixed generic coefficients for the Schur route; attempt `k` uses seed `k`.
fn combination_coefficients(count: usize, attempt: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + attempt);
    (0..count).map(|_| rng.random_range(0.5..1.5)).collect()
}

fn triangular_enough(uppers: &[ComplexMatrix], ms: &[ComplexMatrix]) -> bool {
    uppers.iter().zip(ms).all(|(u, m)| u.lower_defect() <= 1e-9 * (1.0 + m.max_abs()))
}

/// Schur form of a generic real combination of `ms`, with every member
/// conjugated by the same unitary. Used by path tracking, which needs the
/// combination's Schur form for reordering.
pub(crate) fn schur_triangularize(ms: &[ComplexMatrix], attempt: u64) -> Result<(Schur, Vec<ComplexMatrix>)> {
    let n = ms[0].n();
    let coeffs = combination_coefficients(ms.len(), attempt);
    let mut combo = ComplexMatrix::zeros(n);
    for (m, &w) in ms.iter().zip(&coeffs) {
        combo += &m.scale_re(w);
    }
    let schur = Schur::new(&combo)?;
    let qh = schur.q.adjoint();
    let uppers = ms.iter().map(|m| &(&qh * m) * &schur.q).collect();
    Ok((schur, uppers))
}

/// Simultaneous unitary triangularization of pairwise-commuting matrices.
///
/// Uses the Schur form of a generic real combination; when eigenvalue
/// collisions leave a member non-triangular, falls back to peeling off
/// common eigenvectors one at a time.
pub fn commuting_triangularize(ms: &[ComplexMatrix]) -> Result<Triangularization> {
    if ms.is_empty() {
        return Err(Error::EmptyInput("commuting_triangularize needs at least one matrix"));
    }
    check_size(ms[0].n())?;
    check_commuting(ms)?;
    for attempt in 0..3 {
        let (schur, uppers) = schur_triangularize(ms, attempt)?;
        if triangular_enough(&uppers, ms) {
            return Ok(Triangularization {
                conjugator: schur.q,
                uppers: uppers.into_iter().map(|u| u.upper_part()).collect(),
            });
        }
    }
    let q = peel_common_eigenvectors(ms)?;
    let qh = q.adjoint();
    let uppers: Vec<ComplexMatrix> = ms.iter().map(|m| &(&qh * m) * &q).collect();
    if !triangular_enough(&uppers, ms) {
        return Err(Error::NoConvergence { what: "simultaneous triangularization", iterations: 3 });
    }
    Ok(Triangularization { conjugator: q, uppers: uppers.into_iter().map(|u| u.upper_part()).collect() })
}

/// Columns `cols` (each of length `n`) as the first columns of a unitary.
fn complete_to_unitary(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    let mut basis: Vec<Vec<Complex64>> = vec![v.to_vec()];
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w: Vec<Complex64> = (0..n).map(|i| if i == e { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= dot * bi;
                }
            }
        }
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            basis.push(w.iter().map(|z| z / nrm).collect());
        }
    }
    ComplexMatrix::from_fn(n, |i, j| basis[j][i])
}

fn peel_common_eigenvectors(ms: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let n = ms[0].n();
    if n == 1 {
        return Ok(ComplexMatrix::identity(1));
    }
    // Orthonormal columns spanning the current common invariant subspace.
    let mut span: Vec<Vec<Complex64>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect();
    for m in ms {
        let d = span.len();
        let restricted = ComplexMatrix::from_fn(d, |i, j| {
            let mv: Vec<Complex64> = (0..n).map(|r| (0..n).map(|k| m[(r, k)] * span[j][k]).sum()).collect();
            span[i].iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
        });
        let lambda = Schur::new(&restricted)?.t[(0, 0)];
        let shifted = &restricted - &ComplexMatrix::identity(d).scale(lambda);
        let cols = (0..d).map(|j| (0..d).map(|i| shifted[(i, j)]).collect()).collect();
        let (sv, v) = jacobi_svd(cols)?;
        let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = (1e-6 * (1.0 + m.max_abs())).max(2.0 * smallest);
        let kernel: Vec<&Vec<Complex64>> = sv.iter().zip(&v).filter(|(s, _)| **s <= tol).map(|(_, v)| v).collect();
        span = kernel
            .iter()
            .map(|coef| (0..n).map(|r| coef.iter().zip(&span).map(|(a, col)| a * col[r]).sum()).collect())
            .collect();
    }
    let u = complete_to_unitary(&span[0]);
    let uh = u.adjoint();
    let blocks: Vec<ComplexMatrix> = ms
        .iter()
        .map(|m| {
            let t = &(&uh * m) * &u;
            ComplexMatrix::from_fn(n - 1, |i, j| t[(i + 1, j + 1)])
        })
        .collect();
    let inner = peel_common_eigenvectors(&blocks)?;
    let lifted = ComplexMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (0, _) | (_, 0) => c(0.0, 0.0),
        _ => inner[(i - 1, j - 1)],
    });
    Ok(&u * &lifted)
}

fn sqrtm_upper(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.n();
    let mut r = ComplexMatrix::zeros(n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let s: Complex64 = ((i + 1)..j).map(|k| r[(i, k)] * r[(k, j)]).sum();
            r[(i, j)] = (t[(i, j)] - s) / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Principal logarithm of an upper-triangular matrix by inverse scaling
/// and squaring.
fn logm_upper_principal(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.n();
    let id = ComplexMatrix::identity(n);
    let mut r = t.clone();
    let mut s = 0i32;
    while (&r - &id).frobenius_norm() > 0.2 && s < 64 {
        r = sqrtm_upper(&r);
        s += 1;
    }
    let x = &r - &id;
    let mut sum = ComplexMatrix::zeros(n);
    let mut power = id.clone();
    for k in 1..=60 {
        power = &power * &x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = power.scale_re(sign / k as f64);
        sum += &term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    let mut l = sum.scale_re(f64::powi(2.0, s));
    for i in 0..n {
        l[(i, i)] = t[(i, i)].ln();
    }
    l
}

/// Primary matrix function of upper-triangular `t` taking value `g[i]` at
/// eigenvalue `t_ii`, with `g` constant on clusters of equal eigenvalues.
fn locally_constant_function(t: &ComplexMatrix, g: &[f64]) -> Result<ComplexMatrix> {
    let n = t.n();
    let scale = 1.0 + t.max_abs();
    let mut f = ComplexMatrix::zeros(n);
    for i in 0..n {
        f[(i, i)] = c(g[i], 0.0);
    }
    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let mut num = t[(i, j)] * (f[(j, j)] - f[(i, i)]);
            for k in (i + 1)..j {
                num += f[(i, k)] * t[(k, j)] - t[(i, k)] * f[(k, j)];
            }
            let den = t[(j, j)] - t[(i, i)];
            if den.norm() < 1e-8 * scale {
                if num.norm() < 1e-10 * scale {
                    continue;
                }
                return Err(Error::BranchAmbiguity("distinct branches on colliding eigenvalues"));
            }
            f[(i, j)] = num / den;
        }
    }
    Ok(f)
}

/// Logarithm of an upper-triangular matrix with nonzero diagonal.
///
/// Without a reference the principal branch is used (eigenvalues on the
/// negative real axis are rejected). With a reference, each diagonal entry
/// is moved by `2πi·k` to the branch closest to the reference's diagonal;
/// the trace is then in `2πi·Z` rather than forced to zero.
pub fn branch_log_upper(u: &ComplexMatrix, reference: Option<&BorelElement>) -> Result<BorelElement> {
    check_size(u.n())?;
    let n = u.n();
    if u.lower_defect() > EPS_ALG * (1.0 + u.max_abs()) {
        return Err(Error::NotInSpace { space: "upper-triangular", defect: u.lower_defect() });
    }
    let u = u.upper_part();
    let diag = u.diag();
    if diag.iter().any(|z| z.norm() < 1e-300) {
        return Err(Error::Singular("zero diagonal entry in logarithm"));
    }
    if let Some(r) = reference {
        same_size(&u, r.matrix())?;
    } else if diag.iter().any(|z| z.re < 0.0 && z.im.abs() <= 1e-14 * z.norm()) {
        return Err(Error::BranchAmbiguity("eigenvalue on the negative real axis without reference"));
    }
    let mut l = logm_upper_principal(&u);
    if let Some(r) = reference {
        let k: Vec<f64> = (0..n).map(|i| ((r.matrix()[(i, i)].im - l[(i, i)].im) / (2.0 * PI)).round()).collect();
        if k.iter().all(|&x| x == k[0]) {
            if k[0] != 0.0 {
                l = &l + &ComplexMatrix::identity(n).scale(c(0.0, 2.0 * PI * k[0]));
            }
        } else {
            let g = locally_constant_function(&u, &k)?;
            l = &l + &g.scale(c(0.0, 2.0 * PI));
        }
    }
    BorelElement::new_log(l)
}

/// Subspace sampled by [`random_element`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Sl,
    Su,
    Borel,
}

/// Standard complex normal matrix (`E|z|² = 1` per entry).
pub fn random_complex_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let normal = Normal::new(0.0, core::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    ComplexMatrix::from_fn(n, |_, _| c(normal.sample(rng), normal.sample(rng)))
}

pub fn random_sl(n: usize, rng: &mut impl Rng) -> Result<SlElement> {
    check_size(n)?;
    SlElement::traceless_part(&random_complex_matrix(n, rng))
}

pub fn random_su(n: usize, rng: &mut impl Rng) -> Result<SuElement> {
    check_size(n)?;
    let m = pr_su(&random_complex_matrix(n, rng));
    Ok(SuElement(SlElement::traceless_part(&m)?))
}

pub fn random_borel(n: usize, rng: &mut impl Rng) -> Result<BorelElement> {
    check_size(n)?;
    let m = random_complex_matrix(n, rng).upper_part();
    Ok(BorelElement(SlElement::traceless_part(&m)?))
}

/// Deterministic sample of `space` for a fixed `(space, n, seed)`.
pub fn random_element(space: Space, n: usize, seed: u64) -> Result<SlElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match space {
        Space::Sl => random_sl(n, &mut rng),
        Space::Su => random_su(n, &mut rng).map(SuElement::into_sl),
        Space::Borel => random_borel(n, &mut rng).map(BorelElement::into_sl),
    }
}

/// `exp` of a random `su_n` element: a random point of `SU(n)`.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    Ok(matrix_exp(random_su(n, rng)?.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [[(f64, f64); 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| c(a[i][j].0, a[i][j].1))
    }

    #[test]
    fn su2_basis_matches_standard_matrices() {
        let b = su_basis(2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(*b[0].matrix(), m2([[(0.0, 0.5), (0.0, 0.0)], [(0.0, 0.0), (0.0, -0.5)]]));
        assert_eq!(*b[1].matrix(), m2([[(0.0, 0.0), (0.5, 0.0)], [(-0.5, 0.0), (0.0, 0.0)]]));
        assert_eq!(*b[2].matrix(), m2([[(0.0, 0.0), (0.0, 0.5)], [(0.0, 0.5), (0.0, 0.0)]]));
    }

    #[test]
    fn su_basis_sizes_and_membership() {
        for n in 2..=5 {
            let b = su_basis(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            for x in &b {
                assert!((x.matrix() + &x.matrix().adjoint()).max_abs() == 0.0);
                assert!(x.matrix().trace().norm() == 0.0);
            }
        }
        assert!(matches!(su_basis(1), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn e24_entries() {
        let labels = su_basis_labels(4);
        let b = su_basis(4).unwrap();
        let pos = labels.iter().position(|l| *l == BasisIndex::E(2, 4)).unwrap();
        let m = b[pos].matrix();
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (1, 3) => c(0.5, 0.0),
                    (3, 1) => c(-0.5, 0.0),
                    _ => c(0.0, 0.0),
                };
                assert_eq!(m[(i, j)], expected);
            }
        }
    }

    #[test]
    fn borel_basis_n2_and_counts() {
        let b = borel_basis(2).unwrap();
        let expected = [
            m2([[(0.0, 0.5), (0.0, 0.0)], [(0.0, 0.0), (0.0, -0.5)]]),
            m2([[(-0.5, 0.0), (0.0, 0.0)], [(0.0, 0.0), (0.5, 0.0)]]),
            m2([[(0.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (0.0, 0.0)]]),
            m2([[(0.0, 0.0), (0.0, 1.0)], [(0.0, 0.0), (0.0, 0.0)]]),
        ];
        for (x, e) in b.iter().zip(&expected) {
            assert_eq!(x.matrix(), e);
        }
        assert_eq!(borel_basis(3).unwrap().len(), 10);
        for n in 2..=5 {
            assert_eq!(borel_basis(n).unwrap().len(), n * n + n - 2);
        }
    }

    #[test]
    fn ur_is_e_minus_i_f() {
        let ur = basis_matrix(2, BasisIndex::UR(1, 2));
        let e = basis_matrix(2, BasisIndex::E(1, 2));
        let f = basis_matrix(2, BasisIndex::F(1, 2));
        assert!(ur.max_diff(&(&e - &f.scale(I))) < 1e-15);
        let ui = basis_matrix(2, BasisIndex::UI(1, 2));
        assert!(ui.max_diff(&(&e.scale(I) + &f)) < 1e-15);
    }

    #[test]
    fn bracket_of_su2_basis() {
        // [e, f] = h for the standard basis.
        let b = su_basis(2).unwrap();
        let ef = bracket(&b[1], &b[2]).unwrap();
        assert!(ef.matrix().max_diff(b[0].matrix()) < 1e-15);
        let xx = bracket(&b[1], &b[1]).unwrap();
        assert_eq!(xx.matrix().max_abs(), 0.0);
    }

    #[test]
    fn bracket_size_mismatch() {
        let a = SlElement::zero(2).unwrap();
        let b = SlElement::zero(3).unwrap();
        assert!(matches!(bracket(&a, &b), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn split_hermitian_of_ur() {
        let ur = SlElement::new(basis_matrix(2, BasisIndex::UR(1, 2))).unwrap();
        let (su, isu) = split_hermitian(&ur);
        assert_eq!(*su.matrix(), m2([[(0.0, 0.0), (0.5, 0.0)], [(-0.5, 0.0), (0.0, 0.0)]]));
        assert_eq!(*isu.matrix(), m2([[(0.0, 0.0), (0.5, 0.0)], [(0.5, 0.0), (0.0, 0.0)]]));
    }

    #[test]
    fn split_hermitian_on_su_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_su(4, &mut rng).unwrap();
        let (su, isu) = split_hermitian(x.as_sl());
        assert!(su.matrix().max_diff(x.matrix()) < 1e-15);
        assert!(isu.matrix().max_abs() < 1e-15);
    }

    #[test]
    fn split_diagonal_examples() {
        let x = BorelElement::diagonal(&[c(1.0, 2.0), c(-1.0, -2.0)]).unwrap();
        let s = split_diagonal(&x);
        assert_eq!(s.re_diag, vec![1.0, -1.0]);
        assert_eq!(s.im_diag, vec![2.0, -2.0]);
        assert_eq!(s.unipotent.matrix().max_abs(), 0.0);

        let ur = BorelElement::new(basis_matrix(2, BasisIndex::UR(1, 2))).unwrap();
        let s = split_diagonal(&ur);
        assert_eq!(s.re_diag, vec![0.0, 0.0]);
        assert_eq!(s.unipotent, ur);

        let (l, th) = (0.7, -1.3);
        let x = BorelElement::diagonal(&[c(l / 2.0, th / 2.0), c(-l / 2.0, -th / 2.0)]).unwrap();
        let s = split_diagonal(&x);
        assert_eq!(s.re_diag, vec![l / 2.0, -l / 2.0]);
        assert_eq!(s.im_diag, vec![th / 2.0, -th / 2.0]);
    }

    #[test]
    fn adjoint_action_by_diagonal_unitary_rotates_ur() {
        let phi = 0.4;
        let k = ComplexMatrix::diagonal(&[c(0.0, phi).exp(), c(0.0, -phi).exp()]);
        let ur = SlElement::new(basis_matrix(2, BasisIndex::UR(1, 2))).unwrap();
        let out = adjoint_action(&k, &ur).unwrap();
        // k·ur·k⁻¹ = e^{2iφ}·ur = cos 2φ·ur + sin 2φ·ui
        let expected = &basis_matrix(2, BasisIndex::UR(1, 2)).scale_re((2.0 * phi).cos())
            + &basis_matrix(2, BasisIndex::UI(1, 2)).scale_re((2.0 * phi).sin());
        assert!(out.matrix().max_diff(&expected) < 1e-15);
        let id = adjoint_action(&ComplexMatrix::identity(2), &ur).unwrap();
        assert_eq!(id, ur);
    }

    #[test]
    fn adjoint_action_commutes_with_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=5 {
            let k = random_unitary(n, &mut rng).unwrap();
            let x = random_sl(n, &mut rng).unwrap();
            let (su, isu) = split_hermitian(&adjoint_action(&k, &x).unwrap());
            let (su0, isu0) = split_hermitian(&x);
            let su1 = adjoint_action(&k, su0.as_sl()).unwrap();
            let isu1 = adjoint_action(&k, &isu0).unwrap();
            assert!(su.matrix().max_diff(su1.matrix()) < 1e-12);
            assert!(isu.matrix().max_diff(isu1.matrix()) < 1e-12);
        }
    }

    #[test]
    fn singular_conjugator_rejected() {
        let x = SlElement::zero(2).unwrap();
        assert!(adjoint_action(&ComplexMatrix::zeros(2), &x).is_err());
    }

    #[test]
    fn exp_examples() {
        assert!(matrix_exp(&ComplexMatrix::zeros(3)).max_diff(&ComplexMatrix::identity(3)) < 1e-16);
        let (l, th) = (0.9, 2.1);
        let half = c(l / 2.0, th / 2.0);
        let e = matrix_exp(&ComplexMatrix::diagonal(&[half, -half]));
        assert!(e.max_diff(&ComplexMatrix::diagonal(&[half.exp(), (-half).exp()])) < 1e-14);
        let e = matrix_exp(&basis_matrix(2, BasisIndex::UR(1, 2)));
        assert!(e.max_diff(&m2([[(1.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]])) < 1e-15);
    }

    #[test]
    fn exp_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 2..=6 {
            let x = random_sl(n, &mut rng).unwrap().scale(2.0);
            let d = matrix_exp(x.matrix()).det();
            assert!((d - c(1.0, 0.0)).norm() < 1e-9, "n={n} det={d}");
        }
    }

    #[test]
    fn exp_of_large_norm_matches_eigen_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_sl(4, &mut rng).unwrap();
        let x = x.matrix().scale_re(10.0 / x.matrix().frobenius_norm());
        let s = Schur::new(&x).unwrap();
        // exp(Q T Qᴴ) = Q exp(T) Qᴴ; compare diagonals of the two routes.
        let e = matrix_exp(&x);
        let et = &(&s.q.adjoint() * &e) * &s.q;
        for i in 0..4 {
            let rel = (et[(i, i)] - s.t[(i, i)].exp()).norm() / s.t[(i, i)].exp().norm();
            assert!(rel < 1e-12, "rel {rel}");
        }
    }

    #[test]
    fn triangularize_upper_inputs() {
        let a = m2([[(2.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (0.5, 0.0)]]);
        let t = commuting_triangularize(core::slice::from_ref(&a)).unwrap();
        assert!(t.uppers[0].lower_defect() == 0.0);
        let back = &(&t.conjugator * &t.uppers[0]) * &t.conjugator.adjoint();
        assert!(back.max_diff(&a) < 1e-12);
    }

    #[test]
    fn triangularize_commuting_unipotents() {
        let a = m2([[(1.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]]);
        let b = m2([[(1.0, 0.0), (3.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]]);
        let t = commuting_triangularize(&[a.clone(), b.clone()]).unwrap();
        assert!(t.uppers[0].max_diff(&a) < 1e-12);
        assert!(t.uppers[1].max_diff(&b) < 1e-12);
    }

    #[test]
    fn triangularize_common_eigenbasis_gives_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=5 {
            let p = random_complex_matrix(n, &mut rng);
            let pinv = p.inverse().unwrap();
            let d1: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64, 0.3 * i as f64)).collect();
            let d2: Vec<Complex64> = (0..n).map(|i| c(0.5 - i as f64, 1.0)).collect();
            let a = &(&p * &ComplexMatrix::diagonal(&d1)) * &pinv;
            let b = &(&p * &ComplexMatrix::diagonal(&d2)) * &pinv;
            let t = commuting_triangularize(&[a.clone(), b.clone()]).unwrap();
            assert!(t.conjugator.unitarity_defect() < 1e-12);
            for (u, m) in t.uppers.iter().zip([&a, &b]) {
                let back = &(&t.conjugator * u) * &t.conjugator.adjoint();
                assert!(back.max_diff(m) < 1e-8 * (1.0 + m.max_abs()));
            }
            // Upper forms of diagonalizable commuting pairs share the eigenvalues.
            let mut ev: Vec<f64> = t.uppers[0].diag().iter().map(|z| z.re).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (i, e) in ev.iter().enumerate() {
                assert!((e - (1.0 + i as f64)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn triangularize_with_collision_uses_fallback() {
        // a = diag(1, 1, 2) in a rotated frame and b with a Jordan block on the
        // repeated eigenspace of a: the generic combination still has distinct
        // eigenvalues except where both collide.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(3, &mut rng).unwrap();
        let a0 = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let mut b0 = ComplexMatrix::identity(3);
        b0[(0, 1)] = c(1.0, 0.0);
        let a = &(&u * &a0) * &u.adjoint();
        let b = &(&u * &b0) * &u.adjoint();
        let t = commuting_triangularize(&[a.clone(), b.clone()]).unwrap();
        for (up, m) in t.uppers.iter().zip([&a, &b]) {
            let back = &(&t.conjugator * up) * &t.conjugator.adjoint();
            assert!(back.max_diff(m) < 1e-8);
        }
        let q = peel_common_eigenvectors(&[a.clone(), b.clone()]).unwrap();
        for m in [&a, &b] {
            assert!((&(&q.adjoint() * m) * &q).lower_defect() < 1e-6);
        }
    }

    #[test]
    fn non_commuting_rejected() {
        let a = m2([[(1.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]]);
        let b = m2([[(1.0, 0.0), (0.0, 0.0)], [(1.0, 0.0), (1.0, 0.0)]]);
        assert!(matches!(commuting_triangularize(&[a, b]), Err(Error::NonCommuting { .. })));
    }

    #[test]
    fn log_examples() {
        let l = branch_log_upper(&ComplexMatrix::identity(3), None).unwrap();
        assert!(l.matrix().max_abs() < 1e-15);
        let z = c(1.0, 1.0);
        let u = ComplexMatrix::diagonal(&[z.exp(), (-z).exp()]);
        let l = branch_log_upper(&u, None).unwrap();
        assert!(l.matrix().max_diff(&ComplexMatrix::diagonal(&[z, -z])) < 1e-14);
    }

    #[test]
    fn log_follows_reference_across_cut() {
        let th = PI * 0.999;
        let u = ComplexMatrix::diagonal(&[c(0.0, th).exp(), c(0.0, -th).exp()]);
        let rf = BorelElement::diagonal(&[c(0.0, PI * 1.001), c(0.0, -PI * 1.001)]).unwrap();
        // Continuous tracking along a fine path from 0.99π to 1.01π ends near the reference.
        let mut prev: Option<BorelElement> = None;
        for k in 0..=200 {
            let a = PI * (0.99 + 0.0001 * k as f64);
            let m = ComplexMatrix::diagonal(&[c(0.0, a).exp(), c(0.0, -a).exp()]);
            let l = branch_log_upper(&m, prev.as_ref()).unwrap();
            assert!((l.matrix()[(0, 0)].im - a).abs() < 1e-12);
            prev = Some(l);
        }
        let l = branch_log_upper(&u, Some(&rf)).unwrap();
        assert!((l.matrix()[(0, 0)].im - th).abs() < 1e-12);
        let far =
            branch_log_upper(&ComplexMatrix::diagonal(&[c(0.0, 1.0).exp(), c(0.0, -1.0).exp()]), Some(&rf)).unwrap();
        assert!((far.matrix()[(0, 0)].im - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_with_mixed_branches_is_a_logarithm() {
        let mut u = ComplexMatrix::diagonal(&[c(0.0, 3.0).exp(), c(0.0, -3.0).exp()]);
        u[(0, 1)] = c(0.7, 0.2);
        // Reference pushes the second entry onto a different sheet.
        let rf = BorelElement::diagonal(&[c(0.0, 3.0), c(0.0, 2.0 * PI - 3.0)]).unwrap();
        let l = branch_log_upper(&u, Some(&rf)).unwrap();
        assert!((l.matrix()[(1, 1)].im - (2.0 * PI - 3.0)).abs() < 1e-12);
        assert!(matrix_exp(l.matrix()).max_diff(&u) < 1e-9);
        assert!((l.matrix().trace() - c(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn log_rejects_cut_without_reference() {
        let u = ComplexMatrix::diagonal(&[c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(branch_log_upper(&u, None), Err(Error::BranchAmbiguity(_))));
        let z = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(branch_log_upper(&z, None), Err(Error::Singular(_))));
    }

    #[test]
    fn log_inverts_exp_on_borel() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=6 {
            for _ in 0..20 {
                let mut x = random_borel(n, &mut rng).unwrap().into_sl().into_matrix();
                for i in 0..n {
                    // Keep imaginary parts of the diagonal inside (−π, π).
                    x[(i, i)].im = x[(i, i)].im.clamp(-3.0, 3.0);
                }
                let x = SlElement::traceless_part(&x).unwrap().into_matrix();
                let l = branch_log_upper(&matrix_exp(&x), None).unwrap();
                assert!(l.matrix().max_diff(&x) < 1e-9, "n={n}: {}", l.matrix().max_diff(&x));
            }
        }
    }

    #[test]
    fn random_elements_are_deterministic_and_in_space() {
        for space in [Space::Sl, Space::Su, Space::Borel] {
            let a = random_element(space, 4, 99).unwrap();
            let b = random_element(space, 4, 99).unwrap();
            assert_eq!(a, b);
            assert!(a.matrix().trace().norm() < 1e-12);
        }
        let su = random_element(Space::Su, 4, 3).unwrap();
        assert!((su.matrix() + &su.matrix().adjoint()).max_abs() < EPS_ALG);
        let b = random_element(Space::Borel, 5, 3).unwrap();
        for i in 0..5 {
            for j in 0..i {
                assert_eq!(b.matrix()[(i, j)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn membership_checks() {
        let m = ComplexMatrix::identity(2);
        assert!(matches!(SlElement::new(m.clone()), Err(Error::NotInSpace { .. })));
        let shifted = ComplexMatrix::diagonal(&[c(0.0, 2.0 * PI), c(0.0, 0.0)]);
        assert!(SlElement::new_log(shifted).is_ok());
        let herm = m2([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]]);
        assert!(SuElement::new(herm).is_err());
        let lower = m2([[(0.0, 0.0), (0.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]]);
        assert!(BorelElement::new(lower).is_err());
    }
}
