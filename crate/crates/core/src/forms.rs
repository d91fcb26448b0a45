//! Concrete cochains on `sl_n(C)` and `b_n`: the volume form ϖ, the Borel
//! primitive β, the dual cochains γ and ζ, the `var` map and
//! Chevalley–Eilenberg differentials.
//!
//! Cochains are evaluated functionally: a cochain is anything that maps a
//! tuple of Lie-algebra elements to a real number (scalar cochains) or to a
//! linear functional (dual cochains).

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lie::{
    basis_matrix, borel_basis_labels, bracket, h_difference, pr_isu, pr_su, su_basis_labels, BasisIndex, BorelElement,
    SlElement, EPS_ALG,
};
use crate::matrix::{real_rank, ComplexMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn same_n(n: usize, xs: &[&ComplexMatrix]) -> Result<()> {
    for x in xs {
        if x.n() != n {
            return Err(Error::SizeMismatch { expected: n, found: x.n() });
        }
    }
    Ok(())
}

fn require_borel(x: &ComplexMatrix) -> Result<()> {
    let defect = x.lower_defect();
    if defect > EPS_ALG * (1.0 + x.max_abs()) {
        return Err(Error::NotInSpace { space: "b_n", defect });
    }
    Ok(())
}

fn require_arity(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::InvalidArgument("wrong number of cochain arguments"));
    }
    Ok(())
}

/// Alternating real multilinear form of degree `k` on `sl_n` (or `b_n`).
pub trait ScalarCochain {
    fn degree(&self) -> usize;
    fn eval(&self, args: &[SlElement]) -> Result<f64>;
}

/// Alternating multilinear map of degree `k` into the dual `sl_n^∨`,
/// represented by its evaluation at a probe element.
pub trait DualCochain {
    fn degree(&self) -> usize;
    fn eval(&self, args: &[SlElement], probe: &SlElement) -> Result<f64>;
}

impl<C: ScalarCochain + ?Sized> ScalarCochain for &C {
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval(&self, args: &[SlElement]) -> Result<f64> {
        (**self).eval(args)
    }
}

impl<C: DualCochain + ?Sized> DualCochain for &C {
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval(&self, args: &[SlElement], probe: &SlElement) -> Result<f64> {
        (**self).eval(args, probe)
    }
}

/// Scalar cochain backed by a closure.
pub struct FnCochain<F> {
    degree: usize,
    f: F,
}

impl<F: Fn(&[SlElement]) -> Result<f64>> FnCochain<F> {
    pub fn new(degree: usize, f: F) -> Self {
        Self { degree, f }
    }
}

impl<F: Fn(&[SlElement]) -> Result<f64>> ScalarCochain for FnCochain<F> {
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, args: &[SlElement]) -> Result<f64> {
        require_arity(self.degree, args.len())?;
        (self.f)(args)
    }
}

/// Dual cochain backed by a closure.
pub struct FnDualCochain<F> {
    degree: usize,
    f: F,
}

impl<F: Fn(&[SlElement], &SlElement) -> Result<f64>> FnDualCochain<F> {
    pub fn new(degree: usize, f: F) -> Self {
        Self { degree, f }
    }
}

impl<F: Fn(&[SlElement], &SlElement) -> Result<f64>> DualCochain for FnDualCochain<F> {
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, args: &[SlElement], probe: &SlElement) -> Result<f64> {
        require_arity(self.degree, args.len())?;
        (self.f)(args, probe)
    }
}

/// `ϖ(A,B,C) = 2i·tr(p(A)·[p(B), p(C)])` with `p = pr_isu`.
pub fn omega_eval(n: usize, a: &SlElement, b: &SlElement, c: &SlElement) -> Result<f64> {
    same_n(n, &[a.matrix(), b.matrix(), c.matrix()])?;
    Ok(omega_matrices(a.matrix(), b.matrix(), c.matrix()))
}

fn omega_matrices(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> f64 {
    let (pa, pb, pc) = (pr_isu(a), pr_isu(b), pr_isu(c));
    let t = (&pa * &pb.commutator(&pc)).trace();
    (I * t * 2.0).re
}

/// Component of `pr_isu(x)` along the Hermitian basis vector `xi`,
/// orthogonal for the trace form.
fn isu_coefficient(xi: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    let num = (&pr_isu(x) * xi).trace().re;
    let den = (xi * xi).trace().re;
    num / den
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// The triple `(i·h_jk, i·e_jk, i·f_jk)` of the su_2 copy at `(j, k)`,
/// indices 1-based.
pub fn root_triple(n: usize, j: usize, k: usize) -> [ComplexMatrix; 3] {
    [
        h_difference(n, j, k).scale(I),
        basis_matrix(n, BasisIndex::E(j, k)).scale(I),
        basis_matrix(n, BasisIndex::F(j, k)).scale(I),
    ]
}

/// `−Σ_{j<k} (ih_jk)^∨ ∧ (ie_jk)^∨ ∧ (if_jk)^∨` evaluated on `(A, B, C)`,
/// the dual vectors taken as trace-orthogonal coefficients on `i·su_n`.
///
/// This agrees with [`omega_eval`] for `n = 2` and on any triple supported
/// in a single `su_2` block; for `n ≥ 3` it misses the contributions of
/// index triangles `j < k < l` (see [`omega_triangle_terms`]).
pub fn omega_basis_expansion_eval(n: usize, a: &SlElement, b: &SlElement, c: &SlElement) -> Result<f64> {
    same_n(n, &[a.matrix(), b.matrix(), c.matrix()])?;
    let args = [a.matrix(), b.matrix(), c.matrix()];
    let mut total = 0.0;
    for j in 1..=n {
        for k in (j + 1)..=n {
            let triple = root_triple(n, j, k);
            let mut m = [[0.0; 3]; 3];
            for (r, xi) in triple.iter().enumerate() {
                for (col, x) in args.iter().enumerate() {
                    m[r][col] = isu_coefficient(xi, x);
                }
            }
            total -= det3(m);
        }
    }
    Ok(total)
}

/// Part of `2i·tr(pA·[pB,pC])` coming from index cycles `p → q → r → p`
/// through three distinct indices.
pub fn omega_triangle_terms(n: usize, a: &SlElement, b: &SlElement, c: &SlElement) -> Result<f64> {
    same_n(n, &[a.matrix(), b.matrix(), c.matrix()])?;
    let (pa, pb, pc) = (pr_isu(a.matrix()), pr_isu(b.matrix()), pr_isu(c.matrix()));
    let mut s = Complex64::new(0.0, 0.0);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                if p == q || q == r || p == r {
                    continue;
                }
                s += pa[(p, q)] * (pb[(q, r)] * pc[(r, p)] - pc[(q, r)] * pb[(r, p)]);
            }
        }
    }
    Ok((I * s * 2.0).re)
}

/// Root-block expansion completed by the triangle terms; equals
/// [`omega_eval`] for every `n`.
pub fn omega_full_expansion_eval(n: usize, a: &SlElement, b: &SlElement, c: &SlElement) -> Result<f64> {
    Ok(omega_basis_expansion_eval(n, a, b, c)? + omega_triangle_terms(n, a, b, c)?)
}

/// `β(x,y) = ½·Σ_{k<l} Im(x_kl·conj(y_kl))`, depending only on the strictly
/// upper parts.
pub fn beta_eval(n: usize, x: &BorelElement, y: &BorelElement) -> Result<f64> {
    beta_matrices(n, x.matrix(), y.matrix())
}

fn beta_matrices(n: usize, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    same_n(n, &[x, y])?;
    require_borel(x)?;
    require_borel(y)?;
    let mut s = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            s += (x[(k, l)] * y[(k, l)].conj()).im;
        }
    }
    Ok(0.5 * s)
}

/// `γ(g)(h) = i·tr(pr_isu(g)·pr_su(h))`.
pub fn gamma_eval(n: usize, g: &SlElement, h: &SlElement) -> Result<f64> {
    same_n(n, &[g.matrix(), h.matrix()])?;
    Ok((I * (&pr_isu(g.matrix()) * &pr_su(h.matrix())).trace()).re)
}

/// `ζ(x)(y) = i·tr(pr_ih(x)·pr_h(y)) = −Σ_j Re(x_jj)·Im(y_jj)`.
pub fn zeta_eval(n: usize, x: &BorelElement, y: &BorelElement) -> Result<f64> {
    zeta_matrices(n, x.matrix(), y.matrix())
}

fn zeta_matrices(n: usize, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    same_n(n, &[x, y])?;
    require_borel(x)?;
    require_borel(y)?;
    Ok(-(0..n).map(|j| x[(j, j)].re * y[(j, j)].im).sum::<f64>())
}

/// The volume form ϖ as a degree-3 scalar cochain on `sl_n`.
#[derive(Clone, Copy, Debug)]
pub struct Omega {
    pub n: usize,
}

impl ScalarCochain for Omega {
    fn degree(&self) -> usize {
        3
    }
    fn eval(&self, args: &[SlElement]) -> Result<f64> {
        require_arity(3, args.len())?;
        omega_eval(self.n, &args[0], &args[1], &args[2])
    }
}

/// β as a degree-2 scalar cochain on `b_n`; non-Borel arguments are rejected.
#[derive(Clone, Copy, Debug)]
pub struct Beta {
    pub n: usize,
}

impl ScalarCochain for Beta {
    fn degree(&self) -> usize {
        2
    }
    fn eval(&self, args: &[SlElement]) -> Result<f64> {
        require_arity(2, args.len())?;
        beta_matrices(self.n, args[0].matrix(), args[1].matrix())
    }
}

/// γ as a degree-1 dual cochain on `sl_n`.
#[derive(Clone, Copy, Debug)]
pub struct Gamma {
    pub n: usize,
}

impl DualCochain for Gamma {
    fn degree(&self) -> usize {
        1
    }
    fn eval(&self, args: &[SlElement], probe: &SlElement) -> Result<f64> {
        require_arity(1, args.len())?;
        gamma_eval(self.n, &args[0], probe)
    }
}

/// ζ as a degree-1 dual cochain on `b_n`.
#[derive(Clone, Copy, Debug)]
pub struct Zeta {
    pub n: usize,
}

impl DualCochain for Zeta {
    fn degree(&self) -> usize {
        1
    }
    fn eval(&self, args: &[SlElement], probe: &SlElement) -> Result<f64> {
        require_arity(1, args.len())?;
        zeta_matrices(self.n, args[0].matrix(), probe.matrix())
    }
}

/// `var(c)(g_1..g_{k−1})(h) = c(g_1..g_{k−1}, h)`.
pub struct VarMap<C> {
    inner: C,
}

impl<C: ScalarCochain> DualCochain for VarMap<C> {
    fn degree(&self) -> usize {
        self.inner.degree() - 1
    }
    fn eval(&self, args: &[SlElement], probe: &SlElement) -> Result<f64> {
        require_arity(self.degree(), args.len())?;
        let mut full: Vec<SlElement> = args.to_vec();
        full.push(probe.clone());
        self.inner.eval(&full)
    }
}

pub fn var_map<C: ScalarCochain>(c: C) -> Result<VarMap<C>> {
    if c.degree() == 0 {
        return Err(Error::InvalidArgument("var needs a cochain of degree at least 1"));
    }
    Ok(VarMap { inner: c })
}

fn without(args: &[SlElement], skip: &[usize]) -> Vec<SlElement> {
    args.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, x)| x.clone()).collect()
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(δc)(x_1..x_{k+1}) = Σ_{i<j} (−1)^{i+j} c([x_i,x_j], x_1..x̂_i..x̂_j..)`.
pub fn ce_diff_scalar<C: ScalarCochain + ?Sized>(c: &C, args: &[SlElement]) -> Result<f64> {
    require_arity(c.degree() + 1, args.len())?;
    let mut total = 0.0;
    for i in 0..args.len() {
        for j in (i + 1)..args.len() {
            let mut rest = vec![bracket(&args[i], &args[j])?];
            rest.extend(without(args, &[i, j]));
            total += sign(i + j) * c.eval(&rest)?;
        }
    }
    Ok(total)
}

/// Coadjoint action on a functional: `(x·θ)(p) = −θ([x,p])`.
fn act_on_dual<C: DualCochain + ?Sized>(c: &C, x: &SlElement, args: &[SlElement], probe: &SlElement) -> Result<f64> {
    Ok(-c.eval(args, &bracket(x, probe)?)?)
}

/// Chevalley–Eilenberg differential with coefficients in the coadjoint
/// module, evaluated at `probe`.
pub fn ce_diff_dual<C: DualCochain + ?Sized>(c: &C, args: &[SlElement], probe: &SlElement) -> Result<f64> {
    require_arity(c.degree() + 1, args.len())?;
    let mut total = 0.0;
    for i in 0..args.len() {
        total += sign(i) * act_on_dual(c, &args[i], &without(args, &[i]), probe)?;
    }
    for i in 0..args.len() {
        for j in (i + 1)..args.len() {
            let mut rest = vec![bracket(&args[i], &args[j])?];
            rest.extend(without(args, &[i, j]));
            total += sign(i + j) * c.eval(&rest, probe)?;
        }
    }
    Ok(total)
}

/// `δc` as a scalar cochain of one degree higher.
pub struct ScalarCoboundary<C> {
    inner: C,
}

impl<C: ScalarCochain> ScalarCoboundary<C> {
    pub fn new(inner: C) -> Self {
        Self { inner }
    }
}

impl<C: ScalarCochain> ScalarCochain for ScalarCoboundary<C> {
    fn degree(&self) -> usize {
        self.inner.degree() + 1
    }
    fn eval(&self, args: &[SlElement]) -> Result<f64> {
        ce_diff_scalar(&self.inner, args)
    }
}

/// Real coordinates of `su_n` elements in [`crate::lie::su_basis`] order.
fn su_coordinates(n: usize, x: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n - 1).map(|s| 2.0 * x[(s, s)].im).collect();
    for s in 0..n {
        for t in (s + 1)..n {
            v.push(2.0 * x[(s, t)].re);
        }
    }
    for s in 0..n {
        for t in (s + 1)..n {
            v.push(2.0 * x[(s, t)].im);
        }
    }
    v
}

/// Coordinates of a Borel element in `b_n/h_n` with basis
/// `(i·h_s, ur_kl, ui_kl)`; the `h_s` components are dropped.
fn borel_quotient_coordinates(n: usize, x: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n - 1).map(|s| -2.0 * x[(s, s)].re).collect();
    for k in 0..n {
        for l in (k + 1)..n {
            v.push(x[(k, l)].re);
        }
    }
    for k in 0..n {
        for l in (k + 1)..n {
            v.push(x[(k, l)].im);
        }
    }
    v
}

/// Matrix of `y ↦ coords([x, basis_j])`, column `j`.
fn action_matrix(
    basis: &[ComplexMatrix],
    x: &ComplexMatrix,
    coords: impl Fn(&ComplexMatrix) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let d = basis.len();
    let cols: Vec<Vec<f64>> = basis.iter().map(|y| coords(&x.commutator(y))).collect();
    (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
}

/// Dimension of `{Φ antisymmetric : MᵀΦ + ΦM = 0 for every M in actions}`.
fn invariant_antisymmetric_dimension(d: usize, actions: &[Vec<Vec<f64>>]) -> Result<usize> {
    let unknowns: Vec<(usize, usize)> = (0..d).flat_map(|a| ((a + 1)..d).map(move |b| (a, b))).collect();
    let index = |a: usize, b: usize| -> Option<(usize, f64)> {
        if a == b {
            None
        } else if a < b {
            Some((unknowns.iter().position(|&u| u == (a, b)).unwrap(), 1.0))
        } else {
            Some((unknowns.iter().position(|&u| u == (b, a)).unwrap(), -1.0))
        }
    };
    let mut rows = Vec::new();
    for m in actions {
        for i in 0..d {
            for j in (i + 1)..d {
                // (MᵀΦ + ΦM)_ij = Σ_a M_ai Φ_aj + Σ_b Φ_ib M_bj
                let mut row = vec![0.0; unknowns.len()];
                for a in 0..d {
                    if let Some((u, s)) = index(a, j) {
                        row[u] += s * m[a][i];
                    }
                    if let Some((u, s)) = index(i, a) {
                        row[u] += s * m[a][j];
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(unknowns.len() - real_rank(&rows, unknowns.len(), 1e-8)?)
}

fn check_small(n: usize) -> Result<()> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidSize { n, reason: "invariant-form dimension supports 2 ≤ n ≤ 4" });
    }
    Ok(())
}

/// Dimension of the space of `SU(n)`-invariant 2-forms on `su_n`, from the
/// infinitesimal condition `φ([X,Y],Z) + φ(Y,[X,Z]) = 0`.
pub fn invariant_two_form_dimension(n: usize) -> Result<usize> {
    check_small(n)?;
    let basis: Vec<ComplexMatrix> = su_basis_labels(n).into_iter().map(|l| basis_matrix(n, l)).collect();
    let actions: Vec<Vec<Vec<f64>>> =
        basis.iter().map(|x| action_matrix(&basis, x, |m| su_coordinates(n, m))).collect();
    invariant_antisymmetric_dimension(basis.len(), &actions)
}

fn borel_quotient_setup(n: usize) -> (Vec<ComplexMatrix>, Vec<Vec<Vec<f64>>>) {
    let quotient: Vec<ComplexMatrix> = borel_basis_labels(n)
        .into_iter()
        .filter(|l| !matches!(l, BasisIndex::H(_)))
        .map(|l| basis_matrix(n, l))
        .collect();
    let torus: Vec<ComplexMatrix> = (1..n).map(|s| basis_matrix(n, BasisIndex::H(s))).collect();
    let actions = torus.iter().map(|t| action_matrix(&quotient, t, |m| borel_quotient_coordinates(n, m))).collect();
    (quotient, actions)
}

/// Dimension of the `T`-invariant 2-forms on `b_n/h_n`, `T` the diagonal
/// torus of `SU(n)`.
pub fn borel_invariant_two_form_dimension(n: usize) -> Result<usize> {
    check_small(n)?;
    let (quotient, actions) = borel_quotient_setup(n);
    invariant_antisymmetric_dimension(quotient.len(), &actions)
}

/// Dimension of the `T`-invariant 1-forms on `b_n/h_n`.
pub fn borel_invariant_one_form_dimension(n: usize) -> Result<usize> {
    check_small(n)?;
    let (quotient, actions) = borel_quotient_setup(n);
    let d = quotient.len();
    // φ ∘ M = 0: one row per (action, column of M).
    let rows: Vec<Vec<f64>> =
        actions.iter().flat_map(|m| (0..d).map(move |j| (0..d).map(|i| m[i][j]).collect())).collect();
    Ok(d - real_rank(&rows, d, 1e-8)?)
}

/// Boxed scalar cochain, convenient for heterogeneous check lists.
pub type BoxedScalarCochain = Box<dyn ScalarCochain + Send + Sync>;
