//! Per-cusp volume rate, its comparison formulas, the Veronese functor and
//! extraction of cusp jets from sampled peripheral holonomies.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::forms::{DualCochain, Zeta};
use crate::lie::{branch_log_upper, commuting_triangularize, schur_triangularize, BorelElement, SlElement, EPS_COMM};
use crate::matrix::ComplexMatrix;

/// Sign relating the DGG expression to [`volume_rate`]: `dgg = S_DGG·rate`.
pub const S_DGG: f64 = -1.0;
/// Sign relating the BFG expression to [`volume_rate`]: `4·bfg = S_BFG·rate`.
pub const S_BFG: f64 = -1.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// First-order peripheral data of one cusp: logarithms `a` (longitude),
/// `b` (meridian) and their time derivatives, all upper-triangular.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspJet {
    pub a: BorelElement,
    pub b: BorelElement,
    pub da: BorelElement,
    pub db: BorelElement,
}

impl CuspJet {
    pub fn new(a: BorelElement, b: BorelElement, da: BorelElement, db: BorelElement) -> Result<Self> {
        let n = a.n();
        for x in [&b, &da, &db] {
            if x.n() != n {
                return Err(Error::SizeMismatch { expected: n, found: x.n() });
            }
        }
        Ok(Self { a, b, da, db })
    }

    /// Jet with all four logarithms diagonal.
    pub fn diagonal(a: &[Complex64], b: &[Complex64], da: &[Complex64], db: &[Complex64]) -> Result<Self> {
        Self::new(
            BorelElement::diagonal(a)?,
            BorelElement::diagonal(b)?,
            BorelElement::diagonal(da)?,
            BorelElement::diagonal(db)?,
        )
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Simultaneous permutation of the diagonal positions of all four
    /// entries (`out_ii = in_{p(i)p(i)}`); only meaningful for diagonal jets.
    pub fn permuted_diagonal(&self, p: &[usize]) -> Result<Self> {
        let f = |x: &BorelElement| {
            let d = x.matrix().diag();
            let pd: Vec<Complex64> = p.iter().map(|&i| d[i]).collect();
            BorelElement::diagonal(&pd)
        };
        Self::new(f(&self.a)?, f(&self.b)?, f(&self.da)?, f(&self.db)?)
    }
}

/// `c(a)(ḃ) − c(b)(ȧ)` for a degree-1 dual cochain.
pub fn torus_pair_eval<C: DualCochain + ?Sized>(cochain: &C, j: &CuspJet) -> Result<f64> {
    if cochain.degree() != 1 {
        return Err(Error::InvalidArgument("torus evaluation needs a degree-1 dual cochain"));
    }
    Ok(cochain.eval(&[j.a.as_sl().clone()], j.db.as_sl())? - cochain.eval(&[j.b.as_sl().clone()], j.da.as_sl())?)
}

/// `tr(Re b·Im ȧ − Re a·Im ḃ)` for one cusp; `Re`, `Im` entrywise.
pub fn cusp_rate(j: &CuspJet) -> f64 {
    let t1 = (&j.b.matrix().re() * &j.da.matrix().im()).trace().re;
    let t2 = (&j.a.matrix().re() * &j.db.matrix().im()).trace().re;
    t1 - t2
}

/// Volume rate summed over all cusps.
pub fn volume_rate(jets: &[CuspJet]) -> Result<f64> {
    if jets.is_empty() {
        return Err(Error::EmptyInput("volume_rate needs at least one cusp"));
    }
    Ok(jets.iter().map(cusp_rate).sum())
}

/// The same rate computed as `Σ torus_pair_eval(ζ, jet)`.
pub fn zeta_rate(jets: &[CuspJet]) -> Result<f64> {
    if jets.is_empty() {
        return Err(Error::EmptyInput("zeta_rate needs at least one cusp"));
    }
    let mut total = 0.0;
    for j in jets {
        total += torus_pair_eval(&Zeta { n: j.n() }, j)?;
    }
    Ok(total)
}

/// Translation lengths and rotation angles of the two peripheral
/// generators of one cusp (`1` longitude, `2` meridian) with derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HodgsonData {
    pub l1: f64,
    pub theta1: f64,
    pub l2: f64,
    pub theta2: f64,
    pub dl1: f64,
    pub dtheta1: f64,
    pub dl2: f64,
    pub dtheta2: f64,
}

impl HodgsonData {
    /// The n = 2 jet `a = diag((l₁+iθ₁)/2, −·)`, `b = diag((l₂+iθ₂)/2, −·)`.
    pub fn to_jet(&self) -> Result<CuspJet> {
        let half = |l: f64, th: f64| {
            let z = c(l / 2.0, th / 2.0);
            [z, -z]
        };
        CuspJet::diagonal(
            &half(self.l1, self.theta1),
            &half(self.l2, self.theta2),
            &half(self.dl1, self.dtheta1),
            &half(self.dl2, self.dtheta2),
        )
    }
}

/// `Σ ½(l₂θ̇₁ − l₁θ̇₂)`.
pub fn hodgson_rate(data: &[HodgsonData]) -> f64 {
    data.iter().map(|d| 0.5 * (d.l2 * d.dtheta1 - d.l1 * d.dtheta2)).sum()
}

/// Successive diagonal differences of a jet's logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct DggCoords {
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    pub dlambda: Vec<Complex64>,
    pub dmu: Vec<Complex64>,
}

fn successive_differences(x: &BorelElement) -> Vec<Complex64> {
    let d = x.matrix().diag();
    d.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `λ_s = a_{s+1,s+1} − a_{ss}`, `μ_s` likewise from `b`.
pub fn dgg_coords(j: &CuspJet) -> DggCoords {
    DggCoords {
        lambda: successive_differences(&j.a),
        mu: successive_differences(&j.b),
        dlambda: successive_differences(&j.da),
        dmu: successive_differences(&j.db),
    }
}

/// Inverse of the `(n−1)×(n−1)` Cartan matrix of type A:
/// `(κ⁻¹)_ij = min(i,j)·(n − max(i,j))/n`, indices 1-based.
pub fn inverse_cartan(n: usize) -> Vec<Vec<f64>> {
    let m = n - 1;
    (1..=m).map(|i| (1..=m).map(|j| (i.min(j) * (n - i.max(j))) as f64 / n as f64).collect()).collect()
}

/// `Σ_ij (κ⁻¹)_ij·(Re λ_i·Im dμ_j − Re μ_j·Im dλ_i)`.
pub fn dgg_rate(n: usize, coords: &DggCoords) -> Result<f64> {
    check_size_at_least_2(n)?;
    let m = n - 1;
    for v in [&coords.lambda, &coords.mu, &coords.dlambda, &coords.dmu] {
        if v.len() != m {
            return Err(Error::SizeMismatch { expected: m, found: v.len() });
        }
    }
    let k = inverse_cartan(n);
    let mut s = 0.0;
    for i in 0..m {
        for jj in 0..m {
            s += k[i][jj] * (coords.lambda[i].re * coords.dmu[jj].im - coords.mu[jj].re * coords.dlambda[i].im);
        }
    }
    Ok(s)
}

fn check_size_at_least_2(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSize { n, reason: "matrices must be at least 2×2" });
    }
    Ok(())
}

/// PGL₃ eigenvalue coordinates: meridian `(1/A*, 1, A)`, longitude
/// `(1/B*, 1, B)`, as logarithms with derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgCoords {
    pub log_a: Complex64,
    pub log_a_star: Complex64,
    pub log_b: Complex64,
    pub log_b_star: Complex64,
    pub dlog_a: Complex64,
    pub dlog_a_star: Complex64,
    pub dlog_b: Complex64,
    pub dlog_b_star: Complex64,
}

pub fn bfg_coords(j: &CuspJet) -> Result<BfgCoords> {
    if j.n() != 3 {
        return Err(Error::InvalidSize { n: j.n(), reason: "BFG coordinates are defined for n = 3" });
    }
    let d = |x: &BorelElement| x.matrix().diag();
    let (a, b, da, db) = (d(&j.a), d(&j.b), d(&j.da), d(&j.db));
    Ok(BfgCoords {
        log_a: b[2] - b[1],
        log_a_star: b[1] - b[0],
        log_b: a[2] - a[1],
        log_b_star: a[1] - a[0],
        dlog_a: db[2] - db[1],
        dlog_a_star: db[1] - db[0],
        dlog_b: da[2] - da[1],
        dlog_b_star: da[1] - da[0],
    })
}

/// `Im(dlog f ∧ log g)` pairing on log coordinates:
/// `log|g|·d arg f − log|f|·d arg g`.
fn wedge_pairing(f: Complex64, df: Complex64, g: Complex64, dg: Complex64) -> f64 {
    g.re * df.im - f.re * dg.im
}

/// `(1/12)·(2A∧B + 2A*∧B* + A*∧B + A∧B*)` under the pairing above.
pub fn bfg_rate(k: &BfgCoords) -> f64 {
    let p = wedge_pairing;
    let ab = p(k.log_a, k.dlog_a, k.log_b, k.dlog_b);
    let asbs = p(k.log_a_star, k.dlog_a_star, k.log_b_star, k.dlog_b_star);
    let asb = p(k.log_a_star, k.dlog_a_star, k.log_b, k.dlog_b);
    let abs = p(k.log_a, k.dlog_a, k.log_b_star, k.dlog_b_star);
    (2.0 * ab + 2.0 * asbs + asb + abs) / 12.0
}

/// `C(m, k)` for small arguments.
pub fn binomial(m: u64, k: u64) -> u64 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    (0..k).fold(1u64, |acc, i| acc * (m - i) / (i + 1))
}

/// `(n−1)² + (n−3)² + ⋯ + (1−n)²`, the trace of `σ_n(diag(1,−1))²`.
pub fn veronese_square_sum(n: u64) -> u64 {
    (0..n)
        .map(|i| {
            let w = n as i64 - 1 - 2 * i as i64;
            (w * w) as u64
        })
        .sum()
}

/// `(n−1)·1 + (n−2)·2 + ⋯ + 1·(n−1)`, the trace of `σ_n(E)·σ_n(F)`.
pub fn veronese_cross_sum(n: u64) -> u64 {
    (1..n).map(|i| (n - i) * i).sum()
}

fn poly_mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn check_two(m: &ComplexMatrix) -> Result<()> {
    if m.n() != 2 {
        return Err(Error::SizeMismatch { expected: 2, found: m.n() });
    }
    Ok(())
}

/// Action of `m ∈ SL₂(C)` on binary forms of degree `n−1` in the monomial
/// basis `v_k = x^{n−1−k}·y^k`. Row `i` holds the coefficients of
/// `(a·x + b·y)^{n−1−i}·(c·x + d·y)^i`.
pub fn veronese_group(n: usize, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_size_at_least_2(n)?;
    check_two(m)?;
    let det = m.det();
    if (det - c(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::NotInSpace { space: "SL_2", defect: (det - c(1.0, 0.0)).norm() });
    }
    // Linear forms as coefficient vectors in powers of y.
    let first = [m[(0, 0)], m[(0, 1)]];
    let second = [m[(1, 0)], m[(1, 1)]];
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let mut poly = vec![c(1.0, 0.0)];
        for _ in 0..(n - 1 - i) {
            poly = poly_mul(&poly, &first);
        }
        for _ in 0..i {
            poly = poly_mul(&poly, &second);
        }
        for (j, coef) in poly.into_iter().enumerate() {
            out[(i, j)] = coef;
        }
    }
    Ok(out)
}

/// Derivative of [`veronese_group`] at the identity.
///
/// Accepts a trace in `2πi·Z`: the scalar part `λ·I` maps to `(n−1)·λ·I`,
/// which keeps exponentials compatible with the group map.
pub fn veronese_algebra(n: usize, x: &SlElement) -> Result<SlElement> {
    check_size_at_least_2(n)?;
    let m = x.matrix();
    check_two(m)?;
    let scalar = m.trace() / 2.0;
    let alpha = m[(0, 0)] - scalar;
    let (beta, gamma) = (m[(0, 1)], m[(1, 0)]);
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        out[(i, i)] = alpha * (n as f64 - 1.0 - 2.0 * i as f64) + scalar * (n as f64 - 1.0);
        if i + 1 < n {
            out[(i, i + 1)] = beta * (n - 1 - i) as f64;
        }
        if i > 0 {
            out[(i, i - 1)] = gamma * i as f64;
        }
    }
    SlElement::new_log(out)
}

/// Pushes an n = 2 jet through `σ_n`.
pub fn veronese_jet(n: usize, j: &CuspJet) -> Result<CuspJet> {
    if j.n() != 2 {
        return Err(Error::SizeMismatch { expected: 2, found: j.n() });
    }
    let push = |x: &BorelElement| -> Result<BorelElement> { BorelElement::try_from(veronese_algebra(n, x.as_sl())?) };
    CuspJet::new(push(&j.a)?, push(&j.b)?, push(&j.da)?, push(&j.db)?)
}

/// Peripheral holonomies `ρ_t(l)`, `ρ_t(m)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeripheralPathSample {
    pub t: f64,
    pub rho_l: ComplexMatrix,
    pub rho_m: ComplexMatrix,
}

impl PeripheralPathSample {
    pub fn new(t: f64, rho_l: ComplexMatrix, rho_m: ComplexMatrix) -> Result<Self> {
        if rho_l.n() != rho_m.n() {
            return Err(Error::SizeMismatch { expected: rho_l.n(), found: rho_m.n() });
        }
        let defect = rho_l.commutator(&rho_m).max_abs();
        if defect > EPS_COMM * (1.0 + rho_l.max_abs() * rho_m.max_abs()) {
            return Err(Error::NonCommuting { defect });
        }
        for m in [&rho_l, &rho_m] {
            let d = (m.det() - c(1.0, 0.0)).norm();
            if d > 1e-8 {
                return Err(Error::NotInSpace { space: "SL_n", defect: d });
            }
        }
        Ok(Self { t, rho_l, rho_m })
    }
}

/// All permutations of `0..n` (small `n`).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// `perm[pos]` = current index that should move to `pos`, minimizing the
/// distance between eigenvalue pairs and the previous sample's.
fn match_order(prev: &[(Complex64, Complex64)], cur: &[(Complex64, Complex64)]) -> Vec<usize> {
    let n = cur.len();
    let cost = |p: usize, q: usize| (prev[p].0 - cur[q].0).norm() + (prev[p].1 - cur[q].1).norm();
    if n <= 7 {
        let mut best = (f64::INFINITY, Vec::new());
        for perm in permutations(n) {
            let total: f64 = perm.iter().enumerate().map(|(p, &q)| cost(p, q)).sum();
            if total < best.0 {
                best = (total, perm);
            }
        }
        best.1
    } else {
        let mut used = vec![false; n];
        (0..n)
            .map(|p| {
                let q =
                    (0..n).filter(|&q| !used[q]).min_by(|&x, &y| cost(p, x).partial_cmp(&cost(p, y)).unwrap()).unwrap();
                used[q] = true;
                q
            })
            .collect()
    }
}

struct Frame {
    q: ComplexMatrix,
    ul: ComplexMatrix,
    um: ComplexMatrix,
}

/// Triangularizes one sample, ordering eigenvalues and column phases to
/// follow `prev` when given.
fn tracked_frame(s: &PeripheralPathSample, prev: Option<&Frame>) -> Result<Frame> {
    let ms = [s.rho_l.clone(), s.rho_m.clone()];
    let ok = |u: &ComplexMatrix, m: &ComplexMatrix| u.lower_defect() <= 1e-9 * (1.0 + m.max_abs());
    let (mut q, mut ul, mut um) = match schur_triangularize(&ms, 0) {
        Ok((mut schur, uppers)) if ok(&uppers[0], &ms[0]) && ok(&uppers[1], &ms[1]) => {
            let mut others = [uppers[0].clone(), uppers[1].clone()];
            if let Some(p) = prev {
                let prev_pairs: Vec<_> = p.ul.diag().into_iter().zip(p.um.diag()).collect();
                let cur_pairs: Vec<_> = others[0].diag().into_iter().zip(others[1].diag()).collect();
                let target = match_order(&prev_pairs, &cur_pairs);
                // Bubble each target entry into place; `order[k]` tracks the
                // original index sitting at position k.
                let mut order: Vec<usize> = (0..cur_pairs.len()).collect();
                for (pos, &want) in target.iter().enumerate() {
                    let mut at = order.iter().position(|&o| o == want).unwrap();
                    while at > pos {
                        schur.swap_adjacent(at - 1, &mut others);
                        order.swap(at - 1, at);
                        at -= 1;
                    }
                }
            }
            let [a, b] = others;
            (schur.q, a, b)
        }
        _ => {
            let t = commuting_triangularize(&ms)?;
            let mut it = t.uppers.into_iter();
            (t.conjugator, it.next().unwrap(), it.next().unwrap())
        }
    };
    if let Some(p) = prev {
        // Nearest frame: make diag(q_prevᴴ·q) real nonnegative.
        let overlap = &p.q.adjoint() * &q;
        let n = q.n();
        let phases: Vec<Complex64> = (0..n)
            .map(|j| {
                let z = overlap[(j, j)];
                if z.norm() > 1e-12 {
                    z.conj() / z.norm()
                } else {
                    c(1.0, 0.0)
                }
            })
            .collect();
        let d = ComplexMatrix::diagonal(&phases);
        q = &q * &d;
        ul = &(&d.adjoint() * &ul) * &d;
        um = &(&d.adjoint() * &um) * &d;
    }
    Ok(Frame { q, ul: ul.upper_part(), um: um.upper_part() })
}

fn at_sample<T>(index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::AtSample { index, source: Box::new(e) })
}

/// Three-point derivative at the middle of a nonuniform stencil.
fn central_weights(t0: f64, t1: f64, t2: f64) -> [f64; 3] {
    let (h1, h2) = (t1 - t0, t2 - t1);
    [-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))]
}

fn derivative(w: [f64; 3], xs: [&BorelElement; 3]) -> Result<BorelElement> {
    let mut m = ComplexMatrix::zeros(xs[0].n());
    for (wi, x) in w.iter().zip(xs) {
        m += &x.matrix().scale_re(*wi);
    }
    BorelElement::new(SlElement::traceless_part(&m.upper_part())?.into_matrix())
}

/// Cusp jet at sample `at` of a sampled peripheral path.
///
/// Samples `0..=at+1` are triangularized in order, each frame following the
/// previous one, and their logarithms are branch-tracked; derivatives are
/// second-order central differences from the neighbours of `at`.
pub fn peripheral_jet(samples: &[PeripheralPathSample], at: usize) -> Result<CuspJet> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument("peripheral_jet needs at least 3 samples"));
    }
    if at == 0 || at + 1 >= samples.len() {
        return Err(Error::InvalidArgument("sample index must have neighbours on both sides"));
    }
    for w in samples.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::InvalidArgument("sample times must increase"));
        }
    }
    let mut frame: Option<Frame> = None;
    let mut logs: Vec<(BorelElement, BorelElement)> = Vec::with_capacity(at + 2);
    for (idx, s) in samples.iter().enumerate().take(at + 2) {
        let f = at_sample(idx, tracked_frame(s, frame.as_ref()))?;
        let (ref_a, ref_b) = match logs.last() {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let la = at_sample(idx, branch_log_upper(&f.ul, ref_a))?;
        let lb = at_sample(idx, branch_log_upper(&f.um, ref_b))?;
        if let Some((pa, pb)) = logs.last() {
            for (cur, prev) in [(&la, pa), (&lb, pb)] {
                let jump =
                    (0..cur.n()).map(|i| (cur.matrix()[(i, i)] - prev.matrix()[(i, i)]).norm()).fold(0.0, f64::max);
                if jump > PI {
                    return Err(Error::BranchJump { sample: idx, jump });
                }
            }
        }
        logs.push((la, lb));
        frame = Some(f);
    }
    let w = central_weights(samples[at - 1].t, samples[at].t, samples[at + 1].t);
    let da = derivative(w, [&logs[at - 1].0, &logs[at].0, &logs[at + 1].0])?;
    let db = derivative(w, [&logs[at - 1].1, &logs[at].1, &logs[at + 1].1])?;
    let (a, b) = logs.swap_remove(at);
    CuspJet::new(a, b, da, db)
}
