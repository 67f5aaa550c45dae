//! Eigensolvers and Krylov propagation for real symmetric operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Dimensions up to this size are diagonalised densely.
pub const DENSE_LIMIT: usize = 1200;

/// A real symmetric linear map.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        CsrMatrix::apply(self, x, y)
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full spectrum of a symmetric matrix, ascending, with eigenvectors as
/// matching columns. Only the lower triangle is read.
pub fn dense_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), m);
    }
    let eig = to_faer(&m)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigendecomposition of a finite matrix");
    let (s, u) = (eig.S(), eig.U());
    let values = (0..n).map(|k| s[k]).collect();
    (values, DMatrix::from_fn(n, n, |i, c| u[(i, c)]))
}

pub fn dense_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v = to_faer(&m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("symmetric eigenvalues of a finite matrix");
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 160,
            max_restarts: 200,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

/// Lowest eigenpair of `op` in the orthogonal complement of `locked`.
fn lanczos_lowest<O: LinearOperator + ?Sized>(
    op: &O,
    locked: &[Vec<f64>],
    mut start: Vec<f64>,
    opts: &LanczosOptions,
) -> Result<EigenPair> {
    let n = op.dim();
    let m = opts.krylov_dim.min(n - locked.len()).max(1);
    let mut w = vec![0.0; n];
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..=opts.max_restarts {
        orthogonalize(&mut start, locked);
        let s = norm(&start);
        if s == 0.0 {
            return Err(Error::domain("Lanczos start vector lies in the locked space"));
        }
        start.iter_mut().for_each(|x| *x /= s);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut scale = 0.0f64;
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            iterations += 1;
            orthogonalize(&mut w, locked);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            scale = scale.max(a.abs());
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, locked);
            let b = norm(&w);
            if basis.len() == m || b <= 1e-13 * scale.max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let (vals, vecs) = dense_eigen(t);
        let theta = vals[0];
        let mut v = vec![0.0; n];
        for (i, q) in basis.iter().enumerate() {
            axpy(vecs[(i, 0)], q, &mut v);
        }
        orthogonalize(&mut v, locked);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        op.apply(&v, &mut w);
        orthogonalize(&mut w, locked);
        axpy(-theta, &v, &mut w);
        last_residual = norm(&w);
        if last_residual <= opts.tol * scale.max(1.0) {
            return Ok(EigenPair {
                value: theta,
                vector: v,
            });
        }
        start = v;
    }
    Err(Error::Solver {
        residual: last_residual,
        iterations,
    })
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `k` lowest eigenpairs, ascending. Degenerate levels are returned with
/// their multiplicity. Eigenvectors are normalised with their largest
/// component positive.
pub fn lowest_eigenpairs<O: LinearOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidSize {
            what: "requested eigenpairs",
            value: k,
        });
    }
    let mut pairs = Vec::with_capacity(k);
    if n <= DENSE_LIMIT {
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            op.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        let m = (&m + m.transpose()) * 0.5;
        let (vals, vecs) = dense_eigen(m);
        for c in 0..k {
            let mut v: Vec<f64> = vecs.column(c).iter().copied().collect();
            fix_sign(&mut v);
            pairs.push(EigenPair {
                value: vals[c],
                vector: v,
            });
        }
        return Ok(pairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k {
        let start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.5).collect();
        let mut pair = lanczos_lowest(op, &locked, start, opts)?;
        fix_sign(&mut pair.vector);
        locked.push(pair.vector.clone());
        pairs.push(pair);
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}

/// Largest `|λ|` of a symmetric operator.
pub fn spectral_norm<O: LinearOperator + ?Sized>(op: &O) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let s = norm(&q);
    q.iter_mut().for_each(|x| *x /= s);
    let m = n.min(60);
    let mut basis = vec![q];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![0.0; n];
    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        if basis.len() == m || b <= 1e-14 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let vals = dense_eigenvalues(t);
    vals[0].abs().max(vals[k - 1].abs())
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

const KRYLOV_MAX: usize = 40;
const KRYLOV_CHECK_STRIDE: usize = 4;

/// `exp(-i τ H) v` for real symmetric `H` by Lanczos projection. Steps whose
/// error estimate exceeds `tol` are split in half.
pub fn expm_krylov(h: &CsrMatrix, v: &[Complex64], tau: f64, tol: f64) -> Vec<Complex64> {
    match expm_krylov_once(h, v, tau, tol) {
        Some(out) => out,
        None => {
            let half = expm_krylov(h, v, tau / 2.0, tol / 2.0);
            expm_krylov(h, &half, tau / 2.0, tol / 2.0)
        }
    }
}

fn expm_krylov_once(
    h: &CsrMatrix,
    v: &[Complex64],
    tau: f64,
    tol: f64,
) -> Option<Vec<Complex64>> {
    let n = v.len();
    let nv = cnorm(v);
    if nv == 0.0 || tau == 0.0 {
        return Some(v.to_vec());
    }
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|x| x / nv).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::default(); n];
    loop {
        let j = basis.len() - 1;
        h.apply(&basis[j], &mut w);
        let a = cdot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = cdot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = cnorm(&w);
        let k = alpha.len();
        let breakdown = b <= 1e-13 * alpha.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if !(breakdown || k == n || k == KRYLOV_MAX || k % KRYLOV_CHECK_STRIDE == 0) {
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
            continue;
        }
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let (vals, vecs) = dense_eigen(t);
        let coeffs: Vec<Complex64> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| {
                        vecs[(r, c)] * vecs[(0, c)] * Complex64::from_polar(1.0, -tau * vals[c])
                    })
                    .sum()
            })
            .collect();
        let err = b * coeffs[k - 1].norm() * nv;
        if breakdown || err <= tol || k == n {
            let mut out = vec![Complex64::default(); n];
            for (c, q) in coeffs.iter().zip(&basis) {
                for (o, qi) in out.iter_mut().zip(q) {
                    *o += c * qi;
                }
            }
            out.iter_mut().for_each(|x| *x *= nv);
            return Some(out);
        }
        if k == KRYLOV_MAX {
            return None;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// Interval containing the spectrum of a symmetric matrix, from
/// Gershgorin discs.
pub fn gershgorin_bounds(h: &CsrMatrix) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..h.dim() {
        let (cols, vals) = h.row(i);
        let mut diag = 0.0;
        let mut radius = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag += v;
            } else {
                radius += v.abs();
            }
        }
        lo = lo.min(diag - radius);
        hi = hi.max(diag + radius);
    }
    if h.dim() == 0 {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// `J₀(x) ..= J_{kmax}(x)` for `x ≥ 0` by Miller's backward recurrence,
/// normalised with `J₀ + 2 Σ J₂ₘ = 1`.
fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = (kmax as f64).max(x) + 10.0 * x.cbrt() + 40.0;
    let mut k = start as usize;
    k += k % 2;
    let (mut above, mut here) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    while k > 0 {
        // J_{k-1} = (2k/x) J_k − J_{k+1}
        let below = 2.0 * k as f64 / x * here - above;
        if k <= kmax {
            out[k] = here;
        }
        if k % 2 == 0 {
            norm += 2.0 * here;
        }
        above = here;
        here = below;
        k -= 1;
        if here.abs() > 1e250 {
            let scale = 1e-250;
            here *= scale;
            above *= scale;
            norm *= scale;
            out.iter_mut().for_each(|o| *o *= scale);
        }
    }
    out[0] = here;
    norm += here;
    out.iter_mut().for_each(|o| *o /= norm);
    out
}

/// `exp(-i τ H) v` for real symmetric `H` by a Chebyshev expansion on the
/// Gershgorin interval, truncated once the Bessel weights drop below `tol`.
pub fn expm_chebyshev(h: &CsrMatrix, v: &[Complex64], tau: f64, tol: f64) -> Vec<Complex64> {
    let (lo, hi) = gershgorin_bounds(h);
    let centre = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo);
    let phase = Complex64::from_polar(1.0, -tau * centre);
    let x = tau.abs() * radius;
    if x == 0.0 {
        return v.iter().map(|a| a * phase).collect();
    }
    let kmax = (x + 10.0 * x.cbrt() + 30.0) as usize;
    let bessel = bessel_j_sequence(x, kmax);
    let terms = (x.ceil() as usize..=kmax)
        .find(|&k| 2.0 * bessel[k].abs() < tol)
        .unwrap_or(kmax);
    // (-i)^k, with the sign of τ folded in
    let unit = Complex64::new(0.0, -tau.signum());
    let n = v.len();
    let mut out: Vec<Complex64> = v.iter().map(|a| a * bessel[0]).collect();
    let mut prev = v.to_vec();
    let mut cur = vec![Complex64::default(); n];
    let mut next = vec![Complex64::default(); n];
    // T₁ v = H̃ v with H̃ = (H − centre)/radius
    h.apply(&prev, &mut cur);
    for (c, p) in cur.iter_mut().zip(&prev) {
        *c = (*c - p * centre) / radius;
    }
    let mut weight = unit;
    for (o, c) in out.iter_mut().zip(&cur) {
        *o += c * (weight * 2.0 * bessel[1]);
    }
    for k in 2..=terms {
        h.apply(&cur, &mut next);
        for ((nx, c), p) in next.iter_mut().zip(&cur).zip(&prev) {
            *nx = (*nx - c * centre) * (2.0 / radius) - p;
        }
        weight *= unit;
        let w = weight * 2.0 * bessel[k];
        for (o, nx) in out.iter_mut().zip(&next) {
            *o += nx * w;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    out.iter_mut().for_each(|o| *o *= phase);
    out
}

/// Lowest eigenvalue of a dense symmetric matrix with its vector.
pub fn dense_ground(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let (vals, vecs) = dense_eigen(m.clone());
    (vals[0], vecs.column(0).into_owned())
}
