//! Smallest singular values through inverse Lanczos.
//!
//! `sigma_min(R)^-2` is the largest eigenvalue of the Hermitian positive
//! definite operator `R^-1 R^-H`, which can be applied with two triangular
//! solves once `R` is factored. Two factorizations are provided: an upper
//! triangular Schur factor shifted by `lambda` (used for whole grids, where
//! one Schur decomposition serves every node) and a pivoted LU of a general
//! square matrix (used for a single large matrix).

use num_complex::Complex64;

use crate::error::{Result, SpeclabError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_KRYLOV: usize = 40;
const MAX_RESTARTS: usize = 200;
const WARM_MIX: f64 = 0.05;

/// Application of `R^-1 R^-H` for some nonsingular `R`.
pub(crate) trait GramInverse {
    fn dim(&self) -> usize;

    /// Writes `R^-1 R^-H v` into `out`. Returns `false` if a pivot vanished or
    /// the result overflowed, which callers read as numerical singularity.
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) -> bool;
}

/// Upper triangular `T` stored with split real and imaginary parts, once by
/// rows and once by columns, so both substitutions run as contiguous axpy
/// loops that the compiler can vectorize.
#[derive(Clone, Debug)]
pub(crate) struct SplitTriangular {
    n: usize,
    row_re: Vec<f64>,
    row_im: Vec<f64>,
    col_re: Vec<f64>,
    col_im: Vec<f64>,
}

impl SplitTriangular {
    /// `upper` is row-major; entries below the diagonal are ignored.
    pub fn new(n: usize, upper: &[Complex64]) -> Self {
        let mut row_re = vec![0.0; n * n];
        let mut row_im = vec![0.0; n * n];
        let mut col_re = vec![0.0; n * n];
        let mut col_im = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let z = upper[i * n + j];
                row_re[i * n + j] = z.re;
                row_im[i * n + j] = z.im;
                col_re[j * n + i] = z.re;
                col_im[j * n + i] = z.im;
            }
        }
        Self {
            n,
            row_re,
            row_im,
            col_re,
            col_im,
        }
    }

    fn diag(&self, i: usize) -> Complex64 {
        Complex64::new(self.row_re[i * self.n + i], self.row_im[i * self.n + i])
    }
}

/// `R = T - shift * I` over a [`SplitTriangular`] factor.
pub(crate) struct ShiftedTriangular<'a> {
    pub factor: &'a SplitTriangular,
    pub shift: Complex64,
}

impl GramInverse for ShiftedTriangular<'_> {
    fn dim(&self) -> usize {
        self.factor.n
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) -> bool {
        let t = self.factor;
        let n = t.n;
        let mut yr: Vec<f64> = v.iter().map(|z| z.re).collect();
        let mut yi: Vec<f64> = v.iter().map(|z| z.im).collect();
        // R^H y = v. Row i of R, conjugated, is column i of R^H.
        for i in 0..n {
            let d = t.diag(i) - self.shift;
            if d == ZERO {
                return false;
            }
            let yv = Complex64::new(yr[i], yi[i]) / d.conj();
            yr[i] = yv.re;
            yi[i] = yv.im;
            let (c, e) = (yv.re, yv.im);
            let ar = &t.row_re[i * n + i + 1..(i + 1) * n];
            let ai = &t.row_im[i * n + i + 1..(i + 1) * n];
            let (tr, ti) = (&mut yr[i + 1..], &mut yi[i + 1..]);
            for (((a, b), x), y) in ar.iter().zip(ai).zip(tr.iter_mut()).zip(ti.iter_mut()) {
                *x -= a * c + b * e;
                *y -= a * e - b * c;
            }
        }
        // R w = y. Column i of R multiplies w_i.
        for i in (0..n).rev() {
            let d = t.diag(i) - self.shift;
            let wv = Complex64::new(yr[i], yi[i]) / d;
            yr[i] = wv.re;
            yi[i] = wv.im;
            let (c, e) = (wv.re, wv.im);
            let ar = &t.col_re[i * n..i * n + i];
            let ai = &t.col_im[i * n..i * n + i];
            let (tr, ti) = (&mut yr[..i], &mut yi[..i]);
            for (((a, b), x), y) in ar.iter().zip(ai).zip(tr.iter_mut()).zip(ti.iter_mut()) {
                *x -= a * c - b * e;
                *y -= a * e + b * c;
            }
        }
        for (o, (r, i)) in out.iter_mut().zip(yr.iter().zip(&yi)) {
            *o = Complex64::new(*r, *i);
        }
        out.iter().all(|z| z.is_finite())
    }
}

/// `P R = L U` with unit lower `L`, both factors packed row-major.
pub(crate) struct PivotedLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl PivotedLu {
    /// Factors a row-major square matrix. Returns `None` on an exactly zero pivot.
    pub fn factor(n: usize, mut a: Vec<Complex64>) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, a[i * n + k].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            let (upper, lower) = a.split_at_mut((k + 1) * n);
            let krow = &upper[k * n..(k + 1) * n];
            for i in 0..n - k - 1 {
                let row = &mut lower[i * n..(i + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l != ZERO {
                    for j in k + 1..n {
                        row[j] -= l * krow[j];
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }
}

impl GramInverse for PivotedLu {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) -> bool {
        let n = self.n;
        let lu = &self.lu;
        // R^H y = v with R^H = U^H L^H P.
        let mut z = v.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= lu[j * n + i].conj() * z[j];
            }
            z[i] = acc / lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= lu[j * n + i].conj() * z[j];
            }
            z[i] = acc;
        }
        let mut y = vec![ZERO; n];
        for i in 0..n {
            y[self.perm[i]] = z[i];
        }
        // R w = y with L U w = P y.
        for i in 0..n {
            let mut acc = y[self.perm[i]];
            let row = &lu[i * n..i * n + i];
            for (l, w) in row.iter().zip(&out[..i]) {
                acc -= l * w;
            }
            out[i] = acc;
        }
        for i in (0..n).rev() {
            let row = &lu[i * n + i + 1..(i + 1) * n];
            let mut acc = out[i];
            for (u, w) in row.iter().zip(&out[i + 1..]) {
                acc -= u * w;
            }
            out[i] = acc / lu[i * n + i];
        }
        out.iter().all(|z| z.is_finite())
    }
}

/// Deterministic generic start vector of unit length.
pub(crate) fn default_start(n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64;
            Complex64::new(1.0 + 0.37 * (1.7 * t).sin(), 0.23 * (0.9 * t + 0.4).cos())
        })
        .collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for z in v.iter_mut() {
            *z /= nrm;
        }
    }
    nrm
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Largest eigenvalue of `op` and its Ritz vector by restarted Lanczos with
/// full reorthogonalization. `Ok(None)` signals numerical singularity.
pub(crate) fn largest_eigenpair(
    op: &dyn GramInverse,
    start: &[Complex64],
    rel_tol: f64,
) -> Result<Option<(f64, Vec<Complex64>)>> {
    let n = op.dim();
    let kmax = MAX_KRYLOV.min(n);
    // A warm start can be an exact eigenvector of a neighbouring problem and
    // span an invariant subspace that misses the dominant direction. Mixing
    // in a generic vector keeps every component present.
    let generic = default_start(n);
    let mut v0 = start.to_vec();
    if normalize(&mut v0) == 0.0 || !v0.iter().all(|z| z.is_finite()) {
        v0 = generic;
    } else {
        for (v, g) in v0.iter_mut().zip(&generic) {
            *v += g * WARM_MIX;
        }
        normalize(&mut v0);
    }
    let mut w = vec![ZERO; n];
    let mut last_theta = 0.0;
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<Complex64>> = vec![v0.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        loop {
            let k = basis.len() - 1;
            if !op.apply(&basis[k], &mut w) {
                return Ok(None);
            }
            let a = dot_conj(&basis[k], &w).re;
            alpha.push(a);
            for (wi, vi) in w.iter_mut().zip(&basis[k]) {
                *wi -= vi * a;
            }
            if k > 0 {
                let b = beta[k - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[k - 1]) {
                    *wi -= vi * b;
                }
            }
            for _ in 0..2 {
                for v in &basis {
                    let h = dot_conj(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= vi * h;
                    }
                }
            }
            let b = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let (theta, y) = tridiagonal_max(&alpha, &beta);
            if !theta.is_finite() {
                return Ok(None);
            }
            last_theta = theta;
            let resid = b * y[k].abs();
            let exhausted = basis.len() == n || b <= 1e-14 * theta;
            if resid <= rel_tol * theta || exhausted || basis.len() == kmax {
                let mut ritz = vec![ZERO; n];
                for (coef, v) in y.iter().zip(&basis) {
                    for (r, vi) in ritz.iter_mut().zip(v) {
                        *r += vi * *coef;
                    }
                }
                normalize(&mut ritz);
                if resid <= rel_tol * theta || exhausted {
                    return Ok(Some((theta, ritz)));
                }
                v0 = ritz;
                break;
            }
            beta.push(b);
            let next: Vec<Complex64> = w.iter().map(|z| z / b).collect();
            basis.push(next);
        }
    }
    Err(SpeclabError::Accuracy(format!(
        "inverse Lanczos did not converge (n = {n}, last estimate {last_theta:.6e})"
    )))
}

/// Largest eigenpair of the real symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (`beta.len() + 1 == alpha.len()`).
///
/// The eigenvalue comes from Sturm-count bisection, the vector from two
/// steps of inverse iteration with a pivoted tridiagonal solve.
fn tridiagonal_max(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], vec![1.0]);
    }
    let off = |i: usize| if i < beta.len() { beta[i].abs() } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &a) in alpha.iter().enumerate().take(k) {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(a - r);
        hi = hi.max(a + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale);
    // number of eigenvalues strictly below x
    let below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = alpha[0] - x;
        for i in 0..k {
            if i > 0 {
                let b = beta[i - 1];
                d = alpha[i] - x - b * b / d;
            }
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * f64::EPSILON * scale || mid == lo || mid == hi {
            break;
        }
        if below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta, tridiagonal_null_vector(alpha, beta, theta, scale))
}

/// Approximate eigenvector of the tridiagonal matrix for eigenvalue `theta`
/// by inverse iteration.
fn tridiagonal_null_vector(alpha: &[f64], beta: &[f64], theta: f64, scale: f64) -> Vec<f64> {
    let k = alpha.len();
    let tiny = f64::EPSILON * scale;
    // Gaussian elimination with partial pivoting on the shifted tridiagonal;
    // rows keep up to two superdiagonals after pivoting.
    let mut d: Vec<f64> = alpha.iter().map(|a| a - theta).collect();
    let mut u1: Vec<f64> = (0..k).map(|i| if i + 1 < k { beta[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; k];
    let mut l = vec![0.0; k];
    let mut swapped = vec![false; k];
    let mut sub: Vec<f64> = beta.to_vec();
    for i in 0..k - 1 {
        if sub[i].abs() > d[i].abs() {
            // swap rows i and i+1
            swapped[i] = true;
            let (di, u1i, u2i) = (d[i], u1[i], u2[i]);
            d[i] = sub[i];
            u1[i] = d[i + 1];
            u2[i] = u1[i + 1];
            sub[i] = di;
            d[i + 1] = u1i;
            u1[i + 1] = u2i;
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        let m = sub[i] / d[i];
        l[i] = m;
        d[i + 1] -= m * u1[i];
        u1[i + 1] -= m * u2[i];
    }
    if d[k - 1] == 0.0 {
        d[k - 1] = tiny;
    }
    let solve = |rhs: &mut Vec<f64>| {
        for i in 0..k - 1 {
            if swapped[i] {
                rhs.swap(i, i + 1);
            }
            rhs[i + 1] -= l[i] * rhs[i];
        }
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            if i + 1 < k {
                acc -= u1[i] * rhs[i + 1];
            }
            if i + 2 < k {
                acc -= u2[i] * rhs[i + 2];
            }
            rhs[i] = acc / d[i];
        }
        let nrm = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in rhs.iter_mut() {
            *x /= nrm;
        }
    };
    let mut y = vec![1.0; k];
    solve(&mut y);
    solve(&mut y);
    y
}
