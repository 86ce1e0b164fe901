//! Hessenberg reduction and single-shift complex QR iteration.
//!
//! The QR sweep follows the structure of LAPACK's `zlahqr`: deflation on
//! negligible subdiagonal entries (with the Ahues–Tisseur refinement),
//! Wilkinson shifts from the trailing 2x2 block, and exceptional shifts at
//! iterations 10 and 20 of a stalled window. Schur vectors are never formed;
//! callers only need the eigenvalues or the triangular factor.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Result, SpeclabError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Upper triangular factor `T` of a complex Schur decomposition `M = Z T Z^H`.
#[derive(Clone, Debug)]
pub struct SchurForm {
    n: usize,
    /// Row-major `T`.
    upper: Vec<Complex64>,
}

impl SchurForm {
    pub fn compute(m: &ComplexMatrix) -> Result<Self> {
        let n = m.require_square()?;
        m.validate()?;
        let mut h = m.clone().into_data();
        hessenberg_in_place(&mut h, n);
        qr_iterate(&mut h, n, true)?;
        for i in 1..n {
            for j in 0..i {
                h[i * n + j] = ZERO;
            }
        }
        Ok(Self { n, upper: h })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major upper triangular factor.
    pub fn upper(&self) -> &[Complex64] {
        &self.upper
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.upper[i * self.n + i]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.upper.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// All eigenvalues with algebraic multiplicity, sorted by real then imaginary part.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.require_square()?;
    m.validate()?;
    let mut h = m.clone().into_data();
    hessenberg_in_place(&mut h, n);
    qr_iterate(&mut h, n, false)?;
    let mut ev: Vec<Complex64> = (0..n).map(|i| h[i * n + i]).collect();
    sort_points(&mut ev);
    Ok(ev)
}

/// Canonical ordering: ascending real part, ties broken by imaginary part.
pub fn sort_points(points: &mut [Complex64]) {
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Householder reduction to upper Hessenberg form. Columns that are already
/// reduced are skipped, so exact zero structure survives untouched.
fn hessenberg_in_place(h: &mut [Complex64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let tail: f64 = (k + 2..n).map(|i| h[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1) * n + k];
        let xnorm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let len = n - k - 1;
        let v = &mut v[..len];
        v[0] = x0 - alpha;
        for i in 1..len {
            v[i] = h[(k + 1 + i) * n + k];
        }
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // left: rows k+1.., columns k..
        for j in k..n {
            let mut dot = ZERO;
            for i in 0..len {
                dot += v[i].conj() * h[(k + 1 + i) * n + j];
            }
            dot *= 2.0;
            for i in 0..len {
                h[(k + 1 + i) * n + j] -= v[i] * dot;
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut h[i * n + k + 1..i * n + n];
            let mut dot = ZERO;
            for (r, vi) in row.iter().zip(v.iter()) {
                dot += r * vi;
            }
            dot *= 2.0;
            for (r, vi) in row.iter_mut().zip(v.iter()) {
                *r -= dot * vi.conj();
            }
        }
        h[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            h[i * n + k] = ZERO;
        }
    }
}

/// Complex Givens rotation `G = [c s; -conj(s) c]` with `G [f; g] = [r; 0]`.
#[inline]
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO, f);
    }
    if f == ZERO {
        let ga = g.norm();
        return (0.0, g.conj() / ga, Complex64::new(ga, 0.0));
    }
    let fa = f.norm();
    let ga = g.norm();
    let norm = fa.hypot(ga);
    let phase = f / fa;
    (fa / norm, phase * g.conj() / norm, phase * norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let t = (a - d) * 0.5;
    let bc = b * c;
    let disc = (t * t + bc).sqrt();
    let plus = t + disc;
    let minus = t - disc;
    // the eigenvalue closer to d is d + (t - disc) or d + (t + disc); use the
    // product form to avoid cancellation
    let denom = if plus.norm() >= minus.norm() { plus } else { minus };
    if denom == ZERO {
        d
    } else {
        d - bc / denom
    }
}

fn qr_iterate(h: &mut [Complex64], n: usize, want_t: bool) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    let ulp = f64::EPSILON;
    let safmin = f64::MIN_POSITIVE;
    let smlnum = safmin * (n as f64 / ulp);
    let itmax = 30 * n.max(10);
    let idx = |i: usize, j: usize| i * n + j;

    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // locate the active window [lo, hi]
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = cabs1(h[idx(k, k - 1)]);
            if sub <= smlnum {
                h[idx(k, k - 1)] = ZERO;
                lo = k;
                break;
            }
            let mut tst = cabs1(h[idx(k - 1, k - 1)]) + cabs1(h[idx(k, k)]);
            if tst == 0.0 {
                if k >= 2 {
                    tst += cabs1(h[idx(k - 1, k - 2)]);
                }
                if k < hi {
                    tst += cabs1(h[idx(k + 1, k)]);
                }
            }
            if sub <= ulp * tst {
                let up = cabs1(h[idx(k - 1, k)]);
                let ab = sub.max(up);
                let ba = sub.min(up);
                let diff = cabs1(h[idx(k - 1, k - 1)] - h[idx(k, k)]);
                let hkk = cabs1(h[idx(k, k)]);
                let aa = hkk.max(diff);
                let bb = hkk.min(diff);
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    h[idx(k, k - 1)] = ZERO;
                    lo = k;
                    break;
                }
            }
        }

        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= itmax {
            return Err(SpeclabError::Accuracy(format!(
                "QR iteration did not converge after {total} sweeps (n = {n})"
            )));
        }

        let shift = if its == 10 {
            h[idx(lo, lo)] + 0.75 * cabs1(h[idx(lo + 1, lo)])
        } else if its == 20 {
            h[idx(hi, hi)] + 0.75 * cabs1(h[idx(hi, hi - 1)])
        } else {
            wilkinson_shift(
                h[idx(hi - 1, hi - 1)],
                h[idx(hi - 1, hi)],
                h[idx(hi, hi - 1)],
                h[idx(hi, hi)],
            )
        };

        let (i1, i2) = if want_t { (0, n - 1) } else { (lo, hi) };
        for k in lo..hi {
            let (f, g) = if k == lo {
                (h[idx(lo, lo)] - shift, h[idx(lo + 1, lo)])
            } else {
                (h[idx(k, k - 1)], h[idx(k + 1, k - 1)])
            };
            let (c, s, r) = givens(f, g);
            if k > lo {
                h[idx(k, k - 1)] = r;
                h[idx(k + 1, k - 1)] = ZERO;
            }
            let sc = s.conj();
            for j in k..=i2 {
                let x = h[idx(k, j)];
                let y = h[idx(k + 1, j)];
                h[idx(k, j)] = x * c + s * y;
                h[idx(k + 1, j)] = y * c - sc * x;
            }
            let iend = (k + 2).min(hi);
            for i in i1..=iend {
                let x = h[idx(i, k)];
                let y = h[idx(i, k + 1)];
                h[idx(i, k)] = x * c + sc * y;
                h[idx(i, k + 1)] = y * c - s * x;
            }
        }
        its += 1;
        total += 1;
    }
    Ok(())
}
