//! One-sided (Hestenes) Jacobi singular values for complex matrices.
//!
//! Columns are orthogonalized pairwise. For a complex pair the inner product
//! `a_p^H a_q = |g| e^{i phi}` is first made real by rotating the phase of
//! column `q`, after which the classical real Jacobi rotation applies. The
//! singular values are the final column norms. Jacobi is slow next to
//! bidiagonalization but is accurate in the relative sense for the smallest
//! singular value, which is the only one the resolvent norm needs.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Result, SpeclabError};

const MAX_SWEEPS: usize = 80;

/// All singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.validate()?;
    // Work on the orientation with fewer columns; singular values are shared.
    let (rows, cols, cols_data) = if m.cols() <= m.rows() {
        (m.rows(), m.cols(), column_major(m))
    } else {
        let t = m.conj_transpose();
        (t.rows(), t.cols(), column_major(&t))
    };
    let mut a = cols_data;
    jacobi_orthogonalize(&mut a, rows, cols)?;
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| norm_sqr(&a[j * rows..(j + 1) * rows]).sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Smallest singular value of a square matrix by full Jacobi SVD.
pub fn smallest_singular_value_dense(m: &ComplexMatrix) -> Result<f64> {
    m.require_square()?;
    let sv = singular_values(m)?;
    Ok(*sv.last().expect("non-empty matrix"))
}

fn column_major(m: &ComplexMatrix) -> Vec<Complex64> {
    let (r, c) = (m.rows(), m.cols());
    let mut out = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[inline]
fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * y;
    }
    s
}

fn jacobi_orthogonalize(a: &mut [Complex64], rows: usize, cols: usize) -> Result<()> {
    let tol = f64::EPSILON * (rows as f64).max(1.0);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (head, tail) = a.split_at_mut(q * rows);
                let ap = &mut head[p * rows..(p + 1) * rows];
                let aq = &mut tail[..rows];
                let alpha = norm_sqr(ap);
                let beta = norm_sqr(aq);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot_conj(ap, aq);
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
                    let yq = *y * phase_conj;
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(SpeclabError::Accuracy(format!(
        "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps ({rows}x{cols})"
    )))
}
