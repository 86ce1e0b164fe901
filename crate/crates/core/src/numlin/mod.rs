//! Dense complex linear algebra: eigenvalues, smallest singular values and
//! resolvent norms.

mod eigen;
mod lanczos;
mod matrix;
mod svd;

use num_complex::Complex64;

pub use eigen::{eigenvalues, sort_points, SchurForm};
pub use matrix::{ComplexMatrix, ComplexPoint};
pub use svd::singular_values;

use crate::error::{Result, SpeclabError};
use lanczos::{default_start, largest_eigenpair, PivotedLu, ShiftedTriangular, SplitTriangular};

/// Largest dimension for which `smallest_singular_value` runs a full SVD.
pub const DENSE_SVD_LIMIT: usize = 600;

/// `sigma_min < SINGULARITY_FACTOR * eps_machine * ||M||_F` counts as singular.
pub const SINGULARITY_FACTOR: f64 = 1e3;

/// Relative size of the strictly upper Schur part below which the matrix is
/// treated as normal.
const NORMAL_TOL: f64 = 1e-14;

/// Relative residual demanded from inverse Lanczos on `R^-1 R^-H`.
const LANCZOS_TOL: f64 = 1e-9;

fn apply_threshold(sigma: f64, frobenius: f64) -> f64 {
    if sigma < SINGULARITY_FACTOR * f64::EPSILON * frobenius {
        0.0
    } else {
        sigma
    }
}

fn check_point(lambda: Complex64) -> Result<()> {
    if lambda.is_finite() {
        Ok(())
    } else {
        Err(SpeclabError::Validation(format!(
            "spectral parameter {lambda} is not finite"
        )))
    }
}

/// `sigma_min(M)`, reported as exactly zero below the singularity threshold.
///
/// Matrices up to [`DENSE_SVD_LIMIT`] use one-sided Jacobi; larger ones use
/// pivoted LU with inverse Lanczos.
pub fn smallest_singular_value(m: &ComplexMatrix) -> Result<f64> {
    let n = m.require_square()?;
    m.validate()?;
    let sigma = if n <= DENSE_SVD_LIMIT {
        svd::smallest_singular_value_dense(m)?
    } else {
        iterative_sigma_min(m)?
    };
    Ok(apply_threshold(sigma, m.frobenius_norm()))
}

/// `sigma_min(M)` by pivoted LU and inverse Lanczos regardless of size, with
/// the same singularity threshold as [`smallest_singular_value`].
pub fn smallest_singular_value_iterative(m: &ComplexMatrix) -> Result<f64> {
    m.require_square()?;
    m.validate()?;
    Ok(apply_threshold(iterative_sigma_min(m)?, m.frobenius_norm()))
}

fn iterative_sigma_min(m: &ComplexMatrix) -> Result<f64> {
    let n = m.rows();
    let Some(lu) = PivotedLu::factor(n, m.as_slice().to_vec()) else {
        return Ok(0.0);
    };
    Ok(match largest_eigenpair(&lu, &default_start(n), LANCZOS_TOL)? {
        Some((theta, _)) => 1.0 / theta.sqrt(),
        None => 0.0,
    })
}

/// `||(M - lambda I)^-1||`, or `+inf` when `M - lambda I` is numerically singular.
pub fn resolvent_norm(m: &ComplexMatrix, lambda: ComplexPoint) -> Result<f64> {
    check_point(lambda)?;
    let sigma = smallest_singular_value(&m.shifted(lambda)?)?;
    Ok(if sigma == 0.0 { f64::INFINITY } else { 1.0 / sigma })
}

/// Resolvent norms of one matrix at many points.
///
/// The Schur factor `T` is computed once; since `M - lambda I` and
/// `T - lambda I` are unitarily similar they share singular values, and
/// `sigma_min(T - lambda I)` comes from inverse Lanczos with two triangular
/// solves per step. The Ritz vector of one evaluation can seed the next.
#[derive(Clone, Debug)]
pub struct ResolventEvaluator {
    n: usize,
    factor: SplitTriangular,
    diagonal: Vec<Complex64>,
    /// `||T||_F^2` minus the squared diagonal, i.e. the strictly upper part.
    strict_upper_sq: f64,
    /// The strictly upper part is negligible, so `T` is diagonal to working
    /// precision and `sigma_min(T - lambda I) = min |t_ii - lambda|`.
    normal: bool,
}

impl ResolventEvaluator {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let schur = SchurForm::compute(m)?;
        let n = schur.dim();
        let row_major = schur.upper();
        let diagonal = schur.diagonal();
        let strict_upper_sq = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| row_major[i * n + j].norm_sqr())
            .sum();
        let diagonal_sq: f64 = diagonal.iter().map(|d| d.norm_sqr()).sum();
        let normal = strict_upper_sq <= NORMAL_TOL * NORMAL_TOL * (strict_upper_sq + diagonal_sq);
        Ok(Self {
            n,
            factor: SplitTriangular::new(n, row_major),
            diagonal,
            strict_upper_sq,
            normal,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Eigenvalues read off the Schur diagonal, in canonical order.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut ev = self.diagonal.clone();
        sort_points(&mut ev);
        ev
    }

    /// `sigma_min(M - lambda I)` with the singularity threshold applied.
    /// `warm` is read as a start vector when it has the right length and is
    /// overwritten with the converged Ritz vector.
    pub fn smallest_singular_value(&self, lambda: ComplexPoint, warm: &mut Vec<Complex64>) -> Result<f64> {
        check_point(lambda)?;
        let frob = (self.strict_upper_sq + self.diagonal.iter().map(|d| (d - lambda).norm_sqr()).sum::<f64>()).sqrt();
        if self.n == 1 || self.normal {
            let nearest = self
                .diagonal
                .iter()
                .map(|d| (d - lambda).norm())
                .fold(f64::INFINITY, f64::min);
            return Ok(apply_threshold(nearest, frob));
        }
        let op = ShiftedTriangular {
            factor: &self.factor,
            shift: lambda,
        };
        if warm.len() != self.n {
            *warm = default_start(self.n);
        }
        let sigma = match largest_eigenpair(&op, warm, LANCZOS_TOL)? {
            Some((theta, ritz)) => {
                *warm = ritz;
                1.0 / theta.sqrt()
            }
            None => 0.0,
        };
        Ok(apply_threshold(sigma, frob))
    }

    pub fn resolvent_norm(&self, lambda: ComplexPoint, warm: &mut Vec<Complex64>) -> Result<f64> {
        let sigma = self.smallest_singular_value(lambda, warm)?;
        Ok(if sigma == 0.0 { f64::INFINITY } else { 1.0 / sigma })
    }
}
