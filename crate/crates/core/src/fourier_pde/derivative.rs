use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpeclabError};
use crate::numlin::{ComplexMatrix, ComplexPoint};
use crate::pseudo::{field, sublevel_points, GridSpec, PseudospectrumField};

/// Summary of the periodic first-derivative demonstration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub n: usize,
    pub eps: f64,
    /// Largest `|k|` of the eigenvalues `2 pi i k / n` kept.
    pub cutoff: usize,
    pub cell: f64,
    /// Nodes of the grid inside the eps-pseudospectrum of the truncation.
    pub flagged: Vec<ComplexPoint>,
    pub max_abs_re_flagged: f64,
    /// `eps + cell`.
    pub strip_bound: f64,
    /// Every flagged node satisfies `|Re lambda| < strip_bound`.
    pub strip_holds: bool,
    /// Nodes with `Re lambda >= 0`, all in the spectrum of the limit operator.
    pub limit_spectrum_nodes: usize,
    /// Those of them not flagged for the truncation.
    pub limit_spectrum_nodes_missed: usize,
}

impl DerivativeReport {
    /// Distance from `lambda` to the flagged nodes, `inf` if none are flagged.
    pub fn distance_to_flagged(&self, lambda: ComplexPoint) -> f64 {
        self.flagged
            .iter()
            .map(|z| (z - lambda).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Smallest `|k|` bound that keeps every eigenvalue `2 pi i k / n` that can
/// influence the eps-sublevel set on `grid`, plus one.
pub fn derivative_cutoff(n: usize, grid: &GridSpec, eps: f64) -> usize {
    let reach = grid.y0.abs().max(grid.y1.abs()) + eps;
    (reach * n as f64 / (2.0 * PI)).ceil() as usize + 1
}

/// Field of `f -> f'` on periodic functions over `(0, n)`, which is
/// diagonal in the Fourier basis with eigenvalues `2 pi i k / n`.
///
/// The limit operator on the half line has the closed right half-plane as
/// spectrum, yet the truncations' eps-pseudospectra stay in the strip
/// `|Re lambda| < eps`; the report records both sides.
pub fn first_derivative_demo(n: usize, grid: &GridSpec, eps: f64) -> Result<(PseudospectrumField, DerivativeReport)> {
    if n < 1 {
        return Err(SpeclabError::Validation("domain length n must be at least 1".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(SpeclabError::Validation(format!("eps must be positive, got {eps}")));
    }
    grid.validate()?;
    let cutoff = derivative_cutoff(n, grid, eps);
    let c = cutoff as i64;
    let diag: Vec<Complex64> = (-c..=c)
        .map(|k| Complex64::new(0.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut f = field(&ComplexMatrix::from_diag(&diag), grid)?;
    f.meta_mut()
        .insert("operator".into(), "periodic first derivative".into());
    f.meta_mut().insert("n".into(), n.into());
    let flagged = sublevel_points(&f, eps)?;
    let cell = grid.cell();
    let max_abs_re_flagged = flagged.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let strip_bound = eps + cell;
    let limit: Vec<ComplexPoint> = grid.nodes().filter(|z| z.re >= 0.0).collect();
    let missed = limit.iter().filter(|z| !flagged.contains(z)).count();
    let report = DerivativeReport {
        n,
        eps,
        cutoff,
        cell,
        strip_holds: flagged.iter().all(|z| z.re.abs() < strip_bound),
        flagged,
        max_abs_re_flagged,
        strip_bound,
        limit_spectrum_nodes: limit.len(),
        limit_spectrum_nodes_missed: missed,
    };
    Ok((f, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo::membership;

    #[test]
    fn strip_and_far_point() {
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 41, 41).unwrap();
        let (f, report) = first_derivative_demo(10, &grid, 0.5).unwrap();
        assert_eq!(f.matrix_dim(), 2 * report.cutoff + 1);
        assert!(report.strip_holds);
        assert!(report.distance_to_flagged(Complex64::new(1.0, 0.0)) >= 0.5 - grid.cell());
        assert!(report.limit_spectrum_nodes_missed > 0);
        let diag: Vec<Complex64> = (-5..=5)
            .map(|k| Complex64::new(0.0, 2.0 * PI * k as f64 / 10.0))
            .collect();
        let m = ComplexMatrix::from_diag(&diag);
        assert!(!membership(&m, Complex64::new(1.0, 0.0), 0.5).unwrap());
        assert!(membership(&m, Complex64::new(0.0, 0.1), 0.5).unwrap());
    }

    #[test]
    fn flagged_set_is_conjugation_symmetric() {
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 21, 21).unwrap();
        let (_, report) = first_derivative_demo(7, &grid, 0.45).unwrap();
        for z in &report.flagged {
            assert!(report.flagged.iter().any(|w| (w - z.conj()).norm() < 1e-12), "{z}");
        }
    }
}
