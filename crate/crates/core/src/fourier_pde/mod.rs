//! Constant-coefficient differential operators on the line with decaying
//! potentials, truncated to a periodic box `(-n, n)` and discretized in the
//! Fourier basis `exp(i pi zeta x / n)`.

mod derivative;
mod potential;
pub mod quadrature;
mod symbol;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use derivative::{derivative_cutoff, first_derivative_demo, DerivativeReport};
pub use potential::{potential_coeffs, PotentialSpec, COEFF_TOL, MAX_TABLE_SPACING};
pub use symbol::{essential_curve, symbol_eval, truncated_symbol_spectrum, zeta_range_leaving_box, SymbolPolynomial};

use crate::error::{Result, SpeclabError};
use crate::numlin::{ComplexMatrix, ComplexPoint};
use crate::toeplitz::segment_distance;

/// Search box `[-5, 10] x [-7, 7]` of the shipped example, as
/// `(x0, x1, y0, y1)`.
pub const SHIPPED_BOX: (f64, f64, f64, f64) = (-5.0, 10.0, -7.0, 7.0);
/// Minimum distance from the essential curve for a discrete candidate.
pub const DISCRETE_SEPARATION: f64 = 0.5;

/// Symbol plus potentials. Only the zero-order potential can be assembled;
/// `derivative_potentials` (degree -> `b_a` multiplying `D^a`) are kept for
/// symbol-level work and rejected by [`assemble_operator`].
///
/// JSON: `{"symbol": {"2": [1,0], "1": [0,-2]}, "potential": {"builtin": "gauss-sine", "amplitude": 20}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeOperator {
    pub symbol: SymbolPolynomial,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub derivative_potentials: BTreeMap<u32, PotentialSpec>,
}

fn zero_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

impl PdeOperator {
    /// `-d^2/dx^2 - 2 d/dx + 20 sin(x) exp(-x^2)`.
    pub fn shipped() -> Self {
        Self {
            symbol: SymbolPolynomial::shipped(),
            potential: PotentialSpec::shipped(),
            derivative_potentials: BTreeMap::new(),
        }
    }
}

/// `A_{n;n}`: indices `zeta, eta = -n..n`, entry
/// `p(pi zeta / n) delta + beta_{zeta - eta}`.
pub fn assemble_truncation(p: &SymbolPolynomial, b: &PotentialSpec, n: usize) -> Result<ComplexMatrix> {
    assemble_truncation_with_cutoff(p, b, n, n)
}

/// Like [`assemble_truncation`] on the box `(-n, n)` but keeping Fourier
/// modes `|zeta| <= cutoff` independently of the box size.
pub fn assemble_truncation_with_cutoff(
    p: &SymbolPolynomial,
    b: &PotentialSpec,
    n: usize,
    cutoff: usize,
) -> Result<ComplexMatrix> {
    if n < 1 || cutoff < 1 {
        return Err(SpeclabError::Validation(
            "n and the mode cutoff must be at least 1".into(),
        ));
    }
    let beta = potential_coeffs(b, n, 2 * cutoff)?;
    let c = cutoff as i64;
    let dim = 2 * cutoff + 1;
    let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
        let (zeta, eta) = (i as i64 - c, j as i64 - c);
        let mut v = beta[&(zeta - eta)];
        if i == j {
            v += symbol_eval(p, PI * zeta as f64 / n as f64);
        }
        v
    });
    m.validate()?;
    Ok(m)
}

pub fn assemble_operator(op: &PdeOperator, n: usize) -> Result<ComplexMatrix> {
    if let Some(&degree) = op.derivative_potentials.keys().next() {
        return Err(SpeclabError::Validation(format!(
            "potentials multiplying derivatives (degree {degree}) cannot be assembled; only multiplication potentials are supported"
        )));
    }
    assemble_truncation(&op.symbol, &op.potential, n)
}

/// Distance from `z` to an open polyline.
pub fn polyline_distance(z: ComplexPoint, curve: &[ComplexPoint]) -> f64 {
    match curve {
        [] => f64::INFINITY,
        [only] => (z - only).norm(),
        _ => curve
            .windows(2)
            .map(|w| segment_distance(z, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Eigenvalues in `bounds = (x0, x1, y0, y1)` farther than `min_distance`
/// from the sampled essential curve.
pub fn discrete_candidates(
    eigenvalues: &[ComplexPoint],
    curve: &[ComplexPoint],
    bounds: (f64, f64, f64, f64),
    min_distance: f64,
) -> Vec<ComplexPoint> {
    let (x0, x1, y0, y1) = bounds;
    eigenvalues
        .iter()
        .copied()
        .filter(|z| z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1)
        .filter(|&z| polyline_distance(z, curve) > min_distance)
        .collect()
}

/// Essential curve of `p` sampled densely enough and far enough to leave
/// `bounds`.
pub fn essential_curve_for_box(p: &SymbolPolynomial, bounds: (f64, f64, f64, f64)) -> Result<Vec<ComplexPoint>> {
    let (x0, x1, y0, y1) = bounds;
    let range = zeta_range_leaving_box(p, x0, x1, y0, y1);
    essential_curve(p, range, 4001)
}
