use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{Result, SpeclabError};

/// Absolute tolerance on each potential coefficient.
pub const COEFF_TOL: f64 = 1e-12;
/// Largest admissible sample spacing of a tabulated potential.
pub const MAX_TABLE_SPACING: f64 = 0.01;
/// Relative size below which the potential counts as vanished.
const DECAY_LEVEL: f64 = 1e-14;

/// Multiplicative potential `b(x)` on the real line.
///
/// JSON forms: `{"builtin": "gauss-sine", "amplitude": 20}` for
/// `A sin(w x) exp(-(x/s)^2)` (optional `frequency` w and `width` s, both
/// default 1), `{"builtin": "zero"}`, or a table
/// `{"x0": -8, "dx": 0.01, "values": [[re, im], ...]}` interpolated linearly
/// and zero outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub enum PotentialSpec {
    Zero,
    GaussSine { amplitude: f64, frequency: f64, width: f64 },
    Tabulated { x0: f64, dx: f64, values: Vec<Complex64> },
}

#[derive(Serialize, Deserialize, Default)]
struct RawPotential {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Complex64>>,
}

impl TryFrom<RawPotential> for PotentialSpec {
    type Error = SpeclabError;

    fn try_from(r: RawPotential) -> Result<Self> {
        match r.builtin.as_deref() {
            Some("zero") => Ok(Self::Zero),
            Some("gauss-sine") => Self::gauss_sine(
                r.amplitude.unwrap_or(20.0),
                r.frequency.unwrap_or(1.0),
                r.width.unwrap_or(1.0),
            ),
            Some(other) => Err(SpeclabError::Validation(format!(
                "unknown builtin potential {other:?} (expected \"gauss-sine\" or \"zero\")"
            ))),
            None => match (r.x0, r.dx, r.values) {
                (Some(x0), Some(dx), Some(values)) => Self::tabulated(x0, dx, values),
                _ => Err(SpeclabError::Validation(
                    "potential needs \"builtin\" or all of \"x0\", \"dx\", \"values\"".into(),
                )),
            },
        }
    }
}

impl From<PotentialSpec> for RawPotential {
    fn from(p: PotentialSpec) -> Self {
        match p {
            PotentialSpec::Zero => RawPotential {
                builtin: Some("zero".into()),
                ..Default::default()
            },
            PotentialSpec::GaussSine {
                amplitude,
                frequency,
                width,
            } => RawPotential {
                builtin: Some("gauss-sine".into()),
                amplitude: Some(amplitude),
                frequency: Some(frequency),
                width: Some(width),
                ..Default::default()
            },
            PotentialSpec::Tabulated { x0, dx, values } => RawPotential {
                x0: Some(x0),
                dx: Some(dx),
                values: Some(values),
                ..Default::default()
            },
        }
    }
}

impl PotentialSpec {
    /// `20 sin(x) exp(-x^2)`.
    pub fn shipped() -> Self {
        Self::GaussSine {
            amplitude: 20.0,
            frequency: 1.0,
            width: 1.0,
        }
    }

    pub fn gauss_sine(amplitude: f64, frequency: f64, width: f64) -> Result<Self> {
        if !amplitude.is_finite() || !frequency.is_finite() || !(width > 0.0) || !width.is_finite() {
            return Err(SpeclabError::Validation(
                "gauss-sine potential needs finite amplitude and frequency and a positive width".into(),
            ));
        }
        Ok(Self::GaussSine {
            amplitude,
            frequency,
            width,
        })
    }

    pub fn tabulated(x0: f64, dx: f64, values: Vec<Complex64>) -> Result<Self> {
        if !x0.is_finite() || !(dx > 0.0) || dx > MAX_TABLE_SPACING {
            return Err(SpeclabError::Validation(format!(
                "table spacing must lie in (0, {MAX_TABLE_SPACING}], got {dx}"
            )));
        }
        if values.len() < 2 {
            return Err(SpeclabError::Validation(
                "potential table needs at least two samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpeclabError::Validation(
                "potential table has a non-finite sample".into(),
            ));
        }
        Ok(Self::Tabulated { x0, dx, values })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Self::Zero => Complex64::new(0.0, 0.0),
            Self::GaussSine {
                amplitude,
                frequency,
                width,
            } => Complex64::new(amplitude * (frequency * x).sin() * (-(x / width).powi(2)).exp(), 0.0),
            Self::Tabulated { x0, dx, values } => {
                let t = (x - x0) / dx;
                if t < 0.0 || t > (values.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = (t.floor() as usize).min(values.len() - 2);
                let s = t - k as f64;
                values[k] * (1.0 - s) + values[k + 1] * s
            }
        }
    }

    /// `R` with `|b(x)| <= 1e-14 sup|b|` for `|x| > R`.
    pub fn decay_radius(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            // exp(-(R/s)^2) = 1e-16 leaves a margin of 1e-2 for sup|b| / A
            Self::GaussSine { width, .. } => width * (16.0 * 10f64.ln()).sqrt(),
            Self::Tabulated { x0, dx, values } => {
                let x1 = x0 + dx * (values.len() - 1) as f64;
                x0.abs().max(x1.abs())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::GaussSine { amplitude, .. } => *amplitude == 0.0,
            Self::Tabulated { values, .. } => values.iter().all(|v| v.norm() == 0.0),
        }
    }

    /// Samples `|b|` inside and beyond [`Self::decay_radius`] and checks
    /// that the tail is negligible.
    pub fn check_decay(&self) -> Result<()> {
        let r = self.decay_radius();
        if r == 0.0 {
            return Ok(());
        }
        let sup = (0..=4000)
            .map(|t| self.eval(-r + 2.0 * r * t as f64 / 4000.0).norm())
            .fold(0.0, f64::max);
        for t in 1..=2000 {
            let x = r * (1.0 + t as f64 / 1000.0);
            for v in [self.eval(x), self.eval(-x)] {
                if v.norm() > DECAY_LEVEL * sup {
                    return Err(SpeclabError::Validation(format!(
                        "potential has not decayed at |x| = {x:.3} (|b| = {:.3e}, sup {sup:.3e})",
                        v.norm()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Breakpoints where the integrand may have kinks, inside `[a, b]`.
    fn panel_edges(&self, a: f64, b: f64, h: f64) -> Vec<f64> {
        let count = ((b - a) / h).ceil().max(1.0) as usize;
        let mut edges: Vec<f64> = (0..=count).map(|t| a + (b - a) * t as f64 / count as f64).collect();
        if let Self::Tabulated { x0, dx, values } = self {
            edges.extend(
                (0..values.len())
                    .map(|k| x0 + dx * k as f64)
                    .filter(|&x| x > a && x < b),
            );
            edges.sort_by(f64::total_cmp);
            edges.dedup();
        }
        edges
    }
}

/// `beta_m = (1/(2n)) int_{-n}^{n} b(x) exp(-i pi m x / n) dx` for
/// `|m| <= max_offset`.
///
/// The integrand is treated as zero beyond the decay radius; the remaining
/// interval is split into panels of at most one unit and half an oscillation
/// period and integrated adaptively to [`COEFF_TOL`].
pub fn potential_coeffs(b: &PotentialSpec, n: usize, max_offset: usize) -> Result<BTreeMap<i64, Complex64>> {
    if n < 1 {
        return Err(SpeclabError::Validation("domain size n must be at least 1".into()));
    }
    let nf = n as f64;
    let reach = b.decay_radius().min(nf);
    let m_max = max_offset as i64;
    (-m_max..=m_max)
        .into_par_iter()
        .map(|m| {
            if reach == 0.0 || b.is_zero() {
                return Ok((m, Complex64::new(0.0, 0.0)));
            }
            let omega = PI * m as f64 / nf;
            let h = if m == 0 { 1.0 } else { (PI / omega.abs()).min(1.0) };
            let edges = b.panel_edges(-reach, reach, h);
            let tol = COEFF_TOL * 2.0 * nf / (edges.len() - 1) as f64;
            let mut total = Complex64::new(0.0, 0.0);
            for w in edges.windows(2) {
                total += integrate(
                    |x| b.eval(x) * Complex64::from_polar(1.0, -omega * x),
                    w[0],
                    w[1],
                    1,
                    tol,
                )?;
            }
            Ok((m, total / (2.0 * nf)))
        })
        .collect()
}
