use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;

/// Symbol `p(zeta) = sum_a c_a zeta^a` of a constant-coefficient operator on
/// the line.
///
/// A term `c D^a` with `D = -i d/dx` contributes `c zeta^a`, so
/// `-d^2/dx^2 - 2 d/dx` has `c_2 = 1`, `c_1 = -2i`. JSON form is a map from
/// degree to complex coefficient: `{"2": [1, 0], "1": [0, -2]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, Complex64>", into = "BTreeMap<u32, Complex64>")]
pub struct SymbolPolynomial {
    coeffs: Vec<Complex64>,
}

impl TryFrom<BTreeMap<u32, Complex64>> for SymbolPolynomial {
    type Error = SpeclabError;

    fn try_from(map: BTreeMap<u32, Complex64>) -> Result<Self> {
        let order = map.keys().next_back().copied().unwrap_or(0) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        for (k, c) in map {
            coeffs[k as usize] = c;
        }
        Self::new(coeffs)
    }
}

impl From<SymbolPolynomial> for BTreeMap<u32, Complex64> {
    fn from(p: SymbolPolynomial) -> Self {
        p.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, &c)| (k as u32, c))
            .collect()
    }
}

impl SymbolPolynomial {
    /// Coefficients by ascending degree. Trailing zeros are trimmed; the
    /// order must be at least one so the operator is elliptic of order >= 1.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SpeclabError::Validation("symbol coefficient is not finite".into()));
        }
        while coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(SpeclabError::Validation(
                "symbol needs a nonzero coefficient of degree >= 1".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// Symbol of `-d^2/dx^2 - 2 d/dx`: `zeta^2 - 2 i zeta`.
    pub fn shipped() -> Self {
        Self::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(1.0, 0.0),
        ])
        .expect("constant coefficients are valid")
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.order()]
    }
}

/// `p(zeta)` by Horner's rule.
pub fn symbol_eval(p: &SymbolPolynomial, zeta: f64) -> ComplexPoint {
    p.coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * zeta + c)
}

/// `{p(pi zeta / n) : |zeta| <= cutoff}`, ordered by `zeta`.
pub fn truncated_symbol_spectrum(p: &SymbolPolynomial, n: usize, cutoff: usize) -> Result<Vec<ComplexPoint>> {
    if n < 1 {
        return Err(SpeclabError::Validation("domain size n must be at least 1".into()));
    }
    if cutoff < n {
        return Err(SpeclabError::Validation(format!("cutoff {cutoff} is below n = {n}")));
    }
    let c = cutoff as i64;
    Ok((-c..=c).map(|z| symbol_eval(p, PI * z as f64 / n as f64)).collect())
}

/// Samples of `p` on a uniform grid of `[-zeta_range, zeta_range]`.
pub fn essential_curve(p: &SymbolPolynomial, zeta_range: f64, m: usize) -> Result<Vec<ComplexPoint>> {
    if m < 64 {
        return Err(SpeclabError::Validation(format!(
            "essential curve needs at least 64 samples, got {m}"
        )));
    }
    if !(zeta_range > 0.0) || !zeta_range.is_finite() {
        return Err(SpeclabError::Validation(format!(
            "zeta range must be positive, got {zeta_range}"
        )));
    }
    Ok((0..m)
        .map(|t| symbol_eval(p, -zeta_range + 2.0 * zeta_range * t as f64 / (m - 1) as f64))
        .collect())
}

/// Smallest power-of-two multiple of one for which `p(+-zeta)` lies outside
/// the box `[x0, x1] x [y0, y1]`, so a curve sampled to that range leaves it.
pub fn zeta_range_leaving_box(p: &SymbolPolynomial, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let inside = |z: ComplexPoint| z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1;
    let mut r = 1.0;
    // |p| grows like |c_k| r^k, so this terminates for any bounded box
    while inside(symbol_eval(p, r)) || inside(symbol_eval(p, -r)) {
        r *= 2.0;
    }
    r
}
