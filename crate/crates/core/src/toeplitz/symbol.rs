use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexMatrix;

/// Laurent polynomial `f(z) = sum_k a_k z^k` with finitely many coefficients.
///
/// JSON form: `{"coeffs": {"-3": [-7, 0], "2": [15, 0]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSymbol")]
pub struct ToeplitzSymbol {
    coeffs: BTreeMap<i64, Complex64>,
}

#[derive(Deserialize)]
struct RawSymbol {
    coeffs: BTreeMap<i64, Complex64>,
}

impl TryFrom<RawSymbol> for ToeplitzSymbol {
    type Error = SpeclabError;

    fn try_from(r: RawSymbol) -> Result<Self> {
        ToeplitzSymbol::new(r.coeffs)
    }
}

impl ToeplitzSymbol {
    /// Zero coefficients are dropped; at least one nonzero must remain.
    pub fn new(coeffs: BTreeMap<i64, Complex64>) -> Result<Self> {
        if let Some((k, a)) = coeffs.iter().find(|(_, a)| !a.is_finite()) {
            return Err(SpeclabError::Validation(format!(
                "coefficient a_{k} = {a} is not finite"
            )));
        }
        let coeffs: BTreeMap<i64, Complex64> = coeffs
            .into_iter()
            .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
            .collect();
        if coeffs.is_empty() {
            return Err(SpeclabError::Validation("symbol has no nonzero coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(pairs: &[(i64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(k, a)| (k, Complex64::new(a, 0.0))).collect())
    }

    /// Banded symbol whose curve looks like a fish:
    /// `a_-3 = -7, a_-2 = 8, a_-1 = -1, a_2 = 15, a_3 = 5`.
    pub fn fish() -> Self {
        Self::from_real(&[(-3, -7.0), (-2, 8.0), (-1, -1.0), (2, 15.0), (3, 5.0)])
            .expect("constant coefficients are valid")
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    /// `f(z)`; `z` is expected on or near the unit circle.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(&k, &a)| a * z.powi(k as i32)).sum()
    }

    /// Symbol `c * f`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|(&k, &a)| (k, a * c)).collect())
    }
}

/// Finitely many matrix entries added to a section, indexed from zero.
///
/// JSON form: `{"entries": [{"row": 0, "col": 0, "value": [20, 0]}, ...]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPerturbation", into = "RawPerturbation")]
pub struct PerturbationSpec {
    entries: BTreeMap<(usize, usize), Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    row: usize,
    col: usize,
    value: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawPerturbation {
    entries: Vec<RawEntry>,
}

impl TryFrom<RawPerturbation> for PerturbationSpec {
    type Error = SpeclabError;

    fn try_from(r: RawPerturbation) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for e in r.entries {
            *entries.entry((e.row, e.col)).or_default() += e.value;
        }
        PerturbationSpec::new(entries)
    }
}

impl From<PerturbationSpec> for RawPerturbation {
    fn from(p: PerturbationSpec) -> Self {
        RawPerturbation {
            entries: p
                .entries
                .into_iter()
                .map(|((row, col), value)| RawEntry { row, col, value })
                .collect(),
        }
    }
}

impl PerturbationSpec {
    pub fn new(entries: BTreeMap<(usize, usize), Complex64>) -> Result<Self> {
        if entries.values().any(|v| !v.is_finite()) {
            return Err(SpeclabError::Validation("perturbation entry is not finite".into()));
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `value` on the first `count` diagonal entries.
    pub fn leading_diagonal(count: usize, value: Complex64) -> Self {
        Self {
            entries: (0..count).map(|i| ((i, i), value)).collect(),
        }
    }

    /// The rank-10 perturbation `20 * I` on the leading 10x10 block.
    pub fn fish_default() -> Self {
        Self::leading_diagonal(10, Complex64::new(20.0, 0.0))
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Complex64> {
        &self.entries
    }
}

/// `n x n` section with entry `(i, j) = a_{i-j}`.
pub fn finite_section(sym: &ToeplitzSymbol, n: usize) -> Result<ComplexMatrix> {
    if n < 1 {
        return Err(SpeclabError::Validation("section size must be at least 1".into()));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (&k, &a) in sym.coeffs() {
        let k_abs = k.unsigned_abs() as usize;
        if k_abs >= n {
            continue;
        }
        for t in 0..n - k_abs {
            let (i, j) = if k >= 0 { (t + k_abs, t) } else { (t, t + k_abs) };
            m[(i, j)] = a;
        }
    }
    Ok(m)
}

/// `M + P_n S P_n`: entries of `S` outside the matrix are dropped.
pub fn apply_perturbation(m: &ComplexMatrix, s: &PerturbationSpec) -> ComplexMatrix {
    let mut out = m.clone();
    for (&(i, j), &v) in s.entries() {
        if i < m.rows() && j < m.cols() {
            out[(i, j)] += v;
        }
    }
    out
}

/// Section of the fish symbol plus the default rank-10 perturbation.
pub fn fish_section(n: usize) -> Result<ComplexMatrix> {
    Ok(apply_perturbation(
        &finite_section(&ToeplitzSymbol::fish(), n)?,
        &PerturbationSpec::fish_default(),
    ))
}
