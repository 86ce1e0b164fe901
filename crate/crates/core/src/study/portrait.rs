use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;
use crate::pseudo::{contours, nullable_floats, validate_levels, ContourSet, GridSpec, PseudospectrumField};

/// Eigenvalues, resolvent-norm field and level curves of one truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPortrait {
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
    pub n: usize,
    pub eigenvalues: Vec<ComplexPoint>,
    pub grid: Option<GridSpec>,
    #[serde(with = "nullable_floats", default)]
    pub resnorm: Vec<f64>,
    pub contours: Vec<ContourSet>,
    /// Curve drawn for orientation, such as a symbol curve.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_curve: Vec<ComplexPoint>,
}

impl SpectralPortrait {
    /// Contours for `eps_levels` (strictly decreasing) are extracted from
    /// `field`; without a field the levels must be empty.
    pub fn new(
        source: &str,
        n: usize,
        eigenvalues: Vec<ComplexPoint>,
        field: Option<&PseudospectrumField>,
        eps_levels: &[f64],
    ) -> Result<Self> {
        if !eps_levels.is_empty() {
            validate_levels(eps_levels)?;
        }
        let mut meta = BTreeMap::new();
        meta.insert("source".into(), source.into());
        let (grid, resnorm, contour_sets) = match field {
            Some(f) => {
                meta.insert("matrix_dim".into(), f.matrix_dim().into());
                meta.extend(f.meta().iter().map(|(k, v)| (k.clone(), v.clone())));
                (Some(*f.grid()), f.values().to_vec(), contours(f, eps_levels)?)
            }
            None if eps_levels.is_empty() => (None, Vec::new(), Vec::new()),
            None => {
                return Err(SpeclabError::Validation(
                    "contour levels need a resolvent-norm field".into(),
                ));
            }
        };
        Ok(Self {
            meta,
            n,
            eigenvalues,
            grid,
            resnorm,
            contours: contour_sets,
            reference_curve: Vec::new(),
        })
    }

    pub fn with_reference_curve(mut self, curve: Vec<ComplexPoint>) -> Self {
        self.reference_curve = curve;
        self
    }

    /// The stored field, if the portrait has one.
    pub fn field(&self) -> Result<Option<PseudospectrumField>> {
        match self.grid {
            None => Ok(None),
            Some(g) => {
                let dim = self.meta.get("matrix_dim").and_then(Value::as_u64).unwrap_or(0) as usize;
                PseudospectrumField::from_values(g, self.resnorm.clone(), dim).map(Some)
            }
        }
    }

    /// Re-checks the invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        let levels: Vec<f64> = self.contours.iter().map(|c| c.eps).collect();
        if !levels.is_empty() {
            validate_levels(&levels)?;
        }
        if let Some(g) = self.grid {
            if g.len() != self.resnorm.len() {
                return Err(SpeclabError::Dimension(format!(
                    "{} resolvent norms for a {}x{} grid",
                    self.resnorm.len(),
                    g.nx,
                    g.ny
                )));
            }
        }
        if let Some(dim) = self.meta.get("matrix_dim").and_then(Value::as_u64) {
            if dim as usize != self.eigenvalues.len() {
                return Err(SpeclabError::Dimension(format!(
                    "{} eigenvalues for a matrix of dimension {dim}",
                    self.eigenvalues.len()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{eigenvalues, ComplexMatrix};
    use crate::pseudo::field;

    #[test]
    fn roundtrip_and_schema_keys() {
        let m = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let g = GridSpec::new(-1.0, 2.0, -1.0, 1.0, 13, 9).unwrap();
        let f = field(&m, &g).unwrap();
        let p = SpectralPortrait::new("test", 2, eigenvalues(&m).unwrap(), Some(&f), &[0.5, 0.25]).unwrap();
        p.validate().unwrap();
        let text = serde_json::to_string(&p).unwrap();
        for key in [
            "\"meta\"",
            "\"n\"",
            "\"eigenvalues\"",
            "\"grid\"",
            "\"resnorm\"",
            "\"contours\"",
        ] {
            assert!(text.contains(key), "{key}");
        }
        let back: SpectralPortrait = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.field().unwrap().unwrap().values(), f.values());
        assert!(SpectralPortrait::new("x", 2, vec![], Some(&f), &[0.25, 0.5]).is_err());
    }

    #[test]
    fn no_field_no_contours() {
        let p = SpectralPortrait::new("x", 1, vec![ComplexPoint::new(1.0, 0.0)], None, &[]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"contours\":[]"));
        assert!(SpectralPortrait::new("x", 1, vec![], None, &[1.0]).is_err());
    }
}
