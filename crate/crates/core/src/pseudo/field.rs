use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::grid::GridSpec;
use crate::error::{Result, SpeclabError};
use crate::numlin::{resolvent_norm, ComplexMatrix, ComplexPoint, ResolventEvaluator};

/// Resolvent norms `||(M - lambda)^-1||` sampled on a grid, row-major with
/// `y` as the slow index. Infinite values mark numerically singular nodes
/// and serialize to JSON `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudospectrumField {
    grid: GridSpec,
    #[serde(with = "nullable_floats")]
    values: Vec<f64>,
    matrix_dim: usize,
    #[serde(default)]
    meta: BTreeMap<String, Value>,
}

impl PseudospectrumField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>, matrix_dim: usize) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(SpeclabError::Dimension(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(SpeclabError::Validation(format!("invalid resolvent norm {v}")));
        }
        Ok(Self {
            grid,
            values,
            matrix_dim,
            meta: BTreeMap::new(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    pub fn meta(&self) -> &BTreeMap<String, Value> {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut BTreeMap<String, Value> {
        &mut self.meta
    }

    /// Value at column `i`, row `j`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Writes `re,im,resnorm` rows in row-major node order.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "re,im,resnorm")?;
        for (z, v) in self.grid.nodes().zip(&self.values) {
            writeln!(w, "{:.16e},{:.16e},{}", z.re, z.im, fmt_value(*v))?;
        }
        Ok(())
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Serializes `+inf` as `null` and reads `null` back as `+inf`.
pub(crate) mod nullable_floats {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

/// Resolvent-norm field of `m` over `grid`.
///
/// One Schur decomposition serves every node. Grid rows are evaluated in
/// parallel; within a row each node warm-starts from its left neighbour, and
/// every row starts from the same fixed vector, so the output does not
/// depend on scheduling.
pub fn field(m: &ComplexMatrix, grid: &GridSpec) -> Result<PseudospectrumField> {
    grid.validate()?;
    let evaluator = ResolventEvaluator::new(m)?;
    field_with(&evaluator, grid)
}

/// As [`field`], reusing an existing evaluator.
pub fn field_with(evaluator: &ResolventEvaluator, grid: &GridSpec) -> Result<PseudospectrumField> {
    grid.validate()?;
    let rows: Vec<Vec<f64>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut warm = Vec::new();
            (0..grid.nx)
                .map(|i| evaluator.resolvent_norm(grid.node(i, j), &mut warm))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut f = PseudospectrumField::from_values(*grid, rows.concat(), evaluator.dim())?;
    f.meta.insert("method".into(), "schur-inverse-lanczos".into());
    f.meta
        .insert("closure".into(), "strict inequality sampled at grid nodes".into());
    Ok(f)
}

/// Node-by-node field using the direct singular value path for each shifted
/// matrix. Slow; kept as a cross-check for [`field`].
pub fn field_direct(m: &ComplexMatrix, grid: &GridSpec) -> Result<PseudospectrumField> {
    grid.validate()?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| resolvent_norm(m, grid.node_at(k)))
        .collect::<Result<Vec<f64>>>()?;
    let mut f = PseudospectrumField::from_values(*grid, values, m.rows())?;
    f.meta.insert("method".into(), "dense-svd".into());
    Ok(f)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(SpeclabError::Validation(format!("eps must be positive, got {eps}")))
    }
}

/// `lambda` lies in the open eps-pseudospectrum of `m`.
pub fn membership(m: &ComplexMatrix, lambda: ComplexPoint, eps: f64) -> Result<bool> {
    check_eps(eps)?;
    Ok(resolvent_norm(m, lambda)? > 1.0 / eps)
}

/// Grid nodes whose resolvent norm exceeds `1/eps`.
pub fn sublevel_points(field: &PseudospectrumField, eps: f64) -> Result<Vec<ComplexPoint>> {
    check_eps(eps)?;
    let t = 1.0 / eps;
    Ok(field
        .grid
        .nodes()
        .zip(&field.values)
        .filter(|(_, v)| **v > t)
        .map(|(z, _)| z)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn single_node_scalar() {
        let g = GridSpec::new(1.0, 2.0, 0.0, 1.0, 2, 2).unwrap();
        let f = field(&ComplexMatrix::zeros(1, 1), &g).unwrap();
        assert!((f.value(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn selfadjoint_diagonal_field() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 4.0]);
        let g = GridSpec::new(-1.0, 6.0, -2.0, 2.0, 15, 9).unwrap();
        let f = field(&m, &g).unwrap();
        for (z, v) in g.nodes().zip(f.values()) {
            let exact = 1.0 / (z - 1.0).norm().min((z - 4.0).norm());
            assert!(*v == exact || (v - exact).abs() <= 1e-12 * exact, "{z}: {v} vs {exact}");
        }
    }

    #[test]
    fn membership_examples() {
        let z = ComplexMatrix::zeros(1, 1);
        assert!(membership(&z, c(0.5, 0.0), 1.0).unwrap());
        assert!(!membership(&z, c(2.0, 0.0), 1.0).unwrap());
        assert!(membership(&z, c(2.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn sublevel_examples() {
        let g = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 9, 9).unwrap();
        let f = PseudospectrumField::from_values(g, vec![0.1; 81], 1).unwrap();
        assert!(sublevel_points(&f, 1.0).unwrap().is_empty());
        let f = field(&ComplexMatrix::zeros(1, 1), &g).unwrap();
        let pts = sublevel_points(&f, 1.0).unwrap();
        let expected: Vec<_> = g.nodes().filter(|z| z.norm() < 1.0).collect();
        assert_eq!(pts, expected);
    }

    #[test]
    fn json_round_trip_keeps_infinity() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let f = PseudospectrumField::from_values(g, vec![1.0, f64::INFINITY, 0.25, 3.0], 2).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("null"));
        let back: PseudospectrumField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn csv_layout() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let f = PseudospectrumField::from_values(g, vec![1.0, f64::INFINITY, 0.25, 3.0], 2).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "re,im,resnorm");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1.0000000000000000e0,0.0000000000000000e0,inf"));
    }
}
