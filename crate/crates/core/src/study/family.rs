use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::blockops::{assemble, delay_spectrum_oracle, BlockSequenceSpec};
use crate::error::{Result, SpeclabError};
use crate::fourier_pde::{
    assemble_operator, assemble_truncation_with_cutoff, discrete_candidates, essential_curve_for_box,
    truncated_symbol_spectrum, PdeOperator, DISCRETE_SEPARATION,
};
use crate::numlin::{eigenvalues, ComplexMatrix, ComplexPoint};
use crate::pseudo::GridSpec;
use crate::toeplitz::{apply_perturbation, finite_section, spectrum_classify, PerturbationSpec, ToeplitzSymbol};

/// A sequence of matrices indexed by the truncation parameter `n`.
///
/// JSON: `{"family": "toeplitz", "symbol": {...}, "perturbation": {...}}`,
/// `{"family": "delay"}`, `{"family": "blocks", "spec": {...}}`,
/// `{"family": "pde", "operator": {...}}` or
/// `{"family": "synthetic", "seed": 7}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum OperatorFamily {
    Toeplitz {
        symbol: ToeplitzSymbol,
        #[serde(default)]
        perturbation: PerturbationSpec,
    },
    Delay,
    Blocks {
        spec: BlockSequenceSpec,
    },
    Pde {
        operator: PdeOperator,
    },
    /// `diag(-1, 1, 1/n)` plus a seeded noise pattern scaled by `1e-3 / n`: the third
    /// eigenvalue converges to `0`, which is not in the spectrum `{-1, 1}`
    /// the family declares as its reference.
    Synthetic {
        #[serde(default)]
        seed: u64,
    },
}

// Serde's derived internally tagged enums buffer their input, which turns
// integer map keys into strings that the nested types then reject. Dispatching
// on the tag by hand keeps the nested deserializers on `serde_json::Value`.
impl<'de> Deserialize<'de> for OperatorFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct ToeplitzFields {
            symbol: ToeplitzSymbol,
            #[serde(default)]
            perturbation: PerturbationSpec,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct BlocksFields {
            spec: BlockSequenceSpec,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PdeFields {
            operator: PdeOperator,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct SyntheticFields {
            #[serde(default)]
            seed: u64,
        }

        let mut value = Value::deserialize(deserializer)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| D::Error::custom("operator family must be a JSON object"))?;
        let tag = match obj.remove("family") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(D::Error::custom("\"family\" must be a string")),
            None => return Err(D::Error::missing_field("family")),
        };
        let fields = Value::Object(std::mem::take(obj));
        let conv = |e: serde_json::Error| D::Error::custom(e);
        match tag.as_str() {
            "toeplitz" => {
                let f: ToeplitzFields = serde_json::from_value(fields).map_err(conv)?;
                Ok(Self::Toeplitz {
                    symbol: f.symbol,
                    perturbation: f.perturbation,
                })
            }
            "delay" => match fields.as_object().map(|m| m.is_empty()) {
                Some(true) => Ok(Self::Delay),
                _ => Err(D::Error::custom("the delay family takes no parameters")),
            },
            "blocks" => serde_json::from_value::<BlocksFields>(fields)
                .map(|f| Self::Blocks { spec: f.spec })
                .map_err(conv),
            "pde" => serde_json::from_value::<PdeFields>(fields)
                .map(|f| Self::Pde { operator: f.operator })
                .map_err(conv),
            "synthetic" => serde_json::from_value::<SyntheticFields>(fields)
                .map(|f| Self::Synthetic { seed: f.seed })
                .map_err(conv),
            other => Err(D::Error::unknown_variant(
                other,
                &["toeplitz", "delay", "blocks", "pde", "synthetic"],
            )),
        }
    }
}

impl OperatorFamily {
    /// The fish symbol with the rank-10 perturbation `20 I`.
    pub fn fish() -> Self {
        Self::Toeplitz {
            symbol: ToeplitzSymbol::fish(),
            perturbation: PerturbationSpec::fish_default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Toeplitz { .. } => "toeplitz",
            Self::Delay => "delay",
            Self::Blocks { .. } => "blocks",
            Self::Pde { .. } => "pde",
            Self::Synthetic { .. } => "synthetic",
        }
    }

    pub fn assemble(&self, n: usize) -> Result<ComplexMatrix> {
        let m = match self {
            Self::Toeplitz { symbol, perturbation } => apply_perturbation(&finite_section(symbol, n)?, perturbation),
            Self::Delay => assemble(&BlockSequenceSpec::delay(), n)?,
            Self::Blocks { spec } => assemble(spec, n)?,
            Self::Pde { operator } => assemble_operator(operator, n)?,
            Self::Synthetic { seed } => synthetic_matrix(*seed, n)?,
        };
        Ok(m)
    }

    /// Exact or independently computed spectrum of the `n`-th matrix,
    /// clipped to `k`, when the family has one.
    pub fn reference_points(&self, n: usize, k: &GridSpec) -> Result<Option<Vec<ComplexPoint>>> {
        let pts = match self {
            Self::Delay => delay_spectrum_oracle(n)?,
            Self::Pde { operator } if operator.potential.is_zero() => {
                truncated_symbol_spectrum(&operator.symbol, n, n)?
            }
            Self::Pde { operator } => {
                // symbol lattice plus discrete candidates of a finer discretization
                let bounds = (k.x0, k.x1, k.y0, k.y1);
                let curve = essential_curve_for_box(&operator.symbol, bounds)?;
                let fine = assemble_truncation_with_cutoff(&operator.symbol, &operator.potential, n, 2 * n)?;
                let mut pts = truncated_symbol_spectrum(&operator.symbol, n, n)?;
                pts.extend(discrete_candidates(
                    &eigenvalues(&fine)?,
                    &curve,
                    bounds,
                    DISCRETE_SEPARATION,
                ));
                pts
            }
            Self::Toeplitz { symbol, .. } => k
                .nodes()
                .filter(|&z| spectrum_classify(symbol, z).map(|c| c.in_spectrum()).unwrap_or(false))
                .collect(),
            Self::Synthetic { .. } => vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            Self::Blocks { .. } => return Ok(None),
        };
        Ok(Some(pts.into_iter().filter(|&z| k.contains(z)).collect()))
    }
}

fn synthetic_matrix(seed: u64, n: usize) -> Result<ComplexMatrix> {
    if n < 1 {
        return Err(SpeclabError::Validation("truncation index n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1e-3 / n as f64;
    let diag = [-1.0, 1.0, 1.0 / n as f64];
    Ok(ComplexMatrix::from_fn(3, 3, |i, j| {
        let noise = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        if i == j {
            Complex64::new(diag[i], 0.0) + noise
        } else {
            noise
        }
    }))
}
