//! Block-diagonally dominant operators `A = T + S`: truncations, exact block
//! resolvent norms and grid estimators for the limiting essential spectrum
//! and essential pseudospectrum of the truncations.

mod spec;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use spec::{BlockSequenceSpec, BlockTable, Example1Params, IndexKind, TailRule};

use crate::error::{Result, SpeclabError};
use crate::numlin::{singular_values, ComplexMatrix, ComplexPoint, SINGULARITY_FACTOR};
use crate::pseudo::GridSpec;

/// Smallest admissible tail depth for the limit estimators.
pub const MIN_TAIL_BLOCKS: usize = 16;

/// Fraction of tail indices that must sit near `1/eps` before a node counts
/// as an accumulation point of the block norms.
const CLUSTER_FRACTION: f64 = 0.25;

/// Truncation `A_n`: blocks of `spec.window(n)` on the diagonal, in-block
/// parts added on top, couplings on the first block off-diagonals.
pub fn assemble(spec: &BlockSequenceSpec, n: usize) -> Result<ComplexMatrix> {
    if n < 1 {
        return Err(SpeclabError::Validation("truncation index n must be at least 1".into()));
    }
    let window = spec.window(n);
    let blocks: Vec<ComplexMatrix> = window.iter().map(|&k| spec.block(k)).collect::<Result<_>>()?;
    let mut offsets = Vec::with_capacity(blocks.len() + 1);
    offsets.push(0usize);
    for b in &blocks {
        b.require_square()?;
        offsets.push(offsets.last().unwrap() + b.rows());
    }
    let dim = *offsets.last().unwrap();
    let mut a = ComplexMatrix::zeros(dim, dim);
    for (t, (&k, b)) in window.iter().zip(&blocks).enumerate() {
        let m = b.rows();
        a.set_block(offsets[t], offsets[t], b)?;
        if let Some(d) = spec.in_block(k)? {
            check_shape(&d, m, m, k, "in-block part")?;
            for i in 0..m {
                for j in 0..m {
                    a[(offsets[t] + i, offsets[t] + j)] += d[(i, j)];
                }
            }
        }
        if t + 1 == blocks.len() {
            continue;
        }
        let next = blocks[t + 1].rows();
        if let Some(u) = spec.upper(k)? {
            check_shape(&u, m, next, k, "upper coupling")?;
            a.set_block(offsets[t], offsets[t + 1], &u)?;
        }
        if let Some(l) = spec.lower(k)? {
            check_shape(&l, next, m, k, "lower coupling")?;
            a.set_block(offsets[t + 1], offsets[t], &l)?;
        }
    }
    a.validate()?;
    Ok(a)
}

fn check_shape(b: &ComplexMatrix, rows: usize, cols: usize, k: i64, what: &str) -> Result<()> {
    if b.rows() != rows || b.cols() != cols {
        return Err(SpeclabError::Validation(format!(
            "{what} at index {k} is {}x{}, expected {rows}x{cols}",
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `(sigma_max, sigma_min)` of a 2x2 matrix from its Frobenius norm and
/// determinant, with `sigma_min = |det| / sigma_max` to avoid cancellation.
fn singular_pair_2x2(b: &ComplexMatrix) -> (f64, f64) {
    let f = b.frobenius_norm().powi(2);
    let det = (b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)]).norm();
    let disc = ((f - 2.0 * det) * (f + 2.0 * det)).max(0.0).sqrt();
    let smax = ((f + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smax, smin)
}

fn block_sigma_min(b: &ComplexMatrix) -> Result<f64> {
    match b.rows() {
        1 => Ok(b[(0, 0)].norm()),
        2 => Ok(singular_pair_2x2(b).1),
        _ => Ok(*singular_values(b)?.last().expect("non-empty block")),
    }
}

/// `||(T_k - lambda)^-1||` from the singular values of the shifted block.
pub fn block_resolvent_norm(spec: &BlockSequenceSpec, k: i64, lambda: ComplexPoint) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(SpeclabError::Validation(format!(
            "spectral parameter {lambda} is not finite"
        )));
    }
    let shifted = spec.block(k)?.shifted(lambda)?;
    let sigma = block_sigma_min(&shifted)?;
    if sigma < SINGULARITY_FACTOR * f64::EPSILON * shifted.frobenius_norm() || sigma == 0.0 {
        return Err(SpeclabError::SingularBlock { index: k });
    }
    Ok(1.0 / sigma)
}

/// Which limit set a [`LimitSetEstimate`] approximates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitKind {
    EssentialSpectrum,
    EpsNearSpectrum { eps: f64 },
}

/// Grid mask approximating a limit set of the truncations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSetEstimate {
    pub grid: GridSpec,
    pub kind: LimitKind,
    pub flagged: Vec<bool>,
    pub k_blocks: usize,
    /// Divergence threshold or clustering tolerance, depending on `kind`.
    pub tolerance: f64,
}

impl LimitSetEstimate {
    pub fn flagged_points(&self) -> Vec<ComplexPoint> {
        self.flagged
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(idx, _)| self.grid.node_at(idx))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }
}

fn check_tail(k_blocks: usize) -> Result<()> {
    if k_blocks < MIN_TAIL_BLOCKS {
        return Err(SpeclabError::Validation(format!(
            "tail depth must be at least {MIN_TAIL_BLOCKS}, got {k_blocks}"
        )));
    }
    Ok(())
}

/// Block norms over the tail window at one node; singular blocks give `inf`.
fn tail_norms(spec: &BlockSequenceSpec, tail: &[i64], lambda: ComplexPoint) -> Result<Vec<f64>> {
    tail.iter()
        .map(|&k| match block_resolvent_norm(spec, k, lambda) {
            Ok(v) => Ok(v),
            Err(SpeclabError::SingularBlock { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect()
}

fn mask(
    spec: &BlockSequenceSpec,
    grid: &GridSpec,
    k_blocks: usize,
    rule: impl Fn(&[f64]) -> bool + Sync,
) -> Result<Vec<bool>> {
    let tail = spec.tail_window(k_blocks);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| Ok(rule(&tail_norms(spec, &tail, grid.node_at(idx))?)))
        .collect()
}

/// Flags nodes where the block resolvent norms blow up along the tail:
/// `sup { ||(T_k - lambda)^-1|| : |k| in [K/2, K] } >= threshold`.
pub fn essential_limit_estimate(
    spec: &BlockSequenceSpec,
    grid: &GridSpec,
    k_blocks: usize,
    threshold: f64,
) -> Result<LimitSetEstimate> {
    grid.validate()?;
    check_tail(k_blocks)?;
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(SpeclabError::Validation(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let flagged = mask(spec, grid, k_blocks, |norms| norms.iter().any(|&v| v >= threshold))?;
    Ok(LimitSetEstimate {
        grid: *grid,
        kind: LimitKind::EssentialSpectrum,
        flagged,
        k_blocks,
        tolerance: threshold,
    })
}

/// Flags nodes where the tail block norms accumulate at `1/eps`: at least a
/// quarter of the tail indices have `| ||(T_k - lambda)^-1|| - 1/eps | <= tol`.
pub fn eps_near_limit_estimate(
    spec: &BlockSequenceSpec,
    grid: &GridSpec,
    eps: f64,
    k_blocks: usize,
    tol: f64,
) -> Result<LimitSetEstimate> {
    grid.validate()?;
    check_tail(k_blocks)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(SpeclabError::Validation(format!("eps must be positive, got {eps}")));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(SpeclabError::Validation(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let target = 1.0 / eps;
    let flagged = mask(spec, grid, k_blocks, |norms| {
        let near = norms.iter().filter(|&&v| (v - target).abs() <= tol).count();
        near as f64 >= CLUSTER_FRACTION * norms.len() as f64
    })?;
    Ok(LimitSetEstimate {
        grid: *grid,
        kind: LimitKind::EpsNearSpectrum { eps },
        flagged,
        k_blocks,
        tolerance: tol,
    })
}

/// Eigenvalues of the delay truncation `A_n`: `+-2 sqrt(2) |j|` for
/// `j = -n..n-1`, sorted.
pub fn delay_spectrum_oracle(n: usize) -> Result<Vec<ComplexPoint>> {
    if n < 1 {
        return Err(SpeclabError::Validation("truncation index n must be at least 1".into()));
    }
    let n = n as i64;
    let mut out: Vec<f64> = (-n..n)
        .flat_map(|j| {
            let r = 8f64.sqrt() * j.unsigned_abs() as f64;
            [-r, r]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

/// Lower radius bound of the sector where the delay operator has resolvent
/// norm one: `max{(1 + sqrt 5)/2, 1/|cos 2 phi|}`, or `None` when
/// `cos 2 phi >= 0`.
pub fn constant_norm_radius(phi: f64) -> Option<f64> {
    let c = (2.0 * phi).cos();
    if c >= 0.0 {
        return None;
    }
    Some(((1.0 + 5f64.sqrt()) / 2.0).max(1.0 / c.abs()))
}

/// `sup { ||(T_j - lambda)^-1|| : |j| <= J }` for the delay blocks, for
/// `lambda` inside the sector of constant resolvent norm.
pub fn constant_norm_region_check(lambda: ComplexPoint, j_max: usize) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(SpeclabError::Validation(format!(
            "spectral parameter {lambda} is not finite"
        )));
    }
    let (r, phi) = lambda.to_polar();
    match constant_norm_radius(phi) {
        None => {
            return Err(SpeclabError::OutOfRegion(format!(
                "cos(2 phi) = {:.6} is not negative at {lambda}",
                (2.0 * phi).cos()
            )))
        }
        Some(bound) if r < bound => {
            return Err(SpeclabError::OutOfRegion(format!(
                "|lambda| = {r:.6} is below the bound {bound:.6}"
            )))
        }
        Some(_) => {}
    }
    let spec = BlockSequenceSpec::delay();
    let j = j_max as i64;
    let mut sup = 0.0f64;
    for k in -j..=j {
        sup = sup.max(block_resolvent_norm(&spec, k, lambda)?);
    }
    Ok(sup)
}
