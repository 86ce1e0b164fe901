use rayon::prelude::*;

use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;

/// `sup_{a in A} dist(a, B)`.
pub fn directed_distance(a: &[ComplexPoint], b: &[ComplexPoint]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(SpeclabError::EmptySet);
    }
    Ok(a.par_iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max))
}

/// Hausdorff distance between two non-empty finite point sets.
pub fn hausdorff(a: &[ComplexPoint], b: &[ComplexPoint]) -> Result<f64> {
    Ok(directed_distance(a, b)?.max(directed_distance(b, a)?))
}
