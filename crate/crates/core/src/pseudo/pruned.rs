//! Sublevel node sets without evaluating every node.
//!
//! `lambda -> sigma_min(M - lambda I)` is 1-Lipschitz, so a node with
//! `sigma_min = s` settles the membership of every node closer than
//! `|s - eps|`. Nodes are visited coarse-to-fine on nested sublattices and
//! only undecided nodes are evaluated.

use super::grid::GridSpec;
use crate::error::{Result, SpeclabError};
use crate::numlin::{ComplexPoint, ResolventEvaluator};

/// Shrinks exclusion discs slightly so that the relative error of the
/// iterative singular values can never flip a decision.
const SAFETY: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, PartialEq)]
enum State {
    Unknown,
    Inside,
    Outside,
}

/// Same node set as `sublevel_points(field_with(evaluator, grid), eps)`,
/// computed with Lipschitz pruning. Also returns how many nodes were
/// actually evaluated.
pub fn sublevel_points_pruned(
    evaluator: &ResolventEvaluator,
    grid: &GridSpec,
    eps: f64,
) -> Result<(Vec<ComplexPoint>, usize)> {
    grid.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(SpeclabError::Validation(format!("eps must be positive, got {eps}")));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut state = vec![State::Unknown; nx * ny];
    let mut evaluated = 0usize;
    let mut warm = Vec::new();
    let coarsest = (nx.max(ny) / 8).next_power_of_two().max(1);
    let mut stride = coarsest;
    loop {
        for j in (0..ny).step_by(stride) {
            for i in (0..nx).step_by(stride) {
                if state[j * nx + i] != State::Unknown {
                    continue;
                }
                let sigma = evaluator.smallest_singular_value(grid.node(i, j), &mut warm)?;
                evaluated += 1;
                let inside = sigma < eps;
                let mark = if inside { State::Inside } else { State::Outside };
                state[j * nx + i] = mark;
                let r = (sigma - eps).abs() * SAFETY;
                let ri = (r / dx).floor() as usize;
                let rj = (r / dy).floor() as usize;
                for jj in j.saturating_sub(rj)..=(j + rj).min(ny - 1) {
                    let ddy = (jj as f64 - j as f64) * dy;
                    for ii in i.saturating_sub(ri)..=(i + ri).min(nx - 1) {
                        let ddx = (ii as f64 - i as f64) * dx;
                        if ddx.hypot(ddy) < r {
                            state[jj * nx + ii] = mark;
                        }
                    }
                }
            }
        }
        if stride == 1 {
            break;
        }
        stride /= 2;
    }
    let points = grid
        .nodes()
        .zip(&state)
        .filter(|(_, s)| **s == State::Inside)
        .map(|(z, _)| z)
        .collect();
    Ok((points, evaluated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::ComplexMatrix;
    use crate::pseudo::{field_with, sublevel_points};

    #[test]
    fn agrees_with_full_field() {
        let m = ComplexMatrix::from_fn(12, 12, |i, j| {
            let d = i as f64 - j as f64;
            if i == j {
                ComplexPoint::new(0.3 * i as f64, -0.2 * i as f64)
            } else {
                ComplexPoint::new(0.4 / (1.0 + d * d), 0.1 * d.signum())
            }
        });
        let ev = ResolventEvaluator::new(&m).unwrap();
        let g = GridSpec::new(-2.0, 5.0, -4.0, 2.0, 71, 61).unwrap();
        let f = field_with(&ev, &g).unwrap();
        for eps in [1.0, 0.3, 0.05] {
            let full = sublevel_points(&f, eps).unwrap();
            let (pruned, evaluated) = sublevel_points_pruned(&ev, &g, eps).unwrap();
            assert_eq!(full, pruned, "eps = {eps}");
            assert!(evaluated < g.len());
        }
    }
}
