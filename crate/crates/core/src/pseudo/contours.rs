//! Marching squares on a resolvent-norm field.
//!
//! A node is "inside" a level when its value exceeds the threshold `1/eps`;
//! infinite values are inside every level. Crossing points are linear
//! interpolants along cell edges. When one endpoint is infinite the
//! interpolation runs in `1/value` space instead, where the infinite end
//! becomes zero. Ambiguous saddle cells are resolved by the cell-centre
//! average, and segments are chained through shared edges into polylines.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::field::PseudospectrumField;
use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;

/// Level set `{ ||(M - lambda)^-1|| = 1/eps }` as a list of polylines. Closed
/// loops repeat their first point at the end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub eps: f64,
    pub polylines: Vec<Vec<ComplexPoint>>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &ComplexPoint> {
        self.polylines.iter().flatten()
    }
}

/// Checks that levels are positive, finite and strictly decreasing.
pub fn validate_levels(eps_levels: &[f64]) -> Result<()> {
    if let Some(e) = eps_levels.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(SpeclabError::Validation(format!("eps level {e} must be positive")));
    }
    if eps_levels.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SpeclabError::Validation(
            "eps levels must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// One contour set per level, in the order given.
pub fn contours(field: &PseudospectrumField, eps_levels: &[f64]) -> Result<Vec<ContourSet>> {
    validate_levels(eps_levels)?;
    Ok(eps_levels
        .iter()
        .map(|&eps| ContourSet {
            eps,
            polylines: level_polylines(field, 1.0 / eps),
        })
        .collect())
}

/// Edge identifier: horizontal edges join `(i, j)`-`(i+1, j)`, vertical
/// edges join `(i, j)`-`(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn crossing(field: &PseudospectrumField, edge: Edge, threshold: f64) -> ComplexPoint {
    let g = field.grid();
    let ((ia, ja), (ib, jb)) = match edge {
        Edge::H(i, j) => ((i, j), (i + 1, j)),
        Edge::V(i, j) => ((i, j), (i, j + 1)),
    };
    let va = field.value(ia, ja);
    let vb = field.value(ib, jb);
    let s = if va.is_finite() && vb.is_finite() {
        (threshold - va) / (vb - va)
    } else {
        let sa = 1.0 / va;
        let sb = 1.0 / vb;
        (1.0 / threshold - sa) / (sb - sa)
    };
    let s = s.clamp(0.0, 1.0);
    let a = g.node(ia, ja);
    let b = g.node(ib, jb);
    a + (b - a) * s
}

fn level_polylines(field: &PseudospectrumField, threshold: f64) -> Vec<Vec<ComplexPoint>> {
    let g = field.grid();
    let inside = |i: usize, j: usize| field.value(i, j) > threshold;
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let bl = inside(i, j);
            let br = inside(i + 1, j);
            let tr = inside(i + 1, j + 1);
            let tl = inside(i, j + 1);
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let saddle = bl == tr && br == tl && bl != br;
            if saddle {
                let centre =
                    (field.value(i, j) + field.value(i + 1, j) + field.value(i + 1, j + 1) + field.value(i, j + 1))
                        / 4.0;
                // The corners that agree with the centre stay connected; the
                // other two are cut off individually.
                if (centre > threshold) == bl {
                    segments.push((bottom, right));
                    segments.push((top, left));
                } else {
                    segments.push((left, bottom));
                    segments.push((right, top));
                }
                continue;
            }
            let mut cut = Vec::with_capacity(2);
            if bl != br {
                cut.push(bottom);
            }
            if br != tr {
                cut.push(right);
            }
            if tr != tl {
                cut.push(top);
            }
            if tl != bl {
                cut.push(left);
            }
            if cut.len() == 2 {
                segments.push((cut[0], cut[1]));
            }
        }
    }
    chain(field, threshold, &segments)
}

fn chain(field: &PseudospectrumField, threshold: f64, segments: &[(Edge, Edge)]) -> Vec<Vec<ComplexPoint>> {
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut edges = vec![start_edge];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            edges.push(next);
            at = next;
            match incident[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        edges
    };

    // Open polylines start at edges used by a single segment (grid boundary).
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        let start = if incident[&a].len() == 1 {
            Some(a)
        } else if incident[&b].len() == 1 {
            Some(b)
        } else {
            None
        };
        if let Some(e) = start {
            let edges = walk(k, e, &mut used);
            out.push(edges.iter().map(|&e| crossing(field, e, threshold)).collect());
        }
    }
    // Whatever remains forms closed loops.
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let edges = walk(k, segments[k].0, &mut used);
        out.push(edges.iter().map(|&e| crossing(field, e, threshold)).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::ComplexMatrix;
    use crate::pseudo::{field, GridSpec};

    #[test]
    fn constant_field_has_no_contour() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 1.0, 5, 5).unwrap();
        let f = PseudospectrumField::from_values(g, vec![0.1; 25], 1).unwrap();
        let sets = contours(&f, &[1.0]).unwrap();
        assert!(sets[0].is_empty());
    }

    #[test]
    fn unit_circle_from_scalar_zero() {
        let g = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 81, 81).unwrap();
        let f = field(&ComplexMatrix::zeros(1, 1), &g).unwrap();
        let sets = contours(&f, &[1.0]).unwrap();
        assert_eq!(sets[0].polylines.len(), 1);
        let line = &sets[0].polylines[0];
        assert_eq!(line.first(), line.last());
        for z in line {
            assert!((z.norm() - 1.0).abs() <= 2.0 * g.cell());
        }
    }

    #[test]
    fn levels_must_decrease() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        let f = PseudospectrumField::from_values(g, vec![1.0; 9], 1).unwrap();
        assert!(contours(&f, &[0.5, 1.0]).is_err());
        assert!(contours(&f, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn saddle_with_infinite_centre_connects_inside_corners() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        // bl and tr inside (one of them infinite)
        let f = PseudospectrumField::from_values(g, vec![f64::INFINITY, 0.0, 0.0, 4.0], 1).unwrap();
        let sets = contours(&f, &[0.5]).unwrap();
        assert_eq!(sets[0].polylines.len(), 2);
    }
}
