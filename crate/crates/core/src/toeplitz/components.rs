//! Connected components of the complement of a symbol curve on a grid.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::curve::{segment_distance, winding_number, SymbolCurve};
use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;
use crate::pseudo::GridSpec;

/// Barrier radius in units of the larger grid spacing. Anything above one
/// half makes the barrier watertight for 4-connected flooding.
const BARRIER_CELLS: f64 = 0.75;

/// One connected component of the curve complement, as seen on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub winding: i64,
    /// Node of the component farthest from the curve.
    pub representative: ComplexPoint,
    pub distance_to_curve: f64,
    pub node_count: usize,
    /// Touches the grid boundary, hence contains the outside of the curve
    /// when the grid covers the curve.
    pub unbounded: bool,
}

/// Grid labelling by component.
#[derive(Clone, Debug)]
pub struct ComponentMap {
    grid: GridSpec,
    labels: Vec<Option<usize>>,
    components: Vec<Component>,
}

impl ComponentMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Component containing the grid node nearest to `z`, or `None` near the
    /// curve or outside the grid.
    pub fn locate(&self, z: ComplexPoint) -> Option<&Component> {
        if !self.grid.contains(z) {
            return None;
        }
        let i = ((z.re - self.grid.x0) / self.grid.dx()).round() as usize;
        let j = ((z.im - self.grid.y0) / self.grid.dy()).round() as usize;
        let label = self.labels[j.min(self.grid.ny - 1) * self.grid.nx + i.min(self.grid.nx - 1)]?;
        Some(&self.components[label])
    }

    /// Representatives grouped by winding number.
    pub fn by_winding(&self) -> BTreeMap<i64, Vec<ComplexPoint>> {
        let mut out: BTreeMap<i64, Vec<ComplexPoint>> = BTreeMap::new();
        for c in &self.components {
            out.entry(c.winding).or_default().push(c.representative);
        }
        out
    }

    /// Bounded components with winding zero, largest first.
    pub fn bounded_resolvent_components(&self) -> Vec<&Component> {
        let mut v: Vec<&Component> = self
            .components
            .iter()
            .filter(|c| c.winding == 0 && !c.unbounded)
            .collect();
        v.sort_by(|a, b| b.node_count.cmp(&a.node_count).then(a.id.cmp(&b.id)));
        v
    }
}

/// Flood-fills grid nodes away from the curve into connected components and
/// attaches a winding number to each.
///
/// Nodes within `0.75` cells of the curve form the barrier. Every component
/// gets its farthest-from-curve node as representative, and the winding is
/// evaluated there with refinement. Windings are also checked at every other
/// node; any disagreement inside one component, or a component too thin to
/// hold a point clear of the curve, means the grid cannot separate the
/// components.
pub fn component_probe(curve: &SymbolCurve, grid: &GridSpec) -> Result<ComponentMap> {
    grid.validate()?;
    let (x0, x1, y0, y1) = curve.bounding_box();
    let margin = grid.cell();
    if x0 - margin < grid.x0 || x1 + margin > grid.x1 || y0 - margin < grid.y0 || y1 + margin > grid.y1 {
        return Err(SpeclabError::Validation(format!(
            "grid {grid} does not cover the curve box [{x0}, {x1}] x [{y0}, {y1}] with a margin"
        )));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx(), grid.dy());
    let radius = BARRIER_CELLS * dx.max(dy);

    let mut dist = vec![f64::INFINITY; nx * ny];
    for (a, b) in curve.segments() {
        let lo_i = ((a.re.min(b.re) - radius - grid.x0) / dx).floor().max(0.0) as usize;
        let hi_i = (((a.re.max(b.re) + radius - grid.x0) / dx).ceil() as usize).min(nx - 1);
        let lo_j = ((a.im.min(b.im) - radius - grid.y0) / dy).floor().max(0.0) as usize;
        let hi_j = (((a.im.max(b.im) + radius - grid.y0) / dy).ceil() as usize).min(ny - 1);
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                let d = segment_distance(grid.node(i, j), a, b);
                let slot = &mut dist[j * nx + i];
                if d < *slot {
                    *slot = d;
                }
            }
        }
    }
    let barrier: Vec<bool> = dist.iter().map(|&d| d <= radius).collect();

    let mut labels: Vec<Option<usize>> = vec![None; nx * ny];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..nx * ny {
        if barrier[start] || labels[start].is_some() {
            continue;
        }
        let id = members.len();
        let mut nodes = Vec::new();
        let mut queue = VecDeque::from([start]);
        labels[start] = Some(id);
        while let Some(k) = queue.pop_front() {
            nodes.push(k);
            let (i, j) = (k % nx, k / nx);
            let mut push = |kk: usize| {
                if !barrier[kk] && labels[kk].is_none() {
                    labels[kk] = Some(id);
                    queue.push_back(kk);
                }
            };
            if i > 0 {
                push(k - 1);
            }
            if i + 1 < nx {
                push(k + 1);
            }
            if j > 0 {
                push(k - nx);
            }
            if j + 1 < ny {
                push(k + nx);
            }
        }
        members.push(nodes);
    }

    let mut components = Vec::with_capacity(members.len());
    for (id, nodes) in members.iter().enumerate() {
        // Distances were only computed near the curve; fill in the rest for
        // this component before picking the farthest node.
        let (rep, rep_distance) = nodes
            .iter()
            .map(|&k| {
                let d = if dist[k].is_finite() {
                    dist[k]
                } else {
                    curve.distance(grid.node_at(k))
                };
                (k, d)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("components are non-empty");
        let representative = grid.node_at(rep);
        let winding = winding_number(curve, representative).map_err(|e| match e {
            SpeclabError::OnCurve { .. } => {
                SpeclabError::ResolutionTooCoarse(format!("component {id} has no node clear of the curve"))
            }
            other => other,
        })?;
        for &k in nodes {
            if curve.polygon_winding(grid.node_at(k)) != winding {
                return Err(SpeclabError::ResolutionTooCoarse(format!(
                    "winding numbers disagree inside component {id} near {}",
                    grid.node_at(k)
                )));
            }
        }
        let unbounded = nodes.iter().any(|&k| {
            let (i, j) = (k % nx, k / nx);
            i == 0 || j == 0 || i + 1 == nx || j + 1 == ny
        });
        components.push(Component {
            id,
            winding,
            representative,
            distance_to_curve: rep_distance,
            node_count: nodes.len(),
            unbounded,
        });
    }
    Ok(ComponentMap {
        grid: *grid,
        labels,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::{symbol_curve, ToeplitzSymbol};

    #[test]
    fn unit_circle_two_components() {
        let curve = symbol_curve(&ToeplitzSymbol::from_real(&[(1, 1.0)]).unwrap(), 256).unwrap();
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 81, 81).unwrap();
        let map = component_probe(&curve, &grid).unwrap();
        assert_eq!(map.components().len(), 2);
        let inside = map.locate(ComplexPoint::new(0.1, 0.0)).unwrap();
        assert_eq!(inside.winding, 1);
        assert!(!inside.unbounded);
        assert!(inside.representative.norm() < 0.05);
        let outside = map.locate(ComplexPoint::new(1.8, 1.8)).unwrap();
        assert_eq!(outside.winding, 0);
        assert!(outside.unbounded);
    }

    #[test]
    fn constant_symbol_single_component() {
        let curve = symbol_curve(&ToeplitzSymbol::from_real(&[(0, 0.3)]).unwrap(), 64).unwrap();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 21, 21).unwrap();
        let map = component_probe(&curve, &grid).unwrap();
        assert_eq!(map.components().len(), 1);
        assert_eq!(map.components()[0].winding, 0);
        assert!(map.components()[0].unbounded);
    }

    #[test]
    fn grid_must_cover_curve() {
        let curve = symbol_curve(&ToeplitzSymbol::from_real(&[(1, 1.0)]).unwrap(), 64).unwrap();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 21, 21).unwrap();
        assert!(component_probe(&curve, &grid).is_err());
    }
}
