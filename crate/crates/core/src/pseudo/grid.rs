use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;

/// Uniform lattice of `nx * ny` nodes on `[x0, x1] x [y0, y1]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = SpeclabError;

    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::new(r.x0, r.x1, r.y0, r.y1, r.nx, r.ny)
    }
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self { x0, x1, y0, y1, nx, ny };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[-r, r]^2` centred at `c` with `nodes` nodes per side.
    pub fn centered(c: ComplexPoint, r: f64, nodes: usize) -> Result<Self> {
        Self::new(c.re - r, c.re + r, c.im - r, c.im + r, nodes, nodes)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite());
        if !finite || self.x0 >= self.x1 || self.y0 >= self.y1 {
            return Err(SpeclabError::Validation(format!(
                "degenerate grid rectangle [{}, {}] x [{}, {}]",
                self.x0, self.x1, self.y0, self.y1
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(SpeclabError::Validation(format!(
                "grid needs at least 2 nodes per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    /// Side length used when tolerances are quoted "in grid cells".
    pub fn cell(&self) -> f64 {
        self.dx().max(self.dy())
    }

    /// Length of a cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x1
        } else {
            self.x0 + (self.x1 - self.x0) * (i as f64) / (self.nx - 1) as f64
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y1
        } else {
            self.y0 + (self.y1 - self.y0) * (j as f64) / (self.ny - 1) as f64
        }
    }

    /// Node in column `i`, row `j`.
    pub fn node(&self, i: usize, j: usize) -> ComplexPoint {
        ComplexPoint::new(self.x(i), self.y(j))
    }

    /// Node at a row-major flat index.
    pub fn node_at(&self, idx: usize) -> ComplexPoint {
        self.node(idx % self.nx, idx / self.nx)
    }

    pub fn nodes(&self) -> impl Iterator<Item = ComplexPoint> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.node(i, j)))
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    /// Length of the rectangle's diagonal.
    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.x0, self.x1, self.y0, self.y1, self.nx, self.ny
        )
    }
}

/// Parses `x0,x1,y0,y1,nx,ny`.
impl FromStr for GridSpec {
    type Err = SpeclabError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(SpeclabError::Validation(format!(
                "grid must be x0,x1,y0,y1,nx,ny, got {s:?}"
            )));
        }
        let real = |k: usize| -> Result<f64> {
            parts[k]
                .parse()
                .map_err(|_| SpeclabError::Validation(format!("bad grid bound {:?}", parts[k])))
        };
        let count = |k: usize| -> Result<usize> {
            parts[k]
                .parse()
                .map_err(|_| SpeclabError::Validation(format!("bad grid node count {:?}", parts[k])))
        };
        Self::new(real(0)?, real(1)?, real(2)?, real(3)?, count(4)?, count(5)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = GridSpec::new(-5.0, 10.0, -7.0, 7.0, 201, 201).unwrap();
        assert_eq!(g.x(200), 10.0);
        assert_eq!(g.y(0), -7.0);
        assert!((g.dx() - 0.075).abs() < 1e-15);
        assert!((g.cell() - 0.075).abs() < 1e-15);
    }

    #[test]
    fn parse_and_reject() {
        let g: GridSpec = "1,3,-1,1,41,41".parse().unwrap();
        assert_eq!(g.node(20, 20), ComplexPoint::new(2.0, 0.0));
        assert!("1,1,0,1,3,3".parse::<GridSpec>().is_err());
        assert!("0,1,0,1,1,3".parse::<GridSpec>().is_err());
        assert!("0,1,0,1,3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"x0":0,"x1":0,"y0":0,"y1":1,"nx":3,"ny":3}"#;
        assert!(serde_json::from_str::<GridSpec>(bad).is_err());
        let good = GridSpec::new(0.0, 1.0, 0.0, 2.0, 3, 4).unwrap();
        let back: GridSpec = serde_json::from_str(&serde_json::to_string(&good).unwrap()).unwrap();
        assert_eq!(back, good);
    }
}
