use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::symbol::ToeplitzSymbol;
use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;

/// Smallest admissible number of curve samples.
pub const MIN_SAMPLES: usize = 64;
/// Default sampling density for classification.
pub const DEFAULT_SAMPLES: usize = 512;
/// Sampling density beyond which refinement gives up and reports the point
/// as lying on the curve.
const MAX_SAMPLES: usize = 1 << 20;

/// Closed polygon `f(exp(2 pi i t / m))`, `t = 0..m`. The closing segment
/// from the last sample back to the first is implied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolCurve {
    samples: Vec<ComplexPoint>,
    /// Present when the curve came from a symbol and can be resampled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symbol: Option<ToeplitzSymbol>,
}

/// Outcome of locating a point relative to the spectrum of a Toeplitz operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumClass {
    OnCurve,
    InteriorSpectrum(i64),
    Resolvent,
}

impl SpectrumClass {
    pub fn in_spectrum(&self) -> bool {
        !matches!(self, SpectrumClass::Resolvent)
    }
}

pub fn symbol_curve(sym: &ToeplitzSymbol, m: usize) -> Result<SymbolCurve> {
    if m < MIN_SAMPLES {
        return Err(SpeclabError::Validation(format!(
            "symbol curve needs at least {MIN_SAMPLES} samples, got {m}"
        )));
    }
    let samples = (0..m)
        .map(|t| sym.eval(Complex64::from_polar(1.0, 2.0 * PI * t as f64 / m as f64)))
        .collect();
    Ok(SymbolCurve {
        samples,
        symbol: Some(sym.clone()),
    })
}

impl SymbolCurve {
    /// Closed curve from explicit samples; it cannot be refined.
    pub fn from_samples(samples: Vec<ComplexPoint>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(SpeclabError::Validation(format!(
                "curve needs at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|z| !z.is_finite()) {
            return Err(SpeclabError::Validation("curve sample is not finite".into()));
        }
        Ok(Self { samples, symbol: None })
    }

    pub fn samples(&self) -> &[ComplexPoint] {
        &self.samples
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn symbol(&self) -> Option<&ToeplitzSymbol> {
        self.symbol.as_ref()
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples[1..].reverse();
        Self { samples, symbol: None }
    }

    /// Closed polyline with the first sample repeated at the end.
    pub fn closed_polyline(&self) -> Vec<ComplexPoint> {
        let mut p = self.samples.clone();
        p.push(self.samples[0]);
        p
    }

    pub fn segments(&self) -> impl Iterator<Item = (ComplexPoint, ComplexPoint)> + '_ {
        let m = self.samples.len();
        (0..m).map(move |t| (self.samples[t], self.samples[(t + 1) % m]))
    }

    /// `(re_min, re_max, im_min, im_max)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.samples.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), z| (a.min(z.re), b.max(z.re), c.min(z.im), d.max(z.im)),
        )
    }

    /// Distance from `z` to the polyline and the length of the nearest segment.
    pub fn distance_and_spacing(&self, z: ComplexPoint) -> (f64, f64) {
        self.segments()
            .map(|(a, b)| (segment_distance(z, a, b), (b - a).norm()))
            .fold(
                (f64::INFINITY, 0.0),
                |best, cur| if cur.0 < best.0 { cur } else { best },
            )
    }

    pub fn distance(&self, z: ComplexPoint) -> f64 {
        self.distance_and_spacing(z).0
    }

    /// Signed turn count of the polygon about `z`, without any tolerance
    /// check. Meaningless if `z` lies on the polygon.
    pub fn polygon_winding(&self, z: ComplexPoint) -> i64 {
        let total: f64 = self.segments().map(|(a, b)| ((b - z) / (a - z)).arg()).sum();
        (total / (2.0 * PI)).round() as i64
    }

    /// Winding number at the current sampling, or `OnCurve` if `z` is within
    /// twice the local sample spacing of the polygon.
    fn classify_at_resolution(&self, z: ComplexPoint) -> Result<i64> {
        let (distance, spacing) = self.distance_and_spacing(z);
        let tolerance = 2.0 * spacing;
        if distance <= tolerance {
            return Err(SpeclabError::OnCurve { distance, tolerance });
        }
        Ok(self.polygon_winding(z))
    }
}

/// Distance from `z` to the segment `[a, b]`.
pub fn segment_distance(z: ComplexPoint, a: ComplexPoint, b: ComplexPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

#[derive(PartialEq)]
enum Verdict {
    On(f64, f64),
    Winding(i64),
}

fn verdict(curve: &SymbolCurve, z: ComplexPoint) -> Result<Verdict> {
    match curve.classify_at_resolution(z) {
        Ok(w) => Ok(Verdict::Winding(w)),
        Err(SpeclabError::OnCurve { distance, tolerance }) => Ok(Verdict::On(distance, tolerance)),
        Err(e) => Err(e),
    }
}

fn same(a: &Verdict, b: &Verdict) -> bool {
    match (a, b) {
        (Verdict::On(..), Verdict::On(..)) => true,
        (Verdict::Winding(x), Verdict::Winding(y)) => x == y,
        _ => false,
    }
}

/// Winding number of `curve` about `z`.
///
/// Curves that carry their symbol are resampled at `2m, 4m, ...` until two
/// consecutive resolutions agree; explicit polygons are classified once.
/// A point within twice the local sample spacing of the curve yields
/// [`SpeclabError::OnCurve`].
pub fn winding_number(curve: &SymbolCurve, z: ComplexPoint) -> Result<i64> {
    if !z.is_finite() {
        return Err(SpeclabError::Validation(format!("point {z} is not finite")));
    }
    let mut current = verdict(curve, z)?;
    if let Some(sym) = curve.symbol() {
        let mut m = curve.m();
        loop {
            m *= 2;
            if m > MAX_SAMPLES {
                break;
            }
            let next = verdict(&symbol_curve(sym, m)?, z)?;
            let stable = same(&current, &next);
            current = next;
            if stable {
                break;
            }
        }
    }
    match current {
        Verdict::Winding(w) => Ok(w),
        Verdict::On(distance, tolerance) => Err(SpeclabError::OnCurve { distance, tolerance }),
    }
}

/// Locates `z` relative to `sigma(T) = f(circle) + {winding != 0}`.
pub fn spectrum_classify(sym: &ToeplitzSymbol, z: ComplexPoint) -> Result<SpectrumClass> {
    let curve = symbol_curve(sym, DEFAULT_SAMPLES)?;
    match winding_number(&curve, z) {
        Ok(0) => Ok(SpectrumClass::Resolvent),
        Ok(w) => Ok(SpectrumClass::InteriorSpectrum(w)),
        Err(SpeclabError::OnCurve { .. }) => Ok(SpectrumClass::OnCurve),
        Err(e) => Err(e),
    }
}
