use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::OperatorFamily;
use super::hausdorff::hausdorff;
use crate::error::{Result, SpeclabError};
use crate::fourier_pde::{
    assemble_truncation_with_cutoff, discrete_candidates, essential_curve_for_box, polyline_distance, PdeOperator,
    DISCRETE_SEPARATION,
};
use crate::numlin::{eigenvalues, singular_values, sort_points, ComplexMatrix, ComplexPoint, ResolventEvaluator};
use crate::pseudo::{sublevel_points_pruned, validate_levels, GridSpec};
use crate::toeplitz::{
    component_probe, spectrum_classify, symbol_curve, ComponentMap, PerturbationSpec, SpectrumClass, SymbolCurve,
    ToeplitzSymbol, DEFAULT_SAMPLES,
};

/// Matching radius for clusters, as a fraction of the diameter of `K`.
pub const CLUSTER_RADIUS_FRACTION: f64 = 0.05;
/// Relative slack allowed when checking that cluster drift shrinks.
const DRIFT_SLACK: f64 = 1e-9;
/// A point in a winding-zero region is accepted as an eigenvalue of the
/// infinite operator when the tall section at that point has
/// `sigma_min <= EIGEN_TOL * sum |a_k|`.
const EIGEN_TOL: f64 = 1e-3;
/// Grid nodes per unit of curve-box diameter for the component probe.
const PROBE_NODES: usize = 401;

/// Node set of the eps-sublevel set of one truncation, clipped to `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublevelSet {
    pub eps: f64,
    pub points: Vec<ComplexPoint>,
}

/// Data gathered for one truncation size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelData {
    pub n: usize,
    pub matrix_dim: usize,
    pub eigenvalues_in_k: Vec<ComplexPoint>,
    pub sublevel: Vec<SublevelSet>,
    /// Nodes whose singular value was actually computed, per eps.
    pub evaluated_nodes: Vec<usize>,
}

/// `d_H` between two truncation sizes, or to the reference (`n2 = None`).
/// `None` distances mean one of the sets was empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    pub distance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Genuine,
    Polluting,
    Undecided,
}

/// Verdict for one eigenvalue of the largest truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PollutionFlag {
    pub point: ComplexPoint,
    pub verdict: Verdict,
    pub evidence: String,
    /// Matched eigenvalues from the smallest to the largest `n`.
    pub trajectory: Vec<ComplexPoint>,
}

/// Genuine clusters counted per resolvent component of a Toeplitz symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub component: usize,
    pub winding: i64,
    pub unbounded: bool,
    pub representative: ComplexPoint,
    pub genuine_clusters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: OperatorFamily,
    pub region: GridSpec,
    pub eps_levels: Vec<f64>,
    pub per_n: Vec<LevelData>,
    pub hausdorff_spectra: Vec<PairDistance>,
    pub hausdorff_pseudo: Vec<PairDistance>,
    pub reference_spectra: Vec<PairDistance>,
    pub pollution_flags: Vec<PollutionFlag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub component_counts: Vec<ComponentCount>,
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl ConvergenceReport {
    pub fn count(&self, verdict: Verdict) -> usize {
        self.pollution_flags.iter().filter(|f| f.verdict == verdict).count()
    }
}

fn maybe_hausdorff(a: &[ComplexPoint], b: &[ComplexPoint]) -> Result<Option<f64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(None);
    }
    hausdorff(a, b).map(Some)
}

/// Runs every truncation in `n_list`, collects eigenvalues and sublevel
/// node sets inside `k`, and measures Hausdorff distances between
/// consecutive sizes and to the family's reference.
pub fn convergence_study(
    family: &OperatorFamily,
    n_list: &[usize],
    k: &GridSpec,
    eps_levels: &[f64],
) -> Result<ConvergenceReport> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 1 {
        return Err(SpeclabError::Validation(
            "n list must hold at least two strictly increasing positive sizes".into(),
        ));
    }
    k.validate()?;
    if !eps_levels.is_empty() {
        validate_levels(eps_levels)?;
    }
    let per_n: Vec<LevelData> = n_list
        .iter()
        .map(|&n| {
            let with_context = |e: SpeclabError| match e {
                SpeclabError::Validation(msg) => {
                    SpeclabError::Validation(format!("{} family at n = {n}: {msg}", family.name()))
                }
                other => other,
            };
            let m = family.assemble(n).map_err(with_context)?;
            level_data(&m, n, k, eps_levels)
        })
        .collect::<Result<_>>()?;

    let mut hausdorff_spectra = Vec::new();
    let mut hausdorff_pseudo = Vec::new();
    for w in per_n.windows(2) {
        hausdorff_spectra.push(PairDistance {
            eps: None,
            n: w[0].n,
            n2: Some(w[1].n),
            distance: maybe_hausdorff(&w[0].eigenvalues_in_k, &w[1].eigenvalues_in_k)?,
        });
        for (a, b) in w[0].sublevel.iter().zip(&w[1].sublevel) {
            hausdorff_pseudo.push(PairDistance {
                eps: Some(a.eps),
                n: w[0].n,
                n2: Some(w[1].n),
                distance: maybe_hausdorff(&a.points, &b.points)?,
            });
        }
    }
    let mut reference_spectra = Vec::new();
    for level in &per_n {
        if let Some(reference) = family.reference_points(level.n, k)? {
            reference_spectra.push(PairDistance {
                eps: None,
                n: level.n,
                n2: None,
                distance: maybe_hausdorff(&level.eigenvalues_in_k, &reference)?,
            });
        }
    }
    let mut meta = BTreeMap::new();
    meta.insert("family".into(), family.name().into());
    meta.insert("cell".into(), k.cell().into());
    meta.insert("cluster_radius".into(), (CLUSTER_RADIUS_FRACTION * k.diameter()).into());
    Ok(ConvergenceReport {
        family: family.clone(),
        region: *k,
        eps_levels: eps_levels.to_vec(),
        per_n,
        hausdorff_spectra,
        hausdorff_pseudo,
        reference_spectra,
        pollution_flags: Vec::new(),
        component_counts: Vec::new(),
        meta,
    })
}

fn level_data(m: &ComplexMatrix, n: usize, k: &GridSpec, eps_levels: &[f64]) -> Result<LevelData> {
    let evaluator = ResolventEvaluator::new(m)?;
    let mut eigs: Vec<ComplexPoint> = evaluator.eigenvalues().into_iter().filter(|&z| k.contains(z)).collect();
    sort_points(&mut eigs);
    let mut sublevel = Vec::with_capacity(eps_levels.len());
    let mut evaluated_nodes = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        let (points, count) = sublevel_points_pruned(&evaluator, k, eps)?;
        sublevel.push(SublevelSet { eps, points });
        evaluated_nodes.push(count);
    }
    Ok(LevelData {
        n,
        matrix_dim: m.rows(),
        eigenvalues_in_k: eigs,
        sublevel,
        evaluated_nodes,
    })
}

/// What the stable clusters are compared against.
#[derive(Clone, Debug)]
pub enum Reference {
    /// Known spectrum as points; a cluster within `radius` is genuine.
    Points { points: Vec<ComplexPoint>, radius: f64 },
    /// Banded Toeplitz operator plus finite perturbation: the curve and
    /// nonzero-winding regions are spectrum; in winding-zero regions a point
    /// is spectrum when a tall section of size `section` is nearly
    /// rank-deficient there.
    Toeplitz {
        symbol: ToeplitzSymbol,
        perturbation: PerturbationSpec,
        section: usize,
    },
    /// Essential curve plus isolated points.
    CurvePlusPoints {
        curve: Vec<ComplexPoint>,
        points: Vec<ComplexPoint>,
        radius: f64,
    },
}

impl Reference {
    /// Reference built from the family's own description of its limit
    /// operator. Blocks families use the union of block eigenvalues over the
    /// largest window; PDE families use the essential curve and the discrete
    /// candidates of a discretization with twice the modes.
    pub fn for_family(family: &OperatorFamily, n_max: usize, k: &GridSpec) -> Result<Self> {
        let radius = CLUSTER_RADIUS_FRACTION * k.diameter();
        Ok(match family {
            OperatorFamily::Toeplitz { symbol, perturbation } => Reference::Toeplitz {
                symbol: symbol.clone(),
                perturbation: perturbation.clone(),
                section: n_max,
            },
            OperatorFamily::Pde { operator } => pde_reference(operator, n_max, k, radius)?,
            OperatorFamily::Blocks { spec } => {
                let mut points = Vec::new();
                for idx in spec.window(n_max) {
                    points.extend(eigenvalues(&spec.block(idx)?)?);
                }
                Reference::Points { points, radius }
            }
            OperatorFamily::Delay | OperatorFamily::Synthetic { .. } => Reference::Points {
                points: family.reference_points(n_max, k)?.unwrap_or_default(),
                radius,
            },
        })
    }
}

fn pde_reference(op: &PdeOperator, n_max: usize, k: &GridSpec, radius: f64) -> Result<Reference> {
    let bounds = (k.x0, k.x1, k.y0, k.y1);
    let curve = essential_curve_for_box(&op.symbol, bounds)?;
    let fine = assemble_truncation_with_cutoff(&op.symbol, &op.potential, n_max, 2 * n_max)?;
    let points = discrete_candidates(&eigenvalues(&fine)?, &curve, bounds, DISCRETE_SEPARATION);
    Ok(Reference::CurvePlusPoints { curve, points, radius })
}

/// Greedy nearest-first matching of `from` into `to` within `radius`.
fn match_levels(from: &[ComplexPoint], to: &[ComplexPoint], radius: f64) -> Vec<Option<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in from.iter().enumerate() {
        for (j, b) in to.iter().enumerate() {
            let d = (a - b).norm();
            if d <= radius {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut out = vec![None; from.len()];
    let mut taken = vec![false; to.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !taken[j] {
            out[i] = Some(j);
            taken[j] = true;
        }
    }
    out
}

/// Tall section `(n + band) x n` of `T(f) + S` minus `lambda`.
fn tall_section(
    symbol: &ToeplitzSymbol,
    perturbation: &PerturbationSpec,
    n: usize,
    lambda: ComplexPoint,
) -> ComplexMatrix {
    let band = symbol.coeffs().keys().next_back().copied().unwrap_or(0).max(0) as usize;
    let rows = n + band;
    let mut m = ComplexMatrix::from_fn(rows, n, |i, j| symbol.coeff(i as i64 - j as i64));
    for (&(i, j), &v) in perturbation.entries() {
        if i < rows && j < n {
            m[(i, j)] += v;
        }
    }
    for d in 0..n {
        m[(d, d)] -= lambda;
    }
    m
}

fn judge(reference: &Reference, z: ComplexPoint) -> Result<(bool, String)> {
    match reference {
        Reference::Points { points, radius } => {
            let d = points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            Ok((
                d <= *radius,
                format!("distance {d:.3e} to reference points (radius {radius:.3e})"),
            ))
        }
        Reference::CurvePlusPoints { curve, points, radius } => {
            let dc = polyline_distance(z, curve);
            let dp = points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            Ok((
                dc.min(dp) <= *radius,
                format!("distance {dc:.3e} to essential curve, {dp:.3e} to isolated points (radius {radius:.3e})"),
            ))
        }
        Reference::Toeplitz {
            symbol,
            perturbation,
            section,
        } => match spectrum_classify(symbol, z)? {
            SpectrumClass::OnCurve => Ok((true, "on the symbol curve".into())),
            SpectrumClass::InteriorSpectrum(w) => Ok((true, format!("winding number {w}"))),
            SpectrumClass::Resolvent => {
                let sv = singular_values(&tall_section(symbol, perturbation, *section, z))?;
                let smin = sv.last().copied().unwrap_or(0.0);
                let scale: f64 = symbol.coeffs().values().map(|a| a.norm()).sum();
                let tol = EIGEN_TOL * scale;
                Ok((
                    smin <= tol,
                    format!("winding 0, tall-section sigma_min {smin:.3e} (threshold {tol:.3e})"),
                ))
            }
        },
    }
}

/// Tracks each eigenvalue of the largest truncation back through the
/// smaller ones and judges the stable tracks against `reference`.
///
/// Consecutive levels are matched nearest-first within
/// `0.05 * diam(K)`. A track matched at every level whose step lengths do
/// not grow is stable and gets `Genuine` or `Polluting`; anything else is
/// `Undecided`. For Toeplitz references, genuine clusters are also counted
/// per winding-zero component of the symbol curve complement.
pub fn classify_pollution(report: &mut ConvergenceReport, reference: &Reference) -> Result<()> {
    if report.per_n.len() < 2 {
        return Err(SpeclabError::Validation(
            "pollution classification needs two truncation sizes".into(),
        ));
    }
    let radius = CLUSTER_RADIUS_FRACTION * report.region.diameter();
    let levels: Vec<&[ComplexPoint]> = report.per_n.iter().map(|l| l.eigenvalues_in_k.as_slice()).collect();
    let last = levels.len() - 1;
    // trajectories[t][l] is the eigenvalue index at level l of track t
    let mut tracks: Vec<Vec<Option<usize>>> = (0..levels[last].len())
        .map(|t| {
            let mut v = vec![None; levels.len()];
            v[last] = Some(t);
            v
        })
        .collect();
    for l in (0..last).rev() {
        let alive: Vec<usize> = (0..tracks.len()).filter(|&t| tracks[t][l + 1].is_some()).collect();
        let from: Vec<ComplexPoint> = alive
            .iter()
            .map(|&t| levels[l + 1][tracks[t][l + 1].unwrap()])
            .collect();
        for (slot, target) in alive.iter().zip(match_levels(&from, levels[l], radius)) {
            tracks[*slot][l] = target;
        }
    }
    let flags: Vec<PollutionFlag> = tracks
        .par_iter()
        .map(|track| {
            let trajectory: Vec<ComplexPoint> = track
                .iter()
                .enumerate()
                .filter_map(|(l, idx)| idx.map(|i| levels[l][i]))
                .collect();
            let point = *trajectory.last().expect("track ends at the last level");
            if trajectory.len() < levels.len() {
                return Ok(PollutionFlag {
                    point,
                    verdict: Verdict::Undecided,
                    evidence: format!("matched at {} of {} levels", trajectory.len(), levels.len()),
                    trajectory,
                });
            }
            let steps: Vec<f64> = trajectory.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
            let shrinking = steps
                .windows(2)
                .all(|s| s[1] <= s[0] * (1.0 + DRIFT_SLACK) + DRIFT_SLACK * radius);
            if !shrinking {
                return Ok(PollutionFlag {
                    point,
                    verdict: Verdict::Undecided,
                    evidence: format!("drift does not shrink: {steps:?}"),
                    trajectory,
                });
            }
            let (genuine, evidence) = judge(reference, point)?;
            Ok(PollutionFlag {
                point,
                verdict: if genuine { Verdict::Genuine } else { Verdict::Polluting },
                evidence,
                trajectory,
            })
        })
        .collect::<Result<_>>()?;
    report.pollution_flags = flags;
    report.component_counts = match reference {
        Reference::Toeplitz { symbol, .. } => component_counts(symbol, &report.pollution_flags)?,
        _ => Vec::new(),
    };
    Ok(())
}

/// Grid covering the symbol curve with a margin, fine enough for the probe.
pub fn probe_grid(curve: &SymbolCurve) -> Result<GridSpec> {
    let (x0, x1, y0, y1) = curve.bounding_box();
    let span = (x1 - x0).max(y1 - y0).max(1.0);
    let margin = 0.1 * span;
    let (w, h) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let nx = ((PROBE_NODES as f64) * w / span).ceil() as usize + 1;
    let ny = ((PROBE_NODES as f64) * h / span).ceil() as usize + 1;
    GridSpec::new(x0 - margin, x1 + margin, y0 - margin, y1 + margin, nx, ny)
}

/// Component map of the fish-like symbol on [`probe_grid`].
pub fn symbol_components(symbol: &ToeplitzSymbol) -> Result<ComponentMap> {
    let curve = symbol_curve(symbol, DEFAULT_SAMPLES)?;
    component_probe(&curve, &probe_grid(&curve)?)
}

fn component_counts(symbol: &ToeplitzSymbol, flags: &[PollutionFlag]) -> Result<Vec<ComponentCount>> {
    let map = symbol_components(symbol)?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    // the probe grid covers the curve, so anything outside it is in the unbounded component
    let outside = map.components().iter().find(|c| c.unbounded && c.winding == 0);
    for f in flags.iter().filter(|f| f.verdict == Verdict::Genuine) {
        let located = if map.grid().contains(f.point) {
            map.locate(f.point)
        } else {
            outside
        };
        if let Some(c) = located {
            if c.winding == 0 {
                *counts.entry(c.id).or_default() += 1;
            }
        }
    }
    Ok(map
        .components()
        .iter()
        .filter(|c| c.winding == 0)
        .map(|c| ComponentCount {
            component: c.id,
            winding: c.winding,
            unbounded: c.unbounded,
            representative: c.representative,
            genuine_clusters: counts.get(&c.id).copied().unwrap_or(0),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn greedy_matching_prefers_nearest() {
        let from = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let to = [Complex64::new(0.9, 0.0), Complex64::new(0.05, 0.0)];
        assert_eq!(match_levels(&from, &to, 0.5), vec![Some(1), Some(0)]);
        assert_eq!(match_levels(&from, &to[..1], 0.5), vec![None, Some(0)]);
    }

    #[test]
    fn delay_family_is_exact_and_clean() {
        let k = GridSpec::new(-10.0, 10.0, -10.0, 10.0, 21, 21).unwrap();
        let mut r = convergence_study(&OperatorFamily::Delay, &[2, 4], &k, &[1.0]).unwrap();
        for d in &r.reference_spectra {
            assert!(d.distance.unwrap() <= 1e-8);
        }
        let reference = Reference::for_family(&OperatorFamily::Delay, 4, &k).unwrap();
        classify_pollution(&mut r, &reference).unwrap();
        assert_eq!(r.count(Verdict::Polluting), 0);
        assert!(r.count(Verdict::Genuine) > 0);
    }

    #[test]
    fn synthetic_spurious_point_is_polluting() {
        let fam = OperatorFamily::Synthetic { seed: 3 };
        let k = GridSpec::new(-2.0, 2.0, -1.0, 1.0, 9, 5).unwrap();
        let mut r = convergence_study(&fam, &[10, 20, 40], &k, &[]).unwrap();
        classify_pollution(&mut r, &Reference::for_family(&fam, 40, &k).unwrap()).unwrap();
        let polluting: Vec<_> = r
            .pollution_flags
            .iter()
            .filter(|f| f.verdict == Verdict::Polluting)
            .collect();
        assert_eq!(polluting.len(), 1);
        assert!(polluting[0].point.norm() < 0.05);
        assert_eq!(r.count(Verdict::Genuine), 2);
    }

    #[test]
    fn bad_n_lists() {
        let k = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 3, 3).unwrap();
        assert!(convergence_study(&OperatorFamily::Delay, &[4], &k, &[]).is_err());
        assert!(convergence_study(&OperatorFamily::Delay, &[4, 4], &k, &[]).is_err());
    }

    #[test]
    fn tall_section_detects_perturbation_eigenvalue() {
        // T(z) + 5 e_0 e_0^T: the shift has winding 1 inside the unit disc,
        // the perturbation adds no eigenvalue outside it
        let sym = ToeplitzSymbol::from_real(&[(1, 1.0)]).unwrap();
        let p = PerturbationSpec::leading_diagonal(1, Complex64::new(5.0, 0.0));
        let s = singular_values(&tall_section(&sym, &p, 40, Complex64::new(3.0, 0.0))).unwrap();
        assert!(*s.last().unwrap() > 0.5);
    }
}
