use serde::Serialize;
use serde_json::{json, Value};
use speclab_core::blockops::{
    assemble, constant_norm_region_check, delay_spectrum_oracle, eps_near_limit_estimate, essential_limit_estimate,
    BlockSequenceSpec, Example1Params,
};
use speclab_core::fourier_pde::{
    assemble_operator, discrete_candidates, essential_curve_for_box, first_derivative_demo, PdeOperator, PotentialSpec,
    DISCRETE_SEPARATION, SHIPPED_BOX,
};
use speclab_core::numlin::{resolvent_norm, sort_points, ResolventEvaluator};
use speclab_core::pseudo::field_with;
use speclab_core::study::{
    classify_pollution, convergence_study, emit_portrait, emit_report, symbol_components, ConvergenceReport,
    OperatorFamily, OutputFormat, Reference, SpectralPortrait, Verdict,
};
use speclab_core::toeplitz::{
    apply_perturbation, finite_section, symbol_curve, PerturbationSpec, ToeplitzSymbol, DEFAULT_SAMPLES,
};
use speclab_core::{ComplexMatrix, ComplexPoint, GridSpec};

use crate::args::{BuiltinBlocks, BuiltinFamily, Command, Point, Settings};
use crate::error::{CliError, CliResult};

pub fn run(command: Command, s: Settings) -> CliResult<()> {
    if s.seed.is_some() && !matches!(command, Command::Study { .. }) {
        return Err(CliError::Usage(
            "--seed only applies to the synthetic study family".into(),
        ));
    }
    match command {
        Command::Toeplitz { unperturbed } => toeplitz(&s, unperturbed),
        Command::Blockdiag {
            builtin,
            d,
            k_blocks,
            threshold,
            tol,
            no_limits,
        } => blockdiag(&s, builtin, d, k_blocks, threshold, tol, !no_limits),
        Command::Delay { lambda, j_max } => delay(&s, lambda, j_max),
        Command::Pde { free } => pde(&s, free),
        Command::DerivDemo { lambda } => deriv_demo(&s, lambda),
        Command::Study { family } => study(&s, family),
    }
}

fn default_eps(s: &Settings, fallback: &[f64]) -> Vec<f64> {
    s.eps.clone().unwrap_or_else(|| fallback.to_vec())
}

/// Eigenvalues and field of `m` on `grid`, with contours at `eps`.
fn portrait(source: &str, n: usize, m: &ComplexMatrix, grid: &GridSpec, eps: &[f64]) -> CliResult<SpectralPortrait> {
    let evaluator = ResolventEvaluator::new(m)?;
    let mut eigs = evaluator.eigenvalues();
    sort_points(&mut eigs);
    let field = field_with(&evaluator, grid)?;
    Ok(SpectralPortrait::new(source, n, eigs, Some(&field), eps)?)
}

fn write_value<T: Serialize>(
    s: &Settings,
    value: &T,
    emit: impl FnOnce(&T, OutputFormat, &std::path::Path) -> speclab_core::Result<()>,
) -> CliResult<()> {
    match &s.out {
        Some(path) => {
            emit(value, s.format, path)?;
            eprintln!("wrote {} ({})", path.display(), s.format);
            Ok(())
        }
        None if s.format == OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(value).map_err(speclab_core::SpeclabError::from)?
            );
            Ok(())
        }
        None => Err(CliError::Usage(format!("{} output needs --out", s.format))),
    }
}

fn emit_p(s: &Settings, p: &SpectralPortrait) -> CliResult<()> {
    write_value(s, p, emit_portrait)
}

fn points_json(points: &[ComplexPoint]) -> Value {
    serde_json::to_value(points).unwrap_or(Value::Null)
}

/// Box around `(x0, x1, y0, y1)` widened by `margin` times its longer side,
/// with about `nodes` nodes along the longer side.
fn padded_grid(bounds: (f64, f64, f64, f64), margin: f64, nodes: usize) -> CliResult<GridSpec> {
    let (x0, x1, y0, y1) = bounds;
    let span = (x1 - x0).max(y1 - y0).max(1e-3);
    let m = margin * span;
    let (w, h) = (x1 - x0 + 2.0 * m, y1 - y0 + 2.0 * m);
    let long = w.max(h);
    let nx = ((nodes as f64 - 1.0) * w / long).round() as usize + 1;
    let ny = ((nodes as f64 - 1.0) * h / long).round() as usize + 1;
    Ok(GridSpec::new(x0 - m, x1 + m, y0 - m, y1 + m, nx.max(2), ny.max(2))?)
}

fn toeplitz_parts(s: &Settings, unperturbed: bool) -> (ToeplitzSymbol, PerturbationSpec) {
    let symbol = s.symbol.clone().unwrap_or_else(ToeplitzSymbol::fish);
    let perturbation = if unperturbed {
        PerturbationSpec::empty()
    } else {
        s.perturbation.clone().unwrap_or_else(|| {
            if s.symbol.is_some() {
                PerturbationSpec::empty()
            } else {
                PerturbationSpec::fish_default()
            }
        })
    };
    (symbol, perturbation)
}

fn toeplitz(s: &Settings, unperturbed: bool) -> CliResult<()> {
    let (symbol, perturbation) = toeplitz_parts(s, unperturbed);
    let n = s.n.unwrap_or(100);
    let curve = symbol_curve(&symbol, DEFAULT_SAMPLES)?;
    let grid = match s.grid {
        Some(g) => g,
        None => padded_grid(curve.bounding_box(), 0.1, 161)?,
    };
    let eps = default_eps(s, &[1.0, 0.1, 0.01]);
    let m = apply_perturbation(&finite_section(&symbol, n)?, &perturbation);
    let mut p = portrait("toeplitz", n, &m, &grid, &eps)?.with_reference_curve(curve.closed_polyline());
    p.meta.insert("reference_closed".into(), true.into());
    p.meta
        .insert("perturbation_entries".into(), perturbation.entries().len().into());
    eprintln!("toeplitz n = {n}: {} eigenvalues", p.eigenvalues.len());
    emit_p(s, &p)
}

#[allow(clippy::too_many_arguments)]
fn blockdiag(
    s: &Settings,
    builtin: BuiltinBlocks,
    d: Option<f64>,
    k_blocks: usize,
    threshold: f64,
    tol: f64,
    limits: bool,
) -> CliResult<()> {
    let spec = match (&s.blocks, builtin) {
        (Some(spec), _) => spec.clone(),
        (None, BuiltinBlocks::Example1) => BlockSequenceSpec::example1(Example1Params {
            d: d.unwrap_or(Example1Params::default().d),
            ..Default::default()
        }),
        (None, BuiltinBlocks::Delay) => BlockSequenceSpec::delay(),
    };
    let n = s.n.unwrap_or(20);
    let grid = match s.grid {
        Some(g) => g,
        None => {
            let c = d.unwrap_or(Example1Params::default().d);
            GridSpec::new(c - 1.0, c + 1.0, -1.0, 1.0, 41, 41)?
        }
    };
    let eps = default_eps(s, &[0.5]);
    let m = assemble(&spec, n)?;
    let mut p = portrait("blockdiag", n, &m, &grid, &eps)?;
    p.meta.insert("description".into(), spec.description().into());
    if limits {
        let ess = essential_limit_estimate(&spec, &grid, k_blocks, threshold)?;
        p.meta.insert(
            "essential_estimate".into(),
            json!({"k_blocks": k_blocks, "threshold": threshold, "flagged": points_json(&ess.flagged_points())}),
        );
        let mut near = Vec::new();
        for &e in &eps {
            let est = eps_near_limit_estimate(&spec, &grid, e, k_blocks, tol / e)?;
            near.push(json!({"eps": e, "tolerance": tol / e, "flagged": points_json(&est.flagged_points())}));
        }
        p.meta.insert("near_spectrum_estimates".into(), Value::Array(near));
        eprintln!("blockdiag n = {n}: essential estimate flags {} nodes", ess.count());
    }
    emit_p(s, &p)
}

fn delay(s: &Settings, lambda: Option<Point>, j_max: usize) -> CliResult<()> {
    let n = s.n.unwrap_or(10);
    let spec = BlockSequenceSpec::delay();
    let m = assemble(&spec, n)?;
    let reach = 2.0 * 2f64.sqrt() * n as f64 + 2.0;
    let grid = match s.grid {
        Some(g) => g,
        None => GridSpec::new(-reach, reach, -5.0, 5.0, 161, 41)?,
    };
    let eps = default_eps(s, &[1.0, 0.1]);
    let mut p = portrait("delay", n, &m, &grid, &eps)?;
    let oracle = delay_spectrum_oracle(n)?;
    let mut computed = p.eigenvalues.clone();
    computed.sort_by(|a, b| a.re.total_cmp(&b.re));
    let deviation = computed
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    p.meta.insert("oracle_max_deviation".into(), deviation.into());
    if let Some(Point(z)) = lambda {
        let norm = resolvent_norm(&m, z)?;
        let sup = constant_norm_region_check(z, j_max)?;
        p.meta.insert(
            "constant_norm_check".into(),
            json!({"lambda": [z.re, z.im], "truncation_resolvent_norm": norm, "block_norm_sup": sup, "j_max": j_max}),
        );
        eprintln!("delay n = {n}: ||(A_n - {z})^-1|| = {norm:.12}, block sup = {sup:.12}");
    }
    eprintln!("delay n = {n}: max deviation from the exact spectrum {deviation:.3e}");
    emit_p(s, &p)
}

fn pde_operator(s: &Settings, free: bool) -> PdeOperator {
    let mut op = s.operator.clone().unwrap_or_else(PdeOperator::shipped);
    if free {
        op.potential = PotentialSpec::Zero;
    }
    op
}

fn pde(s: &Settings, free: bool) -> CliResult<()> {
    let op = pde_operator(s, free);
    let n = s.n.unwrap_or(100);
    let grid = match s.grid {
        Some(g) => g,
        None => {
            let (x0, x1, y0, y1) = SHIPPED_BOX;
            GridSpec::new(x0, x1, y0, y1, 151, 141)?
        }
    };
    let eps = default_eps(s, &[1.0, 0.1]);
    let m = assemble_operator(&op, n)?;
    let bounds = (grid.x0, grid.x1, grid.y0, grid.y1);
    let curve = essential_curve_for_box(&op.symbol, bounds)?;
    let mut p = portrait("pde", n, &m, &grid, &eps)?;
    let discrete = discrete_candidates(&p.eigenvalues, &curve, bounds, DISCRETE_SEPARATION);
    p.meta.insert("discrete_candidates".into(), points_json(&discrete));
    p.meta.insert("reference_closed".into(), false.into());
    eprintln!("pde n = {n}: {} discrete candidates {:?}", discrete.len(), discrete);
    emit_p(s, &p.with_reference_curve(curve))
}

fn deriv_demo(s: &Settings, Point(lambda): Point) -> CliResult<()> {
    let n = s.n.unwrap_or(50);
    let grid = match s.grid {
        Some(g) => g,
        None => GridSpec::new(-2.0, 2.0, -2.0, 2.0, 81, 81)?,
    };
    let eps = default_eps(s, &[0.5]);
    let (field, report) = first_derivative_demo(n, &grid, eps[0])?;
    let mut eigs: Vec<ComplexPoint> = (-(report.cutoff as i64)..=report.cutoff as i64)
        .map(|k| ComplexPoint::new(0.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    sort_points(&mut eigs);
    let mut p = SpectralPortrait::new("deriv-demo", n, eigs, Some(&field), &eps)?;
    let distance = report.distance_to_flagged(lambda);
    p.meta.insert(
        "report".into(),
        serde_json::to_value(&report).map_err(speclab_core::SpeclabError::from)?,
    );
    p.meta.insert(
        "probe".into(),
        json!({"lambda": [lambda.re, lambda.im], "distance_to_flagged": distance}),
    );
    eprintln!(
        "deriv-demo n = {n}: strip |Re| < {:.3} holds: {}, dist({lambda}, flagged) = {distance:.4}",
        report.strip_bound, report.strip_holds
    );
    emit_p(s, &p)
}

fn builtin_family(s: &Settings, family: BuiltinFamily) -> OperatorFamily {
    match family {
        BuiltinFamily::Toeplitz => {
            let (symbol, perturbation) = toeplitz_parts(s, false);
            OperatorFamily::Toeplitz { symbol, perturbation }
        }
        BuiltinFamily::Delay => OperatorFamily::Delay,
        BuiltinFamily::Blocks => OperatorFamily::Blocks {
            spec: s
                .blocks
                .clone()
                .unwrap_or_else(|| BlockSequenceSpec::example1(Example1Params::default())),
        },
        BuiltinFamily::Pde => OperatorFamily::Pde {
            operator: pde_operator(s, false),
        },
        BuiltinFamily::Synthetic => OperatorFamily::Synthetic {
            seed: s.seed.unwrap_or(0),
        },
    }
}

fn study_defaults(family: &OperatorFamily) -> CliResult<(Vec<usize>, GridSpec)> {
    Ok(match family {
        OperatorFamily::Toeplitz { symbol, .. } => {
            let curve = symbol_curve(symbol, DEFAULT_SAMPLES)?;
            // wide enough to hold eigenvalues that settle well outside the curve
            (vec![50, 100, 200], padded_grid(curve.bounding_box(), 0.4, 121)?)
        }
        OperatorFamily::Delay => (vec![5, 10, 20], GridSpec::new(-10.0, 10.0, -10.0, 10.0, 41, 41)?),
        OperatorFamily::Blocks { .. } => (vec![10, 20, 40], GridSpec::new(1.0, 3.0, -1.0, 1.0, 41, 41)?),
        OperatorFamily::Pde { .. } => {
            let (x0, x1, y0, y1) = SHIPPED_BOX;
            (vec![50, 100], GridSpec::new(x0, x1, y0, y1, 76, 71)?)
        }
        OperatorFamily::Synthetic { .. } => (vec![10, 20, 40, 80], GridSpec::new(-2.0, 2.0, -1.0, 1.0, 41, 21)?),
    })
}

fn study(s: &Settings, family: Option<BuiltinFamily>) -> CliResult<()> {
    let family = match (family, &s.family) {
        (Some(b), _) => builtin_family(s, b),
        (None, Some(f)) => f.clone(),
        (None, None) => {
            return Err(CliError::Usage(
                "study needs --family or a `family` object in the config file".into(),
            ))
        }
    };
    if s.seed.is_some() && !matches!(family, OperatorFamily::Synthetic { .. }) {
        return Err(CliError::Usage(
            "--seed only applies to the synthetic study family".into(),
        ));
    }
    let (default_n, default_grid) = study_defaults(&family)?;
    let n_list = s.n_list.clone().unwrap_or(default_n);
    let grid = s.grid.unwrap_or(default_grid);
    let eps = s.eps.clone().unwrap_or_default();
    let mut report = convergence_study(&family, &n_list, &grid, &eps)?;
    let n_max = *n_list.last().expect("validated non-empty");
    classify_pollution(&mut report, &Reference::for_family(&family, n_max, &grid)?)?;
    summarize(&report);
    if let OperatorFamily::Toeplitz { symbol, .. } = &family {
        let regions = symbol_components(symbol)?.components().len();
        report.meta.insert("resolvent_components".into(), regions.into());
    }
    write_value(s, &report, emit_report)
}

fn summarize(report: &ConvergenceReport) {
    eprintln!(
        "study {}: {} genuine, {} polluting, {} undecided",
        report.family.name(),
        report.count(Verdict::Genuine),
        report.count(Verdict::Polluting),
        report.count(Verdict::Undecided)
    );
    for d in &report.hausdorff_spectra {
        match (d.n2, d.distance) {
            (Some(n2), Some(v)) => eprintln!("  d_H(sigma_{}, sigma_{n2}) = {v:.6e}", d.n),
            (Some(n2), None) => eprintln!("  d_H(sigma_{}, sigma_{n2}) undefined (empty set)", d.n),
            _ => {}
        }
    }
    for d in &report.reference_spectra {
        if let Some(v) = d.distance {
            eprintln!("  d_H(sigma_{}, reference) = {v:.6e}", d.n);
        }
    }
    for c in &report.component_counts {
        eprintln!(
            "  component {} (winding {}, near {:.3}): {} genuine clusters",
            c.component, c.winding, c.representative, c.genuine_clusters
        );
    }
}
