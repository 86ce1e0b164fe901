use std::f64::consts::PI;

use num_complex::Complex64;
use speclab_core::fourier_pde::{
    assemble_truncation, discrete_candidates, essential_curve_for_box, potential_coeffs, truncated_symbol_spectrum,
    PotentialSpec, SymbolPolynomial, SHIPPED_BOX,
};
use speclab_core::numlin::{eigenvalues, ResolventEvaluator};
use speclab_core::pseudo::sublevel_points_pruned;
use speclab_core::study::hausdorff;
use speclab_core::GridSpec;

/// `(1/2n) int_{-R}^{R} f(x) dx` by the composite trapezoid rule; the
/// integrands below are negligible outside `[-R, R]`.
fn trapezoid(f: impl Fn(f64) -> Complex64, r: f64, n: usize, steps: usize) -> Complex64 {
    let h = 2.0 * r / steps as f64;
    let inner: Complex64 = (1..steps).map(|k| f(-r + k as f64 * h)).sum();
    (inner + (f(-r) + f(r)) * 0.5) * h / (2.0 * n as f64)
}

#[test]
fn zero_potential_gives_the_symbol_lattice() {
    let p = SymbolPolynomial::shipped();
    for n in [5, 20, 60] {
        let mut eigs = eigenvalues(&assemble_truncation(&p, &PotentialSpec::Zero, n).unwrap()).unwrap();
        let mut lattice = truncated_symbol_spectrum(&p, n, n).unwrap();
        let key = |a: &Complex64, b: &Complex64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        eigs.sort_by(key);
        lattice.sort_by(key);
        assert_eq!(eigs.len(), 2 * n + 1);
        for (a, b) in eigs.iter().zip(&lattice) {
            assert!((a - b).norm() < 1e-10, "n = {n}: {a} vs {b}");
        }
    }
}

#[test]
fn fourier_coefficients_match_fine_trapezoid() {
    let b = PotentialSpec::shipped();
    let n = 30;
    let coeffs = potential_coeffs(&b, n, 60).unwrap();
    for m in [-60i64, -17, -1, 0, 1, 5, 23, 60] {
        let omega = PI * m as f64 / n as f64;
        let oracle = trapezoid(|x| b.eval(x) * Complex64::from_polar(1.0, -omega * x), 9.0, n, 180_000);
        assert!(
            (coeffs[&m] - oracle).norm() < 1e-11,
            "m = {m}: {} vs {oracle}",
            coeffs[&m]
        );
    }
}

#[test]
fn parseval_partial_sums_increase_to_the_energy() {
    let b = PotentialSpec::shipped();
    let n = 20;
    let energy = trapezoid(|x| Complex64::new(b.eval(x).norm_sqr(), 0.0), 9.0, n, 180_000).re;
    let coeffs = potential_coeffs(&b, n, 400).unwrap();
    let mut previous = 0.0;
    for big_m in [0i64, 5, 20, 50, 100, 200, 400] {
        let partial: f64 = coeffs.range(-big_m..=big_m).map(|(_, c)| c.norm_sqr()).sum();
        assert!(partial >= previous);
        assert!(partial <= energy * (1.0 + 1e-10));
        previous = partial;
    }
    assert!((previous - energy).abs() < 1e-9 * energy, "{previous} vs {energy}");
}

#[test]
fn discrete_eigenvalues_settle_between_sizes() {
    let p = SymbolPolynomial::shipped();
    let b = PotentialSpec::shipped();
    let curve = essential_curve_for_box(&p, SHIPPED_BOX).unwrap();
    let find = |n: usize| {
        let eigs = eigenvalues(&assemble_truncation(&p, &b, n).unwrap()).unwrap();
        discrete_candidates(&eigs, &curve, SHIPPED_BOX, 0.5)
    };
    let (a, b) = (find(100), find(200));
    assert!(!a.is_empty() && !b.is_empty());
    assert!(hausdorff(&a, &b).unwrap() <= 0.02, "{a:?} vs {b:?}");
}

#[test]
fn pseudospectra_agree_between_sizes_at_eps_two() {
    let p = SymbolPolynomial::shipped();
    let b = PotentialSpec::shipped();
    let (x0, x1, y0, y1) = SHIPPED_BOX;
    let grid = GridSpec::new(x0, x1, y0, y1, 201, 201).unwrap();
    let sets: Vec<_> = [100, 200]
        .iter()
        .map(|&n| {
            let ev = ResolventEvaluator::new(&assemble_truncation(&p, &b, n).unwrap()).unwrap();
            sublevel_points_pruned(&ev, &grid, 2.0).unwrap().0
        })
        .collect();
    let d = hausdorff(&sets[0], &sets[1]).unwrap();
    assert!(d <= 2.0 * grid.dx().max(grid.dy()), "d_H = {d}");
}
