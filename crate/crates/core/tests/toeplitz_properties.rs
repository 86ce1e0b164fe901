use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speclab_core::numlin::eigenvalues;
use speclab_core::toeplitz::{finite_section, symbol_curve, winding_number, SymbolCurve, ToeplitzSymbol};
use speclab_core::{ComplexPoint, SpeclabError};

/// Winding number by summing principal-branch argument increments of
/// `f(e^{it}) - z` over `m` samples.
fn argument_oracle(sym: &ToeplitzSymbol, z: ComplexPoint, m: usize) -> i64 {
    let sample = |k: usize| sym.eval(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)) - z;
    let total: f64 = (0..m).map(|k| (sample(k + 1) / sample(k)).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

fn max_spacing(curve: &SymbolCurve) -> f64 {
    curve.segments().map(|(a, b)| (b - a).norm()).fold(0.0, f64::max)
}

#[test]
fn winding_agrees_with_argument_oracle_on_random_points() {
    let sym = ToeplitzSymbol::fish();
    let curve = symbol_curve(&sym, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    let mut seen = std::collections::BTreeSet::new();
    while checked < 100 {
        let z = ComplexPoint::new(rng.gen_range(-32.0..34.0), rng.gen_range(-27.0..27.0));
        match winding_number(&curve, z) {
            Ok(w) => {
                assert_eq!(w, argument_oracle(&sym, z, 5120), "at {z}");
                seen.insert(w);
                checked += 1;
            }
            Err(SpeclabError::OnCurve { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
    // the fish has regions of winding 0, 1, 2 and -1
    assert!(seen.len() >= 3, "{seen:?}");
}

#[test]
fn winding_is_stable_under_resampling() {
    let sym = ToeplitzSymbol::fish();
    let coarse = SymbolCurve::from_samples(symbol_curve(&sym, 256).unwrap().samples().to_vec()).unwrap();
    let fine = SymbolCurve::from_samples(symbol_curve(&sym, 1024).unwrap().samples().to_vec()).unwrap();
    let resolution = max_spacing(&coarse);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 200 {
        let z = ComplexPoint::new(rng.gen_range(-32.0..34.0), rng.gen_range(-27.0..27.0));
        if coarse.distance(z) <= 10.0 * resolution {
            continue;
        }
        assert_eq!(
            winding_number(&coarse, z).unwrap(),
            winding_number(&fine, z).unwrap(),
            "at {z}"
        );
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_maps_curve_and_fixes_winding(
        r in 0.2f64..5.0,
        theta in 0.0f64..(2.0 * PI),
        re in -30.0f64..32.0,
        im in -25.0f64..25.0,
    ) {
        let c = Complex64::from_polar(r, theta);
        let sym = ToeplitzSymbol::fish();
        let scaled = sym.scaled(c).unwrap();
        let a = symbol_curve(&sym, 256).unwrap();
        let b = symbol_curve(&scaled, 256).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x * c - y).norm() <= 1e-12 * (x * c).norm().max(1.0));
        }
        let z = ComplexPoint::new(re, im);
        match (winding_number(&a, z), winding_number(&b, c * z)) {
            (Ok(w1), Ok(w2)) => prop_assert_eq!(w1, w2),
            (Err(SpeclabError::OnCurve { .. }), _) | (_, Err(SpeclabError::OnCurve { .. })) => {}
            (x, y) => prop_assert!(false, "{:?} {:?}", x, y),
        }
    }
}

/// Eigenvalues of the larger section that sit in a winding-zero region far
/// from the curve must already be present in the smaller one.
#[test]
fn sections_do_not_pollute_winding_zero_regions() {
    for sym in [
        ToeplitzSymbol::fish(),
        ToeplitzSymbol::from_real(&[(-1, 1.0), (1, 0.25), (2, 0.5)]).unwrap(),
    ] {
        let curve = symbol_curve(&sym, 2048).unwrap();
        let e100 = eigenvalues(&finite_section(&sym, 100).unwrap()).unwrap();
        let e200 = eigenvalues(&finite_section(&sym, 200).unwrap()).unwrap();
        for z in e200 {
            if curve.distance(z) <= 0.3 || winding_number(&curve, z).unwrap() != 0 {
                continue;
            }
            let matched = e100.iter().any(|w| (w - z).norm() <= 0.15);
            assert!(matched, "unmatched eigenvalue {z} in a winding-zero region");
        }
    }
}
