use std::collections::HashSet;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use speclab_core::numlin::{eigenvalues, ResolventEvaluator};
use speclab_core::pseudo::{field, field_direct, sublevel_points, sublevel_points_pruned};
use speclab_core::{ComplexMatrix, ComplexPoint, GridSpec};

fn key(z: ComplexPoint) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

fn key_set(points: &[ComplexPoint]) -> HashSet<(u64, u64)> {
    points.iter().copied().map(key).collect()
}

fn matrix_strategy(max_n: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), n * n).prop_map(move |v| {
            ComplexMatrix::new(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    })
}

fn grid() -> GridSpec {
    GridSpec::new(-3.0, 3.0, -3.0, 3.0, 25, 25).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sublevel_sets_are_nested(m in matrix_strategy(6), e1 in 0.01f64..1.0, ratio in 0.05f64..0.95) {
        let f = field(&m, &grid()).unwrap();
        let big = key_set(&sublevel_points(&f, e1).unwrap());
        let small = sublevel_points(&f, e1 * ratio).unwrap();
        prop_assert!(small.iter().all(|z| big.contains(&key(*z))));
    }

    #[test]
    fn eps_neighbourhood_of_spectrum_is_included(m in matrix_strategy(6), eps in 0.2f64..1.5) {
        let g = grid();
        let f = field(&m, &g).unwrap();
        let inside = key_set(&sublevel_points(&f, eps).unwrap());
        let eigs = eigenvalues(&m).unwrap();
        let h = g.cell_diagonal();
        for z in g.nodes() {
            let d = eigs.iter().map(|e| (z - e).norm()).fold(f64::INFINITY, f64::min);
            if d < eps - h {
                prop_assert!(inside.contains(&key(z)), "node {z} at distance {d}");
            }
        }
    }

    #[test]
    fn selfadjoint_sublevel_set_is_the_eps_neighbourhood(
        d in prop::collection::vec(-2.5f64..2.5, 1..8),
        eps in 0.1f64..1.2,
    ) {
        let g = grid();
        let f = field(&ComplexMatrix::from_real_diag(&d), &g).unwrap();
        let inside = key_set(&sublevel_points(&f, eps).unwrap());
        let cell = g.cell();
        for z in g.nodes() {
            let dist = d.iter().map(|&x| (z - x).norm()).fold(f64::INFINITY, f64::min);
            if inside.contains(&key(z)) != (dist < eps) {
                prop_assert!((dist - eps).abs() <= cell, "node {z} at distance {dist}");
            }
        }
    }

    #[test]
    fn field_is_invariant_under_permutation_similarity(m in matrix_strategy(8), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..m.rows()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let g = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 9, 9).unwrap();
        let a = field(&m, &g).unwrap();
        let b = field(&m.permuted(&perm).unwrap(), &g).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(x == y || (x - y).abs() < 1e-10 * x.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn pruned_sweep_matches_full_sweep(m in matrix_strategy(7), eps in 0.05f64..1.0) {
        let g = grid();
        let full = sublevel_points(&field(&m, &g).unwrap(), eps).unwrap();
        let (pruned, evaluated) = sublevel_points_pruned(&ResolventEvaluator::new(&m).unwrap(), &g, eps).unwrap();
        prop_assert_eq!(key_set(&full), key_set(&pruned));
        prop_assert!(evaluated <= g.len());
    }
}

#[test]
fn schur_field_matches_direct_svd_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = ComplexMatrix::from_fn(15, 15, |_, _| {
        use rand::Rng;
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let g = GridSpec::new(-3.0, 3.0, -3.0, 3.0, 17, 17).unwrap();
    let a = field(&m, &g).unwrap();
    let b = field_direct(&m, &g).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() < 1e-8 * x.max(1.0), "{x} vs {y}");
    }
}
