use proptest::prelude::*;

use rte_convex::boundary::{add_noise, boundary_nodes, BoundaryDataSet, BoundaryTrace};
use rte_convex::config::RunConfig;
use rte_convex::field::{RadianceField, SpatialField};
use rte_convex::geometry::{alpha_quadrature, carleman_weight, direction_vector, Axis, Geometry, GridSet};
use rte_convex::inverse::{apply_constraints, extract_free, s_norm_sq, FreeLayout, PairField};
use rte_convex::io::fmt_f64;
use rte_convex::kernel::KernelModel;
use rte_convex::phantom::{letter_mask, true_contrast, Phantom};
use rte_convex::recovery::recover_attenuation;

fn small_omega() -> GridSet {
    GridSet::omega(Geometry::default(), 0.25, 0.25, 0.25).unwrap()
}

fn pair_from(grid: &GridSet, seed: &[f64]) -> PairField {
    let n = seed.len();
    PairField {
        p: RadianceField::from_fn(grid, |i, j, k| seed[(i * 3 + j * 5 + k) % n]),
        q: RadianceField::from_fn(grid, |i, j, k| seed[(i * 7 + j + k * 2) % n] * 0.5),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn directions_are_unit_vectors(x1 in -0.5f64..0.5, z in 1.0f64..2.0, alpha in -0.5f64..0.5) {
        let nu = direction_vector(x1, z, alpha).unwrap();
        prop_assert!((nu[0].hypot(nu[1]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn carleman_weight_is_extremal_at_the_ends(z in 1.0f64..2.0, lambda in 0.1f64..10.0) {
        let w = carleman_weight(z, lambda);
        prop_assert!(carleman_weight(1.0, lambda) <= w);
        prop_assert!(w <= carleman_weight(2.0, lambda));
    }

    #[test]
    fn alpha_quadrature_is_exact_for_affine_integrands(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        let axis = Axis::new(-0.5, 0.5, 0.05).unwrap();
        let values: Vec<f64> = axis.nodes().iter().map(|&a| c0 + c1 * a).collect();
        prop_assert!((alpha_quadrature(&values, &axis).unwrap() - c0).abs() < 1e-12);
    }

    #[test]
    fn s_norm_is_quadratically_homogeneous(
        seed in prop::collection::vec(-3.0f64..3.0, 7),
        t in -4.0f64..4.0,
    ) {
        let grid = small_omega();
        let pair = pair_from(&grid, &seed);
        let base = s_norm_sq(&grid, &pair);
        prop_assert!(base >= 0.0);
        let scaled = s_norm_sq(&grid, &pair.scale(t));
        prop_assert!((scaled - t * t * base).abs() <= 1e-10 * (1.0 + scaled));
    }

    #[test]
    fn constraints_round_trip_through_free_values(
        seed in prop::collection::vec(-2.0f64..2.0, 5),
        c in -1.0f64..1.0,
    ) {
        let grid = small_omega();
        let data = BoundaryDataSet::from_exact(&grid, |x, z, a| [c + x * z, a - z, x, -1.0]);
        let layout = FreeLayout::new(&grid);
        let free: Vec<f64> = (0..layout.len()).map(|m| seed[m % seed.len()] + m as f64 * 1e-3).collect();
        let pair = apply_constraints(&layout, &free, &data).unwrap();
        prop_assert_eq!(extract_free(&layout, &pair), free);
        let again = apply_constraints(&layout, &extract_free(&layout, &pair), &data).unwrap();
        prop_assert_eq!(again, pair);
    }

    #[test]
    fn noise_is_bounded_multiplicative_and_seeded(delta in 0.0f64..0.2, seed in any::<u64>()) {
        let grid = small_omega();
        let nodes = boundary_nodes(&grid);
        let na = grid.na();
        let values: Vec<f64> = (0..nodes.len() * na).map(|m| 0.5 + (m % 11) as f64).collect();
        let g = BoundaryTrace { grid: grid.clone(), nodes, values };
        let a = add_noise(&g, delta, seed).unwrap();
        let b = add_noise(&g, delta, seed).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        for (clean, noisy) in g.values.iter().zip(&a.values) {
            prop_assert!(*noisy >= *clean && *noisy <= clean * (1.0 + delta));
        }
    }

    #[test]
    fn recovery_ignores_a_constant_shift_of_p(
        seed in prop::collection::vec(-1.0f64..1.0, 6),
        c in -3.0f64..3.0,
    ) {
        let grid = small_omega();
        let kernel = KernelModel::new(0.5, 0.5).unwrap();
        let mu_s = SpatialField::from_fn(&grid, |_, _| 5.0);
        let p = RadianceField::from_fn(&grid, |i, j, k| seed[(i + 2 * j + 3 * k) % seed.len()]);
        let shifted = RadianceField { values: p.values.iter().map(|v| v + c).collect(), ..p.clone() };
        let a0 = recover_attenuation(&p, &mu_s, &kernel, &grid).unwrap();
        let a1 = recover_attenuation(&shifted, &mu_s, &kernel, &grid).unwrap();
        for (x, y) in a0.values.iter().zip(&a1.values) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn phantom_fields_are_consistent(c_a in 0.0f64..50.0, letter in prop::sample::select(vec!["A", "Omega", "SZ"])) {
        let grid = GridSet::uniform_omega(Geometry::default(), 0.05).unwrap();
        let mask = letter_mask(letter, &grid).unwrap();
        let ph = Phantom::from_mask(&grid, mask, c_a);
        for m in 0..grid.spatial_len() {
            prop_assert_eq!(ph.attenuation.values[m], ph.mu_a.values[m] + ph.mu_s.values[m]);
            if ph.mu_a.values[m] != 0.0 {
                prop_assert!(ph.mu_s.values[m] > 0.0);
            }
        }
        prop_assert!((ph.true_contrast() - (1.0 + c_a / 5.0)).abs() < 1e-12);
        prop_assert!((true_contrast(c_a) - true_contrast(0.0) - c_a / 5.0).abs() < 1e-12);
    }

    #[test]
    fn decimal_serialization_is_lossless(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn config_hash_separates_configs(seed_a in any::<u64>(), seed_b in any::<u64>()) {
        let a = RunConfig { seed: seed_a, ..RunConfig::default() };
        let mut b = RunConfig { seed: seed_b, ..RunConfig::default() };
        prop_assert_eq!(a.hash() == b.hash(), seed_a == seed_b);
        b.out_dir = "elsewhere".into();
        prop_assert_eq!(a.hash() == b.hash(), seed_a == seed_b);
    }
}
