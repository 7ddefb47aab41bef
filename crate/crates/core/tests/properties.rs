use approx::assert_relative_eq;
use proptest::prelude::*;

use fredholm2d::linalg::{DenseMatrix, LuFactors};
use fredholm2d::quadrature::{meshless_rule, MeshlessOptions, Quadrature};
use fredholm2d::study::estimate_eoc;
use fredholm2d::*;

fn poly(c: &[f64; 6], p: Point) -> f64 {
    c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.x * p.x + c[4] * p.x * p.y + c[5] * p.y * p.y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mls_reproduces_quadratics(seed in 1u64..500, c in prop::array::uniform6(-2.0f64..2.0)) {
        let domain = Domain::unit_square();
        let x = generate_nodes(&domain, 0.15, seed, true).unwrap();
        let y = generate_nodes(&domain, 0.07, seed + 1, true).unwrap();
        let r = build_mls(&x, &y, 2, 1.0).unwrap();
        let at_x: Vec<f64> = x.points.iter().map(|&p| poly(&c, p)).collect();
        let got = r.apply(&at_x).unwrap();
        for (q, g) in y.points.iter().zip(&got) {
            prop_assert!((g - poly(&c, *q)).abs() <= 1e-9 * (1.0 + poly(&c, *q).abs()));
        }
    }

    #[test]
    fn fitted_rules_integrate_their_degree(seed in 1u64..500, disk in any::<bool>()) {
        let domain = if disk { Domain::unit_disk() } else { Domain::unit_square() };
        let nodes = generate_nodes(&domain, 0.1, seed, true).unwrap();
        let rule = meshless_rule(&domain, &nodes, 2, FitMode::Nonnegative, MeshlessOptions::default()).unwrap();
        prop_assert!(rule.weights.iter().all(|w| *w >= 0.0));
        // x² + y² integrates to 2/3 on the square and π/2 on the disk.
        let exact = if disk { std::f64::consts::FRAC_PI_2 } else { 2.0 / 3.0 };
        prop_assert!((rule.apply(|p| p.x * p.x + p.y * p.y) - exact).abs() < 1e-9);
    }

    #[test]
    fn nodes_keep_their_separation(seed in 1u64..10_000, h in 0.05f64..0.3) {
        let nodes = generate_nodes(&Domain::unit_disk(), h, seed, true).unwrap();
        prop_assert!(nodes.min_separation() >= 0.7 * h * (1.0 - 1e-12));
        prop_assert!(nodes.points.iter().all(|p| p.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn lu_solves_diagonally_dominant_systems(n in 2usize..30, seed in any::<u64>()) {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { n as f64 } else { next() });
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let b = a.mul_vec(&x);
        let lu = LuFactors::factor(a).unwrap();
        for (got, want) in lu.solve(&b).iter().zip(&x) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eoc_recovers_power_laws(q in 0.5f64..6.0, c in 1e-3f64..1e3) {
        let hs = [0.4f64, 0.2, 0.1, 0.05];
        let errors: Vec<f64> = hs.iter().map(|h| c * h.powf(q)).collect();
        for e in estimate_eoc(&errors, &hs).unwrap() {
            assert_relative_eq!(e, q, max_relative = 1e-12);
        }
    }
}
