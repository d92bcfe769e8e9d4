use carleman_core::coefficients::{gamma_threshold, random_pair};
use carleman_core::grid::h_half_seminorm;
use carleman_core::partition::PartitionGrid;
use carleman_core::symbol::{conjugated_roots, conjugated_symbol, factor_at};
use carleman_core::transmission::{det_t, det_t_brute};
use carleman_core::Side;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn xi_for(n: usize, raw: &[f64]) -> Vec<f64> {
    let mut xi: Vec<f64> = raw[..n - 1].to_vec();
    if xi.iter().all(|v| v.abs() < 1e-3) {
        xi[0] = 1.0;
    }
    xi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gamma0_is_scale_invariant(lo in 0.1f64..5.0, spread in 1.0f64..4.0, c in 0.05f64..20.0, n in 2usize..6) {
        let g = gamma_threshold(lo, lo * spread, n).unwrap();
        let gc = gamma_threshold(c * lo, c * lo * spread, n).unwrap();
        prop_assert!((g - gc).abs() <= 1e-12 * g);
    }

    #[test]
    fn gamma0_decreases_with_dimension(lo in 0.1f64..5.0, spread in 1.0f64..4.0, n in 2usize..8) {
        let a = gamma_threshold(lo, lo * spread, n).unwrap();
        let b = gamma_threshold(lo, lo * spread, n + 1).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn factorization_squares_back_and_is_homogeneous(
        seed in any::<u64>(),
        n in 2usize..5,
        gamma in 0.0f64..1.0,
        raw in prop::collection::vec(-3.0f64..3.0, 4),
        c in 0.1f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(&mut rng, n, 1.0, 2.0, gamma).unwrap();
        let xi = xi_for(n, &raw);
        let xs: Vec<f64> = xi.iter().map(|v| c * v).collect();
        for side in Side::BOTH {
            let f = factor_at(&pair, side, &xi).unwrap();
            let root = Complex64::new(f.root_a, -f.root_b);
            prop_assert!(f.root_a >= 0.0);
            prop_assert!((root * root - f.b).norm() <= 1e-12 * (1.0 + f.b.norm()));
            let g = factor_at(&pair, side, &xs).unwrap();
            let scale = 1.0 + c * (f.root_a.abs() + f.root_b.abs());
            prop_assert!((g.root_a - c * f.root_a).abs() <= 1e-11 * scale);
            prop_assert!((g.root_b - c * f.root_b).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn conjugated_roots_annihilate_symbol(
        seed in any::<u64>(),
        n in 2usize..5,
        gamma in 0.0f64..0.5,
        raw in prop::collection::vec(-3.0f64..3.0, 4),
        alpha in 0.5f64..3.0,
        tau in 0.0f64..50.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(&mut rng, n, 1.0, 2.0, gamma).unwrap();
        let xi = xi_for(n, &raw);
        for side in Side::BOTH {
            let f = factor_at(&pair, side, &xi).unwrap();
            let r = conjugated_roots(&f, alpha, tau);
            let size = 1.0 + (tau * alpha).powi(2) + xi.iter().map(|v| v * v).sum::<f64>() + r.sigma1.norm_sqr();
            for s in [r.sigma1, r.sigma2] {
                let p = conjugated_symbol(pair.side(side), side, &xi, alpha, tau, s);
                prop_assert!(p.norm() <= 1e-11 * size, "residual {} at size {}", p.norm(), size);
            }
        }
    }

    #[test]
    fn closed_form_determinant_matches_lu(
        seed in any::<u64>(),
        n in 2usize..5,
        gamma in 0.0f64..0.5,
        raw in prop::collection::vec(-3.0f64..3.0, 4),
        tau in 0.0f64..100.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(&mut rng, n, 1.0, 2.0, gamma).unwrap();
        let xi = xi_for(n, &raw);
        let m = factor_at(&pair, Side::Minus, &xi).unwrap();
        let p = factor_at(&pair, Side::Plus, &xi).unwrap();
        let closed = det_t(&m, &p);
        let brute = det_t_brute(&m, &p, 1.0, 2.0, tau);
        prop_assert!((closed - brute).norm() <= 1e-10 * (1.0 + closed.norm()));
    }

    #[test]
    fn partition_sums_to_one(mu in 1.0f64..16.0, x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let grid = PartitionGrid::build(mu, 2, -1.0, 1.0).unwrap();
        prop_assert!((grid.sum(&[x, y]) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn seminorm_is_quadratic(vals in prop::collection::vec(-1.0f64..1.0, 8..40), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let f: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let c = Complex64::new(re, im);
        let cf: Vec<Complex64> = f.iter().map(|z| z * c).collect();
        let h = 1.0 / 32.0;
        let base = h_half_seminorm(&f, &[f.len()], h).unwrap();
        let scaled = h_half_seminorm(&cf, &[f.len()], h).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((scaled - c.norm_sqr() * base).abs() <= 1e-10 * (1.0 + scaled));
    }
}
