use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unimoments::bounds::{self, Target};
use unimoments::correlation;
use unimoments::matkernel::{Tolerance, C64};
use unimoments::random;

fn tol() -> Tolerance {
    Tolerance::default()
}

#[test]
fn averaging_identity_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 3..=7 {
        let g = bounds::enumerate_group(n);
        assert_eq!(g.len() as u128, bounds::group_size(n));
        let a = bounds::averaging_scale(n);
        for _ in 0..50 {
            let x = random::correlation(n, 1 + rng.random_range(0..n), false, &mut rng);
            let mut sum = unimoments::CMatrix::zeros(n, n);
            for s in &g {
                sum += bounds::sigma_matrix(&x, s);
            }
            let avg = sum / C64::new(g.len() as f64, 0.0);
            for k in 0..n {
                assert!((avg[(k, k)] - C64::new(1.0, 0.0)).norm() < 1e-12);
                for l in 0..n {
                    if k != l {
                        assert!((avg[(k, l)] - x.entry(k, l) * a).norm() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn group_count_formula() {
    for n in 3..=8 {
        let expect: u128 = (n * (n - 1) * (n - 2) / 6) as u128 * (1..=(n - 3) as u128).product::<u128>();
        assert_eq!(bounds::enumerate_group(n).len() as u128, expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounds_are_ordered(n in 3usize..=6, r in 1usize..=6, real in any::<bool>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::correlation(n, r, real, &mut rng);
        let avg = bounds::averaging_bound(&x, &tol()).unwrap().bound;
        let best = bounds::best_lower_bound(&x, &tol()).unwrap();
        let best_a = bounds::best_lower_bound_matricial(&x, &tol()).unwrap();
        prop_assert!(avg >= 0.0);
        prop_assert!(best.bound >= avg);
        prop_assert!(best_a.bound >= best.bound - 1e-15);
        prop_assert!(best.bound <= 1.0 && best_a.bound <= 1.0);
        prop_assert!(best.recheck(&x, &tol()).unwrap() <= tol().eps_eq);
    }

    #[test]
    fn certificates_are_sound(n in 3usize..=5, r in 1usize..=4, real in any::<bool>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::correlation(n, r, real, &mut rng);
        for cert in [
            bounds::averaging_bound(&x, &tol()).unwrap(),
            bounds::eigen_shift_bound(&x, &tol()).unwrap(),
            bounds::best_lower_bound(&x, &tol()).unwrap(),
            bounds::best_lower_bound_matricial(&x, &tol()).unwrap(),
        ] {
            let w = bounds::witness(&cert, &x, cert.bound, &tol()).unwrap();
            prop_assert!(w.defect(&x, &tol()).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn skew_bound_ignores_phases(n in 3usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::correlation(n, 2, false, &mut rng);
        let d = random::unit_phases(n, &mut rng);
        let y = correlation::conjugate_diag(&x, &d, &tol()).unwrap();
        let a = bounds::skew_reduction_bound(&x, Target::Commuting, &tol()).unwrap().bound;
        let b = bounds::skew_reduction_bound(&y, Target::Commuting, &tol()).unwrap().bound;
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
