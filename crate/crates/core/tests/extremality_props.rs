use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unimoments::correlation::{validate, CorrelationMatrix};
use unimoments::extremality::{self, rank_bound_holds};
use unimoments::matkernel::{self, Tolerance};
use unimoments::{fixtures, random};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn inputs(n: usize, count: usize, real: bool, seed: u64) -> Vec<CorrelationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random::correlation(n, 1 + i % n, real, &mut rng))
        .collect()
}

#[test]
fn extreme_points_respect_rank_bounds() {
    for n in 2..=6 {
        for real in [false, true] {
            for x in inputs(n, 30, real, n as u64) {
                let rep = extremality::is_extreme(&x, real, &tol()).unwrap();
                if rep.is_extreme {
                    assert!(rank_bound_holds(rep.rank, n, real));
                    assert!(rep.rank_bound_satisfied);
                }
            }
        }
    }
}

#[test]
fn witnesses_perturb_both_ways() {
    for n in 3..=6 {
        for x in inputs(n, 20, false, 100 + n as u64) {
            let rep = extremality::is_extreme(&x, false, &tol()).unwrap();
            let Some(y) = rep.witness else { continue };
            let (t_minus, t_plus) = extremality::max_step(&x, &y, &tol()).unwrap();
            assert!(t_minus < 0.0 && t_plus > 0.0);
            let eps = t_minus.abs().min(t_plus) / 2.0;
            for s in [eps, -eps] {
                let moved = x.hermitian().add_scaled(&y, s);
                assert!(matkernel::is_psd(&moved, &tol()));
            }
        }
    }
}

#[test]
fn decomposition_leaves_are_extreme() {
    for n in 3..=6 {
        for real in [false, true] {
            for x in inputs(n, 200, real, 1000 + n as u64) {
                let d = extremality::decompose_extreme(&x, real, &tol()).unwrap();
                assert!(matkernel::max_abs_diff(&d.reconstruct(), x.matrix()) <= 1e-8);
                assert!((d.weight_sum() - 1.0).abs() <= 1e-9);
                for leaf in &d.terms {
                    assert!(extremality::is_extreme(&leaf.matrix, real, &tol()).unwrap().is_extreme);
                    if n == 3 && !real {
                        assert_eq!(leaf.rank, 1);
                    }
                }
            }
        }
    }
}

#[test]
fn identity_dimensions_closed_form() {
    for n in 1..=7 {
        let x = CorrelationMatrix::identity(n);
        assert_eq!(extremality::perturbation_space(&x, false, &tol()).unwrap().dimension(), n * n - n);
        assert_eq!(extremality::perturbation_space(&x, true, &tol()).unwrap().dimension(), n * (n - 1) / 2);
    }
}

#[test]
fn fixture_matrices() {
    let x4 = validate(&fixtures::x4_matrix(), &tol()).unwrap();
    let rep = extremality::is_extreme(&x4, false, &tol()).unwrap();
    assert!(rep.is_extreme && rep.rank == 2 && rep.dimension == 0);
    let f6 = validate(&fixtures::f6_matrix(), &tol()).unwrap();
    assert!(extremality::is_extreme(&f6, true, &tol()).unwrap().is_extreme);
    let r3 = validate(&fixtures::real3_matrix(), &tol()).unwrap();
    assert!(extremality::is_extreme(&r3, true, &tol()).unwrap().is_extreme);
    assert!(!extremality::is_extreme(&r3, false, &tol()).unwrap().is_extreme);
}
