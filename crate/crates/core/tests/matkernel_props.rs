use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unimoments::matkernel::{self, CMatrix, HermitianMatrix, Tolerance};
use unimoments::random;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(n, n, |_, _| random::complex_gaussian(&mut rng));
    HermitianMatrix::new(&a + a.adjoint()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstructs(n in 1usize..=16, seed in any::<u64>()) {
        let h = random_hermitian(n, seed);
        let e = matkernel::eigen(&h, &tol()).unwrap();
        let scale = e.spectral_norm().max(1.0);
        prop_assert!(matkernel::max_abs_diff(&e.reconstruct(), h.matrix()) <= 1e-10 * scale);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigenvalues_match_library_solver(n in 1usize..=12, seed in any::<u64>()) {
        let h = random_hermitian(n, seed);
        let ours = matkernel::eigen(&h, &tol()).unwrap().values;
        let mut theirs: Vec<f64> = h.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn gram_matrices_are_psd(r in 1usize..=6, n in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CMatrix::from_fn(r, n, |_, _| random::complex_gaussian(&mut rng));
        let g = HermitianMatrix::new(f.adjoint() * &f).unwrap();
        prop_assert!(matkernel::is_psd(&g, &tol()));
    }

    #[test]
    fn rank_plus_nullity(r in 1usize..=8, n in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::correlation(n, r, false, &mut rng);
        let rank = matkernel::rank(x.hermitian(), &tol()).unwrap();
        let null = matkernel::nullspace(x.hermitian(), &tol()).unwrap();
        prop_assert_eq!(rank + null.ncols(), n);
        prop_assert_eq!(rank, r.min(n));
    }
}

#[test]
fn operator_norm_dominates_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..10 {
        let h = random_hermitian(5, seed);
        let norm = matkernel::operator_norm(&h);
        let mut best = 0.0_f64;
        for _ in 0..1000 {
            let v = nalgebra::DVector::from_vec(random::complex_vector(5, &mut rng)).normalize();
            let q = (v.adjoint() * h.matrix() * &v)[(0, 0)].norm();
            assert!(q <= norm + 1e-8);
            best = best.max(q);
        }
        // the top eigenvector attains it
        let e = matkernel::eigen(&h, &Tolerance::default()).unwrap();
        let top = if e.max().abs() >= e.min().abs() { 0 } else { e.n() - 1 };
        let v = e.vectors.column(top).into_owned();
        let q = (v.adjoint() * h.matrix() * &v)[(0, 0)].norm();
        assert!((q - norm).abs() < 1e-10);
        assert!(best <= norm + 1e-8);
    }
}

#[test]
fn operator_norm_matches_singular_values() {
    for seed in 0..20 {
        let h = random_hermitian(7, seed);
        let sv = DMatrix::from_fn(7, 7, |i, j| h.matrix()[(i, j)])
            .svd(false, false)
            .singular_values
            .max();
        assert!((matkernel::operator_norm(&h) - sv).abs() < 1e-10);
    }
}
