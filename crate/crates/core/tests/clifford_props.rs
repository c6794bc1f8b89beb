use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unimoments::clifford::{self, build_generators, lambda_of, realize_real, DEFAULT_CAP};
use unimoments::correlation::{validate, CorrelationMatrix};
use unimoments::matkernel::{self, CMatrix, Tolerance, C64};
use unimoments::moments::moment_matrix;
use unimoments::{fixtures, random};

fn tol() -> Tolerance {
    Tolerance::default()
}

#[test]
fn generator_relations_are_exact() {
    for r in 1..=6 {
        let g = build_generators(r, DEFAULT_CAP).unwrap();
        let k = g.k();
        let id = CMatrix::identity(k, k);
        for i in 0..r {
            let a = g.generator(i);
            assert_eq!(a * a, id);
            assert_eq!(a.adjoint(), *a);
            for j in (i + 1)..r {
                let b = g.generator(j);
                assert!((a * b + b * a).iter().all(|z| *z == C64::new(0.0, 0.0)));
            }
        }
    }
}

#[test]
fn trace_of_products_is_inner_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let gens: Vec<_> = (1..=5).map(|r| build_generators(r, DEFAULT_CAP).unwrap()).collect();
    for i in 0..1000 {
        let g = &gens[i % 5];
        let r = g.r();
        let x: Vec<f64> = (0..r).map(|_| random::gaussian(&mut rng)).collect();
        let y: Vec<f64> = (0..r).map(|_| random::gaussian(&mut rng)).collect();
        let lx = lambda_of(g, &x).unwrap();
        let ly = lambda_of(g, &y).unwrap();
        let tr = (lx * ly).trace() / g.k() as f64;
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((tr - C64::new(dot, 0.0)).norm() < 1e-12);
    }
}

fn round_trip_error(x: &CorrelationMatrix) -> f64 {
    let t = realize_real(x, &tol(), DEFAULT_CAP).unwrap();
    for v in t.unitaries() {
        assert!(v.iter().all(|z| z.im == 0.0));
        assert_eq!(v.transpose(), *v);
        assert!(clifford::unitarity_defect(v) < 1e-12);
    }
    let m = moment_matrix(&t, &tol()).unwrap();
    matkernel::max_abs_diff(m.matrix.matrix(), x.matrix())
}

#[test]
fn realize_real_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for r in 1..=6 {
        for i in 0..100 {
            let n = r + i % 4;
            let x = random::correlation(n, r, true, &mut rng);
            assert!(round_trip_error(&x) <= 1e-10);
        }
    }
    for m in [fixtures::real3_matrix(), fixtures::f6_matrix()] {
        assert!(round_trip_error(&validate(&m, &tol()).unwrap()) <= 1e-12);
    }
    for n in 1..=6 {
        assert!(round_trip_error(&CorrelationMatrix::identity(n)) <= 1e-15);
    }
}
