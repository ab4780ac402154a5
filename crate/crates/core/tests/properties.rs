mod common;

use alphabeta::cones::{orthogonal_cone, ConeFrame, Subspace};
use alphabeta::fields::{spray_accel, AField, BField, DomainBox, MetricField};
use alphabeta::linalg::{Matrix, Vector};
use alphabeta::minkowski::recover_alpha_beta;
use alphabeta::submersion::{fiber_minimum, InducedNorm, LinearSubmersion};
use alphabeta::{AlphaBetaNorm, PhiSpec};
use common::{families, gaussian_vector, random_norm, rel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(seed: u64, family: usize, n: usize) -> (ChaCha8Rng, AlphaBetaNorm) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fams = families();
    let norm = random_norm(&mut rng, &fams[family % fams.len()], n);
    (rng, norm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_matches_finite_differences(seed in any::<u64>(), family in 0usize..6, n in 2usize..=4) {
        let (mut rng, norm) = setup(seed, family, n);
        let v = gaussian_vector(&mut rng, n);
        let g = norm.tensor(&v).unwrap();
        let fd = norm.fundamental_tensor_fd(&v).unwrap().g;
        prop_assert!(rel(&g, &fd) <= 1e-6);
        prop_assert!(g.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn norm_is_positively_homogeneous(seed in any::<u64>(), family in 0usize..6, n in 2usize..=4, t in 0.01f64..100.0) {
        let (mut rng, norm) = setup(seed, family, n);
        let v = gaussian_vector(&mut rng, n);
        let f = norm.eval(&v).unwrap();
        prop_assert!((norm.eval(&(&v * t)).unwrap() - t * f).abs() <= 1e-12 * t * f);
        prop_assert!(f > 0.0);
    }

    #[test]
    fn legendre_round_trip(seed in any::<u64>(), family in 0usize..6, n in 2usize..=4) {
        let (mut rng, norm) = setup(seed, family, n);
        let v = gaussian_vector(&mut rng, n);
        let ell = norm.legendre_components(&v).unwrap();
        let back = norm.legendre_inverse(&ell).unwrap();
        prop_assert!((&back - &v).amax() <= 1e-9 * v.amax());
        // l_v(v) = F(v)^2
        let f = norm.eval(&v).unwrap();
        prop_assert!((ell.dot(&v) - f * f).abs() <= 1e-12 * f * f);
    }

    #[test]
    fn sampled_isometries_preserve_the_norm(seed in any::<u64>(), family in 0usize..6, n in 2usize..=4) {
        let (mut rng, norm) = setup(seed, family, n);
        let q = norm.sample_isometry(seed ^ 0xabc);
        for _ in 0..10 {
            let v = gaussian_vector(&mut rng, n);
            let f = norm.eval(&v).unwrap();
            prop_assert!((norm.eval(&(&q * &v)).unwrap() - f).abs() <= 1e-10 * f);
        }
    }

    #[test]
    fn norm_json_round_trip(seed in any::<u64>(), family in 0usize..6, n in 2usize..=4) {
        let (_, norm) = setup(seed, family, n);
        let text = serde_json::to_string(&norm).unwrap();
        let back: AlphaBetaNorm = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, norm);
    }

    #[test]
    fn cone_vectors_are_orthogonal_to_w(seed in any::<u64>(), family in 0usize..6, n in 3usize..=4) {
        let (mut rng, norm) = setup(seed, family, n);
        let w = Subspace::new(n, vec![gaussian_vector(&mut rng, n)]).unwrap();
        let cone = orthogonal_cone(&norm, &w, 32).unwrap();
        prop_assert!(cone.dropped.is_empty());
        let wv = &w.basis()[0];
        for v in &cone.vectors {
            let ell = norm.legendre_components(v).unwrap();
            prop_assert!(ell.dot(wv).abs() <= 1e-10 * wv.norm() * ell.norm());
            prop_assert!((norm.eval(v).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    /// The lift minimizes F over its W-coset.
    #[test]
    fn lift_minimizes_over_the_coset(seed in any::<u64>(), family in 0usize..6, n in 3usize..=4) {
        let (mut rng, norm) = setup(seed, family, n);
        let w = Subspace::new(n, vec![gaussian_vector(&mut rng, n)]).unwrap();
        let frame = ConeFrame::new(&norm, &w).unwrap();
        let y = &frame.horizontal[0] * 0.8 + &frame.horizontal[1] * -0.3;
        let v = frame.lift(&norm, &y).unwrap();
        let f = norm.eval(&v).unwrap();
        for _ in 0..10 {
            let other = &v + &w.basis()[0] * rng.random_range(-2.0..2.0);
            prop_assert!(norm.eval(&other).unwrap() >= f * (1.0 - 1e-12));
        }
    }

    #[test]
    fn induced_norm_is_the_fiber_minimum(seed in any::<u64>(), family in 0usize..6, n in 3usize..=4) {
        let (mut rng, norm) = setup(seed, family, n);
        let p = LinearSubmersion::new(Matrix::from_fn(n - 1, n, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let induced = InducedNorm::new(&norm, &p).unwrap();
        let y = gaussian_vector(&mut rng, n - 1);
        let f2 = induced.eval(&y).unwrap();
        let oracle = fiber_minimum(&norm, &p, &y, seed).unwrap();
        prop_assert!((f2 - oracle).abs() <= 1e-6 * oracle);
        let v = induced.cone_lift(&y).unwrap();
        prop_assert!((p.apply(&v) - &y).amax() <= 1e-10 * y.amax());
    }

    #[test]
    fn alpha_and_beta_are_recoverable(seed in any::<u64>(), family in 1usize..3, n in 2usize..=4) {
        // Randers and Matsumoto: phi strictly increasing
        let (_, norm) = setup(seed, family, n);
        let (a, b) = recover_alpha_beta(norm.phi(), n, |v| norm.eval(v).unwrap()).unwrap();
        prop_assert!(rel(&a, norm.a()) <= 1e-8);
        prop_assert!((&b - norm.bvec()).amax() <= 1e-8 * norm.bvec().amax().max(1.0));
    }

    #[test]
    fn spray_is_quadratic(seed in any::<u64>(), t in 0.2f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = MetricField::new(
            2,
            DomainBox::cube(2, 3.0),
            AField::Conformal { a0: Matrix::identity(2, 2), c: 0.1 },
            BField::Radial { amplitude: 0.3, radius: 1.0 },
            PhiSpec::randers(),
        ).unwrap();
        let x = Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let v = gaussian_vector(&mut rng, 2);
        let a1 = spray_accel(&field, &x, &v).unwrap();
        let at = spray_accel(&field, &x, &(&v * t)).unwrap();
        prop_assert!((at - &a1 * (t * t)).amax() <= 1e-5 * (t * t) * a1.amax().max(1e-3));
    }
}
