#![allow(dead_code)]

use alphabeta::linalg::{Matrix, Vector};
use alphabeta::{AlphaBetaNorm, PhiSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn families() -> Vec<PhiSpec> {
    vec![
        PhiSpec::constant(1.3),
        PhiSpec::randers(),
        PhiSpec::matsumoto(),
        PhiSpec::quadratic(),
        PhiSpec::polynomial(vec![1.0, 0.4, 0.3, -0.1], 1.0).unwrap(),
        PhiSpec::randers().with_scale(0.7),
    ]
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// SPD matrix with eigenvalues bounded away from 0.
pub fn spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.5);
    &m * m.transpose() + Matrix::identity(n, n) * 0.5
}

/// A norm whose `alpha(B)` is a random fraction (at most 0.9) of the largest
/// admissible value, capped at 2.
pub fn random_norm(rng: &mut ChaCha8Rng, phi: &PhiSpec, n: usize) -> AlphaBetaNorm {
    let a = spd(rng, n);
    let dir = gaussian_vector(rng, n);
    let alpha_dir = dir.dot(&(&a * &dir)).sqrt();
    let cap = phi.max_admissible_b().min(2.0);
    let b = rng.random_range(0.0..0.9) * cap;
    let norm = AlphaBetaNorm::new(a, dir * (b / alpha_dir), phi.clone()).unwrap();
    assert!(norm.validate().valid, "generated an invalid norm");
    norm
}

/// Entrywise relative difference scaled by the largest entry of `b`.
pub fn rel(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}
