//! Deterministic point sets on spheres: sampling lattices and quadrature rules.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use nalgebra::SymmetricEigen;

use crate::linalg::{Matrix, Vector};

/// `count` deterministic, roughly uniform unit vectors in `R^dim`.
///
/// `dim = 1` yields `{+1, -1}` (the whole sphere), `dim = 2` equally spaced
/// angles, `dim = 3` a Fibonacci lattice and higher dimensions normalized
/// Gaussians from a fixed seed.
pub fn sphere_lattice(dim: usize, count: usize) -> Vec<Vector> {
    match dim {
        0 => Vec::new(),
        1 => [1.0, -1.0]
            .into_iter()
            .take(count.max(1))
            .map(|x| Vector::from_element(1, x))
            .collect(),
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                Vector::from_column_slice(&[t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64;
                    Vector::from_column_slice(&[r * t.cos(), r * t.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + dim as u64);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let g = Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                let len = g.norm();
                if len > 1e-8 {
                    out.push(g / len);
                }
            }
            out
        }
    }
}

/// Gauss rule for `int_0^pi f(theta) sin^k(theta) d theta`, `k >= 1`.
///
/// Gauss-Gegenbauer nodes in `t = cos theta` via Golub-Welsch, so the rule is
/// exact for polynomials in `(cos theta, sin theta)` of matching degree.
/// Returns `(theta, weight)` pairs.
pub fn gauss_sine_power(n: usize, k: u32) -> Vec<(f64, f64)> {
    assert!(k >= 1, "sine power must be at least 1");
    if n == 0 {
        return Vec::new();
    }
    // mass of the weight: int_0^pi sin^k
    let mut mass = if k.is_multiple_of(2) { PI } else { 2.0 };
    let mut j = if k.is_multiple_of(2) { 2 } else { 3 };
    while j <= k {
        mass *= (j - 1) as f64 / j as f64;
        j += 2;
    }
    let lambda = k as f64 / 2.0;
    let mut jacobi = Matrix::zeros(n, n);
    for m in 1..n {
        let m_f = m as f64;
        let beta = m_f * (m_f + 2.0 * lambda - 1.0) / (4.0 * (m_f + lambda) * (m_f + lambda - 1.0));
        jacobi[(m, m - 1)] = beta.sqrt();
        jacobi[(m - 1, m)] = beta.sqrt();
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = eig.eigenvalues[i].clamp(-1.0, 1.0);
            let w = mass * eig.eigenvectors[(0, i)].powi(2);
            (t.acos(), w)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Product quadrature on the unit sphere `S^{dim-1}` with about `target` nodes.
///
/// Hyperspherical coordinates: a Gauss rule in every polar angle (with the
/// `sin^k` area factor as its weight) and the trapezoid rule in the azimuth.
/// Exact for polynomials of degree below the per-angle node count, so it
/// converges spectrally for smooth integrands. Returns `(node, weight)` pairs
/// whose weights sum to the sphere's area.
pub fn sphere_quadrature(dim: usize, target: usize) -> Vec<(Vector, f64)> {
    assert!(dim >= 2, "sphere quadrature needs dim >= 2");
    let angles = dim - 1;
    let polar_count = if angles == 1 {
        0
    } else {
        ((target as f64 / 2.0).powf(1.0 / angles as f64).ceil() as usize).max(2)
    };
    let azimuth_count = if angles == 1 { target.max(3) } else { 2 * polar_count };

    // polar angle k carries the area factor sin^(angles - 1 - k)
    let polar: Vec<Vec<(f64, f64)>> = (0..angles - 1)
        .map(|k| gauss_sine_power(polar_count, (angles - 1 - k) as u32))
        .collect();
    let azimuth: Vec<f64> = (0..azimuth_count)
        .map(|k| 2.0 * PI * k as f64 / azimuth_count as f64)
        .collect();
    let w_azimuth = 2.0 * PI / azimuth_count as f64;

    // enumerate all index tuples over the polar angles
    let mut out = Vec::new();
    let mut idx = vec![0usize; angles - 1];
    loop {
        let mut prefix = Vec::with_capacity(dim);
        let mut sin_prod = 1.0;
        let mut weight = w_azimuth;
        for (k, &i) in idx.iter().enumerate() {
            let (theta, w) = polar[k][i];
            prefix.push(sin_prod * theta.cos());
            weight *= w;
            sin_prod *= theta.sin();
        }
        for &phi in &azimuth {
            let mut x = prefix.clone();
            x.push(sin_prod * phi.cos());
            x.push(sin_prod * phi.sin());
            out.push((Vector::from_vec(x), weight));
        }
        // odometer increment
        let mut k = idx.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < polar_count {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattices_are_unit_and_sized() {
        for dim in 1..=5 {
            let pts = sphere_lattice(dim, 37);
            assert_eq!(pts.len(), if dim == 1 { 2 } else { 37 });
            for p in &pts {
                assert!((p.norm() - 1.0).abs() < 1e-14);
            }
        }
        let four = sphere_lattice(2, 4);
        assert!((four[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sine_power_rules_are_exact() {
        for k in 1..5u32 {
            let rule = gauss_sine_power(6, k);
            // int_0^pi cos^2 sin^k = int sin^k - int sin^(k+2) = I_k / (k + 2)
            let ik: f64 = gauss_sine_power(20, k).iter().map(|(_, w)| w).sum();
            let m: f64 = rule.iter().map(|(t, w)| w * t.cos().powi(2)).sum();
            assert!((m - ik / (k + 2) as f64).abs() < 1e-14, "k {k}");
        }
        let two: f64 = gauss_sine_power(3, 2).iter().map(|(_, w)| w).sum();
        assert!((two - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_areas_and_moments() {
        let areas = [(2, 2.0 * PI), (3, 4.0 * PI), (4, 2.0 * PI * PI)];
        for (dim, area) in areas {
            let q = sphere_quadrature(dim, 2000);
            let total: f64 = q.iter().map(|(_, w)| w).sum();
            assert!((total - area).abs() < 1e-10, "dim {dim}: {total}");
            // second moment of x_1^2 is area / dim
            let m: f64 = q.iter().map(|(x, w)| w * x[0] * x[0]).sum();
            assert!((m - area / dim as f64).abs() < 1e-10, "dim {dim}: {m}");
            for (x, _) in &q {
                assert!((x.norm() - 1.0).abs() < 1e-13);
            }
        }
    }
}
