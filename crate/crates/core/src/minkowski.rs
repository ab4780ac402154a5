//! (alpha, beta)-Minkowski norms `F = alpha * phi(beta / alpha)` on `R^n`.
//!
//! `alpha(v) = sqrt(v^T A v)` for an SPD matrix `A`, and the one-form is stored
//! through its `alpha`-dual vector `B`, so `beta(w) = B^T A w`.

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::sphere_lattice;
use crate::linalg::{self, gram_schmidt, is_symmetric, min_eigenvalue, Matrix, Vector};
use crate::optim::bisect;
use crate::phi::{PhiSpec, ValidityReport};

/// Indicatrix samples used by [`AlphaBetaNorm::validate`].
pub const VALIDATION_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNorm", into = "RawNorm")]
pub struct AlphaBetaNorm {
    a: Matrix,
    bvec: Vector,
    phi: PhiSpec,
    bcov: Vector,
}

/// JSON layout: `{"dim": n, "a": [row-major], "bvec": [..], "phi": {..}}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNorm {
    dim: usize,
    a: Vec<f64>,
    bvec: Vec<f64>,
    phi: PhiSpec,
}

impl TryFrom<RawNorm> for AlphaBetaNorm {
    type Error = Error;

    fn try_from(raw: RawNorm) -> Result<Self> {
        if raw.a.len() != raw.dim * raw.dim {
            return Err(Error::DimensionMismatch {
                expected: raw.dim * raw.dim,
                got: raw.a.len(),
            });
        }
        if raw.bvec.len() != raw.dim {
            return Err(Error::DimensionMismatch {
                expected: raw.dim,
                got: raw.bvec.len(),
            });
        }
        AlphaBetaNorm::new(
            linalg::matrix(raw.dim, raw.dim, &raw.a),
            linalg::vector(&raw.bvec),
            raw.phi,
        )
    }
}

impl From<AlphaBetaNorm> for RawNorm {
    fn from(n: AlphaBetaNorm) -> Self {
        RawNorm {
            dim: n.dim(),
            a: linalg::to_row_major(&n.a),
            bvec: n.bvec.iter().copied().collect(),
            phi: n.phi,
        }
    }
}

/// `g_v`: the Hessian of `F^2 / 2` at `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensorAt {
    pub v: Vector,
    pub g: Matrix,
}

/// `l_v = g_v(v, .)` as a component vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorAt {
    pub v: Vector,
    pub ell: Vector,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub dim: usize,
    pub spd: bool,
    pub min_eigenvalue_a: f64,
    pub alpha_b: f64,
    pub b0: f64,
    pub within_domain: bool,
    pub phi_validity: Option<ValidityReport>,
    pub tensor_samples: usize,
    pub tensor_pd: bool,
    pub tensor_min_eigenvalue: f64,
    /// Sample direction where the smallest tensor eigenvalue was found.
    pub witness: Vec<f64>,
    pub valid: bool,
    pub failures: Vec<String>,
}

impl AlphaBetaNorm {
    /// Builds a norm from `A`, `B` and `phi`.
    ///
    /// Structural requirements (`n >= 2`, matching shapes, `A` symmetric
    /// positive definite) are enforced here; whether the triple actually
    /// defines a Minkowski norm is reported by [`AlphaBetaNorm::validate`].
    pub fn new(a: Matrix, bvec: Vector, phi: PhiSpec) -> Result<Self> {
        let n = a.nrows();
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {n}")));
        }
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        if bvec.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: bvec.len() });
        }
        if a.iter().chain(bvec.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        if !is_symmetric(&a, 1e-12) {
            return Err(Error::InvalidInput("matrix a is not symmetric".into()));
        }
        let a = linalg::symmetrize(&a);
        if Cholesky::new(a.clone()).is_none() || min_eigenvalue(&a) <= 0.0 {
            return Err(Error::InvalidInput("matrix a is not positive definite".into()));
        }
        let bcov = &a * &bvec;
        Ok(AlphaBetaNorm { a, bvec, phi, bcov })
    }

    /// Skips the structural checks; for callers whose `a` is SPD by construction.
    pub(crate) fn from_parts_unchecked(a: Matrix, bvec: Vector, phi: PhiSpec) -> Self {
        let bcov = &a * &bvec;
        AlphaBetaNorm { a, bvec, phi, bcov }
    }

    /// `alpha` = standard Euclidean norm, `beta = 0`, `phi = 1`.
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(Matrix::identity(dim, dim), Vector::zeros(dim), PhiSpec::constant(1.0))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// `B`, the `alpha`-dual vector of `beta`.
    pub fn bvec(&self) -> &Vector {
        &self.bvec
    }

    /// Components of `beta` as a covector (`A B`).
    pub fn bcov(&self) -> &Vector {
        &self.bcov
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    /// `alpha(B)`, the dual norm of `beta`.
    pub fn alpha_b(&self) -> f64 {
        self.alpha(&self.bvec)
    }

    pub fn with_phi(&self, phi: PhiSpec) -> Result<Self> {
        Self::new(self.a.clone(), self.bvec.clone(), phi)
    }

    pub fn with_bvec(&self, bvec: Vector) -> Result<Self> {
        Self::new(self.a.clone(), bvec, self.phi.clone())
    }

    pub fn alpha(&self, v: &Vector) -> f64 {
        v.dot(&(&self.a * v)).max(0.0).sqrt()
    }

    pub fn beta(&self, v: &Vector) -> f64 {
        self.bcov.dot(v)
    }

    /// `g_alpha(u, w)`.
    pub fn inner(&self, u: &Vector, w: &Vector) -> f64 {
        u.dot(&(&self.a * w))
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    /// `(alpha(v), beta(v)/alpha(v))`.
    pub fn alpha_and_ratio(&self, v: &Vector) -> Result<(f64, f64)> {
        self.check_dim(v)?;
        let alpha = self.alpha(v);
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok((alpha, self.beta(v) / alpha))
    }

    /// `F(v) = alpha(v) phi(beta(v) / alpha(v))`.
    pub fn eval(&self, v: &Vector) -> Result<f64> {
        let (alpha, r) = self.alpha_and_ratio(v)?;
        Ok(alpha * self.phi.eval(r)?.value)
    }

    /// Closed-form fundamental tensor from `rho`, `rho0`, `rho1`.
    pub fn fundamental_tensor(&self, v: &Vector) -> Result<FundamentalTensorAt> {
        Ok(FundamentalTensorAt {
            v: v.clone(),
            g: self.tensor(v)?,
        })
    }

    pub fn tensor(&self, v: &Vector) -> Result<Matrix> {
        let (alpha, r) = self.alpha_and_ratio(v)?;
        let c = self.phi.coefficients_at(r)?;
        let av = &self.a * v;
        let b = &self.bcov;
        let mut g = &self.a * c.rho;
        g.ger(c.rho0, b, b, 1.0);
        g.ger(c.rho1 / alpha, b, &av, 1.0);
        g.ger(c.rho1 / alpha, &av, b, 1.0);
        g.ger(-r * c.rho1 / (alpha * alpha), &av, &av, 1.0);
        Ok(g)
    }

    /// Central second differences of `F^2 / 2`, symmetrized.
    ///
    /// Step `1e-4 * max(1, |v|)`. Only meant as an independent cross-check of
    /// [`AlphaBetaNorm::fundamental_tensor`].
    pub fn fundamental_tensor_fd(&self, v: &Vector) -> Result<FundamentalTensorAt> {
        self.alpha_and_ratio(v)?;
        let n = self.dim();
        let h = 1e-4 * v.norm().max(1.0);
        let energy = |x: &Vector| -> Result<f64> { Ok(0.5 * self.eval(x)?.powi(2)) };
        let mut g = Matrix::zeros(n, n);
        let e = |i: usize| Vector::from_fn(n, |k, _| if k == i { h } else { 0.0 });
        for i in 0..n {
            for j in i..n {
                let (ei, ej) = (e(i), e(j));
                let val = (energy(&(v + &ei + &ej))? - energy(&(v + &ei - &ej))?
                    - energy(&(v - &ei + &ej))?
                    + energy(&(v - &ei - &ej))?)
                    / (4.0 * h * h);
                g[(i, j)] = val;
                g[(j, i)] = val;
            }
        }
        Ok(FundamentalTensorAt { v: v.clone(), g })
    }

    /// Central-difference gradient of `F^2 / 2` with step `1e-6 * max(1, |v|)`.
    pub fn energy_gradient_fd(&self, v: &Vector) -> Result<Vector> {
        self.alpha_and_ratio(v)?;
        let n = self.dim();
        let h = 1e-6 * v.norm().max(1.0);
        let mut grad = Vector::zeros(n);
        for i in 0..n {
            let mut p = v.clone();
            let mut m = v.clone();
            p[i] += h;
            m[i] -= h;
            grad[i] = (0.5 * self.eval(&p)?.powi(2) - 0.5 * self.eval(&m)?.powi(2)) / (2.0 * h);
        }
        Ok(grad)
    }

    /// Legendre transform `l_v = A (rho(r) v + F(v) phi'(r) B)`, `r = beta(v)/alpha(v)`.
    pub fn legendre(&self, v: &Vector) -> Result<CovectorAt> {
        Ok(CovectorAt {
            v: v.clone(),
            ell: self.legendre_components(v)?,
        })
    }

    pub fn legendre_components(&self, v: &Vector) -> Result<Vector> {
        let (alpha, r) = self.alpha_and_ratio(v)?;
        let p = self.phi.eval(r)?;
        let rho = p.value * (p.value - r * p.d1);
        let f = alpha * p.value;
        let mut ell = &self.a * v * rho;
        ell.axpy(f * p.d1, &self.bcov, 1.0);
        Ok(ell)
    }

    /// The vector `v` with `l_v = ell`, by damped Newton iteration on the tensor.
    pub fn legendre_inverse(&self, ell: &Vector) -> Result<Vector> {
        self.check_dim(ell)?;
        let scale = ell.norm();
        if !(scale > 0.0) {
            return Err(Error::ZeroCovector);
        }
        let a_inv = Cholesky::new(self.a.clone())
            .ok_or(Error::SingularTensor)?
            .inverse();
        let mut v = &a_inv * ell;
        // rescale so that l(v0) . v0 and ell . v0 agree in size
        let fv = self.eval(&v)?;
        v *= ell.dot(&v) / (fv * fv);

        let tol = 1e-13 * scale;
        let mut residual = self.legendre_components(&v)? - ell;
        let mut rnorm = residual.norm();
        const MAX_ITER: usize = 50;
        for _ in 0..MAX_ITER {
            if rnorm <= tol {
                return Ok(v);
            }
            let g = self.tensor(&v)?;
            let step = g.lu().solve(&residual).ok_or(Error::SingularTensor)?;
            let mut t = 1.0;
            loop {
                let trial = &v - &step * t;
                let candidate = self
                    .legendre_components(&trial)
                    .map(|l| (l - ell, trial));
                if let Ok((res, trial)) = candidate {
                    let n = res.norm();
                    if n < rnorm || t < 1e-10 {
                        v = trial;
                        residual = res;
                        rnorm = n;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    return Err(Error::NoConvergence {
                        what: "legendre inverse",
                        iterations: MAX_ITER,
                        residual: rnorm,
                    });
                }
            }
        }
        if rnorm <= 1e-10 * scale.max(1.0) {
            return Ok(v);
        }
        Err(Error::NoConvergence {
            what: "legendre inverse",
            iterations: MAX_ITER,
            residual: rnorm,
        })
    }

    /// `g_alpha(lambda(r) v / alpha(v) + phi'(r) B, v)`, which equals `F(v)`.
    pub fn representation(&self, v: &Vector) -> Result<f64> {
        let (alpha, r) = self.alpha_and_ratio(v)?;
        let p = self.phi.eval(r)?;
        let lambda = p.value - r * p.d1;
        let mut w = v * (lambda / alpha);
        w.axpy(p.d1, &self.bvec, 1.0);
        Ok(self.inner(&w, v))
    }

    /// Points `u / F(u)` for `u` on a deterministic unit-sphere lattice.
    pub fn sample_indicatrix(&self, count: usize) -> Result<Vec<Vector>> {
        sphere_lattice(self.dim(), count)
            .into_iter()
            .map(|u| {
                let f = self.eval(&u)?;
                Ok(u / f)
            })
            .collect()
    }

    /// A random `Q` with `Q^T A Q = A` and `Q B = B`.
    ///
    /// Built as `L^{-T} R L^T` (`A = L L^T`) where `R` is a Haar-random orthogonal
    /// map of the complement of `L^T B`, extended by the identity on it.
    pub fn sample_isometry(&self, seed: u64) -> Matrix {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chol = Cholesky::new(self.a.clone()).expect("a is SPD by construction");
        let l = chol.l();
        let lt = l.transpose();
        let axis = &lt * &self.bvec;

        let r = if axis.norm() > 1e-14 * self.a.amax().sqrt() {
            let u = axis.normalize();
            let canonical: Vec<Vector> = (0..n)
                .map(|i| Vector::from_fn(n, |k, _| (i == k) as u8 as f64))
                .collect();
            let frame = gram_schmidt(
                std::iter::once(&u).chain(canonical.iter()),
                |x, y| x.dot(y),
                1e-8,
            );
            let e = linalg::columns(&frame[1..], n);
            let o = haar_orthogonal(n - 1, &mut rng);
            &u * u.transpose() + &e * o * e.transpose()
        } else {
            haar_orthogonal(n, &mut rng)
        };
        let lt_inv = lt.clone().try_inverse().expect("triangular factor is invertible");
        lt_inv * r * lt
    }

    /// Runs every Minkowski-norm check and collects the failures.
    pub fn validate(&self) -> NormReport {
        let mut failures = Vec::new();
        let min_eig_a = min_eigenvalue(&self.a);
        let spd = min_eig_a > 0.0;
        if !spd {
            failures.push("SPD failure: a is not positive definite".to_string());
        }
        let alpha_b = self.alpha_b();
        let within = alpha_b < self.phi.b0;
        if !within {
            failures.push(format!("domain failure: alpha(B) = {alpha_b} >= b0 = {}", self.phi.b0));
        }
        let validity = if within { self.phi.validity(alpha_b).ok() } else { None };
        if let Some(v) = &validity {
            if !v.positive {
                failures.push("positivity failure: phi is not positive on [-b, b]".into());
            } else if !v.valid {
                failures.push(format!(
                    "Φ failure: min Phi(s, b) = {:e} at s = {}",
                    v.min_phi, v.argmin_s
                ));
            }
        }

        // lattice samples plus the two axis directions, where beta/alpha is extremal
        let mut dirs = sphere_lattice(self.dim(), VALIDATION_SAMPLES);
        if alpha_b > 0.0 {
            dirs.push(self.bvec.clone());
            dirs.push(-&self.bvec);
        }
        let mut min_eig = f64::INFINITY;
        let mut witness = Vec::new();
        let mut eval_failed = false;
        for u in &dirs {
            match self.tensor(u) {
                Ok(g) => {
                    let e = min_eigenvalue(&g);
                    if e < min_eig || witness.is_empty() {
                        min_eig = e;
                        witness = u.iter().copied().collect();
                    }
                }
                Err(_) => eval_failed = true,
            }
        }
        let tensor_pd = !eval_failed && min_eig > 0.0;
        if !tensor_pd {
            failures.push(format!(
                "fundamental tensor not positive definite (min eigenvalue {min_eig:e})"
            ));
        }
        let valid = spd && within && validity.is_some_and(|v| v.valid) && tensor_pd;
        NormReport {
            dim: self.dim(),
            spd,
            min_eigenvalue_a: min_eig_a,
            alpha_b,
            b0: self.phi.b0,
            within_domain: within,
            phi_validity: validity,
            tensor_samples: dirs.len(),
            tensor_pd,
            tensor_min_eigenvalue: min_eig,
            witness,
            valid,
            failures,
        }
    }
}

fn haar_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Solves `phi(s) / phi(-s) = forward / backward` for `s`.
///
/// For strictly monotone `phi` the left side is strictly increasing, so the
/// ratio `beta(v)/alpha(v)` is determined by the forward and backward norms.
pub fn recover_ratio(phi: &PhiSpec, forward: f64, backward: f64) -> Result<f64> {
    let target = forward / backward;
    let bound = phi.b0 * (1.0 - 1e-9);
    let h = |s: f64| -> f64 {
        match (phi.eval(s), phi.eval(-s)) {
            (Ok(p), Ok(m)) => p.value / m.value - target,
            _ => f64::NAN,
        }
    };
    bisect(h, -bound, bound, 1e-15).ok_or_else(|| {
        Error::HypothesisViolated("forward/backward ratio outside the range of phi".into())
    })
}

/// Recovers `(A, B)` from evaluations of an (alpha, beta)-norm with known, strictly monotone `phi`.
///
/// Each probe `v` gives `beta/alpha` from `F(v)/F(-v)`, then `alpha = F(v)/phi(s)`;
/// `A` follows by polarization and `beta` by linearity.
pub fn recover_alpha_beta(
    phi: &PhiSpec,
    dim: usize,
    norm: impl Fn(&Vector) -> f64,
) -> Result<(Matrix, Vector)> {
    let probe = |v: &Vector| -> Result<(f64, f64)> {
        let (fwd, bwd) = (norm(v), norm(&-v));
        let s = recover_ratio(phi, fwd, bwd)?;
        let alpha = fwd / phi.eval(s)?.value;
        Ok((alpha, s * alpha))
    };
    let e = |i: usize| Vector::from_fn(dim, |k, _| (k == i) as u8 as f64);
    let mut a = Matrix::zeros(dim, dim);
    let mut bcov = Vector::zeros(dim);
    let mut diag = vec![0.0; dim];
    for i in 0..dim {
        let (alpha, beta) = probe(&e(i))?;
        diag[i] = alpha * alpha;
        a[(i, i)] = diag[i];
        bcov[i] = beta;
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (alpha, _) = probe(&(e(i) + e(j)))?;
            let v = 0.5 * (alpha * alpha - diag[i] - diag[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let bvec = a
        .clone()
        .lu()
        .solve(&bcov)
        .ok_or_else(|| Error::HypothesisViolated("recovered a is singular".into()))?;
    Ok((a, bvec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix, relative_difference, vector};
    use approx::assert_relative_eq;

    fn randers_half() -> AlphaBetaNorm {
        AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.5, 0.0]), PhiSpec::randers()).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let e = AlphaBetaNorm::euclidean(2).unwrap();
        assert_relative_eq!(e.eval(&vector(&[3.0, 4.0])).unwrap(), 5.0, epsilon = 1e-15);
        assert_relative_eq!(randers_half().eval(&vector(&[1.0, 0.0])).unwrap(), 1.5);
        let q = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.3, 0.0]), PhiSpec::quadratic())
            .unwrap();
        assert_relative_eq!(q.eval(&vector(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(e.eval(&vector(&[0.0, 0.0])), Err(Error::ZeroVector));
    }

    #[test]
    fn construction_errors() {
        let phi = PhiSpec::randers();
        assert!(AlphaBetaNorm::new(Matrix::identity(1, 1), vector(&[0.0]), phi.clone()).is_err());
        let not_spd = matrix(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(AlphaBetaNorm::new(not_spd, vector(&[0.0, 0.0]), phi.clone()).is_err());
        let asym = matrix(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(AlphaBetaNorm::new(asym, vector(&[0.0, 0.0]), phi.clone()).is_err());
        assert!(AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.0]), phi).is_err());
    }

    #[test]
    fn riemannian_tensor_is_a() {
        let a = matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let n = AlphaBetaNorm::new(a.clone(), vector(&[0.2, 0.1]), PhiSpec::constant(1.0)).unwrap();
        for v in [vector(&[1.0, 0.0]), vector(&[-0.3, 2.0])] {
            assert!(relative_difference(&n.tensor(&v).unwrap(), &a) < 1e-15);
            assert!(relative_difference(&n.fundamental_tensor_fd(&v).unwrap().g, &a) < 1e-6);
            assert!((n.legendre_components(&v).unwrap() - &a * &v).amax() < 1e-14);
        }
    }

    #[test]
    fn randers_tensor_matches_hessian() {
        let n = randers_half();
        let v = vector(&[1.0, 0.0]);
        let g = n.tensor(&v).unwrap();
        let fd = n.fundamental_tensor_fd(&v).unwrap().g;
        assert!(relative_difference(&g, &fd) < 1e-6);
        assert_relative_eq!(v.dot(&(&g * &v)), 2.25, max_relative = 1e-14);
    }

    #[test]
    fn randers_legendre() {
        let n = randers_half();
        let v = vector(&[1.0, 0.0]);
        let ell = n.legendre(&v).unwrap().ell;
        assert_relative_eq!(ell[0], 2.25, max_relative = 1e-14);
        assert_relative_eq!(ell[1], 0.0, epsilon = 1e-15);
        let fd = n.energy_gradient_fd(&v).unwrap();
        assert!((fd - &ell).amax() < 1e-8);
        let back = n.legendre_inverse(&ell).unwrap();
        assert!((back - v).amax() < 1e-12);
    }

    #[test]
    fn legendre_inverse_riemannian_and_scaling() {
        let a = matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let n = AlphaBetaNorm::new(a.clone(), vector(&[0.0, 0.0]), PhiSpec::constant(1.0)).unwrap();
        let ell = vector(&[0.4, -1.0]);
        let v = n.legendre_inverse(&ell).unwrap();
        let expected = a.clone().try_inverse().unwrap() * &ell;
        assert!((&v - expected).amax() < 1e-12);

        let m = AlphaBetaNorm::new(a, vector(&[0.2, 0.1]), PhiSpec::matsumoto()).unwrap();
        let v1 = m.legendre_inverse(&ell).unwrap();
        let v3 = m.legendre_inverse(&(&ell * 3.0)).unwrap();
        assert!((v3 - v1 * 3.0).amax() < 1e-10);
        assert_eq!(m.legendre_inverse(&vector(&[0.0, 0.0])), Err(Error::ZeroCovector));
    }

    #[test]
    fn indicatrix_samples() {
        let e = AlphaBetaNorm::euclidean(2).unwrap();
        let pts = e.sample_indicatrix(4).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-15);
        }
        let r = randers_half();
        for p in r.sample_indicatrix(50).unwrap() {
            assert!((r.eval(&p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isometry_in_two_dimensions_is_identity_or_reflection() {
        let n = randers_half();
        let mut seen = [false, false];
        for seed in 0..20 {
            let q = n.sample_isometry(seed);
            let id = (&q - Matrix::identity(2, 2)).amax() < 1e-12;
            let refl = (&q - matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])).amax() < 1e-12;
            assert!(id || refl, "{q}");
            seen[id as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn isometry_preserves_structure() {
        let a = matrix(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]);
        let n = AlphaBetaNorm::new(a.clone(), vector(&[0.1, 0.2, -0.1]), PhiSpec::matsumoto())
            .unwrap();
        let q = n.sample_isometry(7);
        assert!((q.transpose() * &a * &q - &a).amax() < 1e-12);
        assert!((&q * n.bvec() - n.bvec()).amax() < 1e-12);
        for u in crate::lattice::sphere_lattice(3, 30) {
            let f = n.eval(&u).unwrap();
            assert!((n.eval(&(&q * &u)).unwrap() - f).abs() <= 1e-12 * f);
        }
        // B = 0: any alpha-isometry
        let z = AlphaBetaNorm::new(a.clone(), Vector::zeros(3), PhiSpec::quadratic()).unwrap();
        let q = z.sample_isometry(3);
        assert!((q.transpose() * &a * &q - &a).amax() < 1e-12);
    }

    #[test]
    fn validation_examples() {
        let q = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.9, 0.0]), PhiSpec::quadratic())
            .unwrap();
        assert!(q.validate().valid);
        let m = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.6, 0.0]), PhiSpec::matsumoto())
            .unwrap();
        let r = m.validate();
        assert!(!r.valid && !r.tensor_pd);
        assert!(r.failures.iter().any(|f| f.starts_with("Φ failure")));
        assert!(AlphaBetaNorm::euclidean(3).unwrap().validate().valid);
        let out = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[1.2, 0.0]), PhiSpec::quadratic())
            .unwrap();
        let r = out.validate();
        assert!(!r.valid && !r.within_domain);
    }

    #[test]
    fn recovery_of_alpha_and_beta() {
        let a = matrix(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]);
        let n = AlphaBetaNorm::new(a.clone(), vector(&[0.1, 0.2, -0.1]), PhiSpec::randers()).unwrap();
        let (ra, rb) = recover_alpha_beta(n.phi(), 3, |v| n.eval(v).unwrap()).unwrap();
        assert!((ra - a).amax() < 1e-10);
        assert!((rb - n.bvec()).amax() < 1e-10);
    }

    #[test]
    fn json_layout() {
        let n = randers_half();
        let s = serde_json::to_string(&n).unwrap();
        assert!(s.contains(r#""dim":2"#) && s.contains(r#""a":[1.0,0.0,0.0,1.0]"#));
        let back: AlphaBetaNorm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
        let bad = r#"{"dim":2,"a":[1,0,0,1],"bvec":[0,0],"phi":{"family":"randers"},"x":1}"#;
        assert!(serde_json::from_str::<AlphaBetaNorm>(bad).is_err());
        let short = r#"{"dim":2,"a":[1,0,0],"bvec":[0,0],"phi":{"family":"randers"}}"#;
        assert!(serde_json::from_str::<AlphaBetaNorm>(short).is_err());
    }
}
