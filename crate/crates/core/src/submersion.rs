//! Linear Finsler submersions `P: R^n -> R^k` out of an (alpha, beta)-Minkowski
//! space, the norm they induce on the target, and the averaged Riemannian metric
//! of a Minkowski norm.
//!
//! The induced norm is `F2(y) = F1(v)` where `v` is the orthogonal-cone vector of
//! `ker P` with `P v = y`; equivalently the minimum of `F1` over the fiber `P^{-1}(y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cones::{ConeFrame, Subspace};
use crate::error::{Error, Result};
use crate::lattice::{sphere_lattice, sphere_quadrature};
use crate::linalg::{self, gram_schmidt, null_space, Matrix, Vector};
use crate::minkowski::AlphaBetaNorm;
use crate::parallel;

/// Samples used to confirm recovered closed forms.
pub const CHECK_SAMPLES: usize = 64;
/// Default node target of [`average_metric`].
pub const DEFAULT_QUADRATURE: usize = 10_000;

/// A full-row-rank linear map `P: R^n -> R^k` with `k < n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSubmersion", into = "RawSubmersion")]
pub struct LinearSubmersion {
    p: Matrix,
    kernel: Vec<Vector>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubmersion {
    #[serde(with = "linalg::as_rows")]
    p: Matrix,
}

impl TryFrom<RawSubmersion> for LinearSubmersion {
    type Error = Error;

    fn try_from(raw: RawSubmersion) -> Result<Self> {
        LinearSubmersion::new(raw.p)
    }
}

impl From<LinearSubmersion> for RawSubmersion {
    fn from(s: LinearSubmersion) -> Self {
        RawSubmersion { p: s.p }
    }
}

impl LinearSubmersion {
    pub fn new(p: Matrix) -> Result<Self> {
        let (k, n) = p.shape();
        if k == 0 || k >= n {
            return Err(Error::InvalidInput(format!(
                "submersion matrix must be k x n with 0 < k < n, got {k} x {n}"
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        let s = linalg::singular_values(&p);
        if s[k - 1] <= 1e-10 * s[0] {
            return Err(Error::InvalidInput("submersion matrix is not of full row rank".into()));
        }
        let kernel = null_space(&p, 1e-8);
        debug_assert_eq!(kernel.len(), n - k);
        Ok(LinearSubmersion { p, kernel })
    }

    /// `(x_1, .., x_n) -> (x_1, .., x_k)`.
    pub fn coordinate_projection(n: usize, k: usize) -> Result<Self> {
        Self::new(Matrix::from_fn(k, n, |i, j| (i == j) as u8 as f64))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn source_dim(&self) -> usize {
        self.p.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.p.nrows()
    }

    /// Euclidean-orthonormal basis of `ker P`.
    pub fn kernel(&self) -> &[Vector] {
        &self.kernel
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.p * v
    }
}

/// The norm induced on the target of a submersion, with its lifting data.
#[derive(Debug, Clone)]
pub struct InducedNorm {
    norm: AlphaBetaNorm,
    sub: LinearSubmersion,
    frame: ConeFrame,
    /// `y -> y_h`, the horizontal vector with `P y_h = y`.
    lift_matrix: Matrix,
    /// Pushforward of `a` restricted to the horizontal space.
    a2: Matrix,
}

impl InducedNorm {
    pub fn new(norm: &AlphaBetaNorm, sub: &LinearSubmersion) -> Result<Self> {
        if sub.source_dim() != norm.dim() {
            return Err(Error::DimensionMismatch { expected: norm.dim(), got: sub.source_dim() });
        }
        let vertical = Subspace::new(norm.dim(), sub.kernel().to_vec())?;
        let frame = ConeFrame::new(norm, &vertical)?;
        let p = sub.matrix();
        let a_inv = norm.a().clone().cholesky().ok_or(Error::SingularTensor)?.inverse();
        // horizontal space = a^{-1} range(P^T)
        let pap = p * &a_inv * p.transpose();
        let a2 = linalg::symmetrize(&pap.clone().try_inverse().ok_or(Error::SingularTensor)?);
        let lift_matrix = &a_inv * p.transpose() * &a2;
        Ok(InducedNorm {
            norm: norm.clone(),
            sub: sub.clone(),
            frame,
            lift_matrix,
            a2,
        })
    }

    pub fn source(&self) -> &AlphaBetaNorm {
        &self.norm
    }

    pub fn submersion(&self) -> &LinearSubmersion {
        &self.sub
    }

    pub fn frame(&self) -> &ConeFrame {
        &self.frame
    }

    /// Matrix of the Riemannian-submersion metric on the target.
    pub fn a2(&self) -> &Matrix {
        &self.a2
    }

    fn check_target(&self, y: &Vector) -> Result<()> {
        if y.len() != self.sub.target_dim() {
            return Err(Error::DimensionMismatch { expected: self.sub.target_dim(), got: y.len() });
        }
        Ok(())
    }

    /// The `a`-horizontal vector `y_h` with `P y_h = y`.
    pub fn horizontal_lift(&self, y: &Vector) -> Result<Vector> {
        self.check_target(y)?;
        Ok(&self.lift_matrix * y)
    }

    /// The cone vector `v` of `ker P` with `P v = y`.
    pub fn cone_lift(&self, y: &Vector) -> Result<Vector> {
        let yh = self.horizontal_lift(y)?;
        self.frame.lift(&self.norm, &yh)
    }

    pub fn eval(&self, y: &Vector) -> Result<f64> {
        self.norm.eval(&self.cone_lift(y)?)
    }

    /// `alpha_1` restricted to the horizontal space, pushed forward.
    pub fn alpha2(&self, y: &Vector) -> f64 {
        y.dot(&(&self.a2 * y)).max(0.0).sqrt()
    }

    /// Central-difference gradient of `F2^2 / 2`, step `1e-6 * max(1, |y|)`.
    pub fn energy_gradient_fd(&self, y: &Vector) -> Result<Vector> {
        let h = 1e-6 * y.norm().max(1.0);
        let mut grad = Vector::zeros(y.len());
        for i in 0..y.len() {
            let mut p = y.clone();
            let mut m = y.clone();
            p[i] += h;
            m[i] -= h;
            grad[i] = (0.5 * self.eval(&p)?.powi(2) - 0.5 * self.eval(&m)?.powi(2)) / (2.0 * h);
        }
        Ok(grad)
    }

    /// `B^h`, the `a`-projection of `B` onto the horizontal space.
    pub fn bvec_horizontal(&self) -> Vector {
        self.frame.project_horizontal(&self.norm, self.norm.bvec())
    }

    /// Zero-homogeneous function on the horizontal space whose product with
    /// `alpha_1` is the pulled-back target norm.
    pub fn vartheta(&self, y: &Vector) -> Result<f64> {
        let v = self.frame.lift(&self.norm, y)?;
        let (alpha_v, r) = self.norm.alpha_and_ratio(&v)?;
        let p = self.norm.phi().eval(r)?;
        let lambda = p.value - r * p.d1;
        let alpha_y = self.norm.alpha(y);
        let beta_y = self.norm.inner(&self.bvec_horizontal(), y);
        Ok(lambda * alpha_y / alpha_v + p.d1 * beta_y / alpha_y)
    }

    /// Orthonormal horizontal frame whose last vector points along `B^h`.
    ///
    /// Gram-Schmidt over the horizontal basis, with `B^h` prepended and moved to
    /// the end afterwards.
    pub fn axis_frame(&self) -> Result<Vec<Vector>> {
        let bh = self.bvec_horizontal();
        let scale = self.norm.alpha(&bh);
        if !(scale > 1e-12) {
            return Err(Error::DegenerateAxis(
                "horizontal part of B vanishes, so phi tilde has no axis".into(),
            ));
        }
        let inner = |u: &Vector, w: &Vector| self.norm.inner(u, w);
        let seeds: Vec<Vector> = std::iter::once(bh.clone())
            .chain(self.frame.horizontal.iter().cloned())
            .collect();
        let mut frame = gram_schmidt(seeds.iter(), inner, 1e-8);
        let axis = frame.remove(0);
        frame.push(axis);
        Ok(frame)
    }

    /// `(t, phi_tilde(t))` with `t = alpha(B^h) s`, evaluated as `vartheta`
    /// at `sqrt(1 - s^2) e_{m-1} + s e_m` in [`InducedNorm::axis_frame`].
    pub fn phi_tilde(&self, s: f64) -> Result<(f64, f64)> {
        if !(s.abs() <= 1.0) {
            return Err(Error::InvalidInput(format!("phi tilde needs |s| <= 1, got {s}")));
        }
        let frame = self.axis_frame()?;
        let m = frame.len();
        let axis = &frame[m - 1];
        let c = (1.0 - s * s).max(0.0).sqrt();
        let y = if m >= 2 {
            &frame[m - 2] * c + axis * s
        } else if c <= 1e-12 {
            axis * s.signum()
        } else {
            return Err(Error::InvalidInput(
                "one-dimensional horizontal space: phi tilde only exists at s = 1 or s = -1".into(),
            ));
        };
        let t = self.norm.alpha(&self.bvec_horizontal()) * s;
        Ok((t, self.vartheta(&y)?))
    }
}

pub fn induced_norm(norm: &AlphaBetaNorm, sub: &LinearSubmersion, y: &Vector) -> Result<f64> {
    InducedNorm::new(norm, sub)?.eval(y)
}

/// Minimum of `F1` over the fiber `P^{-1}(y)`, by derivative-free means.
///
/// Independent of the cone machinery: gradient descent with finite-difference
/// gradients and Armijo backtracking over Euclidean kernel coordinates, from
/// the pseudo-inverse point and 19 seeded random restarts.
pub fn fiber_minimum(norm: &AlphaBetaNorm, sub: &LinearSubmersion, y: &Vector, seed: u64) -> Result<f64> {
    if y.len() != sub.target_dim() {
        return Err(Error::DimensionMismatch { expected: sub.target_dim(), got: y.len() });
    }
    if y.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroVector);
    }
    let p = sub.matrix();
    let ppt = p * p.transpose();
    let base = p.transpose() * ppt.lu().solve(y).ok_or(Error::SingularTensor)?;
    let kernel = linalg::columns(sub.kernel(), sub.source_dim());
    let dim = kernel.ncols();
    let f = |c: &Vector| norm.eval(&(&base + &kernel * c)).unwrap_or(f64::INFINITY);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = base.norm().max(1.0);
    let mut best = f64::INFINITY;
    for restart in 0..20 {
        let mut c = if restart == 0 {
            Vector::zeros(dim)
        } else {
            Vector::from_fn(dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
        };
        let mut fc = f(&c);
        let mut t = 1.0;
        for _ in 0..5000 {
            let h = 1e-7 * c.norm().max(scale);
            let grad = Vector::from_fn(dim, |i, _| {
                let mut cp = c.clone();
                let mut cm = c.clone();
                cp[i] += h;
                cm[i] -= h;
                (f(&cp) - f(&cm)) / (2.0 * h)
            });
            let g2 = grad.norm_squared();
            if g2.sqrt() < 1e-12 {
                break;
            }
            t *= 4.0;
            let mut moved = false;
            while t > 1e-16 {
                let trial = &c - &grad * t;
                let ft = f(&trial);
                if ft <= fc - 1e-4 * t * g2 {
                    moved = (&trial - &c).norm() > 1e-12 * scale;
                    c = trial;
                    fc = ft;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        best = best.min(fc);
    }
    Ok(best)
}

/// Whether `F2(P v) = F1(v)` to `1e-8` relative.
pub fn horizontality_check(norm: &AlphaBetaNorm, sub: &LinearSubmersion, v: &Vector) -> Result<bool> {
    let f1 = norm.eval(v)?;
    let y = sub.apply(v);
    if y.amax() <= 1e-14 * v.amax() {
        return Ok(false);
    }
    let f2 = induced_norm(norm, sub, &y)?;
    Ok((f2 - f1).abs() <= 1e-8 * f1)
}

pub fn vartheta(norm: &AlphaBetaNorm, sub: &LinearSubmersion, y: &Vector) -> Result<f64> {
    InducedNorm::new(norm, sub)?.vartheta(y)
}

pub fn phi_tilde(norm: &AlphaBetaNorm, sub: &LinearSubmersion, s: f64) -> Result<(f64, f64)> {
    InducedNorm::new(norm, sub)?.phi_tilde(s)
}

/// Target `(a2, B2)` for a horizontal `B`; the induced norm is `alpha_2 phi(beta_2 / alpha_2)`.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveredAlphaBeta {
    #[serde(with = "linalg::as_rows")]
    pub a2: Matrix,
    #[serde(with = "linalg::as_array")]
    pub b2vec: Vector,
    /// Largest relative mismatch against the induced norm over the check samples.
    pub max_relative_error: f64,
    pub samples: usize,
    pub verified: bool,
}

fn target_directions(k: usize, count: usize) -> Vec<Vector> {
    sphere_lattice(k, count)
}

pub fn induced_alpha_beta(norm: &AlphaBetaNorm, sub: &LinearSubmersion) -> Result<RecoveredAlphaBeta> {
    let induced = InducedNorm::new(norm, sub)?;
    let vertical_part = norm.bvec() - induced.bvec_horizontal();
    if norm.alpha(&vertical_part) > 1e-10 * norm.alpha_b().max(1.0) {
        return Err(Error::HypothesisViolated("B is not a-orthogonal to the fibers".into()));
    }
    if !norm.phi().derivative_nonvanishing(norm.alpha_b()) {
        return Err(Error::HypothesisViolated("phi' vanishes on the admissible range".into()));
    }
    let a2 = induced.a2().clone();
    let b2vec = sub.apply(norm.bvec());
    // the target may be a line, so evaluate the closed form without building a norm
    let b2cov = &a2 * &b2vec;
    let target = |y: &Vector| -> Result<f64> {
        let alpha = induced.alpha2(y);
        Ok(alpha * norm.phi().eval(b2cov.dot(y) / alpha)?.value)
    };
    let dirs = target_directions(sub.target_dim(), CHECK_SAMPLES);
    let mut worst = 0.0_f64;
    for y in &dirs {
        let f2 = induced.eval(y)?;
        worst = worst.max((target(y)? - f2).abs() / f2);
    }
    Ok(RecoveredAlphaBeta {
        a2,
        b2vec,
        max_relative_error: worst,
        samples: dirs.len(),
        verified: worst <= 1e-8,
    })
}

/// Vertical `B`: the cone ratio `h`, `kappa = rho(h)` and `F2^2 = kappa alpha_2^2`.
#[derive(Debug, Clone, Serialize)]
pub struct KappaReport {
    pub h: f64,
    pub kappa: f64,
    /// Spread of `beta/alpha` over the cone.
    pub ratio_spread: f64,
    /// Largest relative deviation of `F2^2 / alpha_2^2` from `kappa`.
    pub max_relative_error: f64,
    /// Largest `|F2(y) - F2(-y)| / F2(y)`.
    pub reversibility_error: f64,
    pub samples: usize,
    pub verified: bool,
}

pub fn kappa_and_h(norm: &AlphaBetaNorm, sub: &LinearSubmersion) -> Result<KappaReport> {
    let induced = InducedNorm::new(norm, sub)?;
    if norm.alpha_b() <= 1e-14 {
        return Err(Error::HypothesisViolated("B vanishes".into()));
    }
    if norm.alpha(&induced.bvec_horizontal()) > 1e-10 * norm.alpha_b().max(1.0) {
        return Err(Error::HypothesisViolated("B is not tangent to the fibers".into()));
    }
    let vertical = Subspace::new(norm.dim(), sub.kernel().to_vec())?;
    let ratio = crate::cones::ratio_constancy_check(norm, &vertical, CHECK_SAMPLES)?;
    let first = induced.cone_lift(&target_directions(sub.target_dim(), 1)[0])?;
    let (_, h) = norm.alpha_and_ratio(&first)?;
    let kappa = norm.phi().rho(h)?;

    let dirs = target_directions(sub.target_dim(), CHECK_SAMPLES);
    let mut worst = 0.0_f64;
    let mut rev = 0.0_f64;
    for y in &dirs {
        let f2 = induced.eval(y)?;
        let a2 = induced.alpha2(y);
        worst = worst.max((f2 * f2 / (a2 * a2) - kappa).abs() / kappa);
        rev = rev.max((induced.eval(&-y)? - f2).abs() / f2);
    }
    Ok(KappaReport {
        h,
        kappa,
        ratio_spread: ratio.spread,
        max_relative_error: worst,
        reversibility_error: rev,
        samples: dirs.len(),
        verified: ratio.is_constant && worst <= 1e-8,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    General,
    BHorizontal,
    BVertical,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recovered {
    AlphaBeta(RecoveredAlphaBeta),
    Kappa(KappaReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedSample {
    #[serde(with = "linalg::as_array")]
    pub y: Vector,
    pub f2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedNormTable {
    pub samples: Vec<InducedSample>,
    pub case_tag: CaseTag,
    pub recovered: Option<Recovered>,
}

/// Induced norm on a target lattice plus whichever closed form the case admits.
pub fn induced_norm_table(
    norm: &AlphaBetaNorm,
    sub: &LinearSubmersion,
    count: usize,
) -> Result<InducedNormTable> {
    let induced = InducedNorm::new(norm, sub)?;
    let tol = 1e-10 * norm.alpha_b().max(1.0);
    let horizontal = norm.alpha(&(norm.bvec() - induced.bvec_horizontal())) <= tol;
    let vertical = norm.alpha(&induced.bvec_horizontal()) <= tol;
    let (case_tag, recovered) = if horizontal {
        (CaseTag::BHorizontal, induced_alpha_beta(norm, sub).ok().map(Recovered::AlphaBeta))
    } else if vertical {
        (CaseTag::BVertical, kappa_and_h(norm, sub).ok().map(Recovered::Kappa))
    } else {
        (CaseTag::General, None)
    };
    let ys = target_directions(sub.target_dim(), count);
    let values = parallel::map(&ys, |y| induced.eval(y));
    let samples = ys
        .into_iter()
        .zip(values)
        .map(|(y, f2)| Ok(InducedSample { y, f2: f2? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedNormTable { samples, case_tag, recovered })
}

/// The averaged metric: `g_v` integrated over the indicatrix against the
/// volume element that `g_v` induces on it.
///
/// The indicatrix is parametrized by ray scaling of the unit sphere,
/// `u -> u / F(u)`, integrated with [`sphere_quadrature`] of about `quadrature`
/// nodes. With `normalize` the result is divided by the indicatrix volume.
pub fn average_metric(norm: &AlphaBetaNorm, quadrature: usize, normalize: bool) -> Result<Matrix> {
    let n = norm.dim();
    let nodes = sphere_quadrature(n, quadrature);
    let canonical: Vec<Vector> = (0..n)
        .map(|i| Vector::from_fn(n, |k, _| (i == k) as u8 as f64))
        .collect();
    let contributions = parallel::map(&nodes, |(u, w)| -> Result<(Matrix, f64)> {
        let f = norm.eval(u)?;
        let g = norm.tensor(u)?;
        let grad_f = norm.legendre_components(u)? / f;
        // Euclidean-orthonormal tangent basis of the sphere at u
        let frame = gram_schmidt(std::iter::once(u).chain(canonical.iter()), |x, y| x.dot(y), 1e-8);
        let pushed: Vec<Vector> = frame[1..]
            .iter()
            .map(|t| t / f - u * (grad_f.dot(t) / (f * f)))
            .collect();
        let d = linalg::columns(&pushed, n);
        let gram = d.transpose() * &g * &d;
        let jac = gram.determinant().max(0.0).sqrt();
        Ok((g * (jac * w), jac * w))
    });
    let mut total = Matrix::zeros(n, n);
    let mut volume = 0.0;
    for c in contributions {
        let (m, v) = c?;
        total += m;
        volume += v;
    }
    let total = linalg::symmetrize(&total);
    Ok(if normalize { total / volume } else { total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix, vector};
    use crate::phi::PhiSpec;
    use std::f64::consts::PI;

    fn randers(b: &[f64]) -> AlphaBetaNorm {
        let n = b.len();
        AlphaBetaNorm::new(Matrix::identity(n, n), vector(b), PhiSpec::randers()).unwrap()
    }

    #[test]
    fn euclidean_projection() {
        let n = AlphaBetaNorm::euclidean(2).unwrap();
        let p = LinearSubmersion::coordinate_projection(2, 1).unwrap();
        assert!((induced_norm(&n, &p, &vector(&[-3.0])).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn randers_projection_matches_fiber_minimum() {
        let n = randers(&[0.5, 0.0]);
        let p = LinearSubmersion::coordinate_projection(2, 1).unwrap();
        assert!((induced_norm(&n, &p, &vector(&[1.0])).unwrap() - 1.5).abs() < 1e-12);
        assert!((induced_norm(&n, &p, &vector(&[-1.0])).unwrap() - 0.5).abs() < 1e-12);
        assert!((fiber_minimum(&n, &p, &vector(&[1.0]), 1).unwrap() - 1.5).abs() < 1e-8);
        assert!((fiber_minimum(&n, &p, &vector(&[-1.0]), 1).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn horizontality() {
        let n = AlphaBetaNorm::euclidean(3).unwrap();
        let p = LinearSubmersion::coordinate_projection(3, 2).unwrap();
        assert!(horizontality_check(&n, &p, &vector(&[1.0, 2.0, 0.0])).unwrap());
        assert!(!horizontality_check(&n, &p, &vector(&[1.0, 2.0, 0.5])).unwrap());
        assert!(!horizontality_check(&n, &p, &vector(&[0.0, 0.0, 1.0])).unwrap());
    }

    #[test]
    fn recovered_randers_on_the_line() {
        let n = randers(&[0.5, 0.0]);
        let p = LinearSubmersion::coordinate_projection(2, 1).unwrap();
        let r = induced_alpha_beta(&n, &p).unwrap();
        assert!((r.a2[(0, 0)] - 1.0).abs() < 1e-14 && (r.b2vec[0] - 0.5).abs() < 1e-14);
        assert!(r.verified);
        let c = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.5, 0.0]), PhiSpec::constant(1.0))
            .unwrap();
        assert!(matches!(induced_alpha_beta(&c, &p), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn pushforward_metric_formula() {
        let a = matrix(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]);
        let n = AlphaBetaNorm::new(a.clone(), Vector::zeros(3), PhiSpec::constant(1.0)).unwrap();
        let p = LinearSubmersion::new(matrix(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, -1.0])).unwrap();
        let ind = InducedNorm::new(&n, &p).unwrap();
        // oracle: a2 = M^T a M for M = H (P H)^{-1}, H an a-orthonormal horizontal basis
        let h = linalg::columns(&ind.frame().horizontal, 3);
        let m = &h * (p.matrix() * &h).try_inverse().unwrap();
        let oracle = m.transpose() * &a * &m;
        assert!((ind.a2() - oracle).amax() < 1e-12);
    }

    #[test]
    fn vertical_randers_kappa() {
        // F2(1) = sqrt(0.84): minimize sqrt(1 + t^2) + 0.4 t over t
        let n = randers(&[0.0, 0.4]);
        let p = LinearSubmersion::coordinate_projection(2, 1).unwrap();
        let k = kappa_and_h(&n, &p).unwrap();
        assert!((k.kappa - 0.84).abs() < 1e-12, "{k:?}");
        assert!((k.h + 0.16).abs() < 1e-12);
        assert!(k.verified && k.reversibility_error < 1e-12);
        assert!((induced_norm(&n, &p, &vector(&[1.0])).unwrap() - 0.84f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn phi_tilde_equals_phi_for_horizontal_b() {
        let n = AlphaBetaNorm::new(
            Matrix::identity(3, 3),
            vector(&[0.3, 0.2, 0.0]),
            PhiSpec::matsumoto(),
        )
        .unwrap();
        let p = LinearSubmersion::coordinate_projection(3, 2).unwrap();
        for s in [-1.0, -0.6, 0.0, 0.3, 1.0] {
            let (t, v) = phi_tilde(&n, &p, s).unwrap();
            assert!((v - n.phi().eval(t).unwrap().value).abs() < 1e-12);
        }
        let e = AlphaBetaNorm::euclidean(3).unwrap();
        assert!(matches!(phi_tilde(&e, &p, 0.2), Err(Error::DegenerateAxis(_))));
    }

    #[test]
    fn euclidean_average_is_circumference() {
        let e = AlphaBetaNorm::euclidean(2).unwrap();
        let g = average_metric(&e, DEFAULT_QUADRATURE, false).unwrap();
        assert!((g - Matrix::identity(2, 2) * (2.0 * PI)).amax() < 1e-10);
        let a = matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let r = AlphaBetaNorm::new(a.clone(), Vector::zeros(2), PhiSpec::constant(1.0)).unwrap();
        let g = average_metric(&r, 2_000, false).unwrap();
        assert!((g - &a * (2.0 * PI)).amax() < 1e-10);
        let g = average_metric(&r, 2_000, true).unwrap();
        assert!((g - &a).amax() < 1e-12);
    }

    #[test]
    fn sphere_volume_in_three_dimensions() {
        let e = AlphaBetaNorm::euclidean(3).unwrap();
        let g = average_metric(&e, 2_000, false).unwrap();
        assert!((g - Matrix::identity(3, 3) * (4.0 * PI)).amax() < 1e-10);
    }

    #[test]
    fn table_tags() {
        let p = LinearSubmersion::coordinate_projection(2, 1).unwrap();
        let t = induced_norm_table(&randers(&[0.5, 0.0]), &p, 8).unwrap();
        assert_eq!(t.case_tag, CaseTag::BHorizontal);
        assert!(matches!(t.recovered, Some(Recovered::AlphaBeta(_))));
        let t = induced_norm_table(&randers(&[0.0, 0.4]), &p, 8).unwrap();
        assert_eq!(t.case_tag, CaseTag::BVertical);
        let t = induced_norm_table(&randers(&[0.3, 0.4]), &p, 8).unwrap();
        assert_eq!((t.case_tag, t.samples.len()), (CaseTag::General, 2));
    }
}
