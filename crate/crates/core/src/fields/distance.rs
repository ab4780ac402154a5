//! Future and past distances from a submanifold to a point.
//!
//! The future distance is the length of the shortest curve from `P` to `x`, the
//! past distance that of the shortest curve from `x` back to `P`. Minimizers
//! leave (resp. reach) `P` along the orthogonal cone.

use serde::{Deserialize, Serialize};

use super::spray::integrate;
use super::{MetricField, SubmanifoldDescriptor, DEFAULT_STEP};
use crate::cones::{ConeFrame, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::optim::nelder_mead;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Straight lines in constant fields, shooting otherwise.
    #[default]
    Auto,
    StraightLine,
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    StraightLine,
    Shooting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceOptions {
    pub mode: DistanceMode,
    /// Coarse foot-point grid points per chart dimension.
    pub grid: usize,
    /// Coarse candidates refined per direction.
    pub candidates: usize,
    /// Required landing accuracy of a shot, in position.
    pub landing_tol: f64,
    pub newton_steps: usize,
    /// RK4 step in arclength.
    pub step: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            mode: DistanceMode::Auto,
            grid: 128,
            candidates: 3,
            landing_tol: 1e-8,
            newton_steps: 30,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult {
    pub future: f64,
    pub past: f64,
    #[serde(with = "linalg::as_array")]
    pub future_foot: Vector,
    #[serde(with = "linalg::as_array")]
    pub past_foot: Vector,
    /// F-unit velocity at the foot point of the future minimizer.
    #[serde(with = "linalg::as_array")]
    pub future_direction: Vector,
    /// F-unit velocity at the foot point of the past minimizer.
    #[serde(with = "linalg::as_array")]
    pub past_direction: Vector,
    /// Largest `|g_xi(xi, w)|` over `a`-unit tangents `w` at either foot point.
    pub orthogonality: f64,
    pub method: DistanceMethod,
}

/// One-sided minimizer: foot point, F-unit direction at the foot, length.
struct Side {
    foot: Vector,
    direction: Vector,
    length: f64,
}

/// `(dFuture, dPast)` from `p` to `x`, choosing the method from `options.mode`.
pub fn distance_to_submanifold(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    x: &Vector,
    options: &DistanceOptions,
) -> Result<DistanceResult> {
    let straight = match options.mode {
        DistanceMode::Auto => field.is_constant(),
        DistanceMode::StraightLine => true,
        DistanceMode::Shooting => false,
    };
    if straight {
        distance_straight_line(field, p, x, options)
    } else {
        distance_by_shooting(field, p, x, options)
    }
}

fn check_inputs(field: &MetricField, p: &SubmanifoldDescriptor, x: &Vector) -> Result<()> {
    if p.ambient_dim() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: p.ambient_dim() });
    }
    p.check()?;
    if !field.contains(x) {
        return Err(Error::OutOfDomain);
    }
    Ok(())
}

/// Largest `|g_xi(xi, w)|` over an `a`-orthonormal basis of `T_q P`, `xi` F-unit.
fn orthogonality(field: &MetricField, p: &SubmanifoldDescriptor, side: &Side) -> Result<f64> {
    let norm = field.norm_unchecked(&side.foot);
    let tangents = p.tangents(&side.foot)?;
    let w = linalg::gram_schmidt(tangents.iter(), |a, b| norm.inner(a, b), 1e-10);
    let ell = norm.legendre_components(&side.direction)?;
    Ok(w.iter().map(|t| ell.dot(t).abs()).fold(0.0, f64::max))
}

fn assemble(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    future: Side,
    past: Side,
    method: DistanceMethod,
) -> Result<DistanceResult> {
    let orth = orthogonality(field, p, &future)?.max(orthogonality(field, p, &past)?);
    Ok(DistanceResult {
        future: future.length,
        past: past.length,
        future_foot: future.foot,
        past_foot: past.foot,
        future_direction: future.direction,
        past_direction: past.direction,
        orthogonality: orth,
        method,
    })
}

/// Local straight-line length from `q` to `x` (`sign = 1`) or `x` to `q` (`sign = -1`).
fn chord(field: &MetricField, q: &Vector, x: &Vector, sign: f64) -> f64 {
    let d = (x - q) * sign;
    if d.iter().all(|&c| c == 0.0) {
        return 0.0;
    }
    field.norm_unchecked(q).eval(&d).unwrap_or(f64::INFINITY)
}

/// Best `count` coarse chart points by the straight-line surrogate.
fn coarse_candidates(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    x: &Vector,
    sign: f64,
    options: &DistanceOptions,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let grid = p.coarse_grid(x, options.grid.max(4))?;
    let mut scored: Vec<(Vec<f64>, f64)> = grid
        .into_iter()
        .filter_map(|theta| {
            let q = p.point(&theta).ok()?;
            Some((theta, chord(field, &q, x, sign)))
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    scored.truncate(options.candidates.max(1));
    if scored.is_empty() {
        return Err(Error::NotFound { tolerance: options.landing_tol });
    }
    Ok(scored)
}

/// Chart spacing of the coarse grid, used as the local refinement scale.
fn grid_spacing(p: &SubmanifoldDescriptor, x: &Vector, options: &DistanceOptions) -> Result<f64> {
    if p.flat_chart() {
        let c = p.coordinates(x)?;
        let q = p.point(&c)?;
        Ok(2.0 * (2.0 * (x - q).norm() + 1.0) / options.grid.max(4) as f64)
    } else {
        Ok(2.0 * std::f64::consts::PI / options.grid.max(4) as f64)
    }
}

/// Straight-line oracle: `min_q F(x - q)` and `min_q F(q - x)`.
///
/// Exact in constant fields only; other fields are rejected.
pub fn distance_straight_line(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    x: &Vector,
    options: &DistanceOptions,
) -> Result<DistanceResult> {
    check_inputs(field, p, x)?;
    if !field.is_constant() {
        return Err(Error::Unsupported(
            "straight-line distances are exact only in constant fields".into(),
        ));
    }
    let spacing = grid_spacing(p, x, options)?;
    let side = |sign: f64| -> Result<Side> {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for (theta, _) in coarse_candidates(field, p, x, sign, options)? {
            if p.manifold_dim() == 0 {
                best = Some((theta.clone(), chord(field, &p.point(&theta)?, x, sign)));
                break;
            }
            let objective = |t: &[f64]| match p.point(t) {
                Ok(q) => chord(field, &q, x, sign),
                Err(_) => f64::INFINITY,
            };
            let (t, v) = nelder_mead(objective, &theta, spacing, 1e-13, 4000);
            if best.as_ref().is_none_or(|b| v < b.1) {
                best = Some((t, v));
            }
        }
        let (theta, length) = best.ok_or(Error::NotFound { tolerance: options.landing_tol })?;
        let foot = p.point(&theta)?;
        let d = (x - &foot) * sign;
        let direction = if length > 0.0 { d / length } else { Vector::zeros(x.len()) };
        Ok(Side { foot, direction, length })
    };
    let future = side(1.0)?;
    let past = side(-1.0)?;
    assemble(field, p, future, past, DistanceMethod::StraightLine)
}

/// Shooting along orthogonal geodesics, for general fields.
///
/// Unknowns are the foot point's chart coordinates and the horizontal part
/// `y` of the initial velocity (in the basis `a(q)^{-1} N(q)` of the
/// `a`-orthogonal complement of `T_q P`); the velocity is the conical lift of
/// `y`. Damped Gauss-Newton with finite-difference Jacobians drives the
/// endpoint of the geodesic (forward in time for the future distance,
/// backward for the past one) onto `x`; the distance is `F(q, lift(y))`.
pub fn distance_by_shooting(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    x: &Vector,
    options: &DistanceOptions,
) -> Result<DistanceResult> {
    check_inputs(field, p, x)?;
    let future = shoot(field, p, x, 1.0, options)?;
    let past = shoot(field, p, x, -1.0, options)?;
    assemble(field, p, future, past, DistanceMethod::Shooting)
}

struct Shot {
    foot: Vector,
    velocity: Vector,
    endpoint: Vector,
}

/// Horizontal basis `a(q)^{-1} N(q)` and the cone frame of `T_q P`.
fn foot_frame(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    q: &Vector,
) -> Result<(Matrix, ConeFrame)> {
    let norm = field.norm_unchecked(q);
    let a_inv = norm.a().clone().cholesky().ok_or(Error::SingularTensor)?.inverse();
    let normals = p.normals(q)?;
    let h: Vec<Vector> = normals.iter().map(|nv| &a_inv * nv).collect();
    let tangents = p.tangents(q)?;
    let sub = if tangents.is_empty() {
        Subspace::zero(field.dim())
    } else {
        Subspace::new(field.dim(), tangents)?
    };
    Ok((linalg::columns(&h, field.dim()), ConeFrame::new(&norm, &sub)?))
}

fn fire(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    z: &[f64],
    sign: f64,
    steps: usize,
) -> Result<Shot> {
    let m = p.manifold_dim();
    let q = p.point(&z[..m])?;
    let (h, frame) = foot_frame(field, p, &q)?;
    let y = &h * Vector::from_column_slice(&z[m..]);
    let norm = field.norm_unchecked(&q);
    let velocity = frame.lift(&norm, &y)?;
    let run = integrate(field, &q, &velocity, sign, steps, |_, _, _| Ok(()))?;
    if run.left_domain {
        return Err(Error::OutOfDomain);
    }
    Ok(Shot { foot: q, velocity, endpoint: run.state.x })
}

fn shoot(
    field: &MetricField,
    p: &SubmanifoldDescriptor,
    x: &Vector,
    sign: f64,
    options: &DistanceOptions,
) -> Result<Side> {
    let n = field.dim();
    let mut best: Option<Side> = None;
    for (theta, surrogate) in coarse_candidates(field, p, x, sign, options)? {
        let q = p.point(&theta)?;
        let (h, _) = foot_frame(field, p, &q)?;
        // least-squares horizontal coefficients of the chord, in the a-inner product
        let a = field.norm_unchecked(&q).a().clone();
        let d = (x - &q) * sign;
        let gram = h.transpose() * &a * &h;
        let c0 = gram
            .lu()
            .solve(&(h.transpose() * &a * d))
            .ok_or(Error::SingularTensor)?;
        let mut z: Vec<f64> = theta.iter().copied().chain(c0.iter().copied()).collect();
        let steps = ((surrogate / options.step).ceil() as usize).max(10);

        let residual = |z: &[f64]| -> Result<(Vector, Shot)> {
            let shot = fire(field, p, z, sign, steps)?;
            Ok((&shot.endpoint - x, shot))
        };
        let Ok((mut r, mut shot)) = residual(&z) else { continue };
        let mut mu = 1e-6;
        for _ in 0..options.newton_steps {
            if r.amax() <= options.landing_tol {
                break;
            }
            let mut jac = Matrix::zeros(n, n);
            let mut ok = true;
            for j in 0..n {
                let hstep = 1e-7 * z[j].abs().max(1.0);
                let mut zp = z.clone();
                zp[j] += hstep;
                match residual(&zp) {
                    Ok((rp, _)) => jac.set_column(j, &((rp - &r) / hstep)),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            // Levenberg-Marquardt step with adaptive damping
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let g = &jt * &r;
            let mut improved = false;
            for _ in 0..12 {
                let damped = &jtj + Matrix::identity(n, n) * (mu * jtj.diagonal().amax().max(1e-12));
                let Some(step) = damped.lu().solve(&g) else { break };
                let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
                if let Ok((rt, st)) = residual(&trial) {
                    if rt.norm() < r.norm() {
                        z = trial;
                        r = rt;
                        shot = st;
                        mu = (mu * 0.3).max(1e-12);
                        improved = true;
                        break;
                    }
                }
                mu *= 10.0;
            }
            if !improved {
                break;
            }
        }
        if r.amax() <= options.landing_tol.max(1e-6) {
            let norm = field.norm_unchecked(&shot.foot);
            let length = norm.eval(&shot.velocity)?;
            if best.as_ref().is_none_or(|b| length < b.length) {
                best = Some(Side {
                    direction: &shot.velocity / length,
                    foot: shot.foot,
                    length,
                });
            }
        }
    }
    best.ok_or(Error::NotFound { tolerance: 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{AField, BField, DomainBox, LevelFunction};
    use crate::linalg::vector;
    use crate::phi::PhiSpec;
    use crate::AlphaBetaNorm;

    fn circle(r: f64) -> SubmanifoldDescriptor {
        SubmanifoldDescriptor::level_set(
            LevelFunction::AlphaNorm { center: Vector::zeros(2), a: Matrix::identity(2, 2) },
            r,
        )
    }

    #[test]
    fn euclidean_circle() {
        let f = MetricField::constant(&AlphaBetaNorm::euclidean(2).unwrap(), 10.0).unwrap();
        let d = distance_to_submanifold(&f, &circle(1.0), &vector(&[2.0, 0.0]), &Default::default())
            .unwrap();
        assert!((d.future - 1.0).abs() < 1e-10 && (d.past - 1.0).abs() < 1e-10);
        assert_eq!(d.method, DistanceMethod::StraightLine);
    }

    #[test]
    fn quadratic_indicatrix_future_distance() {
        let n = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.3, 0.0]), PhiSpec::quadratic())
            .unwrap();
        let f = MetricField::constant(&n, 10.0).unwrap();
        let p = SubmanifoldDescriptor::level_set(
            LevelFunction::FinslerNorm { center: Vector::zeros(2), norm: n.clone() },
            1.0,
        );
        let u = vector(&[0.3, 0.8]);
        let x = &u * (2.0 / n.eval(&u).unwrap());
        let d = distance_to_submanifold(&f, &p, &x, &Default::default()).unwrap();
        assert!((d.future - 1.0).abs() < 1e-8, "{}", d.future);
        assert!(d.orthogonality < 1e-5);
    }

    #[test]
    fn shooting_agrees_with_straight_lines_in_constant_fields() {
        let n = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.4, 0.1]), PhiSpec::randers())
            .unwrap();
        let f = MetricField::constant(&n, 10.0).unwrap();
        let p = circle(1.0);
        let x = vector(&[1.5, 1.2]);
        let opts = DistanceOptions::default();
        let a = distance_straight_line(&f, &p, &x, &opts).unwrap();
        let b = distance_by_shooting(&f, &p, &x, &opts).unwrap();
        assert!((a.future - b.future).abs() < 1e-6, "{} {}", a.future, b.future);
        assert!((a.past - b.past).abs() < 1e-6, "{} {}", a.past, b.past);
        assert!((a.future - a.past).abs() > 0.1);
    }

    #[test]
    fn shooting_in_a_conformal_field() {
        // line x_2 = 0 in g = exp(2 c |x|^2) I; the ray x_1 = 0 is a geodesic by symmetry
        let f = MetricField::new(
            2,
            DomainBox::cube(2, 3.0),
            AField::Conformal { a0: Matrix::identity(2, 2), c: 0.1 },
            BField::Zero,
            PhiSpec::constant(1.0),
        )
        .unwrap();
        let p = SubmanifoldDescriptor::level_set(
            LevelFunction::Linear { covector: vector(&[0.0, 1.0]) },
            0.0,
        );
        let x = vector(&[0.0, 1.0]);
        let opts = DistanceOptions { grid: 32, ..Default::default() };
        let d = distance_to_submanifold(&f, &p, &x, &opts).unwrap();
        assert_eq!(d.method, DistanceMethod::Shooting);
        // oracle: int_0^1 exp(0.1 t^2) dt by Simpson
        let m = 2000;
        let h = 1.0 / m as f64;
        let g = |t: f64| (0.1 * t * t).exp();
        let simpson: f64 = (0..m)
            .map(|k| {
                let a = k as f64 * h;
                h / 6.0 * (g(a) + 4.0 * g(a + h / 2.0) + g(a + h))
            })
            .sum();
        assert!((d.future - simpson).abs() < 1e-6, "{} {}", d.future, simpson);
        assert!((d.past - simpson).abs() < 1e-6);
        assert!(d.future_foot.amax() < 1e-6);
    }
}
