//! Geodesic spray of the energy `L = F^2 / 2` and its fixed-step RK4 flow.

use serde::Serialize;

use super::MetricField;
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};

/// Default RK4 time step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicState {
    #[serde(with = "linalg::as_array")]
    pub x: Vector,
    #[serde(with = "linalg::as_array")]
    pub v: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicRun {
    pub state: GeodesicState,
    /// Time actually integrated; differs from the request when the domain was left.
    pub time: f64,
    pub left_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    #[serde(with = "linalg::as_array")]
    pub x: Vector,
    #[serde(with = "linalg::as_array")]
    pub v: Vector,
    pub f: f64,
}

/// Acceleration `a` solving `G a = d_x L - (d_x l_v) v` (Euler-Lagrange for `L`).
///
/// Position derivatives are central differences with step `1e-5 * max(1, |x|)`.
pub fn spray_accel(field: &MetricField, x: &Vector, v: &Vector) -> Result<Vector> {
    if !field.contains(x) {
        return Err(Error::OutOfDomain);
    }
    if v.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: v.len() });
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroVector);
    }
    if field.is_constant() {
        return Ok(Vector::zeros(field.dim()));
    }
    accel_unchecked(field, x, v)
}

fn accel_unchecked(field: &MetricField, x: &Vector, v: &Vector) -> Result<Vector> {
    let n = field.dim();
    let h = 1e-5 * x.norm().max(1.0);
    let energy = |p: &Vector| -> Result<f64> { Ok(0.5 * field.norm_unchecked(p).eval(v)?.powi(2)) };
    let mut rhs = Vector::zeros(n);
    for i in 0..n {
        let mut p = x.clone();
        let mut m = x.clone();
        p[i] += h;
        m[i] -= h;
        rhs[i] = (energy(&p)? - energy(&m)?) / (2.0 * h);
    }
    let eps = h / v.norm();
    let ell_plus = field.norm_unchecked(&(x + v * eps)).legendre_components(v)?;
    let ell_minus = field.norm_unchecked(&(x - v * eps)).legendre_components(v)?;
    rhs -= (ell_plus - ell_minus) / (2.0 * eps);
    let g = field.norm_unchecked(x).tensor(v)?;
    match g.clone().cholesky() {
        Some(ch) => Ok(ch.solve(&rhs)),
        None => g.lu().solve(&rhs).ok_or(Error::SingularTensor),
    }
}

/// `(gamma(t), gamma'(t))` for the geodesic with `gamma(0) = x`, `gamma'(0) = v`.
///
/// Fixed-step RK4 with `ceil(|t| / step)` steps; `t` may be negative. Stops at
/// the last in-domain state when the curve leaves the domain.
pub fn exp_map(field: &MetricField, x: &Vector, v: &Vector, t: f64, step: f64) -> Result<GeodesicRun> {
    let steps = step_count(t, step)?;
    integrate(field, x, v, t, steps, |_, _, _| Ok(()))
}

/// Like [`exp_map`], also recording every `every`-th state (and the last one).
pub fn trajectory(
    field: &MetricField,
    x: &Vector,
    v: &Vector,
    t: f64,
    step: f64,
    every: usize,
) -> Result<(Vec<TrajectoryPoint>, GeodesicRun)> {
    let steps = step_count(t, step)?;
    let every = every.max(1);
    let mut points = Vec::new();
    let run = integrate(field, x, v, t, steps, |k, time, state| {
        if k % every == 0 || k == steps {
            points.push(TrajectoryPoint {
                t: time,
                x: state.x.clone(),
                v: state.v.clone(),
                f: field.norm_unchecked(&state.x).eval(&state.v)?,
            });
        }
        Ok(())
    })?;
    if points.last().is_none_or(|p| p.t != run.time) {
        points.push(TrajectoryPoint {
            t: run.time,
            x: run.state.x.clone(),
            v: run.state.v.clone(),
            f: field.norm_unchecked(&run.state.x).eval(&run.state.v)?,
        });
    }
    Ok((points, run))
}

fn step_count(t: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput("step must be positive and time finite".into()));
    }
    Ok(((t.abs() / step).ceil() as usize).max(1))
}

/// RK4 with exactly `steps` steps of size `t / steps`; `record(k, time, state)`
/// sees the state after step `k` (and `k = 0` for the start).
pub(crate) fn integrate(
    field: &MetricField,
    x: &Vector,
    v: &Vector,
    t: f64,
    steps: usize,
    mut record: impl FnMut(usize, f64, &GeodesicState) -> Result<()>,
) -> Result<GeodesicRun> {
    if !field.contains(x) {
        return Err(Error::OutOfDomain);
    }
    if v.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: v.len() });
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroVector);
    }
    let dt = t / steps as f64;
    let mut state = GeodesicState { x: x.clone(), v: v.clone() };
    record(0, 0.0, &state)?;

    if field.is_constant() {
        // straight lines, exact; clipped at the boundary
        for k in 1..=steps {
            let time = dt * k as f64;
            let end = x + v * time;
            if !field.contains(&end) {
                let s = field.domain().clip_segment(x, &(v * t));
                let clipped = GeodesicState { x: x + v * (s * t), v: v.clone() };
                return Ok(GeodesicRun { state: clipped, time: s * t, left_domain: true });
            }
            state.x = end;
            record(k, time, &state)?;
        }
        return Ok(GeodesicRun { state, time: t, left_domain: false });
    }

    let acc = |x: &Vector, v: &Vector| accel_unchecked(field, x, v);
    for k in 1..=steps {
        let (x0, v0) = (&state.x, &state.v);
        let k1x = v0.clone();
        let k1v = acc(x0, v0)?;
        let x2 = x0 + &k1x * (0.5 * dt);
        let v2 = v0 + &k1v * (0.5 * dt);
        let k2v = acc(&x2, &v2)?;
        let x3 = x0 + &v2 * (0.5 * dt);
        let v3 = v0 + &k2v * (0.5 * dt);
        let k3v = acc(&x3, &v3)?;
        let x4 = x0 + &v3 * dt;
        let v4 = v0 + &k3v * dt;
        let k4v = acc(&x4, &v4)?;
        let nx = x0 + (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
        let nv = v0 + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        if !field.contains(&nx) {
            return Ok(GeodesicRun {
                state,
                time: dt * (k - 1) as f64,
                left_domain: true,
            });
        }
        state = GeodesicState { x: nx, v: nv };
        record(k, dt * k as f64, &state)?;
    }
    Ok(GeodesicRun { state, time: t, left_domain: false })
}
