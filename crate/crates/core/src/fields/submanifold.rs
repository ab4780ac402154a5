//! Submanifolds of the chart: level sets of simple functions and affine pieces,
//! with tangent spaces and coordinate charts for foot-point searches.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, null_space, Matrix, Vector};
use crate::minkowski::AlphaBetaNorm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "function", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevelFunction {
    /// `x -> eta . x`.
    Linear {
        #[serde(with = "linalg::as_array")]
        covector: Vector,
    },
    /// `x -> sqrt((x - c)^T a (x - c))`.
    AlphaNorm {
        #[serde(with = "linalg::as_array")]
        center: Vector,
        #[serde(with = "linalg::as_square_flat")]
        a: Matrix,
    },
    /// `x -> F(x - c)` for a fixed Minkowski norm.
    FinslerNorm {
        #[serde(with = "linalg::as_array")]
        center: Vector,
        norm: AlphaBetaNorm,
    },
}

impl LevelFunction {
    pub fn dim(&self) -> usize {
        match self {
            LevelFunction::Linear { covector } => covector.len(),
            LevelFunction::AlphaNorm { center, .. } | LevelFunction::FinslerNorm { center, .. } => {
                center.len()
            }
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        match self {
            LevelFunction::Linear { covector } => Ok(covector.dot(x)),
            LevelFunction::AlphaNorm { center, a } => {
                let d = x - center;
                Ok(d.dot(&(a * &d)).max(0.0).sqrt())
            }
            LevelFunction::FinslerNorm { center, norm } => {
                let d = x - center;
                if d.iter().all(|&c| c == 0.0) {
                    return Ok(0.0);
                }
                norm.eval(&d)
            }
        }
    }

    /// Differential as a covector; undefined at the center of the norm-type functions.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        match self {
            LevelFunction::Linear { covector } => Ok(covector.clone()),
            LevelFunction::AlphaNorm { center, a } => {
                let d = x - center;
                let ad = a * &d;
                let r = d.dot(&ad).max(0.0).sqrt();
                if r == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(ad / r)
            }
            LevelFunction::FinslerNorm { center, norm } => {
                let d = x - center;
                let f = norm.eval(&d)?;
                Ok(norm.legendre_components(&d)? / f)
            }
        }
    }

    fn homogeneous(&self, u: &Vector) -> Result<f64> {
        match self {
            LevelFunction::Linear { .. } => unreachable!("linear level sets use a flat chart"),
            LevelFunction::AlphaNorm { a, .. } => Ok(u.dot(&(a * u)).max(0.0).sqrt()),
            LevelFunction::FinslerNorm { norm, .. } => norm.eval(u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubmanifoldDescriptor {
    LevelSet { function: LevelFunction, level: f64 },
    Affine {
        #[serde(with = "linalg::as_array")]
        point: Vector,
        #[serde(with = "linalg::as_arrays")]
        tangents: Vec<Vector>,
    },
}

/// Unit vector with hyperspherical angles `theta` (`theta[last]` is the azimuth).
pub fn sphere_point(theta: &[f64]) -> Vector {
    let n = theta.len() + 1;
    let mut x = Vector::zeros(n);
    let mut s = 1.0;
    for (i, t) in theta.iter().enumerate() {
        if i + 1 == theta.len() {
            x[i] = s * t.cos();
            x[i + 1] = s * t.sin();
        } else {
            x[i] = s * t.cos();
            s *= t.sin();
        }
    }
    x
}

/// Inverse of [`sphere_point`] for a nonzero vector.
pub fn sphere_angles(u: &Vector) -> Vec<f64> {
    let n = u.len();
    let mut theta = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        if i + 2 == n {
            theta.push(u[n - 1].atan2(u[n - 2]));
        } else {
            let tail = u.rows(i + 1, n - i - 1).norm();
            theta.push(tail.atan2(u[i]));
        }
    }
    theta
}

impl SubmanifoldDescriptor {
    pub fn level_set(function: LevelFunction, level: f64) -> Self {
        SubmanifoldDescriptor::LevelSet { function, level }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            SubmanifoldDescriptor::LevelSet { function, .. } => function.dim(),
            SubmanifoldDescriptor::Affine { point, .. } => point.len(),
        }
    }

    pub fn manifold_dim(&self) -> usize {
        match self {
            SubmanifoldDescriptor::LevelSet { .. } => self.ambient_dim() - 1,
            SubmanifoldDescriptor::Affine { tangents, .. } => tangents.len(),
        }
    }

    /// Structural checks: dimensions agree, the level set is regular.
    pub fn check(&self) -> Result<()> {
        let n = self.ambient_dim();
        match self {
            SubmanifoldDescriptor::LevelSet { function, level } => {
                match function {
                    LevelFunction::Linear { covector } => {
                        if covector.norm() == 0.0 {
                            return Err(Error::InvalidInput("zero covector".into()));
                        }
                    }
                    LevelFunction::AlphaNorm { a, .. } => {
                        if a.nrows() != n {
                            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
                        }
                        if !(linalg::min_eigenvalue(a) > 0.0) || !(*level > 0.0) {
                            return Err(Error::InvalidInput(
                                "alpha level set needs SPD a and a positive level".into(),
                            ));
                        }
                    }
                    LevelFunction::FinslerNorm { norm, .. } => {
                        if norm.dim() != n {
                            return Err(Error::DimensionMismatch { expected: n, got: norm.dim() });
                        }
                        if !(*level > 0.0) {
                            return Err(Error::InvalidInput(
                                "norm level set needs a positive level".into(),
                            ));
                        }
                    }
                }
                Ok(())
            }
            SubmanifoldDescriptor::Affine { tangents, .. } => {
                if tangents.iter().any(|t| t.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: tangents[0].len() });
                }
                if tangents.is_empty() {
                    return Ok(());
                }
                crate::cones::Subspace::new(n, tangents.clone()).map(|_| ())
            }
        }
    }

    /// Level-function value (affine pieces report the Euclidean offset).
    pub fn value(&self, x: &Vector) -> Result<f64> {
        match self {
            SubmanifoldDescriptor::LevelSet { function, .. } => function.value(x),
            SubmanifoldDescriptor::Affine { point, .. } => {
                let d = x - point;
                let mut r = d.clone();
                for t in self.tangents(point)? {
                    r.axpy(-t.dot(&d), &t, 1.0);
                }
                Ok(r.norm())
            }
        }
    }

    /// Covectors annihilating `T_q P`.
    pub fn normals(&self, q: &Vector) -> Result<Vec<Vector>> {
        match self {
            SubmanifoldDescriptor::LevelSet { function, .. } => Ok(vec![function.gradient(q)?]),
            SubmanifoldDescriptor::Affine { tangents, .. } => {
                let n = self.ambient_dim();
                if tangents.is_empty() {
                    return Ok((0..n)
                        .map(|i| Vector::from_fn(n, |k, _| (k == i) as u8 as f64))
                        .collect());
                }
                let t = linalg::columns(tangents, n).transpose();
                Ok(null_space(&t, 1e-10))
            }
        }
    }

    /// Euclidean-orthonormal basis of `T_q P`.
    pub fn tangents(&self, q: &Vector) -> Result<Vec<Vector>> {
        match self {
            SubmanifoldDescriptor::LevelSet { function, .. } => {
                let g = function.gradient(q)?;
                Ok(null_space(&Matrix::from_row_slice(1, g.len(), g.as_slice()), 1e-10))
            }
            SubmanifoldDescriptor::Affine { tangents, .. } => Ok(linalg::gram_schmidt(
                tangents.iter(),
                |a, b| a.dot(b),
                1e-10,
            )),
        }
    }

    /// Whether the chart is flat (`R^m`) rather than angular (a sphere).
    pub fn flat_chart(&self) -> bool {
        !matches!(
            self,
            SubmanifoldDescriptor::LevelSet {
                function: LevelFunction::AlphaNorm { .. } | LevelFunction::FinslerNorm { .. },
                ..
            }
        )
    }

    fn flat_frame(&self) -> Result<(Vector, Vec<Vector>)> {
        match self {
            SubmanifoldDescriptor::LevelSet { function: LevelFunction::Linear { covector }, level } => {
                let origin = covector * (*level / covector.norm_squared());
                Ok((origin.clone(), self.tangents(&origin)?))
            }
            SubmanifoldDescriptor::Affine { point, .. } => Ok((point.clone(), self.tangents(point)?)),
            _ => unreachable!("angular chart"),
        }
    }

    /// Chart `theta -> q(theta)`: hyperspherical angles scaled onto the level
    /// set for norm-type functions, affine coordinates otherwise.
    pub fn point(&self, theta: &[f64]) -> Result<Vector> {
        if theta.len() != self.manifold_dim() {
            return Err(Error::DimensionMismatch { expected: self.manifold_dim(), got: theta.len() });
        }
        match self {
            SubmanifoldDescriptor::LevelSet {
                function: f @ (LevelFunction::AlphaNorm { center, .. } | LevelFunction::FinslerNorm { center, .. }),
                level,
            } => {
                let u = sphere_point(theta);
                Ok(center + &u * (*level / f.homogeneous(&u)?))
            }
            _ => {
                let (origin, tangents) = self.flat_frame()?;
                Ok(tangents
                    .iter()
                    .zip(theta)
                    .fold(origin, |acc, (t, c)| acc + t * *c))
            }
        }
    }

    /// Chart coordinates of a point on (or near) the submanifold.
    pub fn coordinates(&self, q: &Vector) -> Result<Vec<f64>> {
        match self {
            SubmanifoldDescriptor::LevelSet {
                function: LevelFunction::AlphaNorm { center, .. } | LevelFunction::FinslerNorm { center, .. },
                ..
            } => {
                let d = q - center;
                if d.norm() == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(sphere_angles(&d))
            }
            _ => {
                let (origin, tangents) = self.flat_frame()?;
                let d = q - origin;
                Ok(tangents.iter().map(|t| t.dot(&d)).collect())
            }
        }
    }

    /// `count` chart points spread over the submanifold: a sphere lattice for
    /// angular charts, a grid of half-width `window` around the chart origin
    /// otherwise.
    pub fn sample_coordinates(&self, count: usize, window: f64) -> Result<Vec<Vec<f64>>> {
        let m = self.manifold_dim();
        if !self.flat_chart() {
            return Ok(crate::lattice::sphere_lattice(m + 1, count)
                .iter()
                .map(sphere_angles)
                .collect());
        }
        if m == 0 {
            return Ok(vec![Vec::new()]);
        }
        let per_axis = ((count as f64).powf(1.0 / m as f64).ceil() as usize).max(1);
        let mut out = Vec::new();
        for idx in 0..per_axis.pow(m as u32) {
            if out.len() == count {
                break;
            }
            let mut rest = idx;
            let coords = (0..m)
                .map(|_| {
                    let k = rest % per_axis;
                    rest /= per_axis;
                    if per_axis == 1 {
                        0.0
                    } else {
                        -window + 2.0 * window * k as f64 / (per_axis - 1) as f64
                    }
                })
                .collect();
            out.push(coords);
        }
        Ok(out)
    }

    /// Coarse grid of chart points for foot-point searches from `x`, with
    /// `per_dim` points per chart dimension (half that in polar angles).
    pub fn coarse_grid(&self, x: &Vector, per_dim: usize) -> Result<Vec<Vec<f64>>> {
        let m = self.manifold_dim();
        if m == 0 {
            return Ok(vec![Vec::new()]);
        }
        let axes: Vec<Vec<f64>> = if self.flat_chart() {
            let centre = self.coordinates(x)?;
            let q = self.point(&centre)?;
            let half = 2.0 * (x - q).norm() + 1.0;
            centre
                .iter()
                .map(|c| {
                    (0..per_dim)
                        .map(|k| c - half + 2.0 * half * k as f64 / (per_dim.max(2) - 1) as f64)
                        .collect()
                })
                .collect()
        } else {
            (0..m)
                .map(|i| {
                    if i + 1 == m {
                        (0..per_dim).map(|k| 2.0 * PI * k as f64 / per_dim as f64).collect()
                    } else {
                        let count = (per_dim / 2).max(2);
                        (0..count)
                            .map(|k| PI * (k as f64 + 0.5) / count as f64)
                            .collect()
                    }
                })
                .collect()
        };
        let total: usize = axes.iter().map(Vec::len).product();
        Ok((0..total)
            .map(|idx| {
                let mut rest = idx;
                axes.iter()
                    .map(|axis| {
                        let k = rest % axis.len();
                        rest /= axis.len();
                        axis[k]
                    })
                    .collect()
            })
            .collect())
    }
}
