//! Orthogonal cones of subspaces and the conical lift onto them.
//!
//! For a subspace `W`, the cone is `{v != 0 : g_v(v, w) = 0 for all w in W}`.
//! Writing `v = y + W c` with `y` in the `a`-orthogonal complement `H`, the
//! cone condition is the stationarity of `c -> F(y + W c)^2 / 2`, which is
//! strictly convex; the cone ray over `y` is its unique minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::sphere_lattice;
use crate::linalg::{self, split_orthonormal, Matrix, Vector};
use crate::minkowski::AlphaBetaNorm;
use crate::parallel;

/// Residual target for the cone equations, relative to `F(v)`.
const CONE_TOL: f64 = 1e-13;
const MAX_NEWTON: usize = 60;

/// A linear subspace `W` given by a spanning list of independent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSubspace", into = "RawSubspace")]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubspace {
    #[serde(default)]
    dim: Option<usize>,
    basis: Vec<Vec<f64>>,
}

impl TryFrom<RawSubspace> for Subspace {
    type Error = Error;

    fn try_from(raw: RawSubspace) -> Result<Self> {
        let ambient = match (raw.dim, raw.basis.first()) {
            (Some(n), _) => n,
            (None, Some(b)) => b.len(),
            (None, None) => {
                return Err(Error::InvalidInput("empty basis needs an explicit dim".into()))
            }
        };
        Subspace::new(ambient, raw.basis.iter().map(|b| linalg::vector(b)).collect())
    }
}

impl From<Subspace> for RawSubspace {
    fn from(s: Subspace) -> Self {
        RawSubspace {
            dim: Some(s.ambient),
            basis: s.basis.iter().map(|b| b.iter().copied().collect()).collect(),
        }
    }
}

impl Subspace {
    pub fn new(ambient: usize, basis: Vec<Vector>) -> Result<Self> {
        if let Some(b) = basis.iter().find(|b| b.len() != ambient) {
            return Err(Error::DimensionMismatch { expected: ambient, got: b.len() });
        }
        if basis.len() >= ambient {
            return Err(Error::InvalidInput(format!(
                "subspace of dimension {} is not proper in R^{ambient}",
                basis.len()
            )));
        }
        if !basis.is_empty() {
            let m = linalg::columns(&basis, ambient);
            let s = linalg::singular_values(&m);
            if s.last().copied().unwrap_or(0.0) <= 1e-10 * s[0] {
                return Err(Error::InvalidInput("subspace basis is linearly dependent".into()));
            }
        }
        Ok(Subspace { ambient, basis })
    }

    /// The zero subspace of `R^ambient`.
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn spanned_by(vectors: &[Vector]) -> Result<Self> {
        let ambient = vectors.first().map(|v| v.len()).ok_or_else(|| {
            Error::InvalidInput("spanned_by needs at least one vector".into())
        })?;
        Self::new(ambient, vectors.to_vec())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }
}

/// `a`-orthonormal bases of `W` and of its `a`-orthogonal complement `H`.
#[derive(Debug, Clone)]
pub struct ConeFrame {
    pub vertical: Vec<Vector>,
    pub horizontal: Vec<Vector>,
    vertical_matrix: Matrix,
}

impl ConeFrame {
    pub fn new(norm: &AlphaBetaNorm, w: &Subspace) -> Result<Self> {
        if w.ambient() != norm.dim() {
            return Err(Error::DimensionMismatch { expected: norm.dim(), got: w.ambient() });
        }
        let (vertical, horizontal) = split_orthonormal(norm.a(), w.basis(), 1e-10);
        let vertical_matrix = linalg::columns(&vertical, norm.dim());
        Ok(ConeFrame { vertical, horizontal, vertical_matrix })
    }

    /// `a`-orthogonal projection onto `H`.
    pub fn project_horizontal(&self, norm: &AlphaBetaNorm, v: &Vector) -> Vector {
        let mut out = v.clone();
        for e in &self.vertical {
            out.axpy(-norm.inner(e, v), e, 1.0);
        }
        out
    }

    /// `max_i |g_v(v, w_i)| / F(v)` over the `a`-orthonormal basis of `W`.
    pub fn residual(&self, norm: &AlphaBetaNorm, v: &Vector) -> Result<f64> {
        let ell = norm.legendre_components(v)?;
        let f = norm.eval(v)?;
        Ok(self
            .vertical
            .iter()
            .map(|w| ell.dot(w).abs())
            .fold(0.0, f64::max)
            / f)
    }

    /// The cone vector whose `a`-projection onto `H` is `y`.
    pub fn lift(&self, norm: &AlphaBetaNorm, y: &Vector) -> Result<Vector> {
        let ay = norm.alpha(y);
        if !(ay > 0.0) {
            return Err(Error::ZeroVector);
        }
        let off = self
            .vertical
            .iter()
            .map(|e| norm.inner(e, y).abs())
            .fold(0.0, f64::max);
        if off > 1e-8 * ay {
            return Err(Error::InvalidInput(
                "vector to lift is not in the a-orthogonal complement".into(),
            ));
        }
        if self.vertical.is_empty() {
            return Ok(y.clone());
        }
        let wm = &self.vertical_matrix;
        let energy = |v: &Vector| norm.eval(v).map(|f| 0.5 * f * f);

        let mut v = y.clone();
        let mut e = energy(&v)?;
        let mut last_residual = f64::INFINITY;
        for _ in 0..MAX_NEWTON {
            let ell = norm.legendre_components(&v)?;
            let grad = wm.transpose() * &ell;
            let f = (2.0 * e).sqrt();
            let rnorm = grad.amax();
            last_residual = rnorm / f;
            if last_residual <= CONE_TOL {
                return Ok(v);
            }
            let g = norm.tensor(&v)?;
            let hess = wm.transpose() * g * wm;
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&grad),
                None => grad.clone(),
            };
            let slope = grad.dot(&step);
            if slope <= 1e-13 * e {
                // predicted decrease is at rounding level: plain Newton step
                v -= wm * &step;
                e = energy(&v)?;
                continue;
            }
            let mut t = 1.0;
            loop {
                let trial = &v - wm * (&step * t);
                if let Ok(et) = energy(&trial) {
                    if et <= e - 1e-4 * t * slope || t < 1e-8 {
                        // accept; near convergence the decrease drowns in rounding
                        v = trial;
                        e = et;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    return Err(Error::NoConvergence {
                        what: "conical lift",
                        iterations: MAX_NEWTON,
                        residual: last_residual,
                    });
                }
            }
        }
        if last_residual <= 1e-10 {
            return Ok(v);
        }
        Err(Error::NoConvergence {
            what: "conical lift",
            iterations: MAX_NEWTON,
            residual: last_residual,
        })
    }
}

/// F-unit cone vectors over a lattice of `H` directions.
#[derive(Debug, Clone, Serialize)]
pub struct ConeSample {
    #[serde(with = "linalg::as_arrays")]
    pub vectors: Vec<Vector>,
    /// Orthogonality residual per vector, see [`ConeFrame::residual`].
    pub residuals: Vec<f64>,
    /// Lattice directions whose solve failed.
    pub dropped: Vec<usize>,
}

/// One CSV row of a cone export: `v, F(v), beta/alpha, residual`.
pub fn cone_rows(norm: &AlphaBetaNorm, sample: &ConeSample) -> Result<Vec<Vec<f64>>> {
    sample
        .vectors
        .iter()
        .zip(&sample.residuals)
        .map(|(v, r)| {
            let (_, ratio) = norm.alpha_and_ratio(v)?;
            let mut row: Vec<f64> = v.iter().copied().collect();
            row.extend([norm.eval(v)?, ratio, *r]);
            Ok(row)
        })
        .collect()
}

/// Samples the F-orthogonal cone of `w`.
///
/// `directions` points of a sphere lattice in `H` are lifted; when `H` is a
/// line the cone has exactly two rays regardless of `directions`.
pub fn orthogonal_cone(norm: &AlphaBetaNorm, w: &Subspace, directions: usize) -> Result<ConeSample> {
    let frame = ConeFrame::new(norm, w)?;
    let k = frame.horizontal.len();
    let ys: Vec<Vector> = sphere_lattice(k, directions.max(1))
        .into_iter()
        .map(|c| {
            frame
                .horizontal
                .iter()
                .zip(c.iter())
                .fold(Vector::zeros(norm.dim()), |acc, (h, ci)| acc + h * *ci)
        })
        .collect();
    let solved = parallel::map(&ys, |y| -> Result<(Vector, f64)> {
        let v = frame.lift(norm, y)?;
        let v = &v / norm.eval(&v)?;
        let r = frame.residual(norm, &v)?;
        Ok((v, r))
    });
    let mut out = ConeSample { vectors: Vec::new(), residuals: Vec::new(), dropped: Vec::new() };
    for (i, s) in solved.into_iter().enumerate() {
        match s {
            Ok((v, r)) => {
                out.vectors.push(v);
                out.residuals.push(r);
            }
            Err(_) => out.dropped.push(i),
        }
    }
    Ok(out)
}

/// Lifts `y` (in the `a`-orthogonal complement of `w`) onto the cone of `w`.
pub fn conical_lift(norm: &AlphaBetaNorm, w: &Subspace, y: &Vector) -> Result<Vector> {
    ConeFrame::new(norm, w)?.lift(norm, y)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub is_constant: bool,
    pub value: f64,
    pub spread: f64,
    pub samples: usize,
}

/// Spread of `beta/alpha` over the cone of `w`, for `B` in `w`.
pub fn ratio_constancy_check(
    norm: &AlphaBetaNorm,
    w: &Subspace,
    directions: usize,
) -> Result<RatioReport> {
    let frame = ConeFrame::new(norm, w)?;
    let off = frame.project_horizontal(norm, norm.bvec());
    if norm.alpha(&off) > 1e-10 {
        return Err(Error::HypothesisViolated(format!(
            "B is not in the subspace (distance {:e})",
            norm.alpha(&off)
        )));
    }
    let cone = orthogonal_cone(norm, w, directions)?;
    if !cone.dropped.is_empty() {
        return Err(Error::NoConvergence {
            what: "orthogonal cone",
            iterations: MAX_NEWTON,
            residual: f64::NAN,
        });
    }
    let ratios = cone
        .vectors
        .iter()
        .map(|v| norm.alpha_and_ratio(v).map(|(_, r)| r))
        .collect::<Result<Vec<f64>>>()?;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    Ok(RatioReport {
        is_constant: spread <= 1e-8,
        value: 0.5 * (max + min),
        spread,
        samples: ratios.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix, vector};
    use crate::phi::PhiSpec;

    fn e(n: usize, i: usize) -> Vector {
        Vector::from_fn(n, |k, _| (k == i) as u8 as f64)
    }

    #[test]
    fn euclidean_cone_is_complement_sphere() {
        let n = AlphaBetaNorm::euclidean(3).unwrap();
        let w = Subspace::new(3, vec![e(3, 2)]).unwrap();
        let cone = orthogonal_cone(&n, &w, 20).unwrap();
        assert_eq!(cone.vectors.len(), 20);
        for v in &cone.vectors {
            assert!(v[2].abs() < 1e-15 && (v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn randers_cone_two_rays() {
        let n = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.5, 0.0]), PhiSpec::randers())
            .unwrap();
        let w = Subspace::new(2, vec![e(2, 1)]).unwrap();
        let cone = orthogonal_cone(&n, &w, 64).unwrap();
        assert_eq!(cone.vectors.len(), 2);
        // oracle: dense angular scan for sign changes of g_v(v, e2)
        let mut roots = Vec::new();
        let m = 100_000;
        let g = |t: f64| n.legendre_components(&vector(&[t.cos(), t.sin()])).unwrap()[1];
        for k in 0..m {
            let (t0, t1) = (
                2.0 * std::f64::consts::PI * k as f64 / m as f64,
                2.0 * std::f64::consts::PI * (k + 1) as f64 / m as f64,
            );
            if g(t0) == 0.0 || g(t0).signum() != g(t1).signum() {
                roots.push(t0);
            }
        }
        assert_eq!(roots.len(), 2);
        for v in &cone.vectors {
            assert!(v[1].abs() < 1e-12);
            assert!((n.eval(v).unwrap() - 1.0).abs() < 1e-12);
        }
        let xs: Vec<f64> = cone.vectors.iter().map(|v| v[0]).collect();
        assert!(xs.iter().any(|x| (x - 1.0 / 1.5).abs() < 1e-12));
        assert!(xs.iter().any(|x| (x + 1.0 / 0.5).abs() < 1e-12));
    }

    #[test]
    fn lift_round_trip_and_homogeneity() {
        let a = matrix(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]);
        let n = AlphaBetaNorm::new(a, vector(&[0.2, -0.3, 0.25]), PhiSpec::matsumoto()).unwrap();
        let w = Subspace::new(3, vec![vector(&[1.0, 1.0, 0.0])]).unwrap();
        let frame = ConeFrame::new(&n, &w).unwrap();
        for h in &frame.horizontal {
            let y = h * 0.7 + &frame.horizontal[0] * 0.2;
            let v = frame.lift(&n, &y).unwrap();
            assert!((frame.project_horizontal(&n, &v) - &y).amax() < 1e-12);
            assert!(frame.residual(&n, &v).unwrap() < 1e-12);
            let v2 = frame.lift(&n, &(&y * 2.0)).unwrap();
            assert!((v2 - &v * 2.0).amax() < 1e-11);
        }
        let bad = vector(&[1.0, 1.0, 0.0]);
        assert!(frame.lift(&n, &bad).is_err());
        assert_eq!(frame.lift(&n, &Vector::zeros(3)), Err(Error::ZeroVector));
    }

    #[test]
    fn cone_of_zero_subspace_is_everything() {
        let n = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[0.3, 0.0]), PhiSpec::quadratic())
            .unwrap();
        let y = vector(&[0.3, -2.0]);
        assert_eq!(conical_lift(&n, &Subspace::zero(2), &y).unwrap(), y);
    }

    #[test]
    fn ratio_constancy() {
        let n = AlphaBetaNorm::new(
            Matrix::identity(3, 3),
            vector(&[0.0, 0.0, 0.4]),
            PhiSpec::randers(),
        )
        .unwrap();
        let w = Subspace::new(3, vec![e(3, 2)]).unwrap();
        let r = ratio_constancy_check(&n, &w, 64).unwrap();
        assert!(r.is_constant && r.samples == 64, "{r:?}");
        let other = Subspace::new(3, vec![e(3, 0)]).unwrap();
        assert!(matches!(
            ratio_constancy_check(&n, &other, 8),
            Err(Error::HypothesisViolated(_))
        ));
        let z = AlphaBetaNorm::euclidean(3).unwrap();
        let r = ratio_constancy_check(&z, &w, 16).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn subspace_validation() {
        assert!(Subspace::new(2, vec![e(2, 0), e(2, 1)]).is_err());
        assert!(Subspace::new(3, vec![e(3, 0), e(3, 0) * 2.0]).is_err());
        let s: Subspace = serde_json::from_str(r#"{"basis": [[0, 1, 0]]}"#).unwrap();
        assert_eq!((s.ambient(), s.dim()), (3, 1));
    }
}
