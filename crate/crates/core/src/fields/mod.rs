//! (alpha, beta)-metric fields `p -> (a(p), B(p), phi)` on an axis-aligned box.

mod distance;
mod spray;
mod submanifold;

pub use distance::{
    distance_by_shooting, distance_straight_line, distance_to_submanifold, DistanceMethod,
    DistanceMode, DistanceOptions, DistanceResult,
};
pub use spray::{
    exp_map, spray_accel, trajectory, GeodesicRun, GeodesicState, TrajectoryPoint, DEFAULT_STEP,
};
pub use submanifold::{LevelFunction, SubmanifoldDescriptor};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, is_symmetric, min_eigenvalue, Matrix, Vector};
use crate::minkowski::AlphaBetaNorm;
use crate::phi::PhiSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    /// The cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Self {
        DomainBox {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Largest `s` in `[0, 1]` with `x + s d` inside, for `x` inside.
    pub fn clip_segment(&self, x: &Vector, d: &Vector) -> f64 {
        let mut s: f64 = 1.0;
        for i in 0..x.len() {
            if d[i] > 0.0 {
                s = s.min((self.upper[i] - x[i]) / d[i]);
            } else if d[i] < 0.0 {
                s = s.min((self.lower[i] - x[i]) / d[i]);
            }
        }
        s.clamp(0.0, 1.0)
    }
}

/// The matrix field of `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum AField {
    Constant {
        #[serde(with = "linalg::as_square_flat")]
        a: Matrix,
    },
    /// `a(p) = exp(2 c |p|^2) a0`.
    Conformal {
        #[serde(with = "linalg::as_square_flat")]
        a0: Matrix,
        c: f64,
    },
}

/// The field of `B`, the `alpha`-dual vector of `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BField {
    Zero,
    Constant {
        #[serde(with = "linalg::as_array")]
        bvec: Vector,
    },
    /// `B(p) = amplitude * p * exp(-|p|^2 / radius^2)`.
    Radial { amplitude: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField", into = "RawField")]
pub struct MetricField {
    dim: usize,
    domain: DomainBox,
    a_field: AField,
    b_field: BField,
    phi: PhiSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    dim: usize,
    domain: DomainBox,
    a_field: AField,
    b_field: BField,
    phi: PhiSpec,
}

impl TryFrom<RawField> for MetricField {
    type Error = Error;

    fn try_from(r: RawField) -> Result<Self> {
        MetricField::new(r.dim, r.domain, r.a_field, r.b_field, r.phi)
    }
}

impl From<MetricField> for RawField {
    fn from(f: MetricField) -> Self {
        RawField {
            dim: f.dim,
            domain: f.domain,
            a_field: f.a_field,
            b_field: f.b_field,
            phi: f.phi,
        }
    }
}

/// Outcome of sampling [`AlphaBetaNorm::validate`] over the domain.
#[derive(Debug, Clone, Serialize)]
pub struct FieldReport {
    pub points_checked: usize,
    pub valid: bool,
    /// `(point, failures)` for every invalid sample.
    pub failures: Vec<(Vec<f64>, Vec<String>)>,
}

impl MetricField {
    pub fn new(dim: usize, domain: DomainBox, a_field: AField, b_field: BField, phi: PhiSpec) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {dim}")));
        }
        if domain.lower.len() != dim || domain.upper.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: domain.lower.len() });
        }
        if domain.lower.iter().zip(&domain.upper).any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidInput("domain box needs lower < upper in every axis".into()));
        }
        let base = match &a_field {
            AField::Constant { a } => a,
            AField::Conformal { a0, c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidInput("conformal exponent must be finite".into()));
                }
                a0
            }
        };
        if base.nrows() != dim || !base.is_square() {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: base.len() });
        }
        if !is_symmetric(base, 1e-12) || !(min_eigenvalue(base) > 0.0) {
            return Err(Error::InvalidInput("metric matrix must be symmetric positive definite".into()));
        }
        match &b_field {
            BField::Constant { bvec } if bvec.len() != dim => {
                return Err(Error::DimensionMismatch { expected: dim, got: bvec.len() })
            }
            BField::Radial { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::InvalidInput("radial field radius must be positive".into()))
            }
            _ => {}
        }
        Ok(MetricField { dim, domain, a_field, b_field, phi })
    }

    /// Constant field of a single Minkowski norm on `[-half_width, half_width]^n`.
    pub fn constant(norm: &AlphaBetaNorm, half_width: f64) -> Result<Self> {
        let b_field = if norm.bvec().iter().all(|&x| x == 0.0) {
            BField::Zero
        } else {
            BField::Constant { bvec: norm.bvec().clone() }
        };
        Self::new(
            norm.dim(),
            DomainBox::cube(norm.dim(), half_width),
            AField::Constant { a: norm.a().clone() },
            b_field,
            norm.phi().clone(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn a_field(&self) -> &AField {
        &self.a_field
    }

    pub fn b_field(&self) -> &BField {
        &self.b_field
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.len() == self.dim && self.domain.contains(x)
    }

    /// Whether the norm is the same at every point, so geodesics are straight lines.
    pub fn is_constant(&self) -> bool {
        matches!(self.a_field, AField::Constant { .. })
            && matches!(self.b_field, BField::Zero | BField::Constant { .. })
    }

    /// The Riemannian field of `alpha` alone (`phi = 1`).
    pub fn alpha_field(&self) -> MetricField {
        MetricField {
            phi: PhiSpec::constant(1.0),
            b_field: BField::Zero,
            ..self.clone()
        }
    }

    /// Same field with `a` multiplied by `factor > 0` and `phi = 1`.
    pub fn scaled_alpha_field(&self, factor: f64) -> Result<MetricField> {
        if !(factor > 0.0) {
            return Err(Error::InvalidInput("scale factor must be positive".into()));
        }
        let a_field = match &self.a_field {
            AField::Constant { a } => AField::Constant { a: a * factor },
            AField::Conformal { a0, c } => AField::Conformal { a0: a0 * factor, c: *c },
        };
        Ok(MetricField { a_field, ..self.alpha_field() })
    }

    pub fn a_at(&self, x: &Vector) -> Matrix {
        match &self.a_field {
            AField::Constant { a } => a.clone(),
            AField::Conformal { a0, c } => a0 * (2.0 * c * x.norm_squared()).exp(),
        }
    }

    pub fn bvec_at(&self, x: &Vector) -> Vector {
        match &self.b_field {
            BField::Zero => Vector::zeros(self.dim),
            BField::Constant { bvec } => bvec.clone(),
            BField::Radial { amplitude, radius } => {
                x * (amplitude * (-x.norm_squared() / (radius * radius)).exp())
            }
        }
    }

    /// The Minkowski norm on the tangent space at `x`.
    pub fn norm_at(&self, x: &Vector) -> Result<AlphaBetaNorm> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain);
        }
        Ok(self.norm_unchecked(x))
    }

    /// Norm at `x` without the domain test; finite-difference probes may step
    /// just outside the box.
    pub(crate) fn norm_unchecked(&self, x: &Vector) -> AlphaBetaNorm {
        AlphaBetaNorm::from_parts_unchecked(self.a_at(x), self.bvec_at(x), self.phi.clone())
    }

    /// `F(x, v)`.
    pub fn eval(&self, x: &Vector, v: &Vector) -> Result<f64> {
        self.norm_at(x)?.eval(v)
    }

    /// Validates the pointwise norm on a grid with `per_axis` points per axis.
    pub fn validate(&self, per_axis: usize) -> FieldReport {
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(self.dim as u32);
        let mut failures = Vec::new();
        for idx in 0..total {
            let mut rest = idx;
            let x = Vector::from_fn(self.dim, |i, _| {
                let k = rest % per_axis;
                rest /= per_axis;
                let t = k as f64 / (per_axis - 1) as f64;
                self.domain.lower[i] + t * (self.domain.upper[i] - self.domain.lower[i])
            });
            let report = self.norm_unchecked(&x).validate();
            if !report.valid {
                failures.push((x.iter().copied().collect(), report.failures));
            }
        }
        FieldReport { points_checked: total, valid: failures.is_empty(), failures }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn json_round_trip() {
        let text = r#"{"dim":2,"domain":{"lower":[-2,-2],"upper":[2,2]},
            "a_field":{"family":"conformal","a0":[1,0,0,1],"c":0.1},
            "b_field":{"family":"radial","amplitude":0.2,"radius":1.5},
            "phi":{"family":"randers"}}"#;
        let f: MetricField = serde_json::from_str(text).unwrap();
        assert!(!f.is_constant());
        let back: MetricField = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        let bad = text.replace("\"c\":0.1", "\"c\":0.1,\"extra\":1");
        assert!(serde_json::from_str::<MetricField>(&bad).is_err());
    }

    #[test]
    fn pointwise_norms() {
        let f = MetricField::new(
            2,
            DomainBox::cube(2, 1.0),
            AField::Conformal { a0: Matrix::identity(2, 2), c: 0.5 },
            BField::Zero,
            PhiSpec::constant(1.0),
        )
        .unwrap();
        let x = vector(&[0.5, 0.5]);
        let v = vector(&[1.0, 0.0]);
        assert!((f.eval(&x, &v).unwrap() - 0.5f64.exp().sqrt()).abs() < 1e-14);
        assert_eq!(f.eval(&vector(&[2.0, 0.0]), &v), Err(Error::OutOfDomain));
        assert!(f.validate(5).valid);
    }

    #[test]
    fn invalid_field_reported() {
        let f = MetricField::new(
            2,
            DomainBox::cube(2, 1.0),
            AField::Constant { a: Matrix::identity(2, 2) },
            BField::Constant { bvec: vector(&[0.6, 0.0]) },
            PhiSpec::matsumoto(),
        )
        .unwrap();
        let r = f.validate(3);
        assert!(!r.valid && r.failures.len() == 9);
    }

    #[test]
    fn clip() {
        let d = DomainBox::cube(2, 1.0);
        let s = d.clip_segment(&vector(&[0.0, 0.0]), &vector(&[4.0, 0.0]));
        assert!((s - 0.25).abs() < 1e-15);
    }
}
