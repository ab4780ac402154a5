//! Numerical checks of foliation properties on level-set foliations: leaf
//! equidistance, homothety closure and constant rank of endpoint maps.

use serde::{Deserialize, Serialize};

use crate::cones::{ConeFrame, Subspace};
use crate::error::{Error, Result};
use crate::fields::{
    distance_to_submanifold, exp_map, DistanceOptions, LevelFunction, MetricField,
    SubmanifoldDescriptor, DEFAULT_STEP,
};
use crate::linalg::{self, Matrix, Vector};
use crate::minkowski::AlphaBetaNorm;
use crate::parallel;
use crate::submersion::{kappa_and_h, LinearSubmersion};

/// Finite-difference step of endpoint-map Jacobians, in chart units.
pub const JACOBIAN_STEP: f64 = 1e-5;
/// Default relative SVD threshold for endpoint ranks.
pub const DEFAULT_SVD_TOL: f64 = 1e-6;
/// Half-width of the sample window on unbounded (flat) leaves.
pub const FLAT_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FoliationKind {
    /// Leaves `{F_c(x - c) = r}` for the norm at the center, or for `norm`
    /// when given.
    Indicatrix {
        #[serde(with = "linalg::as_array")]
        center: Vector,
        #[serde(skip_serializing_if = "Option::is_none")]
        norm: Option<AlphaBetaNorm>,
    },
    /// Leaves `{alpha_c(x - c) = r}`, with `alpha` taken from `norm` when given.
    ConcentricAlpha {
        #[serde(with = "linalg::as_array")]
        center: Vector,
        #[serde(skip_serializing_if = "Option::is_none")]
        norm: Option<AlphaBetaNorm>,
    },
    /// Leaves `{eta . x = r}`.
    ParallelAffine {
        #[serde(with = "linalg::as_array")]
        normal: Vector,
    },
}

/// JSON: `{"kind": "indicatrix" | "concentric_alpha", "center": [..], "norm"?: {..}}`
/// or `{"kind": "parallel_affine", "normal": [..]}`, plus an optional
/// `"singular_set": [[..], ..]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFoliation")]
pub struct FoliationDescriptor {
    #[serde(flatten)]
    pub kind: FoliationKind,
    #[serde(with = "linalg::as_arrays")]
    pub singular_set: Vec<Vector>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    Indicatrix,
    ConcentricAlpha,
    ParallelAffine,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFoliation {
    kind: KindTag,
    center: Option<Vec<f64>>,
    normal: Option<Vec<f64>>,
    norm: Option<AlphaBetaNorm>,
    singular_set: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawFoliation> for FoliationDescriptor {
    type Error = Error;

    fn try_from(raw: RawFoliation) -> Result<Self> {
        let missing = |what: &str| Error::InvalidInput(format!("foliation needs `{what}`"));
        let stray = |what: &str| Error::InvalidInput(format!("`{what}` does not apply to this foliation kind"));
        let kind = match raw.kind {
            KindTag::Indicatrix | KindTag::ConcentricAlpha => {
                if raw.normal.is_some() {
                    return Err(stray("normal"));
                }
                let center = linalg::vector(&raw.center.ok_or_else(|| missing("center"))?);
                if let Some(n) = &raw.norm {
                    if n.dim() != center.len() {
                        return Err(Error::DimensionMismatch { expected: center.len(), got: n.dim() });
                    }
                }
                if matches!(raw.kind, KindTag::Indicatrix) {
                    FoliationKind::Indicatrix { center, norm: raw.norm }
                } else {
                    FoliationKind::ConcentricAlpha { center, norm: raw.norm }
                }
            }
            KindTag::ParallelAffine => {
                if raw.center.is_some() {
                    return Err(stray("center"));
                }
                if raw.norm.is_some() {
                    return Err(stray("norm"));
                }
                let normal = linalg::vector(&raw.normal.ok_or_else(|| missing("normal"))?);
                if normal.iter().all(|&c| c == 0.0) {
                    return Err(Error::ZeroCovector);
                }
                FoliationKind::ParallelAffine { normal }
            }
        };
        let mut out = FoliationDescriptor::new(kind);
        if let Some(set) = raw.singular_set {
            out.singular_set = set.iter().map(|p| linalg::vector(p)).collect();
        }
        Ok(out)
    }
}

impl FoliationDescriptor {
    pub fn new(kind: FoliationKind) -> Self {
        let singular_set = match &kind {
            FoliationKind::Indicatrix { center, .. } | FoliationKind::ConcentricAlpha { center, .. } => {
                vec![center.clone()]
            }
            FoliationKind::ParallelAffine { .. } => Vec::new(),
        };
        FoliationDescriptor { kind, singular_set }
    }

    pub fn indicatrix(center: Vector) -> Self {
        Self::new(FoliationKind::Indicatrix { center, norm: None })
    }

    pub fn concentric_alpha(center: Vector) -> Self {
        Self::new(FoliationKind::ConcentricAlpha { center, norm: None })
    }

    pub fn parallel_affine(normal: Vector) -> Self {
        Self::new(FoliationKind::ParallelAffine { normal })
    }

    /// The leaf-level function in the given field.
    pub fn level_function(&self, field: &MetricField) -> Result<LevelFunction> {
        match &self.kind {
            FoliationKind::Indicatrix { center, norm } => Ok(LevelFunction::FinslerNorm {
                center: center.clone(),
                norm: match norm {
                    Some(n) => n.clone(),
                    None => field.norm_at(center)?,
                },
            }),
            FoliationKind::ConcentricAlpha { center, norm } => Ok(LevelFunction::AlphaNorm {
                center: center.clone(),
                a: match norm {
                    Some(n) => n.a().clone(),
                    None => field.norm_at(center)?.a().clone(),
                },
            }),
            FoliationKind::ParallelAffine { normal } => {
                if normal.len() != field.dim() {
                    return Err(Error::DimensionMismatch { expected: field.dim(), got: normal.len() });
                }
                Ok(LevelFunction::Linear { covector: normal.clone() })
            }
        }
    }

    /// The same leaves with the center norm fixed from `field`, so that the
    /// foliation survives a change of metric.
    pub fn pinned(&self, field: &MetricField) -> Result<Self> {
        let kind = match &self.kind {
            FoliationKind::Indicatrix { center, norm } => FoliationKind::Indicatrix {
                center: center.clone(),
                norm: Some(match norm {
                    Some(n) => n.clone(),
                    None => field.norm_at(center)?,
                }),
            },
            FoliationKind::ConcentricAlpha { center, norm } => FoliationKind::ConcentricAlpha {
                center: center.clone(),
                norm: Some(match norm {
                    Some(n) => n.clone(),
                    None => field.norm_at(center)?,
                }),
            },
            other => other.clone(),
        };
        Ok(FoliationDescriptor { kind, singular_set: self.singular_set.clone() })
    }

    pub fn leaf(&self, field: &MetricField, level: f64) -> Result<SubmanifoldDescriptor> {
        let leaf = SubmanifoldDescriptor::level_set(self.level_function(field)?, level);
        leaf.check()?;
        Ok(leaf)
    }

    pub fn level(&self, field: &MetricField, x: &Vector) -> Result<f64> {
        self.level_function(field)?.value(x)
    }

    /// Whether the leaf at `level` stays clear of the singular set by `margin`.
    pub fn is_regular(&self, field: &MetricField, level: f64, margin: f64) -> Result<bool> {
        let f = self.level_function(field)?;
        for s in &self.singular_set {
            if (f.value(s)? - level).abs() <= margin {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sample points on the leaf at `level`.
    pub fn leaf_samples(&self, field: &MetricField, level: f64, count: usize) -> Result<Vec<Vector>> {
        let leaf = self.leaf(field, level)?;
        leaf.sample_coordinates(count, FLAT_WINDOW)?
            .iter()
            .map(|c| leaf.point(c))
            .collect()
    }
}

/// Which of the two orthogonal cone rays of a hypersurface leaf to follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "choice", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transversal {
    /// The ray along which the level increases.
    #[default]
    Outward,
    Inward,
    /// The ray with the larger Euclidean inner product with `direction`.
    Seed {
        #[serde(with = "linalg::as_array")]
        direction: Vector,
    },
}

/// The F-unit orthogonal cone vector at `q` on `leaf` selected by `choice`.
pub fn transversal_at(
    field: &MetricField,
    leaf: &SubmanifoldDescriptor,
    q: &Vector,
    choice: &Transversal,
) -> Result<Vector> {
    let norm = field.norm_at(q)?;
    let tangents = leaf.tangents(q)?;
    let frame = ConeFrame::new(&norm, &Subspace::new(field.dim(), tangents)?)?;
    let gradient = match leaf.normals(q)?.as_slice() {
        [g] => g.clone(),
        _ => {
            return Err(Error::Unsupported("transversal choice needs a hypersurface leaf".into()))
        }
    };
    let axis = &frame.horizontal[0];
    let mut rays = Vec::with_capacity(2);
    for y in [axis.clone(), -axis] {
        let v = frame.lift(&norm, &y)?;
        rays.push(&v / norm.eval(&v)?);
    }
    let score = |v: &Vector| match choice {
        Transversal::Outward => gradient.dot(v),
        Transversal::Inward => -gradient.dot(v),
        Transversal::Seed { direction } => direction.dot(v),
    };
    let (s0, s1) = (score(&rays[0]), score(&rays[1]));
    // ties go to the lexicographically larger ray
    let pick = if s0 > s1 {
        0
    } else if s1 > s0 {
        1
    } else if rays[0].iter().zip(rays[1].iter()).find(|(a, b)| a != b).is_some_and(|(a, b)| a > b) {
        0
    } else {
        1
    };
    Ok(rays.swap_remove(pick))
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleDistance {
    #[serde(with = "linalg::as_array")]
    pub point: Vector,
    pub future: f64,
    pub past: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub level: f64,
    pub future_min: f64,
    pub future_max: f64,
    pub future_spread: f64,
    pub past_min: f64,
    pub past_max: f64,
    pub past_spread: f64,
    pub samples: Vec<SampleDistance>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistanceReport {
    pub base_level: f64,
    /// Foot points on the base leaf of the future minimizers.
    #[serde(with = "linalg::as_arrays")]
    pub base_plaque: Vec<Vector>,
    pub targets: Vec<TargetReport>,
    pub tolerance: f64,
    pub pass: bool,
    /// Reversibility at the center, for indicatrix foliations only.
    pub reversible: Option<bool>,
    /// `pass`, gated on reversibility for indicatrix foliations.
    pub sff: bool,
}

impl EquidistanceReport {
    pub fn max_spread(&self) -> f64 {
        self.targets
            .iter()
            .map(|t| t.future_spread.max(t.past_spread))
            .fold(0.0, f64::max)
    }
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Future and past distances from the base leaf to samples on each target leaf.
pub fn equidistance_check(
    field: &MetricField,
    fol: &FoliationDescriptor,
    base_level: f64,
    target_levels: &[f64],
    samples: usize,
    tol: f64,
    options: &DistanceOptions,
) -> Result<EquidistanceReport> {
    for &level in std::iter::once(&base_level).chain(target_levels) {
        if !fol.is_regular(field, level, tol)? {
            return Err(Error::HypothesisViolated(format!("leaf at level {level} is singular")));
        }
    }
    let base = fol.leaf(field, base_level)?;
    let mut targets = Vec::with_capacity(target_levels.len());
    let mut plaque = Vec::new();
    for &level in target_levels {
        let points = fol.leaf_samples(field, level, samples)?;
        let results = parallel::map(&points, |x| distance_to_submanifold(field, &base, x, options));
        let mut rows = Vec::with_capacity(points.len());
        for (x, d) in points.into_iter().zip(results) {
            let d = d?;
            plaque.push(d.future_foot.clone());
            rows.push(SampleDistance { point: x, future: d.future, past: d.past });
        }
        let (future_min, future_max) = spread(rows.iter().map(|r| r.future));
        let (past_min, past_max) = spread(rows.iter().map(|r| r.past));
        targets.push(TargetReport {
            level,
            future_min,
            future_max,
            future_spread: future_max - future_min,
            past_min,
            past_max,
            past_spread: past_max - past_min,
            samples: rows,
        });
    }
    let pass = targets
        .iter()
        .all(|t| t.future_spread <= tol && t.past_spread <= tol);
    let reversible = match &fol.kind {
        FoliationKind::Indicatrix { center, norm } => {
            let norm = match norm {
                Some(n) => n.clone(),
                None => field.norm_at(center)?,
            };
            let mut ok = true;
            for v in norm.sample_indicatrix(64)? {
                ok &= (norm.eval(&v)? - norm.eval(&-&v)?).abs() <= 1e-10;
            }
            Some(ok)
        }
        _ => None,
    };
    Ok(EquidistanceReport {
        base_level,
        base_plaque: plaque,
        targets,
        tolerance: tol,
        pass,
        reversible,
        sff: pass && reversible.unwrap_or(true),
    })
}

/// Whether `B` is orthogonal or tangent to the leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossCheckMode {
    /// `B` orthogonal to the leaves: `F` and `alpha` should both be equidistant.
    #[default]
    Horizontal,
    /// `B` tangent to the leaves: `F` and `kappa alpha` should both be
    /// equidistant, with `kappa = rho(beta/alpha on the cone)`.
    Vertical,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub mode: CrossCheckMode,
    pub finsler: EquidistanceReport,
    pub alpha: EquidistanceReport,
    pub finsler_pass: bool,
    pub alpha_pass: bool,
    /// The conformal factor in vertical mode.
    pub kappa: Option<f64>,
}

/// Runs [`equidistance_check`] for `F` and for the Riemannian comparison field.
#[allow(clippy::too_many_arguments)]
pub fn srf_cross_check(
    field: &MetricField,
    fol: &FoliationDescriptor,
    base_level: f64,
    target_levels: &[f64],
    samples: usize,
    tol: f64,
    mode: CrossCheckMode,
    options: &DistanceOptions,
) -> Result<CrossCheckReport> {
    let mut probes = fol.leaf_samples(field, base_level, samples)?;
    for &level in target_levels {
        probes.extend(fol.leaf_samples(field, level, samples)?);
    }
    let function = fol.level_function(field)?;
    let mut kappas = Vec::new();
    let mut max_b: f64 = 0.0;
    for p in &probes {
        let norm = field.norm_at(p)?;
        max_b = max_b.max(norm.alpha_b());
        let gradient = function.gradient(p)?;
        // a-unit normal of the leaf
        let a_inv = norm.a().clone().cholesky().ok_or(Error::SingularTensor)?.inverse();
        let normal = &a_inv * &gradient;
        let normal = &normal / norm.alpha(&normal);
        let along = norm.inner(&normal, norm.bvec());
        let across = norm.alpha(&(norm.bvec() - &normal * along));
        let scale = norm.alpha_b().max(1.0);
        match mode {
            CrossCheckMode::Horizontal => {
                if across > 1e-8 * scale {
                    return Err(Error::HypothesisViolated(format!(
                        "B is not orthogonal to the leaves at {:?}",
                        p.as_slice()
                    )));
                }
            }
            CrossCheckMode::Vertical => {
                if along.abs() > 1e-8 * scale {
                    return Err(Error::HypothesisViolated(format!(
                        "B is not tangent to the leaves at {:?}",
                        p.as_slice()
                    )));
                }
                let kappa = if norm.alpha_b() <= 1e-14 {
                    norm.phi().rho(0.0)?
                } else {
                    let sub = LinearSubmersion::new(Matrix::from_row_slice(1, gradient.len(), gradient.as_slice()))?;
                    kappa_and_h(&norm, &sub)?.kappa
                };
                kappas.push(kappa);
            }
        }
    }
    let (comparison, kappa) = match mode {
        CrossCheckMode::Horizontal => {
            // with B = 0 the field is Riemannian and phi' plays no role
            if max_b > 0.0 && !field.phi().derivative_nonvanishing(max_b) {
                return Err(Error::HypothesisViolated("phi' vanishes on the sampled range".into()));
            }
            (field.alpha_field(), None)
        }
        CrossCheckMode::Vertical => {
            let (lo, hi) = spread(kappas.iter().copied());
            if hi - lo > 1e-8 * hi.abs().max(1.0) {
                return Err(Error::Unsupported(
                    "vertical mode needs a constant conformal factor over the samples".into(),
                ));
            }
            let kappa = 0.5 * (lo + hi);
            (field.scaled_alpha_field(kappa)?, Some(kappa))
        }
    };
    let fol = &fol.pinned(field)?;
    let finsler = equidistance_check(field, fol, base_level, target_levels, samples, tol, options)?;
    let alpha = equidistance_check(&comparison, fol, base_level, target_levels, samples, tol, options)?;
    Ok(CrossCheckReport {
        mode,
        finsler_pass: finsler.pass,
        alpha_pass: alpha.pass,
        finsler,
        alpha,
        kappa,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomothetyReport {
    pub r: f64,
    pub lambda: f64,
    /// Leaf levels of the endpoints at radius `r`.
    pub levels_at_r: Vec<f64>,
    /// Leaf levels of the endpoints at radius `lambda r`.
    pub levels: Vec<f64>,
    pub spread_at_r: f64,
    pub spread: f64,
    pub pass: bool,
}

fn endpoint(
    field: &MetricField,
    leaf: &SubmanifoldDescriptor,
    q: &Vector,
    choice: &Transversal,
    t: f64,
) -> Result<Vector> {
    let xi = transversal_at(field, leaf, q, choice)?;
    let run = exp_map(field, q, &xi, t, DEFAULT_STEP)?;
    if run.left_domain {
        return Err(Error::OutOfDomain);
    }
    Ok(run.state.x)
}

/// Shoots orthogonal geodesics from the base leaf to radius `r` and `lambda r`
/// and measures the spread of the endpoints' leaf levels.
#[allow(clippy::too_many_arguments)]
pub fn homothety_check(
    field: &MetricField,
    fol: &FoliationDescriptor,
    base_level: f64,
    lambda: f64,
    r: f64,
    samples: usize,
    tol: f64,
    choice: &Transversal,
) -> Result<HomothetyReport> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidInput(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    if !fol.is_regular(field, base_level, 1e-12)? {
        return Err(Error::HypothesisViolated("base leaf is singular".into()));
    }
    let leaf = fol.leaf(field, base_level)?;
    let points = fol.leaf_samples(field, base_level, samples)?;
    let function = fol.level_function(field)?;
    let run = |t: f64| -> Result<Vec<f64>> {
        parallel::map(&points, |q| endpoint(field, &leaf, q, choice, t).and_then(|e| function.value(&e)))
            .into_iter()
            .collect()
    };
    let levels_at_r = run(r)?;
    let levels = run(lambda * r)?;
    let (lo_r, hi_r) = spread(levels_at_r.iter().copied());
    let (lo, hi) = spread(levels.iter().copied());
    Ok(HomothetyReport {
        r,
        lambda,
        spread_at_r: hi_r - lo_r,
        spread: hi - lo,
        pass: hi - lo <= tol && hi_r - lo_r <= tol,
        levels_at_r,
        levels,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RankSample {
    pub coordinates: Vec<f64>,
    #[serde(with = "linalg::as_array")]
    pub endpoint: Vector,
    pub level: f64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub r: f64,
    pub ranks: Vec<usize>,
    pub constant: bool,
    /// Spread of the endpoints' leaf levels.
    pub level_spread: f64,
    pub same_leaf: bool,
    pub samples: Vec<RankSample>,
}

/// Rank of the endpoint map `q -> exp_q(r xi(q))` along the base leaf.
///
/// Central differences in chart coordinates (step [`JACOBIAN_STEP`]); singular
/// values count when they exceed `svd_tol` times the largest singular value
/// of either the endpoint Jacobian or the chart Jacobian, so a map that
/// collapses the leaf reads as rank 0.
#[allow(clippy::too_many_arguments)]
pub fn endpoint_rank(
    field: &MetricField,
    fol: &FoliationDescriptor,
    base_level: f64,
    r: f64,
    samples: usize,
    svd_tol: f64,
    choice: &Transversal,
) -> Result<RankReport> {
    if !fol.is_regular(field, base_level, 1e-12)? {
        return Err(Error::HypothesisViolated("base leaf is singular".into()));
    }
    let leaf = fol.leaf(field, base_level)?;
    let function = fol.level_function(field)?;
    let coords = leaf.sample_coordinates(samples, FLAT_WINDOW)?;
    let m = leaf.manifold_dim();
    let n = field.dim();
    let eta = |theta: &[f64]| -> Result<Vector> {
        let q = leaf.point(theta)?;
        endpoint(field, &leaf, &q, choice, r)
    };
    let rows = parallel::map(&coords, |theta| -> Result<RankSample> {
        let center = eta(theta)?;
        let mut j_eta = Matrix::zeros(n, m);
        let mut j_q = Matrix::zeros(n, m);
        for k in 0..m {
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[k] += JACOBIAN_STEP;
            minus[k] -= JACOBIAN_STEP;
            j_eta.set_column(k, &((eta(&plus)? - eta(&minus)?) / (2.0 * JACOBIAN_STEP)));
            j_q.set_column(k, &((leaf.point(&plus)? - leaf.point(&minus)?) / (2.0 * JACOBIAN_STEP)));
        }
        let s_eta = linalg::singular_values(&j_eta);
        let s_q = linalg::singular_values(&j_q);
        let top = s_eta.first().copied().unwrap_or(0.0).max(s_q.first().copied().unwrap_or(0.0));
        let rank = s_eta.iter().filter(|&&s| s > svd_tol * top).count();
        Ok(RankSample {
            coordinates: theta.clone(),
            level: function.value(&center)?,
            endpoint: center,
            rank,
            singular_values: s_eta,
        })
    });
    let samples = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let ranks: Vec<usize> = samples.iter().map(|s| s.rank).collect();
    let (lo, hi) = spread(samples.iter().map(|s| s.level));
    Ok(RankReport {
        r,
        constant: ranks.windows(2).all(|w| w[0] == w[1]),
        ranks,
        level_spread: hi - lo,
        same_leaf: hi - lo <= 1e-6,
        samples,
    })
}
