//! Command dispatch: payload in, report (and optional CSV table) out.

use alphabeta::cones::{orthogonal_cone, ratio_constancy_check, ConeFrame, ConeSample, RatioReport, Subspace};
use alphabeta::export;
use alphabeta::fields::{
    distance_to_submanifold, trajectory, DistanceOptions, MetricField, SubmanifoldDescriptor,
    DEFAULT_STEP,
};
use alphabeta::foliation::{
    endpoint_rank, equidistance_check, homothety_check, srf_cross_check, CrossCheckMode,
    FoliationDescriptor, Transversal, DEFAULT_SVD_TOL,
};
use alphabeta::lattice::sphere_lattice;
use alphabeta::linalg::{self, Matrix, Vector};
use alphabeta::submersion::{
    average_metric, fiber_minimum, induced_norm_table, InducedNorm, LinearSubmersion, Recovered,
};
use alphabeta::{AlphaBetaNorm, Error};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::scenario::{Command, InputError, Scenario};

/// A finished command: verdict, JSON report and, where defined, a CSV table.
pub struct Artifact {
    pub pass: bool,
    pub report: Value,
    pub csv: Option<String>,
}

pub enum Failure {
    /// Bad scenario content: exit 2.
    Input(String),
    /// A computation that could not be completed: exit 1.
    Numeric(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::Domain { .. }
            | Error::ZeroVector
            | Error::ZeroCovector
            | Error::OutOfDomain => Failure::Input(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Run = Result<Artifact, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn vectors(raw: &[Vec<f64>]) -> Vec<Vector> {
    raw.iter().map(|v| linalg::vector(v)).collect()
}

fn check_dims(norm: &AlphaBetaNorm, vs: &[Vector]) -> Result<(), Failure> {
    match vs.iter().find(|v| v.len() != norm.dim()) {
        Some(v) => Err(Error::DimensionMismatch { expected: norm.dim(), got: v.len() }.into()),
        None => Ok(()),
    }
}

pub fn run(scenario: &Scenario, seed: u64) -> Run {
    match scenario.header.command {
        Command::Validate => validate(scenario.payload()?),
        Command::Tensor => tensor(scenario.payload()?),
        Command::Legendre => legendre(scenario.payload()?),
        Command::Cone => cone(scenario.payload()?),
        Command::Submersion => submersion(scenario.payload()?, seed),
        Command::Average => average(scenario.payload()?, seed),
        Command::Geodesic => geodesic(scenario.payload()?),
        Command::Distance => distance(scenario.payload()?),
        Command::Foliation => foliation(scenario.payload()?),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidatePayload {
    norm: Option<AlphaBetaNorm>,
    field: Option<MetricField>,
    /// Grid points per axis for field validation.
    #[serde(default = "default_per_axis")]
    per_axis: usize,
}

fn default_per_axis() -> usize {
    5
}

fn validate(p: ValidatePayload) -> Run {
    match (p.norm, p.field) {
        (Some(norm), None) => {
            let report = norm.validate();
            Ok(Artifact { pass: report.valid, report: to_value(&report), csv: None })
        }
        (None, Some(field)) => {
            let report = field.validate(p.per_axis);
            Ok(Artifact { pass: report.valid, report: to_value(&report), csv: None })
        }
        _ => Err(Failure::Input("payload: give exactly one of `norm` or `field`".into())),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorPayload {
    norm: AlphaBetaNorm,
    vectors: Vec<Vec<f64>>,
    /// Allowed relative gap between the closed form and finite differences.
    #[serde(default = "default_tensor_tol")]
    tolerance: f64,
}

fn default_tensor_tol() -> f64 {
    1e-6
}

#[derive(Serialize)]
struct TensorRow {
    v: Vec<f64>,
    f: f64,
    g: Vec<Vec<f64>>,
    fd_relative_error: f64,
    min_eigenvalue: f64,
}

fn tensor(p: TensorPayload) -> Run {
    let vs = vectors(&p.vectors);
    check_dims(&p.norm, &vs)?;
    let n = p.norm.dim();
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for v in &vs {
        let g = p.norm.tensor(v)?;
        let fd = p.norm.fundamental_tensor_fd(v)?.g;
        let err = linalg::relative_difference(&g, &fd);
        let f = p.norm.eval(v)?;
        table.push(v.iter().copied().chain([f]).chain(linalg::to_row_major(&g)).chain([err]).collect());
        rows.push(TensorRow {
            v: v.iter().copied().collect(),
            f,
            g: g.row_iter().map(|r| r.iter().copied().collect()).collect(),
            fd_relative_error: err,
            min_eigenvalue: linalg::min_eigenvalue(&g),
        });
    }
    let worst = rows.iter().map(|r| r.fd_relative_error).fold(0.0, f64::max);
    let pd = rows.iter().all(|r| r.min_eigenvalue > 0.0);
    let mut header: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    header.push("F".into());
    for i in 1..=n {
        header.extend((1..=n).map(|j| format!("g{i}{j}")));
    }
    header.push("fd_error".into());
    Ok(Artifact {
        pass: worst <= p.tolerance && pd,
        report: json!({"samples": rows, "max_fd_relative_error": worst, "positive_definite": pd, "tolerance": p.tolerance}),
        csv: Some(export::csv_table(&header, &table)?),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LegendrePayload {
    norm: AlphaBetaNorm,
    #[serde(default)]
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    covectors: Vec<Vec<f64>>,
    /// Allowed round-trip error relative to the input size.
    #[serde(default = "default_legendre_tol")]
    tolerance: f64,
}

fn default_legendre_tol() -> f64 {
    1e-9
}

fn legendre(p: LegendrePayload) -> Run {
    let vs = vectors(&p.vectors);
    let ls = vectors(&p.covectors);
    check_dims(&p.norm, &vs)?;
    check_dims(&p.norm, &ls)?;
    let mut forward = Vec::new();
    let mut worst = 0.0_f64;
    for v in &vs {
        let ell = p.norm.legendre_components(v)?;
        let back = p.norm.legendre_inverse(&ell)?;
        let err = (&back - v).amax() / v.amax();
        worst = worst.max(err);
        forward.push(json!({"v": v.as_slice(), "ell": ell.as_slice(), "round_trip_error": err}));
    }
    let mut inverse = Vec::new();
    for ell in &ls {
        let v = p.norm.legendre_inverse(ell)?;
        let again = p.norm.legendre_components(&v)?;
        let err = (&again - ell).amax() / ell.amax();
        worst = worst.max(err);
        inverse.push(json!({"ell": ell.as_slice(), "v": v.as_slice(), "round_trip_error": err}));
    }
    Ok(Artifact {
        pass: worst <= p.tolerance,
        report: json!({"forward": forward, "inverse": inverse, "max_round_trip_error": worst, "tolerance": p.tolerance}),
        csv: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConePayload {
    norm: AlphaBetaNorm,
    /// Basis of the subspace `W`.
    w: Vec<Vec<f64>>,
    #[serde(default = "default_directions")]
    directions: usize,
    /// Allowed orthogonality residual and ratio spread.
    #[serde(default = "default_cone_tol")]
    tolerance: f64,
}

fn default_directions() -> usize {
    64
}

fn default_cone_tol() -> f64 {
    1e-8
}

#[derive(Serialize)]
struct ConeReport {
    sample: ConeSample,
    max_residual: f64,
    /// Present when `B` lies in `W`.
    ratio: Option<RatioReport>,
    tolerance: f64,
}

fn cone(p: ConePayload) -> Run {
    let n = p.norm.dim();
    let w = Subspace::new(n, vectors(&p.w))?;
    let sample = orthogonal_cone(&p.norm, &w, p.directions)?;
    let max_residual = sample.residuals.iter().copied().fold(0.0, f64::max);
    let frame = ConeFrame::new(&p.norm, &w)?;
    let off = frame.project_horizontal(&p.norm, p.norm.bvec());
    let ratio = if p.norm.alpha(&off) <= 1e-10 {
        Some(ratio_constancy_check(&p.norm, &w, p.directions)?)
    } else {
        None
    };
    let pass = sample.dropped.is_empty()
        && max_residual <= p.tolerance
        && ratio.as_ref().is_none_or(|r| r.spread <= p.tolerance);
    let csv = export::cone_csv(&p.norm, &sample)?;
    let report = ConeReport { sample, max_residual, ratio, tolerance: p.tolerance };
    Ok(Artifact { pass, report: to_value(&report), csv: Some(csv) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmersionPayload {
    norm: AlphaBetaNorm,
    /// Rows of the `k x n` submersion matrix.
    p: Vec<Vec<f64>>,
    #[serde(default = "default_directions")]
    samples: usize,
    /// Directions compared against the fiber-minimization oracle.
    #[serde(default = "default_fiber_checks")]
    fiber_checks: usize,
    #[serde(default = "default_submersion_tol")]
    tolerance: f64,
}

fn default_fiber_checks() -> usize {
    8
}

fn default_submersion_tol() -> f64 {
    1e-6
}

fn submersion(p: SubmersionPayload, seed: u64) -> Run {
    let k = p.p.len();
    let n = p.p.first().map_or(0, Vec::len);
    if k == 0 || p.p.iter().any(|r| r.len() != n) {
        return Err(Failure::Input("payload.p: rows must be non-empty and of equal length".into()));
    }
    let flat: Vec<f64> = p.p.concat();
    let sub = LinearSubmersion::new(linalg::matrix(k, n, &flat))?;
    if n != p.norm.dim() {
        return Err(Error::DimensionMismatch { expected: p.norm.dim(), got: n }.into());
    }
    let table = induced_norm_table(&p.norm, &sub, p.samples)?;
    let induced = InducedNorm::new(&p.norm, &sub)?;
    let mut fiber_error = 0.0_f64;
    for (i, y) in sphere_lattice(k, p.fiber_checks.max(1)).iter().enumerate() {
        let oracle = fiber_minimum(&p.norm, &sub, y, seed.wrapping_add(i as u64))?;
        fiber_error = fiber_error.max((induced.eval(y)? - oracle).abs() / oracle);
    }
    let recovered_ok = match &table.recovered {
        Some(Recovered::AlphaBeta(r)) => r.verified,
        Some(Recovered::Kappa(r)) => r.verified,
        None => true,
    };
    let csv = export::induced_csv(&table)?;
    Ok(Artifact {
        pass: fiber_error <= p.tolerance && recovered_ok,
        report: json!({"table": table, "fiber_relative_error": fiber_error, "tolerance": p.tolerance}),
        csv: Some(csv),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AveragePayload {
    norm: AlphaBetaNorm,
    #[serde(default = "default_quadrature")]
    quadrature: usize,
    #[serde(default)]
    normalize: bool,
    #[serde(default = "default_isometry_checks")]
    isometry_checks: usize,
    #[serde(default = "default_average_tol")]
    tolerance: f64,
}

fn default_quadrature() -> usize {
    alphabeta::submersion::DEFAULT_QUADRATURE
}

fn default_isometry_checks() -> usize {
    3
}

fn default_average_tol() -> f64 {
    1e-8
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn average(p: AveragePayload, seed: u64) -> Run {
    let g = average_metric(&p.norm, p.quadrature, p.normalize)?;
    let mut invariance = 0.0_f64;
    for i in 0..p.isometry_checks {
        let q = p.norm.sample_isometry(seed.wrapping_add(i as u64));
        invariance = invariance.max(linalg::relative_difference(&(q.transpose() * &g * &q), &g));
    }
    Ok(Artifact {
        pass: invariance <= p.tolerance,
        report: json!({"metric": rows(&g), "isometry_error": invariance, "tolerance": p.tolerance}),
        csv: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeodesicPayload {
    field: MetricField,
    x: Vec<f64>,
    v: Vec<f64>,
    t: f64,
    #[serde(default = "default_step")]
    step: f64,
    /// Record every this many steps.
    #[serde(default = "default_every")]
    every: usize,
    /// Allowed relative drift of `F(gamma')`.
    #[serde(default = "default_drift_tol")]
    tolerance: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_every() -> usize {
    10
}

fn default_drift_tol() -> f64 {
    1e-6
}

fn geodesic(p: GeodesicPayload) -> Run {
    let (points, run) = trajectory(&p.field, &linalg::vector(&p.x), &linalg::vector(&p.v), p.t, p.step, p.every)?;
    let f0 = points[0].f;
    let drift = points.iter().map(|q| (q.f - f0).abs() / f0).fold(0.0, f64::max);
    let csv = export::trajectory_csv(&points)?;
    Ok(Artifact {
        pass: drift <= p.tolerance,
        report: json!({"run": run, "drift": drift, "points": points, "tolerance": p.tolerance}),
        csv: Some(csv),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistancePayload {
    field: MetricField,
    submanifold: SubmanifoldDescriptor,
    point: Vec<f64>,
    #[serde(default)]
    options: DistanceOptions,
    /// Allowed orthogonality defect of the minimizers at their foot points.
    #[serde(default = "default_orthogonality_tol")]
    tolerance: f64,
}

fn default_orthogonality_tol() -> f64 {
    1e-6
}

fn distance(p: DistancePayload) -> Run {
    let d = distance_to_submanifold(&p.field, &p.submanifold, &linalg::vector(&p.point), &p.options)?;
    Ok(Artifact { pass: d.orthogonality <= p.tolerance, report: to_value(&d), csv: None })
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum FoliationCheck {
    Equidistance {
        base_level: f64,
        target_levels: Vec<f64>,
        #[serde(default = "default_fol_samples")]
        samples: usize,
        #[serde(default = "default_fol_tol")]
        tolerance: f64,
        #[serde(default)]
        options: DistanceOptions,
    },
    CrossCheck {
        base_level: f64,
        target_levels: Vec<f64>,
        #[serde(default = "default_fol_samples")]
        samples: usize,
        #[serde(default = "default_fol_tol")]
        tolerance: f64,
        #[serde(default)]
        mode: CrossCheckMode,
        #[serde(default)]
        options: DistanceOptions,
        /// Expected verdict of the Riemannian comparison (default: pass).
        #[serde(default = "default_true")]
        expect_alpha_pass: bool,
    },
    Homothety {
        base_level: f64,
        lambda: f64,
        r: f64,
        #[serde(default = "default_fol_samples")]
        samples: usize,
        #[serde(default = "default_fol_tol")]
        tolerance: f64,
        #[serde(default)]
        transversal: Transversal,
    },
    Rank {
        base_level: f64,
        r: f64,
        #[serde(default = "default_rank_samples")]
        samples: usize,
        #[serde(default = "default_svd_tol")]
        svd_tol: f64,
        #[serde(default)]
        transversal: Transversal,
        expected_rank: Option<usize>,
    },
}

fn default_fol_samples() -> usize {
    32
}

fn default_rank_samples() -> usize {
    16
}

fn default_fol_tol() -> f64 {
    1e-6
}

fn default_svd_tol() -> f64 {
    DEFAULT_SVD_TOL
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FoliationPayload {
    field: MetricField,
    foliation: FoliationDescriptor,
    check: FoliationCheck,
}

fn foliation(p: FoliationPayload) -> Run {
    let (field, fol) = (&p.field, &p.foliation);
    match p.check {
        FoliationCheck::Equidistance { base_level, target_levels, samples, tolerance, options } => {
            let r = equidistance_check(field, fol, base_level, &target_levels, samples, tolerance, &options)?;
            Ok(Artifact { pass: r.sff, csv: Some(export::equidistance_csv(&r)?), report: to_value(&r) })
        }
        FoliationCheck::CrossCheck {
            base_level,
            target_levels,
            samples,
            tolerance,
            mode,
            options,
            expect_alpha_pass,
        } => {
            let r = srf_cross_check(field, fol, base_level, &target_levels, samples, tolerance, mode, &options)?;
            Ok(Artifact {
                pass: r.finsler_pass && r.alpha_pass == expect_alpha_pass,
                csv: Some(export::equidistance_csv(&r.finsler)?),
                report: to_value(&r),
            })
        }
        FoliationCheck::Homothety { base_level, lambda, r, samples, tolerance, transversal } => {
            let rep = homothety_check(field, fol, base_level, lambda, r, samples, tolerance, &transversal)?;
            let table: Vec<Vec<f64>> = rep
                .levels_at_r
                .iter()
                .zip(&rep.levels)
                .enumerate()
                .map(|(i, (a, b))| vec![i as f64, *a, *b])
                .collect();
            let header = ["sample", "level_at_r", "level_at_lambda_r"].map(String::from);
            Ok(Artifact { pass: rep.pass, csv: Some(export::csv_table(&header, &table)?), report: to_value(&rep) })
        }
        FoliationCheck::Rank { base_level, r, samples, svd_tol, transversal, expected_rank } => {
            let rep = endpoint_rank(field, fol, base_level, r, samples, svd_tol, &transversal)?;
            let pass = rep.constant
                && rep.same_leaf
                && expected_rank.is_none_or(|k| rep.ranks.iter().all(|&x| x == k));
            Ok(Artifact { pass, csv: Some(export::rank_csv(&rep)?), report: to_value(&rep) })
        }
    }
}
