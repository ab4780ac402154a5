//! Browser bindings: each entry point takes JSON text and returns JSON text.
//!
//! The `*_json` functions hold the logic and are plain Rust so they can be
//! tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use alphabeta::cones::{ConeFrame, Subspace};
use alphabeta::fields::{exp_map, trajectory, AField, BField, DomainBox, MetricField};
use alphabeta::lattice::sphere_lattice;
use alphabeta::linalg::{self, Matrix, Vector};
use alphabeta::submersion::{InducedNorm, LinearSubmersion};
use alphabeta::{AlphaBetaNorm, PhiSpec};
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

fn err(e: alphabeta::Error) -> String {
    e.to_string()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanarNorm {
    /// `[a11, a12, a22]`.
    a: [f64; 3],
    bvec: [f64; 2],
    phi: PhiSpec,
}

impl PlanarNorm {
    fn build(&self) -> Result<AlphaBetaNorm, String> {
        let [a11, a12, a22] = self.a;
        AlphaBetaNorm::new(
            linalg::matrix(2, 2, &[a11, a12, a12, a22]),
            linalg::vector(&self.bvec),
            self.phi.clone(),
        )
        .map_err(err)
    }
}

/// Indicatrix polygon plus the validity verdict of a planar norm.
pub fn indicatrix_json(input: &str, count: usize) -> Out {
    let norm = parse::<PlanarNorm>(input)?.build()?;
    let report = norm.validate();
    let points: Vec<[f64; 2]> = sphere_lattice(2, count.clamp(8, 4096))
        .iter()
        .filter_map(|u| norm.eval(u).ok().map(|f| [u[0] / f, u[1] / f]))
        .collect();
    let max_b = norm.phi().max_admissible_b();
    Ok(json!({
        "points": points,
        "valid": report.valid,
        "failures": report.failures,
        "alpha_b": norm.alpha_b(),
        "max_admissible_b": max_b,
    })
    .to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeInput {
    norm: PlanarNorm,
    /// Direction spanning the line `W`.
    w: [f64; 2],
}

/// The two orthogonal cone rays of a line `W`, and the induced norm of the
/// quotient by `W` evaluated on them.
pub fn cone_json(input: &str) -> Out {
    let inp = parse::<ConeInput>(input)?;
    let norm = inp.norm.build()?;
    let w = Subspace::new(2, vec![linalg::vector(&inp.w)]).map_err(err)?;
    let frame = ConeFrame::new(&norm, &w).map_err(err)?;
    // P kills W: its row is the Euclidean normal of w
    let p = LinearSubmersion::new(linalg::matrix(1, 2, &[-inp.w[1], inp.w[0]])).map_err(err)?;
    let induced = InducedNorm::new(&norm, &p).map_err(err)?;
    let mut rays = Vec::new();
    for y in [frame.horizontal[0].clone(), -&frame.horizontal[0]] {
        let v = frame.lift(&norm, &y).map_err(err)?;
        let f = norm.eval(&v).map_err(err)?;
        let unit = &v / f;
        let (_, ratio) = norm.alpha_and_ratio(&unit).map_err(err)?;
        let image = p.apply(&unit);
        rays.push(json!({
            "v": [unit[0], unit[1]],
            "ratio": ratio,
            "residual": frame.residual(&norm, &unit).map_err(err)?,
            "induced": induced.eval(&image).map_err(err)?,
        }));
    }
    Ok(json!({ "rays": rays, "w": inp.w }).to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FanInput {
    /// Conformal exponent `c` in `a = exp(2c|x|^2) I`.
    c: f64,
    /// Amplitude of the radial wind `B = amp x exp(-|x|^2)`.
    wind: f64,
    phi: PhiSpec,
    origin: [f64; 2],
    rays: usize,
    t: f64,
}

/// Unit-speed geodesics leaving `origin` in `rays` equally spaced directions.
pub fn geodesic_fan_json(input: &str) -> Out {
    let inp = parse::<FanInput>(input)?;
    let field = MetricField::new(
        2,
        DomainBox::cube(2, 3.0),
        AField::Conformal { a0: Matrix::identity(2, 2), c: inp.c },
        BField::Radial { amplitude: inp.wind, radius: 1.0 },
        inp.phi,
    )
    .map_err(err)?;
    let x = linalg::vector(&inp.origin);
    let steps = 200.0;
    let step = (inp.t.abs() / steps).max(1e-4);
    let mut curves = Vec::new();
    for u in sphere_lattice(2, inp.rays.clamp(1, 64)) {
        let f = field.eval(&x, &u).map_err(err)?;
        let v: Vector = u / f;
        let (points, run) = trajectory(&field, &x, &v, inp.t, step, 4).map_err(err)?;
        let line: Vec<[f64; 2]> = points.iter().map(|p| [p.x[0], p.x[1]]).collect();
        curves.push(json!({ "points": line, "left_domain": run.left_domain }));
    }
    // the time-t wavefront of the fan
    let mut front = Vec::new();
    for u in sphere_lattice(2, 90) {
        let f = field.eval(&x, &u).map_err(err)?;
        let run = exp_map(&field, &x, &(u / f), inp.t, step).map_err(err)?;
        front.push([run.state.x[0], run.state.x[1]]);
    }
    Ok(json!({ "curves": curves, "front": front }).to_string())
}

#[wasm_bindgen]
pub fn indicatrix(input: &str, count: usize) -> Result<String, JsValue> {
    indicatrix_json(input, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cone(input: &str) -> Result<String, JsValue> {
    cone_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn geodesic_fan(input: &str) -> Result<String, JsValue> {
    geodesic_fan_json(input).map_err(|e| JsValue::from_str(&e))
}
