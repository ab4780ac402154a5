//! Generating functions `phi` of (alpha, beta)-norms.
//!
//! A [`PhiSpec`] is one member of a closed registry of families with hand-coded
//! first and second derivatives. Everything the rest of the crate needs from
//! `phi` (the scalar coefficients of the fundamental tensor, the Minkowski
//! validity criterion, the admissible radius) is computed here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_section_min;

/// Validity threshold: `Phi(s, b)` must exceed this everywhere on the sampled range.
pub const EPS_PHI: f64 = 1e-10;

const VALIDITY_GRID: usize = 201;
const POSITIVITY_GRID: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiFamily {
    /// `phi(s) = c`: the Riemannian case.
    Constant,
    /// `phi(s) = 1 + s`.
    Randers,
    /// `phi(s) = 1 / (1 - s)`.
    Matsumoto,
    /// `phi(s) = 1 + s^2`.
    Quadratic,
    /// `phi(s) = sum_k c_k s^k`.
    Polynomial,
}

/// A generating function together with its domain radius `b0`.
///
/// Every family is multiplied by `scale` (the constant value for the
/// `constant` family). Serialized as
/// `{"family": .., "coefficients": [..], "scale": .., "b0": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPhiSpec")]
pub struct PhiSpec {
    pub family: PhiFamily,
    pub coefficients: Vec<f64>,
    pub scale: f64,
    pub b0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhiSpec {
    family: PhiFamily,
    #[serde(default)]
    coefficients: Vec<f64>,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default = "one")]
    b0: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawPhiSpec> for PhiSpec {
    type Error = Error;

    fn try_from(raw: RawPhiSpec) -> Result<Self> {
        PhiSpec {
            family: raw.family,
            coefficients: raw.coefficients,
            scale: raw.scale,
            b0: raw.b0,
        }
        .checked()
    }
}

/// `(phi(s), phi'(s), phi''(s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Scalar coefficients derived from `phi` at `s = beta/alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiDerived {
    /// `phi - s phi'`
    pub lambda: f64,
    /// `phi * lambda`
    pub rho: f64,
    /// `phi phi'' + phi'^2`
    pub rho0: f64,
    /// `phi phi' - s rho0`
    pub rho1: f64,
    /// `lambda + (b^2 - s^2) phi''`
    #[serde(rename = "Phi")]
    pub big_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub b: f64,
    pub valid: bool,
    /// `phi > 0` on the sampled range.
    pub positive: bool,
    /// Minimum of `Phi(s, b')` over `|s| <= b' <= b`.
    pub min_phi: f64,
    pub argmin_s: f64,
    pub argmin_b: f64,
}

impl PhiSpec {
    pub fn constant(c: f64) -> Self {
        Self::family(PhiFamily::Constant).with_scale(c)
    }

    pub fn randers() -> Self {
        Self::family(PhiFamily::Randers)
    }

    pub fn matsumoto() -> Self {
        Self::family(PhiFamily::Matsumoto)
    }

    pub fn quadratic() -> Self {
        Self::family(PhiFamily::Quadratic)
    }

    /// `phi(s) = sum_k coefficients[k] s^k` on `(-b0, b0)`.
    pub fn polynomial(coefficients: Vec<f64>, b0: f64) -> Result<Self> {
        PhiSpec {
            family: PhiFamily::Polynomial,
            coefficients,
            scale: 1.0,
            b0,
        }
        .checked()
    }

    fn family(family: PhiFamily) -> Self {
        PhiSpec {
            family,
            coefficients: Vec::new(),
            scale: 1.0,
            b0: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_b0(mut self, b0: f64) -> Self {
        self.b0 = b0;
        self
    }

    fn checked(self) -> Result<Self> {
        if !(self.b0.is_finite() && self.b0 > 0.0) {
            return Err(Error::InvalidInput(format!("b0 must be positive, got {}", self.b0)));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        match self.family {
            PhiFamily::Polynomial if self.coefficients.is_empty() => Err(Error::InvalidInput(
                "polynomial family needs at least one coefficient".into(),
            )),
            PhiFamily::Polynomial => {
                if self.coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("non-finite coefficient".into()));
                }
                Ok(self)
            }
            _ if !self.coefficients.is_empty() => Err(Error::InvalidInput(format!(
                "coefficients are only meaningful for the polynomial family, not {:?}",
                self.family
            ))),
            _ => Ok(self),
        }
    }

    /// `phi`, `phi'`, `phi''` at `s`.
    pub fn eval(&self, s: f64) -> Result<PhiValue> {
        if !(s.abs() < self.b0) {
            return Err(Error::Domain { value: s, b0: self.b0 });
        }
        let c = self.scale;
        let (value, d1, d2) = match self.family {
            PhiFamily::Constant => (1.0, 0.0, 0.0),
            PhiFamily::Randers => (1.0 + s, 1.0, 0.0),
            PhiFamily::Matsumoto => {
                let q = 1.0 / (1.0 - s);
                (q, q * q, 2.0 * q * q * q)
            }
            PhiFamily::Quadratic => (1.0 + s * s, 2.0 * s, 2.0),
            PhiFamily::Polynomial => horner(&self.coefficients, s),
        };
        let out = PhiValue {
            value: c * value,
            d1: c * d1,
            d2: c * d2,
        };
        if !(out.value > 0.0) {
            return Err(Error::NonPositive { s, value: out.value });
        }
        Ok(out)
    }

    /// `lambda`, `rho`, `rho0`, `rho1` at `s` and `Phi(s, b)`; requires `|s| <= b < b0`.
    pub fn derived(&self, s: f64, b: f64) -> Result<PhiDerived> {
        if !(b < self.b0) {
            return Err(Error::Domain { value: b, b0: self.b0 });
        }
        if s.abs() > b {
            return Err(Error::InvalidInput(format!("|s| = {} exceeds b = {}", s.abs(), b)));
        }
        let p = self.eval(s)?;
        Ok(derived_from(p, s, b))
    }

    /// `lambda`, `rho`, `rho0`, `rho1` at `s` alone (`Phi` is reported at `b = |s|`).
    pub fn coefficients_at(&self, s: f64) -> Result<PhiDerived> {
        let p = self.eval(s)?;
        Ok(derived_from(p, s, s.abs()))
    }

    pub fn lambda(&self, s: f64) -> Result<f64> {
        let p = self.eval(s)?;
        Ok(p.value - s * p.d1)
    }

    pub fn rho(&self, s: f64) -> Result<f64> {
        let p = self.eval(s)?;
        Ok(p.value * (p.value - s * p.d1))
    }

    /// `phi'(r)/lambda(r) + phi'(-r)/lambda(-r)`, positive whenever `phi'` never vanishes.
    pub fn tangency_coefficient(&self, r: f64) -> Result<f64> {
        let plus = self.eval(r)?;
        let minus = self.eval(-r)?;
        let lp = plus.value - r * plus.d1;
        let lm = minus.value + r * minus.d1;
        Ok(plus.d1 / lp + minus.d1 / lm)
    }

    /// Whether `phi'` has no zero on `[-b, b]`.
    ///
    /// Exact for the closed-form families; sampled on 401 points for polynomials.
    pub fn derivative_nonvanishing(&self, b: f64) -> bool {
        match self.family {
            PhiFamily::Constant | PhiFamily::Quadratic => false,
            PhiFamily::Randers | PhiFamily::Matsumoto => true,
            PhiFamily::Polynomial => {
                let signs: Vec<f64> = linspace(-b, b, POSITIVITY_GRID)
                    .filter_map(|s| self.eval(s).ok().map(|p| p.d1))
                    .collect();
                signs.len() == POSITIVITY_GRID
                    && (signs.iter().all(|&d| d > 1e-12) || signs.iter().all(|&d| d < -1e-12))
            }
        }
    }

    /// Whether `phi` is even, which makes every induced norm reversible.
    pub fn is_even(&self) -> bool {
        match self.family {
            PhiFamily::Constant | PhiFamily::Quadratic => true,
            PhiFamily::Randers | PhiFamily::Matsumoto => false,
            PhiFamily::Polynomial => self
                .coefficients
                .iter()
                .skip(1)
                .step_by(2)
                .all(|&c| c == 0.0),
        }
    }

    /// Minimum of `Phi(s, b')` over `|s| <= b' <= b`.
    ///
    /// `Phi` is affine in `b'^2`, so for each `s` the inner minimum sits at
    /// `b' = |s|` when `phi''(s) >= 0` and at `b' = b` otherwise. The outer
    /// minimum over `s` uses a 201-point grid refined by golden section.
    pub fn validity(&self, b: f64) -> Result<ValidityReport> {
        if !(b >= 0.0) {
            return Err(Error::InvalidInput(format!("b must be non-negative, got {b}")));
        }
        if !(b < self.b0) {
            return Err(Error::Domain { value: b, b0: self.b0 });
        }

        let positive = linspace(-b, b, POSITIVITY_GRID).all(|s| self.eval(s).is_ok());
        if !positive {
            return Ok(ValidityReport {
                b,
                valid: false,
                positive: false,
                min_phi: f64::NAN,
                argmin_s: f64::NAN,
                argmin_b: f64::NAN,
            });
        }

        let inner = |s: f64| -> (f64, f64) {
            match self.eval(s) {
                Ok(p) => {
                    let lambda = p.value - s * p.d1;
                    if p.d2 >= 0.0 {
                        (lambda, s.abs())
                    } else {
                        (lambda + (b * b - s * s) * p.d2, b)
                    }
                }
                Err(_) => (f64::NEG_INFINITY, b),
            }
        };

        let grid: Vec<f64> = linspace(-b, b, VALIDITY_GRID).collect();
        let (imin, _) = grid
            .iter()
            .map(|&s| inner(s).0)
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

        let lo = grid[imin.saturating_sub(1)];
        let hi = grid[(imin + 1).min(grid.len() - 1)];
        let (mut s_min, mut m) = (grid[imin], inner(grid[imin]).0);
        if hi > lo {
            let (s_ref, m_ref) = golden_section_min(|s| inner(s).0, lo, hi, 1e-12);
            if m_ref < m {
                s_min = s_ref;
                m = m_ref;
            }
        }
        Ok(ValidityReport {
            b,
            valid: m > EPS_PHI,
            positive: true,
            min_phi: m,
            argmin_s: s_min,
            argmin_b: inner(s_min).1,
        })
    }

    /// Largest `b < b0` at which [`PhiSpec::validity`] holds, to absolute tolerance `1e-8`.
    ///
    /// The minimized set grows with `b`, so validity is monotone and bisection applies.
    pub fn max_admissible_b(&self) -> f64 {
        let valid = |b: f64| self.validity(b).map(|r| r.valid).unwrap_or(false);
        if !valid(0.0) {
            return 0.0;
        }
        let top = self.b0 * (1.0 - 1e-12);
        if valid(top) {
            return top;
        }
        let (mut lo, mut hi) = (0.0, top);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if valid(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn derived_from(p: PhiValue, s: f64, b: f64) -> PhiDerived {
    let lambda = p.value - s * p.d1;
    let rho0 = p.value * p.d2 + p.d1 * p.d1;
    PhiDerived {
        lambda,
        rho: p.value * lambda,
        rho0,
        rho1: p.value * p.d1 - s * rho0,
        big_phi: lambda + (b * b - s * s) * p.d2,
    }
}

fn horner(coefficients: &[f64], s: f64) -> (f64, f64, f64) {
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &c in coefficients.iter().rev() {
        d2 = d2 * s + 2.0 * d1;
        d1 = d1 * s + v;
        v = v * s + c;
    }
    (v, d1, d2)
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n && n > 1 { b } else { a + step * i as f64 })
}
