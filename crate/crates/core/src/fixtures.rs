//! Reference values stored as JSON and the cross-check against this crate.
//!
//! File layout: `{schema, fixtures: [{id, op, inputs, expected, precision, anchor}]}`.

use std::collections::HashSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::heat::{component_kernel, heat_kernel_1d, HeatTime};
use crate::hermite::{hermite_fn, MultiIndex, ParityVec};
use crate::imagpow::{beta_factor, kernel_t_route, kernel_zeta_route, ImagOrder};
use crate::measure::{half_ball_measure, zeta_rule, AlphaVec, HalfBallSpec};
use crate::specfun::{bessel_i_scaled, gamma_complex, laguerre, laguerre_deriv};
use crate::Complex64;

pub const FIXTURE_SCHEMA: &str = "dunkl-fixtures/1";

/// Minimum working precision, in decimal digits, of a stored value.
pub const MIN_PRECISION: u32 = 30;

/// A stored reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Expected {
    fn as_complex(self) -> Complex64 {
        match self {
            Self::Real(v) => Complex64::new(v, 0.0),
            Self::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub id: String,
    pub op: String,
    pub inputs: Value,
    pub expected: Expected,
    pub precision: u32,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSet {
    pub schema: String,
    pub fixtures: Vec<Fixture>,
}

impl FixtureSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != FIXTURE_SCHEMA {
            return Err(Error::Fixture(format!("schema `{}`, expected `{FIXTURE_SCHEMA}`", self.schema)));
        }
        let mut seen = HashSet::new();
        for f in &self.fixtures {
            if !seen.insert(f.id.as_str()) {
                return Err(Error::Fixture(format!("duplicate id `{}`", f.id)));
            }
            if f.precision < MIN_PRECISION {
                return Err(Error::Fixture(format!("`{}` stored at {} digits", f.id, f.precision)));
            }
            if tolerance(&f.op).is_none() {
                return Err(Error::Fixture(format!("`{}` has unknown op `{}`", f.id, f.op)));
            }
        }
        Ok(())
    }
}

/// Relative tolerance per operation: special functions `1e-12`, heat and
/// imaginary-power kernels `1e-8`, adaptive integrals `1e-6`.
pub fn tolerance(op: &str) -> Option<f64> {
    match op {
        "laguerre" | "laguerre_deriv" | "bessel_i_scaled" | "gamma_complex" | "hermite_fn" | "beta_factor" => Some(1e-12),
        "heat_kernel_1d" | "component_kernel" | "kernel_zeta_route" | "kernel_t_route" => Some(1e-8),
        "half_ball_measure" | "zeta_rule" => Some(1e-6),
        _ => None,
    }
}

fn inputs<T: DeserializeOwned>(f: &Fixture) -> Result<T> {
    serde_json::from_value(f.inputs.clone()).map_err(|e| Error::Fixture(format!("`{}` inputs: {e}", f.id)))
}

#[derive(Deserialize)]
struct Scalar3 {
    n: usize,
    a: f64,
    x: f64,
}

#[derive(Deserialize)]
struct BesselIn {
    nu: f64,
    z: f64,
}

#[derive(Deserialize)]
struct ComplexIn {
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
struct HermiteIn {
    n: Vec<usize>,
    alpha: AlphaVec,
    x: Vec<f64>,
}

#[derive(Deserialize)]
struct Heat1dIn {
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct ComponentIn {
    alpha: AlphaVec,
    eps: ParityVec,
    t: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Deserialize)]
struct BallIn {
    alpha: AlphaVec,
    center: Vec<f64>,
    radius: f64,
}

#[derive(Deserialize)]
struct BetaIn {
    d: usize,
    alpha_sum: f64,
    gamma: ImagOrder,
    zeta: f64,
}

#[derive(Deserialize)]
struct KernelIn {
    alpha: AlphaVec,
    eps: ParityVec,
    gamma: ImagOrder,
    x: Vec<f64>,
    y: Vec<f64>,
}

/// The crate's value for a fixture's operation and inputs.
pub fn evaluate(f: &Fixture) -> Result<Complex64> {
    let real = |v: f64| Ok(Complex64::new(v, 0.0));
    match f.op.as_str() {
        "laguerre" => {
            let i: Scalar3 = inputs(f)?;
            real(laguerre(i.n, i.a, i.x)?)
        }
        "laguerre_deriv" => {
            let i: Scalar3 = inputs(f)?;
            real(laguerre_deriv(i.n, i.a, i.x)?)
        }
        "bessel_i_scaled" => {
            let i: BesselIn = inputs(f)?;
            real(bessel_i_scaled(i.nu, i.z)?)
        }
        "gamma_complex" => {
            let i: ComplexIn = inputs(f)?;
            gamma_complex(Complex64::new(i.re, i.im))
        }
        "hermite_fn" => {
            let i: HermiteIn = inputs(f)?;
            real(hermite_fn(&MultiIndex::new(i.n), &i.alpha, &i.x))
        }
        "heat_kernel_1d" => {
            let i: Heat1dIn = inputs(f)?;
            real(heat_kernel_1d(i.alpha, &HeatTime::from_t(i.t)?, i.x, i.y)?)
        }
        "component_kernel" => {
            let i: ComponentIn = inputs(f)?;
            real(component_kernel(&i.alpha, &i.eps, &HeatTime::from_t(i.t)?, &i.x, &i.y)?)
        }
        "half_ball_measure" => {
            let i: BallIn = inputs(f)?;
            real(half_ball_measure(&i.alpha, &HalfBallSpec::new(i.center, i.radius)?)?.value)
        }
        "zeta_rule" => {
            // ∫_0^1 ζ^{-1/2} e^{-1/(4ζ)} dζ
            let rule = zeta_rule(16)?;
            real(rule.integrate(|z| (-0.25 / z[0]).exp() / z[0].sqrt()))
        }
        "beta_factor" => {
            let i: BetaIn = inputs(f)?;
            beta_factor(i.d, i.alpha_sum, i.gamma, i.zeta)
        }
        "kernel_zeta_route" => {
            let i: KernelIn = inputs(f)?;
            Ok(kernel_zeta_route(&i.alpha, &i.eps, i.gamma, &i.x, &i.y)?.value)
        }
        "kernel_t_route" => {
            let i: KernelIn = inputs(f)?;
            Ok(kernel_t_route(&i.alpha, &i.eps, i.gamma, &i.x, &i.y)?.value)
        }
        other => Err(Error::Fixture(format!("unknown op `{other}`"))),
    }
}

/// Comparison of one fixture with the crate's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub id: String,
    pub op: String,
    pub expected: Complex64,
    pub got: Option<Complex64>,
    pub rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn cross_check(set: &FixtureSet) -> Vec<FixtureOutcome> {
    set.fixtures
        .iter()
        .map(|f| {
            let expected = f.expected.as_complex();
            let tol = tolerance(&f.op).unwrap_or(0.0);
            match evaluate(f) {
                Ok(got) => {
                    let rel_err = (got - expected).norm() / expected.norm();
                    FixtureOutcome {
                        id: f.id.clone(),
                        op: f.op.clone(),
                        expected,
                        got: Some(got),
                        rel_err,
                        tolerance: tol,
                        passed: rel_err <= tol,
                        error: None,
                    }
                }
                Err(e) => FixtureOutcome {
                    id: f.id.clone(),
                    op: f.op.clone(),
                    expected,
                    got: None,
                    rel_err: f64::INFINITY,
                    tolerance: tol,
                    passed: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
