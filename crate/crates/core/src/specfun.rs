//! Scalar special functions: Laguerre polynomials, the regularised modified
//! Bessel function `I_ν(z)/z^ν`, and the Gamma function.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Below this argument `bessel_i_scaled` sums the power series, above it the
/// Hankel-type asymptotic expansion is used (for `ν² ≤ 30`; larger orders
/// push the crossover out to `ν²`).
pub const BESSEL_CROSSOVER: f64 = 30.0;

const BESSEL_SERIES_MIN_TERMS: usize = 60;
const BESSEL_SERIES_REL: f64 = 1e-17;

/// Lanczos parameter `g = 607/128` with 15 coefficients (Godfrey's set).
/// Relative accuracy is about 1e-15 on the right half-plane.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Laguerre polynomial `L_n^a(x)` by upward three-term recurrence in `n`.
pub fn laguerre(n: usize, a: f64, x: f64) -> Result<f64> {
    check_laguerre("laguerre", a, x)?;
    Ok(laguerre_unchecked(n, a, x))
}

/// `d/dx L_n^a(x) = -L_{n-1}^{a+1}(x)`.
pub fn laguerre_deriv(n: usize, a: f64, x: f64) -> Result<f64> {
    check_laguerre("laguerre_deriv", a, x)?;
    Ok(laguerre_deriv_unchecked(n, a, x))
}

fn check_laguerre(op: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a >= -1.0) {
        return Err(domain(op, format!("order a = {a} must satisfy a >= -1")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(op, format!("argument x = {x} must be finite and >= 0")));
    }
    Ok(())
}

pub(crate) fn laguerre_unchecked(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = a + 1.0 - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn laguerre_deriv_unchecked(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        -laguerre_unchecked(n - 1, a + 1.0, x)
    }
}

/// Fills `out[k] = L_k^a(x)` for `k = 0..out.len()`.
pub(crate) fn laguerre_table(a: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = a + 1.0 - x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
    }
}

/// The regularised Bessel function `I_ν(z) / z^ν` for `ν > -1`, `z >= 0`.
///
/// This is the entire even function `Σ_k (z/2)^{2k} / (2^ν k! Γ(k+ν+1))`; it is
/// strictly positive and equals `1/(2^ν Γ(ν+1))` at the origin. Overflows to
/// `+∞` past `z ≈ 700`; use [`bessel_i_scaled_exp`] when the caller can absorb
/// the exponential.
pub fn bessel_i_scaled(nu: f64, z: f64) -> Result<f64> {
    check_bessel(nu, z)?;
    Ok(bessel_ratio(nu, z, false))
}

/// `e^{-z} I_ν(z) / z^ν`, finite for every `z >= 0`.
pub fn bessel_i_scaled_exp(nu: f64, z: f64) -> Result<f64> {
    check_bessel(nu, z)?;
    Ok(bessel_ratio(nu, z, true))
}

fn check_bessel(nu: f64, z: f64) -> Result<()> {
    if !(nu > -1.0) {
        return Err(domain("bessel_i_scaled", format!("order nu = {nu} must exceed -1")));
    }
    if !(z >= 0.0) || z.is_nan() {
        return Err(domain("bessel_i_scaled", format!("argument z = {z} must be >= 0")));
    }
    Ok(())
}

fn crossover(nu: f64) -> f64 {
    BESSEL_CROSSOVER.max(nu * nu)
}

pub(crate) fn bessel_ratio(nu: f64, z: f64, exp_scaled: bool) -> f64 {
    if z <= crossover(nu) {
        let s = bessel_series(nu, z);
        if exp_scaled {
            s * (-z).exp()
        } else {
            s
        }
    } else {
        let a = bessel_asymptotic_exp(nu, z);
        if exp_scaled {
            a
        } else {
            a * z.exp()
        }
    }
}

/// `e^{-z} I_ν(z)/z^ν` for a fixed order, with the series' leading coefficient cached.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledBessel {
    nu: f64,
    lead: f64,
}

impl ScaledBessel {
    pub(crate) fn new(nu: f64) -> Self {
        Self { nu, lead: series_lead(nu) }
    }

    pub(crate) fn eval_exp(&self, z: f64) -> f64 {
        if z <= crossover(self.nu) {
            series_from(self.nu, self.lead, z) * (-z).exp()
        } else {
            bessel_asymptotic_exp(self.nu, z)
        }
    }
}

fn series_lead(nu: f64) -> f64 {
    (-(nu * std::f64::consts::LN_2) - ln_gamma_pos(nu + 1.0)).exp()
}

/// Power series for `I_ν(z)/z^ν`; all terms positive, so no cancellation.
pub(crate) fn bessel_series(nu: f64, z: f64) -> f64 {
    series_from(nu, series_lead(nu), z)
}

fn series_from(nu: f64, lead: f64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = lead;
    let mut sum = term;
    let max_terms = BESSEL_SERIES_MIN_TERMS.max((2.0 * z + nu.abs()) as usize + 10);
    for k in 0..max_terms {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + nu + 1.0));
        sum += term;
        if term < BESSEL_SERIES_REL * sum {
            break;
        }
    }
    sum
}

/// Large-argument expansion of `e^{-z} I_ν(z) / z^ν`.
pub(crate) fn bessel_asymptotic_exp(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * z);
        let mag = term.abs();
        if mag > last {
            break;
        }
        sum += term;
        last = mag;
        if mag < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt() * (-nu * z.ln()).exp()
}

/// `ln Γ(z)` via the Lanczos sum, valid for `Re z >= 1/2`.
fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let w = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += *c / (w + k as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    (w + 0.5) * t.ln() - t + acc.ln() + LN_SQRT_2PI
}

/// The complex Gamma function.
///
/// Lanczos approximation (g = 607/128, 15 terms) on `Re z >= 1/2`, reflection
/// `Γ(z) Γ(1-z) = π / sin(πz)` elsewhere.
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(domain("gamma_complex", format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(z.re));
    }
    if z.re < 0.5 {
        let s = (PI * z).sin();
        let g = ln_gamma_lanczos(1.0 - z).exp();
        Ok(PI / (s * g))
    } else {
        Ok(ln_gamma_lanczos(z).exp())
    }
}

/// Real Gamma function.
pub fn gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.round() {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        Ok(PI / ((PI * x).sin() * ln_gamma_pos(1.0 - x).exp()))
    } else {
        Ok(ln_gamma_pos(x).exp())
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("ln_gamma", format!("x = {x} must be positive")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps us on the Lanczos half-plane.
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    let w = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (w + k as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    (w + 0.5) * t.ln() - t + acc.ln() + LN_SQRT_2PI
}
