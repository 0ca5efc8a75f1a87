//! Heat kernel of the oscillator: Bessel closed form, spectral series and the
//! ζ-integral over the `Π` measures.
//!
//! Throughout, `ζ = tanh t`, so that `1/sinh 2t = (1-ζ²)/(2ζ)` and
//! `coth 2t = (1+ζ²)/(2ζ)`. The Gaussian factor and the Bessel growth are
//! combined into `-(x-y)²/(4ζ) - ζ(x+y)²/4` per coordinate, which keeps every
//! intermediate in range for small `t`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::hermite::{eigenvalue, hermite_1d_all, MultiIndex, ParityVec};
use crate::measure::{graded_pi_rule, pi_measure_rule, zeta_rule, AlphaVec, QuadRule};
use crate::specfun::{bessel_ratio, ScaledBessel};

/// A time `t > 0` together with `ζ = tanh t` and an accurate `1 - ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTime {
    t: f64,
    zeta: f64,
    gap: f64,
}

impl HeatTime {
    pub fn from_t(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain("HeatTime", format!("t = {t} must be positive and finite")));
        }
        let e = (-2.0 * t).exp();
        Ok(Self { t, zeta: t.tanh(), gap: 2.0 * e / (1.0 + e) })
    }

    pub fn from_zeta(zeta: f64) -> Result<Self> {
        Self::from_zeta_gap(zeta, 1.0 - zeta)
    }

    /// Builds from `ζ` and an independently accurate `1 - ζ`.
    pub fn from_zeta_gap(zeta: f64, gap: f64) -> Result<Self> {
        // ζ may round to 1 when the gap is below half an ulp; the gap stays exact
        if !(zeta > 0.0 && gap > 0.0 && zeta <= 1.0 && gap <= 1.0) {
            return Err(domain("HeatTime", format!("ζ = {zeta} must lie in (0,1)")));
        }
        let t = 0.5 * (zeta.ln_1p() - gap.ln());
        Ok(Self { t, zeta, gap })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `1 - ζ`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `1 - ζ²`.
    pub fn one_minus_zeta2(&self) -> f64 {
        self.gap * (1.0 + self.zeta)
    }

    /// `ln(1/sinh 2t) = ln((1-ζ²)/(2ζ))`.
    pub fn ln_inv_sinh2t(&self) -> f64 {
        self.one_minus_zeta2().ln() - (2.0 * self.zeta).ln()
    }

    /// `1/sinh 2t`.
    pub fn inv_sinh2t(&self) -> f64 {
        self.one_minus_zeta2() / (2.0 * self.zeta)
    }
}

/// `q_±(x,y,s) = ‖x‖² + ‖y‖² ± 2 Σ x_i y_i s_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPair {
    pub qplus: f64,
    pub qminus: f64,
}

pub fn q_pm(x: &[f64], y: &[f64], s: &[f64]) -> QPair {
    let base: f64 = x.iter().chain(y).map(|v| v * v).sum();
    let cross: f64 = x.iter().zip(y).zip(s).map(|((x, y), s)| 2.0 * x * y * s).sum();
    QPair { qplus: base + cross, qminus: base - cross }
}

/// Log of the common prefactor and the combined exponent for one coordinate:
/// returns `(ln factor, exponent, |u|)` with `u = xy/sinh 2t`.
fn axis_parts(a: f64, eps: u8, t: &HeatTime, x: f64, y: f64) -> (f64, f64, f64) {
    let z = t.zeta;
    let (ax, ay) = (x.abs(), y.abs());
    let expo = -(ax - ay).powi(2) / (4.0 * z) - z * (ax + ay).powi(2) / 4.0;
    let order = a + eps as f64;
    let ln_f = -std::f64::consts::LN_2 + t.ln_inv_sinh2t() * (1.0 + order);
    (ln_f, expo, (x * y).abs() * t.inv_sinh2t())
}

/// One factor of the component kernel, `G_t^{a,ε}(x, y)` in dimension one.
/// For `ε = 1` this is odd in each argument.
pub fn component_1d(a: f64, eps: u8, t: &HeatTime, x: f64, y: f64) -> f64 {
    let (ln_f, expo, u) = axis_parts(a, eps, t, x, y);
    let order = a + eps as f64;
    let s = bessel_ratio(order, u, true);
    let lead = if eps == 1 { x * y } else { 1.0 };
    lead * (ln_f + expo).exp() * s
}

/// `e^{-u} ∫ (1+s) e^{-us} Π_a(ds) = e^{-u} (I_a(u) - I_{a+1}(u)) / u^a`.
///
/// This is what remains of the two parity components when `xy < 0`; for
/// `u > 1` their difference cancels badly (completely at `a = -1/2`), so the
/// positive integral is evaluated on a graded rule instead.
fn opposite_sign_factor(a: f64, u: f64) -> f64 {
    if u <= 1.0 {
        return bessel_ratio(a, u, true) - u * bessel_ratio(a + 1.0, u, true);
    }
    let rule = graded_pi_rule(a, (u.log2().ceil() as usize + 6).max(8), 16).expect("a ≥ -1/2");
    (0..rule.len())
        .map(|k| {
            let g = rule.gaps(k, -1.0, 1.0).0;
            rule.weights()[k] * g * (-u * g).exp()
        })
        .sum()
}

/// `G_t^a(x, y)` on the real line.
pub fn heat_kernel_1d(a: f64, t: &HeatTime, x: f64, y: f64) -> Result<f64> {
    if !(a >= -0.5) {
        return Err(domain("heat_kernel_1d", format!("order {a} must satisfy α ≥ -1/2")));
    }
    if x * y >= 0.0 {
        return Ok(component_1d(a, 0, t, x, y) + component_1d(a, 1, t, x, y));
    }
    let (ln_f, expo, u) = axis_parts(a, 0, t, x, y);
    Ok((ln_f + expo).exp() * opposite_sign_factor(a, u))
}

/// `G_t^α(x, y)` on `ℝ^d × ℝ^d` as a product of one-dimensional kernels.
pub fn heat_kernel(alpha: &AlphaVec, t: &HeatTime, x: &[f64], y: &[f64]) -> Result<f64> {
    alpha.check_dim(x.len())?;
    alpha.check_dim(y.len())?;
    alpha.as_slice().iter().zip(x.iter().zip(y)).map(|(a, (x, y))| heat_kernel_1d(*a, t, *x, *y)).product()
}

/// Component kernel `G_t^{α,ε}(x, y)` from the Bessel closed form.
pub fn component_kernel(alpha: &AlphaVec, eps: &ParityVec, t: &HeatTime, x: &[f64], y: &[f64]) -> Result<f64> {
    alpha.check_dim(x.len())?;
    alpha.check_dim(y.len())?;
    alpha.check_dim(eps.dim())?;
    Ok((0..x.len()).map(|i| component_1d(alpha.get(i), eps.get(i), t, x[i], y[i])).product())
}

/// A truncated spectral sum and the number of degree shells used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub shells: usize,
}

/// Shell tolerance of [`heat_kernel_series`].
pub const SERIES_TOL: f64 = 1e-12;

/// `Σ_m e^{-t λ_m} Σ_{|n|=m} h_n(x) h_n(y)`, optionally restricted to `N_ε`.
///
/// Shell sums are formed by convolving per-axis products `h_k(x_i) h_k(y_i)`.
/// Summation stops once `e^{-2tm}` times the running magnitude falls below
/// [`SERIES_TOL`] and the last two shells are negligible.
pub fn heat_kernel_series(
    alpha: &AlphaVec,
    t: &HeatTime,
    x: &[f64],
    y: &[f64],
    eps: Option<&ParityVec>,
) -> Result<SeriesValue> {
    alpha.check_dim(x.len())?;
    alpha.check_dim(y.len())?;
    let d = alpha.dim();
    let tt = t.t();
    let mmax = ((SERIES_TOL.ln().abs() + 16.0) / (2.0 * tt)).ceil() as usize + 20;
    if mmax > 20_000 {
        return Err(domain("heat_kernel_series", format!("t = {tt} too small for the spectral series")));
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let hx = hermite_1d_all(alpha.get(i), x[i], mmax);
            let hy = hermite_1d_all(alpha.get(i), y[i], mmax);
            hx.iter()
                .zip(&hy)
                .enumerate()
                .map(|(k, (a, b))| match eps {
                    Some(e) if (k % 2) as u8 != e.get(i) => 0.0,
                    _ => a * b,
                })
                .collect()
        })
        .collect();
    // shells[m] = Σ_{|n|=m} Π p_i[n_i]
    let mut shells = axes[0].clone();
    for p in &axes[1..] {
        let mut next = vec![0.0; mmax + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            *slot = (0..=m).map(|k| shells[k] * p[m - k]).sum();
        }
        shells = next;
    }
    let offset = alpha.spectral_offset();
    let mut sum = 0.0;
    let mut quiet = 0;
    for (m, shell) in shells.iter().enumerate() {
        let term = (-tt * (2.0 * m as f64 + offset)).exp() * shell;
        sum += term;
        let decay = (-2.0 * tt * m as f64).exp();
        if term.abs() <= SERIES_TOL * sum.abs() * 1e-2 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if m > 2 && quiet >= 2 && decay * sum.abs() < SERIES_TOL * sum.abs().max(1.0) {
            return Ok(SeriesValue { value: sum, shells: m + 1 });
        }
    }
    Ok(SeriesValue { value: sum, shells: mmax + 1 })
}

/// How the `Π_{α+ε}` integral in the ζ-representation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiIntegration {
    /// Closed form `∫ e^{-us} Π_a(ds) = I_a(u)/u^a`.
    Closed,
    /// Gauss–Jacobi rule with the given number of nodes.
    Gauss(usize),
    /// Dyadically graded rule (`levels`, nodes per panel).
    Graded(usize, usize),
}

/// Per-axis `Π` rules for one multiplicity vector.
#[derive(Debug, Clone)]
pub struct PiRules {
    rules: Vec<AxisRule>,
}

#[derive(Debug, Clone)]
enum AxisRule {
    Closed(ScaledBessel),
    Quadrature(QuadRule),
}

impl PiRules {
    pub fn new(orders: &[f64], mode: PiIntegration) -> Result<Self> {
        let rules = orders
            .iter()
            .map(|&a| match mode {
                PiIntegration::Closed => Ok(AxisRule::Closed(ScaledBessel::new(a))),
                PiIntegration::Gauss(n) => pi_measure_rule(a, n).map(AxisRule::Quadrature),
                PiIntegration::Graded(levels, n) => graded_pi_rule(a, levels, n).map(AxisRule::Quadrature),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rules })
    }

    /// `e^{-u} ∫ e^{-us} Π_a(ds)` for axis `i`.
    pub fn scaled_laplace(&self, i: usize, u: f64) -> f64 {
        match &self.rules[i] {
            AxisRule::Closed(b) => b.eval_exp(u),
            AxisRule::Quadrature(rule) => (0..rule.len()).map(|k| rule.weights()[k] * (-u * rule.gaps(k, -1.0, 1.0).0).exp()).sum(),
        }
    }
}

/// `G_t^{α,ε}(x, y)` from the ζ-integral over `Π_{α+ε}`; the integrand is a
/// product over axes, so the `d`-dimensional integral is a product of 1-D ones.
pub fn component_kernel_zeta(
    alpha: &AlphaVec,
    eps: &ParityVec,
    t: &HeatTime,
    x: &[f64],
    y: &[f64],
    mode: PiIntegration,
) -> Result<f64> {
    alpha.check_dim(x.len())?;
    alpha.check_dim(y.len())?;
    let orders: Vec<f64> = (0..x.len()).map(|i| alpha.get(i) + eps.get(i) as f64).collect();
    let rules = PiRules::new(&orders, mode)?;
    Ok(component_with_rules(&orders, eps, t, x, y, &rules))
}

pub(crate) fn component_with_rules(
    orders: &[f64],
    eps: &ParityVec,
    t: &HeatTime,
    x: &[f64],
    y: &[f64],
    rules: &PiRules,
) -> f64 {
    let mut ln_pref = 0.0;
    let mut prod = 1.0;
    for i in 0..x.len() {
        let (ln_f, expo, u) = axis_parts(orders[i] - eps.get(i) as f64, eps.get(i), t, x[i], y[i]);
        ln_pref += ln_f + expo;
        let lead = if eps.get(i) == 1 { x[i] * y[i] } else { 1.0 };
        prod *= lead * rules.scaled_laplace(i, u);
    }
    ln_pref.exp() * prod
}

/// `∂_t G_t^{α,ε}(x, y)`.
///
/// Differentiating the ζ-representation gives
/// `-(d+|α|+|ε|)(1+ζ²)/ζ · G + (1-ζ²) ⟨q₊/(4ζ²) - q₋/4⟩ G`, where `⟨·⟩` is the
/// average against the normalised `Π` integrand. Per axis
/// `⟨1+s⟩ = 1 - u I_{a+1}(u)/(u I_a(u))`, so no quadrature is needed.
pub fn component_kernel_dt(alpha: &AlphaVec, eps: &ParityVec, t: &HeatTime, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = component_kernel(alpha, eps, t, x, y)?;
    Ok(g * log_derivative(alpha, eps, t, x, y))
}

/// `∂_t log G_t^{α,ε}(x, y)`.
pub fn log_derivative(alpha: &AlphaVec, eps: &ParityVec, t: &HeatTime, x: &[f64], y: &[f64]) -> f64 {
    let z = t.zeta();
    let w = t.one_minus_zeta2();
    let p = alpha.dim() as f64 + alpha.sum() + eps.weight() as f64;
    let mut qp = 0.0;
    let mut qm = 0.0;
    for i in 0..x.len() {
        let a = alpha.get(i) + eps.get(i) as f64;
        let (xi, yi) = (x[i], y[i]);
        let u = xi * yi * t.inv_sinh2t();
        let one_plus_s = if u == 0.0 { 1.0 } else { 1.0 - u * bessel_ratio(a + 1.0, u, true) / bessel_ratio(a, u, true) };
        let c = 2.0 * xi * yi * one_plus_s;
        qp += (xi - yi).powi(2) + c;
        qm += (xi + yi).powi(2) - c;
    }
    -p * (1.0 + z * z) / z + w * (qp / (4.0 * z * z) - qm / 4.0)
}

/// `∫_0^∞ |∂_t G_t^{α,ε}(x, y)| dt`, computed as `∫_0^1 |∂_t G| dζ/(1-ζ²)`.
pub fn der_est_integral(alpha: &AlphaVec, eps: &ParityVec, x: &[f64], y: &[f64]) -> Result<f64> {
    let rule = zeta_rule(16)?;
    der_est_integral_with(alpha, eps, x, y, &rule)
}

pub fn der_est_integral_with(
    alpha: &AlphaVec,
    eps: &ParityVec,
    x: &[f64],
    y: &[f64],
    rule: &QuadRule,
) -> Result<f64> {
    if x == y {
        return Err(crate::Error::Diagonal { op: "der_est_integral" });
    }
    let mut total = 0.0;
    for k in 0..rule.len() {
        let z = rule.nodes_flat()[k];
        let (_, gap) = rule.gaps(k, 0.0, 1.0);
        let t = HeatTime::from_zeta_gap(z, gap)?;
        let dg = component_kernel_dt(alpha, eps, &t, x, y)?;
        total += rule.weights()[k] * dg.abs() / t.one_minus_zeta2();
    }
    Ok(total)
}

/// Dominating expression `(xy)^ε ‖x-y‖^{-2(p+1)} + (xy)^ε ‖x+y‖² ‖x-y‖^{-2(p+2)}`,
/// `p = d + |α| + |ε|`.
pub fn der_est_bound(alpha: &AlphaVec, eps: &ParityVec, x: &[f64], y: &[f64]) -> f64 {
    let p = alpha.dim() as f64 + alpha.sum() + eps.weight() as f64;
    let xy: f64 = (0..x.len()).map(|i| if eps.get(i) == 1 { x[i] * y[i] } else { 1.0 }).product();
    let dm: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let dp: f64 = x.iter().zip(y).map(|(a, b)| (a + b).powi(2)).sum();
    xy * dm.powf(-(p + 1.0)) + xy * dp * dm.powf(-(p + 2.0))
}

/// `e^{-t λ_0} h_0(x)`: the semigroup applied to the ground state.
pub fn ground_state_decay(alpha: &AlphaVec, t: &HeatTime, x: &[f64]) -> f64 {
    let n0 = MultiIndex::new(vec![0; alpha.dim()]);
    (-t.t() * eigenvalue(&n0, alpha)).exp() * crate::hermite::hermite_fn(&n0, alpha, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn alpha(v: &[f64]) -> AlphaVec {
        AlphaVec::new(v.to_vec()).unwrap()
    }

    fn mehler(t: f64, x: f64, y: f64) -> f64 {
        let (s, c) = ((2.0 * t).sinh(), (2.0 * t).cosh());
        (2.0 * PI * s).powf(-0.5) * (-((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s)).exp()
    }

    #[test]
    fn time_round_trip() {
        for &z in &[1e-6, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-6] {
            let t = HeatTime::from_zeta(z).unwrap();
            let back = HeatTime::from_t(t.t()).unwrap();
            assert!((back.zeta() - z).abs() < 1e-14 * z.max(1e-2));
        }
        assert!(HeatTime::from_t(0.0).is_err());
        assert!(HeatTime::from_zeta(1.0).is_err());
    }

    #[test]
    fn q_examples() {
        let x = [0.4, 1.3];
        let q = q_pm(&x, &x, &[1.0, 1.0]);
        assert!((q.qplus - 4.0 * (0.16 + 1.69)).abs() < 1e-14 && q.qminus.abs() < 1e-14);
        let y = [2.0, 0.1];
        let q = q_pm(&x, &y, &[0.0, 0.0]);
        assert_eq!(q.qplus, q.qminus);
    }

    #[test]
    fn classical_mehler() {
        let a = -0.5;
        for &t in &[0.05, 0.3, 1.0, 4.0] {
            let ht = HeatTime::from_t(t).unwrap();
            for &(x, y) in &[(0.3, 1.2), (-1.0, 2.0), (2.5, 2.5), (0.0, -0.7)] {
                let g = heat_kernel_1d(a, &ht, x, y).unwrap();
                assert!(rel(g, mehler(t, x, y)) < 1e-10, "t={t} x={x} y={y}");
            }
        }
    }

    #[test]
    fn symmetric_and_positive() {
        let al = alpha(&[0.3, -0.5]);
        let t = HeatTime::from_t(0.7).unwrap();
        let (x, y) = ([0.2, 1.7], [2.9, 0.4]);
        assert_eq!(heat_kernel(&al, &t, &x, &y).unwrap(), heat_kernel(&al, &t, &y, &x).unwrap());
        for eps in ParityVec::all(2) {
            let g = component_kernel(&al, &eps, &t, &x, &y).unwrap();
            assert!(g > 0.0);
            assert_eq!(g, component_kernel(&al, &eps, &t, &y, &x).unwrap());
        }
    }

    #[test]
    fn components_sum_to_kernel() {
        let al = alpha(&[0.3, 1.1]);
        let t = HeatTime::from_t(0.4).unwrap();
        let (x, y) = ([0.5, 1.2], [1.5, 0.8]);
        let total: f64 = ParityVec::all(2).iter().map(|e| component_kernel(&al, e, &t, &x, &y).unwrap()).sum();
        assert!(rel(total, heat_kernel(&al, &t, &x, &y).unwrap()) < 1e-12);
    }

    #[test]
    fn series_matches_closed_form() {
        let al = alpha(&[0.5]);
        let t = HeatTime::from_t(0.3).unwrap();
        let s = heat_kernel_series(&al, &t, &[1.0], &[2.0], None).unwrap();
        assert!(rel(s.value, heat_kernel(&al, &t, &[1.0], &[2.0]).unwrap()) < 1e-10);
        let al = alpha(&[0.0, 0.7]);
        for eps in ParityVec::all(2) {
            let s = heat_kernel_series(&al, &t, &[0.6, 1.4], &[1.1, 0.3], Some(&eps)).unwrap();
            let c = component_kernel(&al, &eps, &t, &[0.6, 1.4], &[1.1, 0.3]).unwrap();
            assert!(rel(s.value, c) < 1e-10, "{eps:?}");
        }
    }

    #[test]
    fn zeta_form_matches_closed_form() {
        let al = alpha(&[-0.5, 0.8]);
        let t = HeatTime::from_t(0.25).unwrap();
        let (x, y) = ([1.4, 0.3], [2.2, 2.8]);
        for eps in ParityVec::all(2) {
            let c = component_kernel(&al, &eps, &t, &x, &y).unwrap();
            for mode in [PiIntegration::Closed, PiIntegration::Gauss(40), PiIntegration::Graded(30, 16)] {
                let z = component_kernel_zeta(&al, &eps, &t, &x, &y, mode).unwrap();
                assert!(rel(z, c) < 1e-12, "{mode:?} {eps:?}: {z} vs {c}");
            }
        }
    }

    #[test]
    fn time_derivative_matches_differences() {
        let al = alpha(&[0.2, -0.5]);
        let (x, y) = ([0.7, 1.9], [1.6, 0.4]);
        for eps in ParityVec::all(2) {
            for &t in &[0.05, 0.4, 1.5, 6.0] {
                let h = 1e-5 * t;
                let g = |s: f64| component_kernel(&al, &eps, &HeatTime::from_t(s).unwrap(), &x, &y).unwrap();
                let fd = (g(t + h) - g(t - h)) / (2.0 * h);
                let an = component_kernel_dt(&al, &eps, &HeatTime::from_t(t).unwrap(), &x, &y).unwrap();
                assert!(rel(an, fd) < 1e-5, "t={t} {eps:?}: {an} vs {fd}");
                if t >= 5.0 {
                    assert!(an < 0.0);
                }
            }
        }
    }

    #[test]
    fn ground_state_is_eigenfunction_of_semigroup() {
        let al = alpha(&[0.4]);
        let t = HeatTime::from_t(0.6).unwrap();
        let rule = crate::measure::weighted_quad_rule(&al, 60, 1.0).unwrap();
        let n0 = MultiIndex::new(vec![0]);
        for &x in &[0.3, -1.2, 2.0] {
            // ∫_ℝ = ∫_{ℝ₊}(f(y) + f(-y))
            let v = rule.integrate(|y| {
                let h = crate::hermite::hermite_fn(&n0, &al, y);
                heat_kernel(&al, &t, &[x], y).unwrap() * h + heat_kernel(&al, &t, &[x], &[-y[0]]).unwrap() * h
            });
            assert!(rel(v, ground_state_decay(&al, &t, &[x])) < 1e-8);
        }
    }

    #[test]
    fn der_est_examples() {
        let al = alpha(&[0.0]);
        let eps = ParityVec::zeros(1);
        let a = der_est_integral(&al, &eps, &[1.0], &[3.5]).unwrap();
        assert!(a.is_finite() && a > 0.0);
        let mut last = 0.0;
        for gap in [1.0, 0.5, 0.25, 0.125] {
            let v = der_est_integral(&al, &eps, &[1.0], &[1.0 + gap]).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(der_est_integral(&al, &eps, &[1.0], &[1.0]).is_err());
    }
}
