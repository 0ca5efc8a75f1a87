//! Weights, measures and quadrature.
//!
//! A [`QuadRule`] always integrates against the measure it was built for: the
//! density is folded into the weights, so `rule.integrate(f)` approximates
//! `∫ f dμ` directly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{gamma, ln_gamma_pos};

/// Multiplicity vector `α ∈ [-1/2, ∞)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AlphaVec {
    alpha: Vec<f64>,
    sum: f64,
}

impl AlphaVec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(domain("AlphaVec", "dimension must be at least 1"));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a >= -0.5) || !a.is_finite()) {
            return Err(domain("AlphaVec", format!("component {a} violates α ≥ -1/2")));
        }
        let sum = alpha.iter().sum();
        Ok(Self { alpha, sum })
    }

    /// `α = (a, …, a)` in dimension `d`.
    pub fn uniform(d: usize, a: f64) -> Result<Self> {
        Self::new(vec![a; d])
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// `|α| = Σ α_i`; negative when several components sit near `-1/2`.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn get(&self, i: usize) -> f64 {
        self.alpha[i]
    }

    /// Ground-state offset `2|α| + 2d` of the oscillator spectrum.
    pub fn spectral_offset(&self) -> f64 {
        2.0 * self.sum + 2.0 * self.dim() as f64
    }

    /// Homogeneity degree `2|α| + 2d` of `w_α⁺` balls (`w(B(λx,λr)) = λ^{…} w(B(x,r))`).
    pub fn homogeneity(&self) -> f64 {
        2.0 * self.sum + 2.0 * self.dim() as f64
    }

    /// Shifted vector `α + ε` with `ε` given as 0/1 entries.
    pub fn shifted(&self, shift: &[u8]) -> AlphaVec {
        let alpha: Vec<f64> = self.alpha.iter().zip(shift).map(|(a, e)| a + *e as f64).collect();
        let sum = alpha.iter().sum();
        AlphaVec { alpha, sum }
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            Err(Error::Dimension { expected: self.dim(), got })
        } else {
            Ok(())
        }
    }
}

impl TryFrom<Vec<f64>> for AlphaVec {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlphaVec> for Vec<f64> {
    fn from(a: AlphaVec) -> Self {
        a.alpha
    }
}

/// `w_α(x) = Π |x_j|^{2α_j+1}`.
pub fn weight(alpha: &AlphaVec, x: &[f64]) -> f64 {
    alpha
        .as_slice()
        .iter()
        .zip(x)
        .map(|(a, xi)| {
            let p = 2.0 * a + 1.0;
            if p == 0.0 {
                1.0
            } else {
                xi.abs().powf(p)
            }
        })
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleDomain {
    /// `ℝ₊^d` against `w_α⁺`, Gaussian-type integrands.
    HalfLineWeighted,
    /// `[-1,1]` against a Jacobi-type density.
    IntervalJacobi,
    /// The two point masses of `Π_{-1/2}`.
    AtomicPair,
    /// `(0,1)` in the ζ variable, graded at both ends.
    UnitIntervalZeta,
    /// A bounded box, composite Gauss–Legendre.
    Box,
}

/// Nodes and positive weights; the integration density is already in the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: RuleDomain,
    gaps: Option<Vec<(f64, f64)>>,
}

impl QuadRule {
    pub fn new(dim: usize, nodes: Vec<f64>, weights: Vec<f64>, domain: RuleDomain) -> Self {
        assert_eq!(nodes.len(), dim * weights.len(), "node/weight length mismatch");
        Self { dim, nodes, weights, domain, gaps: None }
    }

    /// 1-D rule that also records each node's exact distances `(s - lo, hi - s)`
    /// to the interval ends; `1 ± s` recomputed from `s` loses digits near `∓1`.
    pub fn with_gaps(nodes: Vec<f64>, weights: Vec<f64>, domain: RuleDomain, gaps: Vec<(f64, f64)>) -> Self {
        assert_eq!(nodes.len(), gaps.len());
        let mut r = Self::new(1, nodes, weights, domain);
        r.gaps = Some(gaps);
        r
    }

    /// Distances of node `i` to the left and right end of the rule's interval.
    pub fn gaps(&self, i: usize, lo: f64, hi: f64) -> (f64, f64) {
        match &self.gaps {
            Some(g) => g[i],
            None => (self.nodes[i] - lo, hi - self.nodes[i]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn domain(&self) -> RuleDomain {
        self.domain
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat node storage (`len() * dim()` entries); handy for 1-D rules.
    pub fn nodes_flat(&self) -> &[f64] {
        &self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Tensor product of 1-D rules.
    pub fn tensor(axes: &[QuadRule]) -> QuadRule {
        assert!(axes.iter().all(|r| r.dim == 1));
        let dim = axes.len();
        let count: usize = axes.iter().map(QuadRule::len).product();
        let mut nodes = Vec::with_capacity(count * dim);
        let mut weights = Vec::with_capacity(count);
        let mut idx = vec![0usize; dim];
        for _ in 0..count {
            let mut w = 1.0;
            for (axis, &i) in axes.iter().zip(&idx) {
                nodes.push(axis.nodes[i]);
                w *= axis.weights[i];
            }
            weights.push(w);
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        let domain = axes.first().map(|a| a.domain).unwrap_or(RuleDomain::Box);
        QuadRule::new(dim, nodes, weights, domain)
    }
}

/// Golub–Welsch: Gauss–Jacobi rule on `[-1,1]` for `(1-s)^a (1+s)^b`, `a, b > -1`.
pub fn jacobi_rule(a: f64, b: f64, n: usize) -> Result<QuadRule> {
    if !(a > -1.0 && b > -1.0) {
        return Err(domain("jacobi_rule", format!("exponents ({a}, {b}) must exceed -1")));
    }
    if n == 0 {
        return Err(domain("jacobi_rule", "at least one node required"));
    }
    let ab = a + b;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let off = if j == 1.0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * j + ab;
                (4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma_pos(a + 1.0) + ln_gamma_pos(b + 1.0)
        - ln_gamma_pos(ab + 2.0);
    let mu0 = ln_mu0.exp();
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadRule::new(1, nodes, weights, RuleDomain::IntervalJacobi))
}

/// Gauss–Legendre nodes on `[-1,1]`.
pub fn gauss_legendre(n: usize) -> QuadRule {
    jacobi_rule(0.0, 0.0, n).expect("n >= 1")
}

/// Composite Gauss–Legendre over consecutive panels `[breaks[i], breaks[i+1]]`.
pub fn composite_legendre(breaks: &[f64], npts: usize) -> QuadRule {
    let base = gauss_legendre(npts);
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * npts);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (s, wt) in base.iter() {
            nodes.push(mid + half * s[0]);
            weights.push(half * wt);
        }
    }
    QuadRule::new(1, nodes, weights, RuleDomain::Box)
}

/// Normalising constant `√π 2^a Γ(a+1/2)` of the `Π_a` density.
pub fn pi_density_norm(a: f64) -> f64 {
    PI.sqrt() * 2f64.powf(a) * gamma(a + 0.5).expect("a > -1/2")
}

/// Total mass of `Π_a`, which is `1/(2^a Γ(a+1))` for every `a ≥ -1/2`.
pub fn pi_total_mass(a: f64) -> f64 {
    (-(a * std::f64::consts::LN_2) - ln_gamma_pos(a + 1.0)).exp()
}

fn atomic_pair() -> QuadRule {
    let m = 1.0 / (2.0 * PI).sqrt();
    QuadRule::new(1, vec![-1.0, 1.0], vec![m, m], RuleDomain::AtomicPair)
}

/// Gauss rule for `Π_a(ds) = (1-s²)^{a-1/2} ds / (√π 2^a Γ(a+1/2))`; atomic at `a = -1/2`.
pub fn pi_measure_rule(a: f64, npts: usize) -> Result<QuadRule> {
    if !(a >= -0.5) {
        return Err(domain("pi_measure_rule", format!("order a = {a} must satisfy a ≥ -1/2")));
    }
    if a == -0.5 {
        return Ok(atomic_pair());
    }
    let mut rule = jacobi_rule(a - 0.5, a - 0.5, npts)?;
    let norm = pi_density_norm(a);
    rule.weights.iter_mut().for_each(|w| *w /= norm);
    Ok(rule)
}

/// Composite `Π_a` rule with dyadic panels graded toward both `s = ±1`.
///
/// The outermost panel on each side carries the endpoint factor `(1∓s)^{a-1/2}`
/// exactly through a Gauss–Jacobi rule; the remaining panels use Gauss–Legendre
/// against the density. This resolves integrands like `e^{-u(1+s)}` for `u` up to
/// roughly `2^levels`.
pub fn graded_pi_rule(a: f64, levels: usize, npts: usize) -> Result<QuadRule> {
    if !(a >= -0.5) {
        return Err(domain("graded_pi_rule", format!("order a = {a} must satisfy a ≥ -1/2")));
    }
    if a == -0.5 {
        return Ok(atomic_pair());
    }
    let b = a - 0.5;
    let norm = pi_density_norm(a);
    let gl = gauss_legendre(npts);
    let endpoint = jacobi_rule(0.0, b, npts)?;
    // Right half only, in σ = 1 + s ∈ (0, 1]; mirrored at the end.
    let mut sigma = Vec::new();
    let mut wts = Vec::new();
    let tip = 0.5f64.powi(levels as i32);
    // (0, tip]: σ = tip (1+v)/2, σ^b (2-σ)^b dσ = (tip/2)^{b+1} (1+v)^b (2-σ)^b dv
    let scale = (0.5 * tip).powf(b + 1.0);
    for (v, w) in endpoint.iter() {
        let s = 0.5 * tip * (1.0 + v[0]);
        sigma.push(s);
        wts.push(w * scale * (2.0 - s).powf(b));
    }
    let mut hi = tip;
    for _ in 0..levels {
        let lo = hi;
        hi = 2.0 * lo;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (v, w) in gl.iter() {
            let s = mid + half * v[0];
            sigma.push(s);
            wts.push(w * half * (s * (2.0 - s)).powf(b));
        }
    }
    let mut nodes = Vec::with_capacity(2 * sigma.len());
    let mut weights = Vec::with_capacity(2 * sigma.len());
    let mut gaps = Vec::with_capacity(2 * sigma.len());
    for (s, w) in sigma.iter().zip(&wts) {
        nodes.push(s - 1.0);
        weights.push(w / norm);
        gaps.push((*s, 2.0 - s));
    }
    for (s, w) in sigma.iter().zip(&wts).rev() {
        nodes.push(1.0 - s);
        weights.push(w / norm);
        gaps.push((2.0 - s, *s));
    }
    Ok(QuadRule::with_gaps(nodes, weights, RuleDomain::IntervalJacobi, gaps))
}

/// Generalised Gauss–Laguerre nodes `u_k` and log-weights for `u^a e^{-u}` on `(0,∞)`.
///
/// Nodes come from Golub–Welsch and are polished by Newton steps; the weights are
/// recomputed from `Γ(n+a+1) / (n! u [L_n^a'(u)]²)` in log form so that the tiny
/// weights far out keep full relative accuracy.
fn gauss_laguerre_log(a: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jm[(k, k)] = 2.0 * kf + a + 1.0;
        if k + 1 < n {
            let j = kf + 1.0;
            let off = (j * (j + a)).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let nf = n as f64;
    let eval = |u: f64| -> (f64, f64) {
        // (L_n, L_n') via the recurrence and the derivative identity
        let mut prev = 1.0;
        let mut cur = a + 1.0 - u;
        if n == 1 {
            return (cur, -1.0);
        }
        for k in 1..n {
            let k = k as f64;
            let next = ((2.0 * k + 1.0 + a - u) * cur - (k + a) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        (cur, (nf * cur - (nf + a) * prev) / u)
    };
    let ln_const = ln_gamma_pos(nf + a + 1.0) - ln_gamma_pos(nf + 1.0);
    let mut ln_w = Vec::with_capacity(n);
    for u in nodes.iter_mut() {
        for _ in 0..3 {
            let (l, dl) = eval(*u);
            let step = l / dl;
            *u -= step;
            if step.abs() <= 1e-16 * u.abs() {
                break;
            }
        }
        let (_, dl) = eval(*u);
        ln_w.push(ln_const - u.ln() - 2.0 * dl.abs().ln());
    }
    (nodes, ln_w)
}

/// 1-D rule for `∫_0^∞ g(x) x^{2a+1} dx`, exact when `g(x) = p(x²) e^{-x²/scale²}`
/// with `deg p ≤ 2 npts - 1`.
pub fn half_line_rule(a: f64, npts: usize, scale: f64) -> Result<QuadRule> {
    if !(a > -1.0) || npts == 0 || !(scale > 0.0) {
        return Err(domain("half_line_rule", "need a > -1, npts ≥ 1, scale > 0"));
    }
    let (u, ln_w) = gauss_laguerre_log(a, npts);
    let ln_pre = (2.0 * a + 2.0) * scale.ln() - std::f64::consts::LN_2;
    let nodes = u.iter().map(|u| scale * u.sqrt()).collect();
    let weights = u.iter().zip(&ln_w).map(|(u, lw)| (lw + u + ln_pre).exp()).collect();
    Ok(QuadRule::new(1, nodes, weights, RuleDomain::HalfLineWeighted))
}

/// Tensor-product rule for `∫_{ℝ₊^d} g dw_α⁺` (see [`half_line_rule`] for exactness).
pub fn weighted_quad_rule(alpha: &AlphaVec, npts: usize, scale: f64) -> Result<QuadRule> {
    let axes = alpha
        .as_slice()
        .iter()
        .map(|&a| half_line_rule(a, npts, scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadRule::tensor(&axes))
}

/// Composite Gauss–Legendre rule on the box `Π [lo_i, hi_i] ⊂ ℝ₊^d` against `w_α⁺`.
pub fn box_rule(alpha: &AlphaVec, lo: &[f64], hi: &[f64], panels: usize, npts: usize) -> Result<QuadRule> {
    alpha.check_dim(lo.len())?;
    alpha.check_dim(hi.len())?;
    let mut axes = Vec::with_capacity(lo.len());
    for i in 0..lo.len() {
        if !(lo[i] >= 0.0 && hi[i] > lo[i]) {
            return Err(domain("box_rule", format!("bad interval [{}, {}]", lo[i], hi[i])));
        }
        let breaks: Vec<f64> =
            (0..=panels).map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / panels as f64).collect();
        let mut r = composite_legendre(&breaks, npts);
        let p = 2.0 * alpha.get(i) + 1.0;
        for (x, w) in r.nodes.iter().zip(r.weights.iter_mut()) {
            *w *= x.powf(p);
        }
        axes.push(r);
    }
    Ok(QuadRule::tensor(&axes))
}

/// Default number of dyadic panels per endpoint of the ζ rule. Forty leave an
/// `O(1e-7)` error on `(1-ζ)^{-1/2}`-type ends; 48 bring it below `1e-8`.
pub const ZETA_PANELS: usize = 48;

/// Composite rule on `(0,1)` with `ZETA_PANELS` dyadic panels toward each end
/// and `npts` Gauss–Legendre points per panel.
pub fn zeta_rule(npts: usize) -> Result<QuadRule> {
    zeta_rule_with(ZETA_PANELS, npts)
}

pub fn zeta_rule_with(panels: usize, npts: usize) -> Result<QuadRule> {
    if npts < 8 {
        return Err(domain("zeta_rule", format!("npts = {npts} must be at least 8")));
    }
    // left half: [0, 2^-(P+1)], then [2^-(k+1), 2^-k] for k = P..1
    let mut breaks = vec![0.0];
    for k in (1..=panels + 1).rev() {
        breaks.push(0.5f64.powi(k as i32));
    }
    let left = composite_legendre(&breaks, npts);
    let mut nodes = left.nodes.clone();
    let mut weights = left.weights.clone();
    let mut gaps: Vec<(f64, f64)> = left.nodes.iter().map(|x| (*x, 1.0 - x)).collect();
    for (x, w) in left.nodes.iter().zip(&left.weights).rev() {
        nodes.push(1.0 - x);
        weights.push(*w);
        gaps.push((1.0 - x, *x));
    }
    Ok(QuadRule::with_gaps(nodes, weights, RuleDomain::UnitIntervalZeta, gaps))
}

/// Ball `B⁺(center, radius) = B(center, radius) ∩ ℝ₊^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfBallSpec {
    center: Vec<f64>,
    radius: f64,
}

impl HalfBallSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(domain("HalfBallSpec", "center must lie in the open positive orthant"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(domain("HalfBallSpec", format!("radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// A value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abserr: f64,
}

/// Default relative accuracy of [`half_ball_measure`].
pub const HALF_BALL_RTOL: f64 = 1e-9;

/// `w_α⁺(B⁺(x, r))` by nested adaptive Gauss–Kronrod quadrature.
///
/// Each coordinate is parametrised by `u = c + ρ sin θ` so chord ends carry no
/// square-root singularity; the innermost coordinate is integrated in closed
/// form. Kinks where an inner chord is clipped by the hyperplane `u = 0`
/// become explicit breakpoints.
pub fn half_ball_measure(alpha: &AlphaVec, spec: &HalfBallSpec) -> Result<Estimate> {
    half_ball_measure_tol(alpha, spec, HALF_BALL_RTOL)
}

pub fn half_ball_measure_tol(alpha: &AlphaVec, spec: &HalfBallSpec, rtol: f64) -> Result<Estimate> {
    alpha.check_dim(spec.center.len())?;
    let powers: Vec<f64> = alpha.as_slice().iter().map(|a| 2.0 * a + 1.0).collect();
    Ok(ball_orthant(&powers, &spec.center, spec.radius, rtol))
}

fn power_integral(p: f64, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(0.0);
    if hi <= lo {
        return 0.0;
    }
    (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0)
}

fn ball_orthant(powers: &[f64], center: &[f64], rho: f64, rtol: f64) -> Estimate {
    let (p0, c0) = (powers[0], center[0]);
    if powers.len() == 1 {
        return Estimate { value: power_integral(p0, c0 - rho, c0 + rho), abserr: 0.0 };
    }
    if c0 + rho <= 0.0 {
        return Estimate { value: 0.0, abserr: 0.0 };
    }
    let theta_lo = (-c0 / rho).max(-1.0).asin();
    let theta_hi = 0.5 * PI;
    let mut breaks = vec![theta_lo];
    let c1 = center[1];
    if c1 < rho {
        let t = (c1 / rho).acos();
        for cand in [-t, t] {
            if cand > theta_lo && cand < theta_hi {
                breaks.push(cand);
            }
        }
    }
    breaks.push(theta_hi);
    breaks.sort_by(f64::total_cmp);
    let inner_tol = rtol * 1e-2;
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let u = (c0 + rho * s).max(0.0);
        let r = rho * c;
        if r <= 0.0 {
            return 0.0;
        }
        let inner = ball_orthant(&powers[1..], &center[1..], r, inner_tol);
        rho * c * u.powf(p0) * inner.value
    };
    let mut total = Estimate { value: 0.0, abserr: 0.0 };
    for w in breaks.windows(2) {
        let e = adaptive_gk15(&f, w[0], w[1], 0.0, rtol);
        total.value += e.value;
        total.abserr += e.abserr;
    }
    total
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) on `[a, b]`.
pub fn adaptive_gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, atol: f64, rtol: f64) -> Estimate {
    let (v, e) = gk15(f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut value = v;
    let mut err = e;
    for _ in 0..400 {
        if err <= atol.max(rtol * value.abs()) || err < 1e-15 * value.abs() {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.total_cmp(&q.1 .3))
            .expect("nonempty");
        let (lo, hi, pv, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        value += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value = panels.iter().map(|p| p.2).sum();
    let abserr = panels.iter().map(|p| p.3).sum();
    Estimate { value, abserr }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn weight_examples() {
        let a = AlphaVec::uniform(3, -0.5).unwrap();
        assert_eq!(weight(&a, &[0.3, -7.0, 0.0]), 1.0);
        let a = AlphaVec::new(vec![0.5]).unwrap();
        assert_eq!(weight(&a, &[3.0]), 9.0);
        let a = AlphaVec::new(vec![0.0, 0.5]).unwrap();
        assert!((weight(&a, &[2.0, 3.0]) - 18.0).abs() < 1e-14);
    }

    #[test]
    fn weight_reflection_invariant() {
        let a = AlphaVec::new(vec![0.3, -0.5, 1.7]).unwrap();
        let x = [0.7, 1.3, 2.2];
        let base = weight(&a, &x);
        for mask in 0..8u32 {
            let y: Vec<f64> =
                x.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v }).collect();
            assert_eq!(weight(&a, &y), base);
        }
    }

    #[test]
    fn alpha_validation() {
        assert!(AlphaVec::new(vec![]).is_err());
        assert!(AlphaVec::new(vec![0.0, -0.6]).is_err());
        let a = AlphaVec::new(vec![-0.5, -0.5, 0.25]).unwrap();
        assert!((a.sum() + 0.75).abs() < 1e-15);
        assert_eq!(a.spectral_offset(), 2.0 * -0.75 + 6.0);
    }

    #[test]
    fn pi_rule_masses() {
        let r = pi_measure_rule(-0.5, 7).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r.total_mass() - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        // Π_{1/2} is the constant density 1/(√π √2 Γ(1)) on [-1,1]
        let r = pi_measure_rule(0.5, 3).unwrap();
        assert!((r.total_mass() - (2.0 / PI).sqrt()).abs() < 1e-14);
        let r = pi_measure_rule(0.0, 4).unwrap();
        assert!(r.integrate(|s| s[0]).abs() < 1e-15);
        assert!(pi_measure_rule(-0.51, 4).is_err());
    }

    #[test]
    fn pi_rule_recovers_beta_integral() {
        for &a in &[-0.3, 0.0, 0.5, 1.25, 3.0] {
            let r = pi_measure_rule(a, 10).unwrap();
            let beta = gamma(0.5).unwrap() * gamma(a + 0.5).unwrap() / gamma(a + 1.0).unwrap();
            assert!(rel(r.total_mass() * pi_density_norm(a), beta) < 1e-10, "a={a}");
            assert!(rel(r.total_mass(), pi_total_mass(a)) < 1e-12);
        }
    }

    #[test]
    fn pi_rule_polynomial_exactness() {
        // ∫ s^{2k} Π_a(ds) = Γ(k+1/2)Γ(a+1/2)/Γ(k+a+1) / (√π 2^a Γ(a+1/2))
        let a = 0.8;
        let n = 6;
        let r = pi_measure_rule(a, n).unwrap();
        for k in 0..n {
            let exact = gamma(k as f64 + 0.5).unwrap() / gamma(k as f64 + a + 1.0).unwrap()
                / (PI.sqrt() * 2f64.powf(a));
            let got = r.integrate(|s| s[0].powi(2 * k as i32));
            assert!(rel(got, exact) < 1e-12, "k={k}");
        }
    }

    #[test]
    fn graded_pi_rule_resolves_endpoint_peaks() {
        // ∫ e^{-u(1+s)} Π_a(ds) = e^{-u} I_a(u)/u^a
        for &a in &[0.0, 0.5, 1.3] {
            let r = graded_pi_rule(a, 30, 16).unwrap();
            assert!(rel(r.total_mass(), pi_total_mass(a)) < 1e-13);
            for &u in &[0.5, 40.0, 1e4, 1e7] {
                let got: f64 = (0..r.len()).map(|i| r.weights()[i] * (-u * r.gaps(i, -1.0, 1.0).0).exp()).sum();
                let exact = crate::specfun::bessel_i_scaled_exp(a, u).unwrap();
                assert!(rel(got, exact) < 1e-11, "a={a} u={u}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn weighted_rule_gaussian_integrals() {
        let a = AlphaVec::new(vec![-0.5]).unwrap();
        let r = weighted_quad_rule(&a, 10, 1.0).unwrap();
        assert!(rel(r.integrate(|x| (-x[0] * x[0]).exp()), PI.sqrt() / 2.0) < 1e-14);
        let a = AlphaVec::new(vec![0.0]).unwrap();
        let r = weighted_quad_rule(&a, 10, 1.0).unwrap();
        assert!(rel(r.integrate(|x| (-x[0] * x[0]).exp()), 0.5) < 1e-14);
        let a = AlphaVec::new(vec![0.0, 0.0]).unwrap();
        let r = weighted_quad_rule(&a, 10, 1.0).unwrap();
        assert!(rel(r.integrate(|x| (-(x[0] * x[0] + x[1] * x[1])).exp()), 0.25) < 1e-14);
    }

    #[test]
    fn weighted_rule_high_degree_moments() {
        // ∫ x^{2k} e^{-x²} x^{2a+1} dx = Γ(k+a+1)/2
        let a = 0.35;
        let n = 40;
        let r = half_line_rule(a, n, 1.0).unwrap();
        for k in [0, 5, 20, 39] {
            let got = r.integrate(|x| x[0].powi(2 * k) * (-x[0] * x[0]).exp());
            let exact = 0.5 * gamma(k as f64 + a + 1.0).unwrap();
            assert!(rel(got, exact) < 1e-12, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn zeta_rule_examples() {
        let r = zeta_rule(16).unwrap();
        assert!((r.total_mass() - 1.0).abs() < 1e-12);
        let singular: f64 = (0..r.len()).map(|i| r.weights()[i] * r.gaps(i, 0.0, 1.0).1.powf(-0.5)).sum();
        assert!((singular - 2.0).abs() < 1e-8, "{singular}");
        assert!(zeta_rule(4).is_err());
    }

    #[test]
    fn half_ball_closed_forms() {
        let a = AlphaVec::new(vec![0.5]).unwrap();
        let m = half_ball_measure(&a, &HalfBallSpec::new(vec![5.0], 1.0).unwrap()).unwrap();
        assert!(rel(m.value, 152.0 / 3.0) < 1e-14);
        let a = AlphaVec::new(vec![-0.5]).unwrap();
        let m = half_ball_measure(&a, &HalfBallSpec::new(vec![1.0], 3.0).unwrap()).unwrap();
        assert!(rel(m.value, 4.0) < 1e-14);
        // unweighted disc and ball volumes
        let a = AlphaVec::uniform(2, -0.5).unwrap();
        let m = half_ball_measure(&a, &HalfBallSpec::new(vec![3.0, 3.0], 1.5).unwrap()).unwrap();
        assert!(rel(m.value, PI * 2.25) < 1e-9);
        let a = AlphaVec::uniform(3, -0.5).unwrap();
        let m = half_ball_measure(&a, &HalfBallSpec::new(vec![2.0, 2.0, 2.0], 1.0).unwrap()).unwrap();
        assert!(rel(m.value, 4.0 * PI / 3.0) < 1e-8);
        // quarter disc: center at the corner region
        let m = half_ball_measure(
            &AlphaVec::uniform(2, -0.5).unwrap(),
            &HalfBallSpec::new(vec![1e-12, 1e-12], 1.0).unwrap(),
        )
        .unwrap();
        assert!(rel(m.value, PI / 4.0) < 1e-8);
    }

    #[test]
    fn half_ball_doubling_in_d1_matches_closed_form() {
        let a = AlphaVec::new(vec![0.7]).unwrap();
        let p: f64 = 2.4;
        for &(x, r) in &[(1.0, 0.3), (1.0, 0.6), (0.5, 2.0), (0.5, 4.0)] {
            let m = half_ball_measure(&a, &HalfBallSpec::new(vec![x], r).unwrap()).unwrap();
            let lo = (x - r).max(0.0);
            let exact = ((x + r).powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0);
            assert!(rel(m.value, exact) < 1e-8);
        }
    }

    #[test]
    fn half_ball_spec_validation() {
        assert!(HalfBallSpec::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(HalfBallSpec::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let e = adaptive_gk15(&|x: f64| x.sqrt(), 0.0, 1.0, 0.0, 1e-12);
        assert!((e.value - 2.0 / 3.0).abs() < 1e-11);
    }
}
