//! Generalized Hermite functions and the Dunkl operators of Z₂^d.

use std::ops::{Add, Mul};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measure::{AlphaVec, QuadRule};
use crate::specfun::{laguerre_table, laguerre_unchecked, ln_gamma_pos};

/// Multi-index `n ∈ ℕ^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(n: Vec<usize>) -> Self {
        Self(n)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n| = Σ n_i`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn parity(&self) -> ParityVec {
        ParityVec(self.0.iter().map(|n| (n % 2) as u8).collect())
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(n: Vec<usize>) -> Self {
        Self(n)
    }
}

/// Parity vector `ε ∈ {0,1}^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ParityVec(Vec<u8>);

impl ParityVec {
    pub fn new(eps: Vec<u8>) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|e| *e > 1) {
            return Err(domain("ParityVec", "entries must be 0 or 1 and d ≥ 1"));
        }
        Ok(Self(eps))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    /// All `2^d` parity vectors, in binary order.
    pub fn all(d: usize) -> Vec<ParityVec> {
        (0..1u32 << d).map(|m| Self((0..d).map(|i| (m >> (d - 1 - i) & 1) as u8).collect())).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|ε|`.
    pub fn weight(&self) -> usize {
        self.0.iter().map(|e| *e as usize).sum()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn contains(&self, n: &MultiIndex) -> bool {
        n.dim() == self.dim() && n.0.iter().zip(&self.0).all(|(n, e)| (n % 2) as u8 == *e)
    }

    /// `η^ε = Π η_i^{ε_i}` for a sign vector encoded by the bits of `mask`
    /// (bit `i` set means `η_i = -1`).
    fn sign(&self, mask: u32) -> f64 {
        let flips = self.0.iter().enumerate().filter(|(i, e)| **e == 1 && mask >> i & 1 == 1).count();
        if flips % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl TryFrom<Vec<u8>> for ParityVec {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ParityVec> for Vec<u8> {
    fn from(p: ParityVec) -> Self {
        p.0
    }
}

/// Sample points with values attached.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    dim: usize,
    points: Vec<f64>,
    values: Vec<T>,
}

impl<T> GridFunction<T> {
    pub fn new(dim: usize, points: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if dim == 0 || points.len() != dim * values.len() {
            return Err(Error::Dimension { expected: dim * values.len(), got: points.len() });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(domain("GridFunction", "sample points must be finite"));
        }
        Ok(Self { dim, points, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> T>(dim: usize, points: Vec<f64>, f: F) -> Result<Self> {
        let values = points.chunks_exact(dim.max(1)).map(&f).collect();
        Self::new(dim, points, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &T)> {
        self.points.chunks_exact(self.dim).zip(&self.values)
    }
}

fn ln_norm(k: usize, a: f64, odd: bool) -> f64 {
    let k = k as f64;
    let shift = if odd { 2.0 } else { 1.0 };
    0.5 * (ln_gamma_pos(k + 1.0) - ln_gamma_pos(k + a + shift))
}

fn sign_k(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normaliser `d_{n,a}`.
pub fn hermite_norm(n: usize, a: f64) -> f64 {
    let k = n / 2;
    sign_k(k) * ln_norm(k, a, n % 2 == 1).exp()
}

/// `m`-th derivative of `u ↦ L_k^a(u)`.
fn laguerre_dm(k: usize, a: f64, m: usize, u: f64) -> f64 {
    if m > k {
        return 0.0;
    }
    sign_k(m) * laguerre_unchecked(k - m, a + m as f64, u)
}

/// One-dimensional `h_n^a(x)`.
pub fn hermite_1d(n: usize, a: f64, x: f64) -> f64 {
    let k = n / 2;
    let u = x * x;
    let g = (-0.5 * u).exp();
    if n % 2 == 0 {
        hermite_norm(n, a) * g * laguerre_unchecked(k, a, u)
    } else {
        hermite_norm(n, a) * g * x * laguerre_unchecked(k, a + 1.0, u)
    }
}

/// `(h_n^a)'(x)`, from the polynomial form so it is valid at `x = 0`.
pub fn hermite_1d_deriv(n: usize, a: f64, x: f64) -> f64 {
    let k = n / 2;
    let u = x * x;
    let g = (-0.5 * u).exp();
    if n % 2 == 0 {
        let p = laguerre_dm(k, a, 0, u);
        let dp = laguerre_dm(k, a, 1, u);
        hermite_norm(n, a) * g * x * (2.0 * dp - p)
    } else {
        let q = laguerre_dm(k, a + 1.0, 0, u);
        let dq = laguerre_dm(k, a + 1.0, 1, u);
        hermite_norm(n, a) * g * ((1.0 - u) * q + 2.0 * u * dq)
    }
}

/// `(h_n^a)''(x)`.
pub fn hermite_1d_deriv2(n: usize, a: f64, x: f64) -> f64 {
    let k = n / 2;
    let u = x * x;
    let g = (-0.5 * u).exp();
    if n % 2 == 0 {
        let (p, dp, ddp) = (laguerre_dm(k, a, 0, u), laguerre_dm(k, a, 1, u), laguerre_dm(k, a, 2, u));
        hermite_norm(n, a) * g * ((u - 1.0) * p + (2.0 - 4.0 * u) * dp + 4.0 * u * ddp)
    } else {
        let b = a + 1.0;
        let (q, dq, ddq) = (laguerre_dm(k, b, 0, u), laguerre_dm(k, b, 1, u), laguerre_dm(k, b, 2, u));
        hermite_norm(n, a) * g * x * ((u - 3.0) * q + (6.0 - 4.0 * u) * dq + 4.0 * u * ddq)
    }
}

/// `h_0^a(x), …, h_{nmax}^a(x)` in one pass.
pub fn hermite_1d_all(a: f64, x: f64, nmax: usize) -> Vec<f64> {
    let kmax = nmax / 2 + 1;
    let u = x * x;
    let g = (-0.5 * u).exp();
    let mut even = vec![0.0; kmax];
    let mut odd = vec![0.0; kmax];
    laguerre_table(a, u, &mut even);
    laguerre_table(a + 1.0, u, &mut odd);
    (0..=nmax)
        .map(|n| {
            let k = n / 2;
            if n % 2 == 0 {
                hermite_norm(n, a) * g * even[k]
            } else {
                hermite_norm(n, a) * g * x * odd[k]
            }
        })
        .collect()
}

/// `h_n^α(x) = Π h_{n_i}^{α_i}(x_i)`.
pub fn hermite_fn(n: &MultiIndex, alpha: &AlphaVec, x: &[f64]) -> f64 {
    n.0.iter().zip(alpha.as_slice()).zip(x).map(|((n, a), x)| hermite_1d(*n, *a, *x)).product()
}

/// `∂_axis h_n^α(x)` (0-based axis).
pub fn hermite_fn_deriv(n: &MultiIndex, alpha: &AlphaVec, x: &[f64], axis: usize) -> f64 {
    (0..x.len())
        .map(|i| {
            let (ni, a) = (n.0[i], alpha.get(i));
            if i == axis {
                hermite_1d_deriv(ni, a, x[i])
            } else {
                hermite_1d(ni, a, x[i])
            }
        })
        .product()
}

/// `∂²_axis h_n^α(x)`.
pub fn hermite_fn_deriv2(n: &MultiIndex, alpha: &AlphaVec, x: &[f64], axis: usize) -> f64 {
    (0..x.len())
        .map(|i| {
            let (ni, a) = (n.0[i], alpha.get(i));
            if i == axis {
                hermite_1d_deriv2(ni, a, x[i])
            } else {
                hermite_1d(ni, a, x[i])
            }
        })
        .product()
}

/// A function with analytic first partials.
pub trait Differentiable {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn partial(&self, x: &[f64], axis: usize) -> f64;
}

/// A function with analytic pure second partials.
pub trait Smooth: Differentiable {
    fn partial2(&self, x: &[f64], axis: usize) -> f64;
}

/// `h_n^α` as a [`Smooth`] function.
#[derive(Debug, Clone)]
pub struct HermiteFn {
    pub n: MultiIndex,
    pub alpha: AlphaVec,
}

impl HermiteFn {
    pub fn new(n: MultiIndex, alpha: AlphaVec) -> Result<Self> {
        alpha.check_dim(n.dim())?;
        Ok(Self { n, alpha })
    }
}

impl Differentiable for HermiteFn {
    fn dim(&self) -> usize {
        self.n.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        hermite_fn(&self.n, &self.alpha, x)
    }
    fn partial(&self, x: &[f64], axis: usize) -> f64 {
        hermite_fn_deriv(&self.n, &self.alpha, x, axis)
    }
}

impl Smooth for HermiteFn {
    fn partial2(&self, x: &[f64], axis: usize) -> f64 {
        hermite_fn_deriv2(&self.n, &self.alpha, x, axis)
    }
}

/// Sparse real polynomial `Σ c_m x^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if let Some((_, m)) = terms.iter().find(|(_, m)| m.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: m.len() });
        }
        Ok(Self { dim, terms })
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, m)| m.iter().sum()).max().unwrap_or(0)
    }

    /// Exact `T_axis^α p`: a monomial loses one power of `x_axis` and picks up
    /// `m + (2α+1)[m odd]`.
    pub fn dunkl(&self, alpha: &AlphaVec, axis: usize) -> Polynomial {
        let a = alpha.get(axis);
        let terms = self
            .terms
            .iter()
            .filter(|(_, m)| m[axis] > 0)
            .map(|(c, m)| {
                let k = m[axis];
                let factor = k as f64 + if k % 2 == 1 { 2.0 * a + 1.0 } else { 0.0 };
                let mut m = m.clone();
                m[axis] -= 1;
                (c * factor, m)
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    fn monomial(m: &[u32], x: &[f64], skip: Option<(usize, u32)>) -> f64 {
        m.iter()
            .enumerate()
            .map(|(i, &e)| {
                let e = match skip {
                    Some((j, drop)) if j == i => {
                        if e < drop {
                            return 0.0;
                        }
                        e - drop
                    }
                    _ => e,
                };
                x[i].powi(e as i32)
            })
            .product()
    }
}

impl Differentiable for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, m)| c * Self::monomial(m, x, None)).sum()
    }
    fn partial(&self, x: &[f64], axis: usize) -> f64 {
        self.terms
            .iter()
            .map(|(c, m)| c * m[axis] as f64 * Self::monomial(m, x, Some((axis, 1))))
            .sum()
    }
}

impl Smooth for Polynomial {
    fn partial2(&self, x: &[f64], axis: usize) -> f64 {
        self.terms
            .iter()
            .map(|(c, m)| {
                let k = m[axis] as f64;
                c * k * (k - 1.0) * Self::monomial(m, x, Some((axis, 2)))
            })
            .sum()
    }
}

fn reflect(x: &[f64], axis: usize) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] = -y[axis];
    y
}

/// `T_axis^α f(x)`. On the hyperplane `x_axis = 0` the difference quotient is
/// replaced by its limit, giving `(2α+2) ∂_axis f(x)`.
pub fn dunkl_at<F: Differentiable + ?Sized>(alpha: &AlphaVec, f: &F, x: &[f64], axis: usize) -> Result<f64> {
    alpha.check_dim(x.len())?;
    let a = alpha.get(axis);
    let d = f.partial(x, axis);
    if x[axis] == 0.0 {
        return Ok((2.0 * a + 2.0) * d);
    }
    let diff = f.value(x) - f.value(&reflect(x, axis));
    Ok(d + (a + 0.5) * diff / x[axis])
}

/// `T_axis^α f` sampled at every point.
pub fn dunkl_apply<F: Differentiable + Sync + ?Sized>(
    alpha: &AlphaVec,
    f: &F,
    points: &[f64],
    axis: usize,
) -> Result<GridFunction<f64>> {
    let d = alpha.dim();
    if axis >= d {
        return Err(domain("dunkl_apply", format!("axis {axis} out of range for d = {d}")));
    }
    let values = points.par_chunks(d).map(|x| dunkl_at(alpha, f, x, axis)).collect::<Result<Vec<_>>>()?;
    GridFunction::new(d, points.to_vec(), values)
}

/// `Δ_α f(x)` from the explicit second-order formula.
pub fn dunkl_laplacian<F: Smooth + ?Sized>(alpha: &AlphaVec, f: &F, x: &[f64]) -> Result<f64> {
    alpha.check_dim(x.len())?;
    if let Some(axis) = x.iter().position(|v| *v == 0.0) {
        return Err(Error::Singular { op: "dunkl_laplacian", axis });
    }
    let fx = f.value(x);
    let mut sum = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        let a = alpha.get(j);
        sum += f.partial2(x, j) + (2.0 * a + 1.0) / xj * f.partial(x, j)
            - (a + 0.5) * (fx - f.value(&reflect(x, j))) / (xj * xj);
    }
    Ok(sum)
}

/// Oscillator `L_α f(x) = -Δ_α f(x) + ‖x‖² f(x)`.
pub fn oscillator<F: Smooth + ?Sized>(alpha: &AlphaVec, f: &F, x: &[f64]) -> Result<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(-dunkl_laplacian(alpha, f, x)? + r2 * f.value(x))
}

/// `λ_n = 2|n| + 2|α| + 2d`.
pub fn eigenvalue(n: &MultiIndex, alpha: &AlphaVec) -> f64 {
    2.0 * n.degree() as f64 + alpha.spectral_offset()
}

fn push_indices(d: usize, budget: usize, step: usize, start: &[usize], cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    let i = cur.len();
    if i == d {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    let used: usize = cur.iter().sum();
    let mut k = start[i];
    while used + k <= budget {
        cur.push(k);
        push_indices(d, budget, step, start, cur, out);
        cur.pop();
        k += step;
    }
}

/// All `n ∈ N_ε` with `|n| ≤ maxdeg`, in lexicographic order.
pub fn enumerate_neps(eps: &ParityVec, maxdeg: usize) -> Vec<MultiIndex> {
    let start: Vec<usize> = eps.as_slice().iter().map(|e| *e as usize).collect();
    let mut out = Vec::new();
    push_indices(eps.dim(), maxdeg, 2, &start, &mut Vec::new(), &mut out);
    out
}

/// All `n ∈ ℕ^d` with `|n| ≤ maxdeg`.
pub fn enumerate_up_to(d: usize, maxdeg: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    push_indices(d, maxdeg, 1, &vec![0; d], &mut Vec::new(), &mut out);
    out
}

/// All `n ∈ ℕ^d` with `|n| = m`.
pub fn enumerate_degree(d: usize, m: usize) -> Vec<MultiIndex> {
    enumerate_up_to(d, m).into_iter().filter(|n| n.degree() == m).collect()
}

fn reflect_mask(x: &[f64], mask: u32) -> Vec<f64> {
    x.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v }).collect()
}

/// `f_ε(x) = 2^{-d} Σ_η η^ε f(ηx)`.
pub fn eps_decompose<F: Fn(&[f64]) -> f64>(f: F, eps: &ParityVec, x: &[f64]) -> f64 {
    let d = x.len();
    let total: f64 = (0..1u32 << d).map(|mask| eps.sign(mask) * f(&reflect_mask(x, mask))).sum();
    total / (1u32 << d) as f64
}

/// All ε-parts of `f` at `x`, indexed like [`ParityVec::all`].
pub fn eps_parts<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let vals: Vec<f64> = (0..1u32 << d).map(|mask| f(&reflect_mask(x, mask))).collect();
    ParityVec::all(d)
        .iter()
        .map(|eps| {
            vals.iter().enumerate().map(|(mask, v)| eps.sign(mask as u32) * v).sum::<f64>() / vals.len() as f64
        })
        .collect()
}

/// Index of `eps` in [`ParityVec::all`] order.
pub(crate) fn parity_slot(eps: &ParityVec) -> usize {
    eps.as_slice().iter().fold(0, |acc, e| 2 * acc + *e as usize)
}

/// Values `h_k^{α_i}(x_i)` for `k ≤ maxdeg` at every point of a set.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    dim: usize,
    stride: usize,
    values: Vec<f64>,
}

impl HermiteTable {
    pub fn new(alpha: &AlphaVec, points: &[f64], maxdeg: usize) -> Self {
        let dim = alpha.dim();
        let stride = maxdeg + 1;
        let mut values = Vec::with_capacity(points.len() * stride);
        for p in points.chunks_exact(dim) {
            for (i, &x) in p.iter().enumerate() {
                values.extend(hermite_1d_all(alpha.get(i), x, maxdeg));
            }
        }
        Self { dim, stride, values }
    }

    /// `h_n^α` at point number `p`.
    pub fn eval(&self, p: usize, n: &MultiIndex) -> f64 {
        let base = p * self.dim * self.stride;
        n.0.iter().enumerate().map(|(i, &k)| self.values[base + i * self.stride + k]).product()
    }
}

/// Finite expansion `Σ c_n h_n^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion<T> {
    pub alpha: AlphaVec,
    pub terms: Vec<(MultiIndex, T)>,
}

impl<T> HermiteExpansion<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    pub fn eval(&self, x: &[f64]) -> T {
        self.terms.iter().fold(T::default(), |acc, (n, c)| acc + *c * hermite_fn(n, &self.alpha, x))
    }

    pub fn sample(&self, points: &[f64]) -> Result<GridFunction<T>> {
        GridFunction::from_fn(self.alpha.dim(), points.to_vec(), |x| self.eval(x))
    }

    pub fn coefficient(&self, n: &MultiIndex) -> Option<T> {
        self.terms.iter().find(|(m, _)| m == n).map(|(_, c)| *c)
    }
}

/// Full-space coefficients `⟨f, h_n⟩_{w_α}` for each `n`, from a half-space rule.
///
/// With `ε = n mod 2` one has `⟨f, h_n⟩ = 2^d ∫_{ℝ₊^d} f_ε h_n dw_α⁺`, so each
/// node of `rule` is visited once per reflection.
pub fn coefficients<F: Fn(&[f64]) -> f64 + Sync>(
    alpha: &AlphaVec,
    f: F,
    indices: &[MultiIndex],
    rule: &QuadRule,
) -> Result<Vec<f64>> {
    alpha.check_dim(rule.dim())?;
    let d = alpha.dim();
    let maxdeg = indices.iter().flat_map(|n| n.0.iter().copied()).max().unwrap_or(0);
    let parts: Vec<Vec<f64>> = rule.iter().map(|(x, _)| eps_parts(&f, x)).collect();
    let table = HermiteTable::new(alpha, rule.nodes_flat(), maxdeg);
    let scale = (1u64 << d) as f64;
    Ok(indices
        .par_iter()
        .map(|n| {
            let slot = parity_slot(&n.parity());
            let s: f64 = (0..rule.len()).map(|p| rule.weights()[p] * parts[p][slot] * table.eval(p, n)).sum();
            scale * s
        })
        .collect())
}

/// `P_m^α f = Σ_{|n|=m} ⟨f, h_n⟩ h_n`, with inner products from a half-space rule
/// (see [`coefficients`]).
pub fn spectral_project<F: Fn(&[f64]) -> f64 + Sync>(
    alpha: &AlphaVec,
    f: F,
    m: usize,
    rule: &QuadRule,
) -> Result<HermiteExpansion<f64>> {
    let indices = enumerate_degree(alpha.dim(), m);
    let coef = coefficients(alpha, f, &indices, rule)?;
    Ok(HermiteExpansion { alpha: alpha.clone(), terms: indices.into_iter().zip(coef).collect() })
}

/// Per-axis quadrature order that makes Gram entries up to `maxdeg` exact.
pub fn default_npts(maxdeg: usize) -> usize {
    2 * (maxdeg + 10)
}

/// `max |⟨h_n, h_m⟩_{w_α} - δ_{nm}|` over `|n|, |m| ≤ maxdeg`.
///
/// The Gram matrix factorises over axes, so the 1-D tables are computed once with
/// `npts` Gauss–Laguerre nodes and the d-dimensional entries are products.
pub fn orthonormality_defect(alpha: &AlphaVec, maxdeg: usize, npts: usize) -> Result<f64> {
    let d = alpha.dim();
    let mut gram1 = Vec::with_capacity(d);
    for i in 0..d {
        let a = alpha.get(i);
        let rule = crate::measure::half_line_rule(a, npts, 1.0)?;
        let tables: Vec<Vec<f64>> = rule.nodes_flat().iter().map(|&x| hermite_1d_all(a, x, maxdeg)).collect();
        let mut g = vec![0.0; (maxdeg + 1) * (maxdeg + 1)];
        for k in 0..=maxdeg {
            for l in 0..=maxdeg {
                if (k + l) % 2 == 1 {
                    continue;
                }
                let s: f64 = tables.iter().zip(rule.weights()).map(|(t, w)| w * t[k] * t[l]).sum();
                g[k * (maxdeg + 1) + l] = 2.0 * s;
            }
        }
        gram1.push(g);
    }
    let indices = enumerate_up_to(d, maxdeg);
    let defect = indices
        .par_iter()
        .enumerate()
        .map(|(p, n)| {
            indices[p..]
                .iter()
                .map(|m| {
                    let g: f64 = (0..d).map(|i| gram1[i][n.0[i] * (maxdeg + 1) + m.0[i]]).product();
                    (g - if n == m { 1.0 } else { 0.0 }).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(defect)
}

/// Decay constant `c` of the growth envelope; the bound only needs some `c > 0`.
pub const ENVELOPE_DECAY: f64 = 0.125;

/// Envelope `Φ_n^a(x) = x^{-a-1/2}` for `x ≤ 4(n+a+1)`, times `e^{-c x}` beyond.
pub fn growth_envelope(n: usize, a: f64, x: f64) -> f64 {
    let base = x.powf(-a - 0.5);
    if x <= 4.0 * (n as f64 + a + 1.0) {
        base
    } else {
        base * (-ENVELOPE_DECAY * x).exp()
    }
}
