//! Named verification suites with measured values and tolerances.
//!
//! Every check reports `measured ≤ tolerance`; counts of nonfinite values use
//! tolerance `0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::czverify::{refinement_check, run_sweep, SweepConfig, SweepKind, SweepReport};
use crate::error::{Error, Result};
use crate::heat::{
    component_kernel, component_kernel_zeta, heat_kernel, heat_kernel_series, HeatTime, PiIntegration,
};
use crate::hermite::{
    coefficients, eigenvalue, enumerate_up_to, hermite_fn, orthonormality_defect, oscillator, HermiteExpansion,
    Differentiable, HermiteFn, ParityVec,
};
use crate::imagpow::{
    duality_lhs, duality_rhs, expansion_norm, imagpow_spectral, kernel_t_route, kernel_zeta_route, multiplier, Bump,
    DualityOptions, ImagOrder,
};
use crate::measure::{box_rule, weighted_quad_rule, AlphaVec};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Orthonormality,
    Eigen,
    HeatEquiv,
    Semigroup,
    Isometry,
    Duality,
    Routes,
    DerEst,
    Growth,
    Smoothness,
    Mlem,
    Lemhom,
    Classical,
    All,
}

impl Suite {
    /// Every concrete suite, in the order `all` runs them.
    pub const ALL: [Suite; 13] = [
        Suite::Orthonormality,
        Suite::Eigen,
        Suite::HeatEquiv,
        Suite::Semigroup,
        Suite::Isometry,
        Suite::Classical,
        Suite::Routes,
        Suite::Duality,
        Suite::DerEst,
        Suite::Growth,
        Suite::Smoothness,
        Suite::Mlem,
        Suite::Lemhom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Orthonormality => "orthonormality",
            Suite::Eigen => "eigen",
            Suite::HeatEquiv => "heat-equiv",
            Suite::Semigroup => "semigroup",
            Suite::Isometry => "isometry",
            Suite::Duality => "duality",
            Suite::Routes => "routes",
            Suite::DerEst => "der-est",
            Suite::Growth => "growth",
            Suite::Smoothness => "smoothness",
            Suite::Mlem => "mlem",
            Suite::Lemhom => "lemhom",
            Suite::Classical => "classical",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::ALL.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Restrictions and overrides shared by all suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteOptions {
    /// Run only the configurations in this dimension.
    pub dim: Option<usize>,
    /// Replaces the default multiplicities; implies its dimension.
    pub alpha: Option<AlphaVec>,
    pub gammas: Option<Vec<ImagOrder>>,
    pub truncation: Option<usize>,
    pub quick: bool,
    pub seed: u64,
    /// Per-check tolerance overrides, keyed by [`CheckOutcome::check`].
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { dim: None, alpha: None, gammas: None, truncation: None, quick: false, seed: 0x5eed, tolerances: BTreeMap::new() }
    }
}

/// Default tolerance of each check key.
pub const DEFAULT_TOLERANCES: [(&str, f64); 15] = [
    ("orthonormality", 1e-8),
    ("eigen", 1e-6),
    ("heat-equiv", 1e-8),
    ("semigroup", 1e-6),
    ("isometry-multiplier", 1e-15),
    ("isometry-norm", 1e-10),
    ("classical-hermite", 1e-10),
    ("classical-mehler", 1e-10),
    ("routes", 1e-6),
    ("duality", 1e-4),
    ("nonfinite", 0.0),
    ("refinement", 0.2),
    ("argmax-band", 1.0),
    ("mlem-spread", 2.0),
    ("der-est-refinement", 0.2),
];

impl SuiteOptions {
    pub fn validate(&self) -> Result<()> {
        if let (Some(d), Some(a)) = (self.dim, &self.alpha) {
            if a.dim() != d {
                return Err(Error::Config(format!("alpha has dimension {}, but d = {d}", a.dim())));
            }
        }
        if let Some(d) = self.dim {
            if !(1..=3).contains(&d) {
                return Err(Error::Config(format!("d = {d} outside 1..=3")));
            }
        }
        for (k, v) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == k) {
                return Err(Error::Config(format!("unknown tolerance key `{k}`")));
            }
            if !(*v >= 0.0) {
                return Err(Error::Config(format!("tolerance `{k}` must be nonnegative")));
            }
        }
        Ok(())
    }

    fn tol(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .or_else(|| DEFAULT_TOLERANCES.iter().find(|(n, _)| *n == key).map(|(_, v)| *v))
            .expect("known tolerance key")
    }

    fn dims(&self, default: &[usize]) -> Vec<usize> {
        if let Some(a) = &self.alpha {
            return vec![a.dim()];
        }
        match self.dim {
            Some(d) => default.iter().copied().filter(|k| *k == d).collect(),
            None => default.to_vec(),
        }
    }

    /// `(-1/2)^d`, `0^d` and a mixed vector, unless overridden.
    fn alphas(&self, d: usize) -> Vec<AlphaVec> {
        if let Some(a) = &self.alpha {
            return vec![a.clone()];
        }
        let mixed = [0.5, -0.5, 1.25];
        let mut v = vec![uniform(d, -0.5), uniform(d, 0.0)];
        v.push(if d == 1 { uniform(1, 1.5) } else { AlphaVec::new(mixed[..d].to_vec()).expect("valid") });
        v
    }

    fn gammas(&self, default: &[f64]) -> Vec<ImagOrder> {
        self.gammas.clone().unwrap_or_else(|| default.iter().map(|g| ImagOrder::new(*g).expect("nonzero")).collect())
    }
}

fn uniform(d: usize, a: f64) -> AlphaVec {
    AlphaVec::uniform(d, a).expect("valid")
}

/// One measured check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    /// Tolerance key.
    pub check: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckOutcome {
    fn new(suite: Suite, check: &str, name: String, measured: f64, tolerance: f64) -> Self {
        Self {
            suite,
            check: check.to_string(),
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Largest `measured / tolerance` among checks with key `check`.
    pub fn worst(&self, check: &str) -> Option<&CheckOutcome> {
        self.checks
            .iter()
            .filter(|c| c.check == check)
            .max_by(|a, b| worst_key(a).total_cmp(&worst_key(b)))
    }
}

fn worst_key(c: &CheckOutcome) -> f64 {
    if c.measured.is_nan() {
        f64::INFINITY
    } else if c.tolerance > 0.0 {
        c.measured / c.tolerance
    } else {
        c.measured
    }
}

/// Runs one suite (or every suite for [`Suite::All`]).
pub fn run(suite: Suite, opts: &SuiteOptions) -> Result<Vec<SuiteReport>> {
    opts.validate()?;
    suite
        .expand()
        .into_iter()
        .map(|s| {
            let start = Instant::now();
            let checks = run_one(s, opts)?;
            Ok(SuiteReport { suite: s, checks, seconds: start.elapsed().as_secs_f64() })
        })
        .collect()
}

fn run_one(s: Suite, o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    match s {
        Suite::Orthonormality => orthonormality(o),
        Suite::Eigen => eigen(o),
        Suite::HeatEquiv => heat_equiv(o),
        Suite::Semigroup => semigroup(o),
        Suite::Isometry => isometry(o),
        Suite::Duality => duality(o),
        Suite::Routes => routes(o),
        Suite::DerEst => der_est(o),
        Suite::Growth => ker_est(Suite::Growth, SweepKind::Growth, o),
        Suite::Smoothness => ker_est(Suite::Smoothness, SweepKind::Smoothness, o),
        Suite::Mlem => mlem(o),
        Suite::Lemhom => lemhom(o),
        Suite::Classical => classical(o),
        Suite::All => unreachable!("expanded by run"),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fmt_alpha(a: &AlphaVec) -> String {
    format!("{:?}", a.as_slice())
}

fn fmt_eps(e: &ParityVec) -> String {
    e.as_slice().iter().map(|v| v.to_string()).collect()
}

/// A point of `(lo, hi)^d` with random signs when `signed`.
fn random_point(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64, signed: bool) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let v = rng.random_range(lo..hi);
            if signed && rng.random::<bool>() {
                -v
            } else {
                v
            }
        })
        .collect()
}

fn orthonormality(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let maxdeg = if o.quick { 8 } else { 12 };
    let mut out = Vec::new();
    for d in o.dims(&[1, 2, 3]) {
        for a in o.alphas(d) {
            let defect = orthonormality_defect(&a, maxdeg, crate::hermite::default_npts(maxdeg))?;
            out.push(CheckOutcome::new(
                Suite::Orthonormality,
                "orthonormality",
                format!("d={d} alpha={} |n|,|m|<={maxdeg}", fmt_alpha(&a)),
                defect,
                o.tol("orthonormality"),
            ));
        }
    }
    Ok(out)
}

fn eigen(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let (maxdeg, npoints) = if o.quick { (6, 50) } else { (10, 200) };
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for d in o.dims(&[1, 2]) {
        let points: Vec<Vec<f64>> = (0..npoints).map(|_| random_point(&mut rng, d, 0.1, 3.0, true)).collect();
        for a in o.alphas(d) {
            let mut worst = 0.0f64;
            for n in enumerate_up_to(d, maxdeg) {
                let lam = eigenvalue(&n, &a);
                let f = HermiteFn::new(n, a.clone())?;
                let (mut res, mut scale) = (0.0f64, 0.0f64);
                for x in &points {
                    let v = f.value(x);
                    res = res.max((oscillator(&a, &f, x)? - lam * v).abs());
                    scale = scale.max(v.abs());
                }
                worst = worst.max(res / scale);
            }
            out.push(CheckOutcome::new(
                Suite::Eigen,
                "eigen",
                format!("d={d} alpha={} |n|<={maxdeg} points={npoints}", fmt_alpha(&a)),
                worst,
                o.tol("eigen"),
            ));
        }
    }
    Ok(out)
}

fn heat_equiv(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let npoints = if o.quick { 3 } else { 8 };
    let times = [0.2, 0.5, 1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 1);
    let mut out = Vec::new();
    for d in o.dims(&[1, 2]) {
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..npoints)
            .map(|_| (random_point(&mut rng, d, 0.2, 3.0, false), random_point(&mut rng, d, 0.2, 3.0, false)))
            .collect();
        for a in o.alphas(d) {
            let mut worst = [0.0f64; 3];
            for &t in &times {
                let ht = HeatTime::from_t(t)?;
                for eps in ParityVec::all(d) {
                    for (x, y) in &pairs {
                        let closed = component_kernel(&a, &eps, &ht, x, y)?;
                        let series = heat_kernel_series(&a, &ht, x, y, Some(&eps))?.value;
                        let zeta = component_kernel_zeta(&a, &eps, &ht, x, y, PiIntegration::Graded(30, 16))?;
                        worst[0] = worst[0].max(rel(series, closed));
                        worst[1] = worst[1].max(rel(zeta, closed));
                        worst[2] = worst[2].max(rel(zeta, series));
                    }
                }
            }
            let m = worst.iter().copied().fold(0.0, f64::max);
            out.push(
                CheckOutcome::new(
                    Suite::HeatEquiv,
                    "heat-equiv",
                    format!("d={d} alpha={} t in {times:?}", fmt_alpha(&a)),
                    m,
                    o.tol("heat-equiv"),
                )
                .with_detail(format!(
                    "series-closed {:.2e}, zeta-closed {:.2e}, zeta-series {:.2e}",
                    worst[0], worst[1], worst[2]
                )),
            );
        }
    }
    Ok(out)
}

fn semigroup(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    if !o.dims(&[1]).contains(&1) {
        return Ok(out);
    }
    let times = [(0.3, 0.5), (1.0, 0.7), (0.15, 2.0)];
    let points = [(0.4, 1.3), (-0.8, 2.1), (1.7, -0.2)];
    for a in o.alphas(1) {
        // ∫_ℝ = ∫_{ℝ₊}(F(z) + F(-z)); the integrand is negligible beyond z = 10
        let rule = box_rule(&a, &[0.0], &[10.0], 40, 16)?;
        let mut worst = 0.0f64;
        for &(t, s) in &times {
            let (ht, hs, hts) = (HeatTime::from_t(t)?, HeatTime::from_t(s)?, HeatTime::from_t(t + s)?);
            for &(x, y) in &points {
                let mut err = None;
                let lhs = rule.integrate(|z| {
                    let mut f = |z: f64| -> f64 {
                        match (heat_kernel(&a, &ht, &[x], &[z]), heat_kernel(&a, &hs, &[z], &[y])) {
                            (Ok(p), Ok(q)) => p * q,
                            (Err(e), _) | (_, Err(e)) => {
                                err = Some(e);
                                f64::NAN
                            }
                        }
                    };
                    f(z[0]) + f(-z[0])
                });
                if let Some(e) = err {
                    return Err(e);
                }
                worst = worst.max(rel(lhs, heat_kernel(&a, &hts, &[x], &[y])?));
            }
        }
        out.push(CheckOutcome::new(
            Suite::Semigroup,
            "semigroup",
            format!("d=1 alpha={} (t,s) in {times:?}", fmt_alpha(&a)),
            worst,
            o.tol("semigroup"),
        ));
    }
    Ok(out)
}

fn isometry(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let gammas = o.gammas(&[0.5, 1.0, 3.0, -2.0]);
    let mut worst = 0.0f64;
    for n in 0..5000 {
        let lam = 2.0 * n as f64 + 1.0 + 0.37 * (n % 7) as f64;
        for &g in &gammas {
            worst = worst.max((multiplier(lam, g).norm() - 1.0).abs());
        }
    }
    out.push(CheckOutcome::new(
        Suite::Isometry,
        "isometry-multiplier",
        "|lambda^(-i gamma)| = 1".to_string(),
        worst,
        o.tol("isometry-multiplier"),
    ));
    for d in o.dims(&[1, 2]) {
        let nt = o.truncation.unwrap_or(match (d, o.quick) {
            (1, false) => 120,
            (1, true) => 40,
            (_, false) => 40,
            (_, true) => 15,
        });
        let shift = [0.7, -0.3, 0.2];
        let f = |x: &[f64]| (-x.iter().zip(shift).map(|(v, c)| (v - c).powi(2)).sum::<f64>()).exp();
        for a in o.alphas(d) {
            let rule = weighted_quad_rule(&a, nt + 20, 1.0)?;
            let indices = enumerate_up_to(d, nt);
            let coef = coefficients(&a, f, &indices, &rule)?;
            let proj = HermiteExpansion {
                alpha: a.clone(),
                terms: indices.into_iter().zip(coef).map(|(n, c)| (n, Complex64::new(c, 0.0))).collect(),
            };
            let reference = expansion_norm(&proj, &rule);
            let mut worst = 0.0f64;
            for &g in &gammas {
                let img = imagpow_spectral(&a, g, f, nt, &rule)?;
                worst = worst.max(rel(expansion_norm(&img, &rule), reference));
            }
            out.push(CheckOutcome::new(
                Suite::Isometry,
                "isometry-norm",
                format!("d={d} alpha={} N={nt}", fmt_alpha(&a)),
                worst,
                o.tol("isometry-norm"),
            ));
        }
    }
    Ok(out)
}

/// Classical Hermite functions `(2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}`, `n ≤ nmax`.
fn classical_hermite(x: f64, nmax: usize) -> Vec<f64> {
    let (mut hm, mut h) = (0.0, 1.0);
    let mut norm = PI.sqrt();
    let mut v = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        v.push(h * (-0.5 * x * x).exp() / norm.sqrt());
        let next = 2.0 * x * h - 2.0 * n as f64 * hm;
        hm = h;
        h = next;
        norm *= 2.0 * (n + 1) as f64;
    }
    v
}

fn mehler(t: f64, x: f64, y: f64) -> f64 {
    let (s, c) = ((2.0 * t).sinh(), (2.0 * t).cosh());
    (2.0 * PI * s).powf(-0.5) * (-((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s)).exp()
}

fn classical(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 2);
    let nmax = if o.quick { 12 } else { 20 };
    for d in o.dims(&[1, 2]) {
        let a = uniform(d, -0.5);
        let points: Vec<Vec<f64>> = (0..40).map(|_| random_point(&mut rng, d, 0.0, 4.0, true)).collect();
        let mut worst = 0.0f64;
        for x in &points {
            let tables: Vec<Vec<f64>> = x.iter().map(|v| classical_hermite(*v, nmax)).collect();
            for n in enumerate_up_to(d, nmax) {
                let expected: f64 = (0..d).map(|i| tables[i][n.as_slice()[i]]).product();
                let got = hermite_fn(&n, &a, x);
                worst = worst.max((got - expected).abs() / expected.abs().max(1.0));
            }
        }
        out.push(
            CheckOutcome::new(
                Suite::Classical,
                "classical-hermite",
                format!("d={d} alpha=(-1/2)^d |n|<={nmax}"),
                worst,
                o.tol("classical-hermite"),
            )
            .with_detail("error relative to max(|h_n|, 1)".to_string()),
        );
        let mut worst = 0.0f64;
        for &t in &[0.05, 0.3, 1.0, 4.0] {
            let ht = HeatTime::from_t(t)?;
            for pair in points.chunks(2) {
                let (x, y) = (&pair[0], &pair[1]);
                let expected: f64 = (0..d).map(|i| mehler(t, x[i], y[i])).product();
                worst = worst.max(rel(heat_kernel(&a, &ht, x, y)?, expected));
            }
        }
        out.push(CheckOutcome::new(
            Suite::Classical,
            "classical-mehler",
            format!("d={d} alpha=(-1/2)^d t in [0.05, 4]"),
            worst,
            o.tol("classical-mehler"),
        ));
    }
    Ok(out)
}

fn routes(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let count = if o.quick { 10 } else { 50 };
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 3);
    let dims = o.dims(&[1, 2]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let mut worst = 0.0f64;
    let mut at = String::new();
    for _ in 0..count {
        let d = dims[rng.random_range(0..dims.len())];
        let a = match &o.alpha {
            Some(a) => a.clone(),
            None => AlphaVec::new(
                (0..d).map(|_| if rng.random::<f64>() < 0.25 { -0.5 } else { rng.random_range(-0.5..1.5) }).collect(),
            )?,
        };
        let eps = ParityVec::new((0..d).map(|_| rng.random_range(0..2u8)).collect())?;
        let gammas = o.gammas(&[]);
        let g = if gammas.is_empty() {
            let m = rng.random_range(0.3..3.0);
            ImagOrder::new(if rng.random::<bool>() { m } else { -m })?
        } else {
            gammas[rng.random_range(0..gammas.len())]
        };
        let x = random_point(&mut rng, d, 0.2, 3.0, false);
        let mut y = random_point(&mut rng, d, 0.2, 3.0, false);
        while x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < 0.04 {
            y = random_point(&mut rng, d, 0.2, 3.0, false);
        }
        let z = kernel_zeta_route(&a, &eps, g, &x, &y)?.value;
        let t = kernel_t_route(&a, &eps, g, &x, &y)?.value;
        let r = (z - t).norm() / z.norm();
        if !(r <= worst) {
            worst = r;
            at = format!("alpha={} eps={} gamma={} x={x:?} y={y:?}", fmt_alpha(&a), fmt_eps(&eps), g.get());
        }
    }
    Ok(vec![CheckOutcome::new(Suite::Routes, "routes", format!("{count} random tuples, d in {dims:?}"), worst, o.tol("routes"))
        .with_detail(format!("worst at {at}"))])
}

/// Truncation used by [`duality`] to show the limit of the spectral side.
pub const DUALITY_REFERENCE_TRUNCATION: usize = 4000;

fn duality(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    if !o.dims(&[1]).contains(&1) {
        return Ok(out);
    }
    let nt = o.truncation.unwrap_or(120);
    let gammas = o.gammas(if o.quick { &[1.0] } else { &[0.5, 1.0, 3.0] });
    let alphas = match &o.alpha {
        Some(a) => vec![a.clone()],
        None if o.quick => vec![uniform(1, 0.0)],
        None => vec![uniform(1, -0.5), uniform(1, 0.0), uniform(1, 0.5)],
    };
    let f = Bump::new(vec![1.0], vec![2.0])?;
    let g = Bump::new(vec![3.0], vec![4.0])?;
    let opts = DualityOptions::default();
    let mut truncations = vec![nt];
    if !o.quick && nt < DUALITY_REFERENCE_TRUNCATION {
        truncations.push(DUALITY_REFERENCE_TRUNCATION);
    }
    for a in &alphas {
        for eps in ParityVec::all(1) {
            let rhs = duality_rhs(a, &eps, &gammas, &f, &g, &opts)?;
            let lhs = duality_lhs(a, &eps, &gammas, &f, &g, &truncations, &opts)?;
            for (ti, &n) in truncations.iter().enumerate() {
                let gaps: Vec<f64> = lhs[ti].iter().zip(&rhs).map(|(l, r)| (l - r).norm() / l.norm()).collect();
                let worst = gaps.iter().copied().fold(0.0, f64::max);
                out.push(
                    CheckOutcome::new(
                        Suite::Duality,
                        "duality",
                        format!("d=1 alpha={} eps={} N={n}", fmt_alpha(a), fmt_eps(&eps)),
                        worst,
                        o.tol("duality"),
                    )
                    .with_detail(format!(
                        "gaps {}",
                        gammas.iter().zip(&gaps).map(|(g, v)| format!("gamma={}: {v:.2e}", g.get())).collect::<Vec<_>>().join(", ")
                    )),
                );
            }
        }
    }
    Ok(out)
}

fn sweep_cfg(alpha: &AlphaVec, eps: &ParityVec, gammas: &[ImagOrder], o: &SuiteOptions) -> SweepConfig {
    let mut c = SweepConfig::for_params(alpha.clone(), eps.clone(), gammas.to_vec());
    c.seed = o.seed;
    c
}

fn label(alpha: &AlphaVec, eps: &ParityVec) -> String {
    format!("d={} alpha={} eps={}", alpha.dim(), fmt_alpha(alpha), fmt_eps(eps))
}

fn nonfinite(reports: &[&SweepReport]) -> f64 {
    reports.iter().flat_map(|r| &r.parts).flat_map(|p| &p.records).filter(|r| !r.ratio.is_finite()).count() as f64
}

fn der_est(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let mut c_all = 0.0f64;
    let mut bad = 0.0;
    let mut configs = Vec::new();
    for d in o.dims(&[1, 2]) {
        let alphas = match (&o.alpha, d) {
            (Some(a), _) => vec![a.clone()],
            (None, 1) => vec![uniform(1, -0.5), uniform(1, 0.0), uniform(1, 0.5)],
            (None, _) => vec![AlphaVec::new([0.5, 0.0, 0.0][..d].to_vec())?],
        };
        for a in alphas {
            for eps in ParityVec::all(d) {
                configs.push((a.clone(), eps));
            }
        }
    }
    for (a, eps) in &configs {
        // the sweep does not depend on γ
        let mut cfg = sweep_cfg(a, eps, &[ImagOrder::new(1.0)?], o);
        if o.quick {
            cfg.der_est_points = 4;
        }
        // refinement is cheap only in one dimension
        let (report, change) = if a.dim() == 1 && !o.quick {
            let r = refinement_check(SweepKind::DerEst, &cfg)?;
            let ch = r.max_relative_change();
            (r.fine, Some(ch))
        } else {
            (run_sweep(SweepKind::DerEst, &cfg)?, None)
        };
        bad += nonfinite(&[&report]);
        let c = report.part("integral").map_or(f64::NAN, |p| p.c_emp);
        c_all = c_all.max(c);
        if let Some(ch) = change {
            out.push(
                CheckOutcome::new(Suite::DerEst, "der-est-refinement", label(a, eps), ch, o.tol("der-est-refinement"))
                    .with_detail(format!("C_emp {c:.4e}")),
            );
        }
    }
    out.push(
        CheckOutcome::new(
            Suite::DerEst,
            "nonfinite",
            format!("E=[1,2]^d F=[3,4]^d over {} configurations", configs.len()),
            bad,
            o.tol("nonfinite"),
        )
        .with_detail(format!("single constant C_emp {c_all:.4e}")),
    );
    Ok(out)
}

fn ker_est_configs(o: &SuiteOptions) -> Result<Vec<(AlphaVec, ParityVec)>> {
    let mut v = Vec::new();
    for d in o.dims(&[1, 2]) {
        let alphas = match (&o.alpha, d, o.quick) {
            (Some(a), _, _) => vec![a.clone()],
            (None, _, true) => vec![uniform(d, 0.0)],
            (None, 1, false) => vec![uniform(1, -0.5), uniform(1, 0.0), uniform(1, 0.5)],
            (None, _, false) => {
                let mut half = vec![0.0; d];
                half[0] = 0.5;
                vec![uniform(d, -0.5), uniform(d, 0.0), AlphaVec::new(half)?]
            }
        };
        for a in alphas {
            for eps in ParityVec::all(d) {
                v.push((a.clone(), eps));
            }
        }
    }
    Ok(v)
}

/// Growth or smoothness sweep: finiteness, refinement stability and the location
/// of the maximum, per configuration.
fn ker_est(suite: Suite, kind: SweepKind, o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let gammas = o.gammas(&[0.5, 1.0, 3.0]);
    let mut out = Vec::new();
    for (a, eps) in ker_est_configs(o)? {
        let cfg = sweep_cfg(&a, &eps, &gammas, o);
        let (coarse, fine) = if o.quick {
            (run_sweep(kind, &cfg)?, None)
        } else {
            let r = refinement_check(kind, &cfg)?;
            (r.coarse.clone(), Some(r))
        };
        let name = label(&a, &eps);
        let mut reports = vec![&coarse];
        if let Some(r) = &fine {
            reports.push(&r.fine);
        }
        out.push(
            CheckOutcome::new(suite, "nonfinite", name.clone(), nonfinite(&reports), o.tol("nonfinite"))
                .with_detail(format!("C_emp {:.4e}", coarse.c_emp())),
        );
        if let Some(r) = &fine {
            out.push(CheckOutcome::new(suite, "refinement", name.clone(), r.max_relative_change(), o.tol("refinement")));
        }
        // distance of each part's maximiser in units of the band radius
        let (mut worst, mut at) = (0.0f64, String::new());
        for p in &coarse.parts {
            if let Some(r) = p.argmax_record() {
                let v = if r.band { 0.0 } else { r.distance / coarse.band_radius };
                if !(v <= worst) {
                    worst = v;
                    at = format!("{}: x={:?} y={:?} ratio {:.3e}", p.label, r.x, r.y, r.ratio);
                }
            }
        }
        let mut c = CheckOutcome::new(suite, "argmax-band", name, worst, o.tol("argmax-band"));
        if !at.is_empty() {
            c = c.with_detail(format!("argmax at {at}"));
        }
        out.push(c);
    }
    Ok(out)
}

fn mlem(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for d in o.dims(&[1, 2]) {
        let alphas = match &o.alpha {
            Some(a) => vec![a.clone()],
            None if o.quick => vec![uniform(d, 0.0)],
            None => o.alphas(d),
        };
        for a in alphas {
            for b in [0.0, 0.5] {
                let mut cfg = sweep_cfg(&a, &ParityVec::zeros(d), &[ImagOrder::new(1.0)?], o);
                cfg.b = b;
                if o.quick {
                    cfg.samples = 1000;
                    cfg.pair_samples = 100;
                }
                let r = run_sweep(SweepKind::Mlem, &cfg)?;
                let name = format!("d={d} alpha={} b={b}", fmt_alpha(&a));
                out.push(
                    CheckOutcome::new(Suite::Mlem, "nonfinite", name.clone(), nonfinite(&[&r]), o.tol("nonfinite"))
                        .with_detail(
                            r.parts.iter().map(|p| format!("{}: {:.3e}", p.label, p.c_emp)).collect::<Vec<_>>().join(", "),
                        ),
                );
                out.push(CheckOutcome::new(Suite::Mlem, "mlem-spread", name, r.spread("b "), o.tol("mlem-spread")));
            }
        }
    }
    Ok(out)
}

fn lemhom(o: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut configs: Vec<(AlphaVec, ParityVec, Vec<f64>, Vec<f64>, &str)> = Vec::new();
    for d in o.dims(&[1, 2]) {
        let a = o.alpha.clone().unwrap_or_else(|| if d == 1 { uniform(1, -0.5) } else { uniform(d, 0.0) });
        let mut eps = vec![0u8; d];
        eps[0] = 1;
        let e = ParityVec::new(eps)?;
        let ef: Vec<f64> = e.as_slice().iter().map(|v| *v as f64).collect();
        configs.push((a.clone(), ParityVec::zeros(d), vec![0.0; d], vec![0.0; d], "delta=kappa=0"));
        configs.push((a.clone(), e.clone(), ef.clone(), vec![0.0; d], "delta=eps kappa=0"));
        if !o.quick {
            let mut half = vec![0.0; d];
            half[0] = 0.5;
            let shifted: Vec<f64> = ef.iter().zip(&half).map(|(e, h)| e - h).collect();
            configs.push((a, e, shifted, half, "delta=eps-e1/2 kappa=e1/2"));
        }
    }
    let mut out = Vec::new();
    for (a, eps, delta, kappa, tag) in configs {
        let mut cfg = sweep_cfg(&a, &eps, &[ImagOrder::new(1.0)?], o);
        cfg.delta = delta;
        cfg.kappa = kappa;
        let name = format!("{} {tag}", label(&a, &eps));
        if o.quick {
            let r = run_sweep(SweepKind::Lemhom, &cfg)?;
            out.push(CheckOutcome::new(Suite::Lemhom, "nonfinite", name, nonfinite(&[&r]), o.tol("nonfinite")));
        } else {
            let r = refinement_check(SweepKind::Lemhom, &cfg)?;
            out.push(
                CheckOutcome::new(Suite::Lemhom, "nonfinite", name.clone(), nonfinite(&[&r.coarse, &r.fine]), o.tol("nonfinite"))
                    .with_detail(format!("C_emp {:.4e}", r.coarse.c_emp())),
            );
            out.push(CheckOutcome::new(Suite::Lemhom, "refinement", name, r.max_relative_change(), o.tol("refinement")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Config(_))));
        assert_eq!(Suite::All.expand().len(), Suite::ALL.len());
    }

    #[test]
    fn options_are_validated() {
        let mut o = SuiteOptions { dim: Some(2), alpha: Some(uniform(1, 0.0)), ..Default::default() };
        assert!(o.validate().is_err());
        o.alpha = None;
        assert!(o.validate().is_ok());
        o.tolerances.insert("mystery".into(), 1.0);
        assert!(o.validate().is_err());
        let o = SuiteOptions { dim: Some(4), ..Default::default() };
        assert!(o.validate().is_err());
    }

    #[test]
    fn tolerance_override_applies() {
        let mut o = SuiteOptions { dim: Some(1), quick: true, ..Default::default() };
        o.tolerances.insert("orthonormality".into(), 0.0);
        let r = run(Suite::Orthonormality, &o).unwrap();
        assert!(r[0].checks.iter().all(|c| c.tolerance == 0.0));
        assert!(!r[0].passed());
    }

    #[test]
    fn quick_algebraic_suites_pass() {
        let o = SuiteOptions { dim: Some(1), quick: true, ..Default::default() };
        for s in [Suite::Orthonormality, Suite::Eigen, Suite::HeatEquiv, Suite::Semigroup, Suite::Isometry, Suite::Classical] {
            for r in run(s, &o).unwrap() {
                assert!(r.passed(), "{:?}", r.checks);
                assert!(!r.checks.is_empty());
            }
        }
    }

    #[test]
    fn dimension_filter_drops_one_dimensional_suites() {
        let o = SuiteOptions { dim: Some(2), quick: true, ..Default::default() };
        assert!(run(Suite::Semigroup, &o).unwrap()[0].checks.is_empty());
        assert!(run(Suite::Duality, &o).unwrap()[0].checks.is_empty());
    }
}
