//! `dunkl`: evaluation, verification suites and sweeps from the command line.
//!
//! Exit status: 0 on success, 1 when a check fails or a sweep ratio is not
//! finite, 2 on invalid arguments or configuration.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use dunkl_core::czverify::{refinement_check, run_sweep, SweepConfig, SweepKind, SweepReport};
use dunkl_core::heat::{component_kernel, component_kernel_zeta, heat_kernel, heat_kernel_series, HeatTime, PiIntegration};
use dunkl_core::hermite::{hermite_fn, MultiIndex, ParityVec};
use dunkl_core::imagpow::{kernel_t_route, kernel_zeta_route, ImagOrder};
use dunkl_core::measure::AlphaVec;
use dunkl_core::suites::{self, Suite, SuiteOptions};
use dunkl_core::Error;

use output::{Document, Format, Row};

#[derive(Debug, Parser)]
#[command(name = "dunkl", version, about = "Dunkl harmonic oscillator on Z_2^d: kernels, checks and sweeps")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "DUNKL_THREADS")]
    threads: Option<usize>,
    /// Output format; `eval hermite` and `eval heat` default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate Hermite functions, heat kernels or imaginary-power kernels.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Run a sweep from a TOML or JSON config file.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
struct Space {
    /// Dimension; inferred from --alpha when absent.
    #[arg(long)]
    d: Option<usize>,
    /// Multiplicities, one per axis or a single value for all axes.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    alpha: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// h_n^α at the given points.
    Hermite {
        #[command(flatten)]
        space: Space,
        /// Multi-index, one entry per axis.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Point coordinates, d per point.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        points: Vec<f64>,
    },
    /// G_t(x, y), or its ε-component with --eps, by closed form, series and ζ-form.
    Heat {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<u8>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        y: Vec<f64>,
    },
    /// K_γ^{α,ε}(x, y) by the ζ-route, the t-route or both.
    Kernel {
        #[command(flatten)]
        space: Space,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<u8>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        gamma: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, value_enum, default_value = "zeta")]
        route: Route,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Route {
    Zeta,
    T,
    Both,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// orthonormality, eigen, heat-equiv, semigroup, isometry, classical, routes,
    /// duality, der-est, growth, smoothness, mlem, lemhom or all.
    suite: String,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gamma: Option<Vec<f64>>,
    /// Spectral truncation.
    #[arg(long = "N")]
    truncation: Option<usize>,
    /// Reduced configurations for a fast run.
    #[arg(long)]
    quick: bool,
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol")]
    tolerances: Vec<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// growth, smoothness, mlem, lemhom or der-est.
    kind: String,
    /// Config file (`.toml`, otherwise JSON).
    config: PathBuf,
    /// Also run the 2× refined configuration and report the change of C_emp.
    #[arg(long)]
    refine: bool,
}

/// Everything that was asked for, echoed into the JSON output.
#[derive(Debug, Serialize)]
struct RunConfig {
    subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
    #[serde(skip_serializing_if = "Value::is_null")]
    parameters: Value,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

enum Failure {
    /// Bad arguments or configuration: exit 2.
    Usage(String),
    /// A check failed or a ratio was not finite: exit 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::Config(_) | Error::Dimension { .. } | Error::SupportOverlap | Error::Fixture(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| usage(e.to_string()))?;
    }
    let base = |subcommand: &str, format: Format| RunConfig {
        subcommand: subcommand.to_string(),
        dimension: None,
        alpha: None,
        gamma: None,
        eps: None,
        truncation: None,
        parameters: Value::Null,
        format,
        output: cli.out.clone(),
        seed: cli.seed,
        threads: cli.threads,
    };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Eval(cmd) => {
            let format = cli.format.unwrap_or(match cmd {
                EvalCommand::Kernel { .. } => Format::Json,
                _ => Format::Csv,
            });
            eval(cmd, base("eval", format), out)
        }
        Command::Verify(args) => verify(args, base("verify", cli.format.unwrap_or(Format::Json)), out),
        Command::Sweep(args) => sweep(args, base("sweep", cli.format.unwrap_or(Format::Json)), out),
    }
}

fn alpha_vec(space: &Space) -> Result<AlphaVec, Failure> {
    let d = space.d.unwrap_or(space.alpha.len());
    let v = match space.alpha.len() {
        1 => vec![space.alpha[0]; d],
        n if n == d => space.alpha.clone(),
        n => return Err(usage(format!("--alpha has {n} entries, expected 1 or d = {d}"))),
    };
    Ok(AlphaVec::new(v)?)
}

fn points(v: &[f64], d: usize, flag: &str) -> Result<Vec<Vec<f64>>, Failure> {
    if v.is_empty() || v.len() % d != 0 {
        return Err(usage(format!("--{flag} has {} coordinates, not a positive multiple of d = {d}", v.len())));
    }
    Ok(v.chunks(d).map(<[f64]>::to_vec).collect())
}

fn pairs(x: &[f64], y: &[f64], d: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>, Failure> {
    let (xs, ys) = (points(x, d, "x")?, points(y, d, "y")?);
    if xs.len() != ys.len() {
        return Err(usage(format!("--x gives {} points but --y gives {}", xs.len(), ys.len())));
    }
    Ok(xs.into_iter().zip(ys).collect())
}

fn put_point(row: &mut Row, prefix: &str, p: &[f64]) {
    if p.len() == 1 {
        row.insert(prefix.to_string(), json!(p[0]));
    } else {
        for (i, v) in p.iter().enumerate() {
            row.insert(format!("{prefix}{i}"), json!(v));
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn eval(cmd: &EvalCommand, mut cfg: RunConfig, out: Option<&Path>) -> Outcome {
    let mut rows = Vec::new();
    let summary;
    match cmd {
        EvalCommand::Hermite { space, n, points: pts } => {
            let a = alpha_vec(space)?;
            let d = a.dim();
            if n.len() != d {
                return Err(usage(format!("--n has {} entries, expected d = {d}", n.len())));
            }
            let idx = MultiIndex::new(n.clone());
            for p in points(pts, d, "points")? {
                let mut row = Row::new();
                put_point(&mut row, "x", &p);
                row.insert("value".into(), json!(hermite_fn(&idx, &a, &p)));
                rows.push(row);
            }
            cfg.subcommand = "eval hermite".into();
            cfg.dimension = Some(d);
            cfg.alpha = Some(a.as_slice().to_vec());
            cfg.parameters = json!({ "n": n });
            summary = json!({ "rows": rows.len() });
        }
        EvalCommand::Heat { space, t, eps, x, y } => {
            let a = alpha_vec(space)?;
            let d = a.dim();
            let ht = HeatTime::from_t(*t)?;
            let eps = eps.clone().map(ParityVec::new).transpose()?;
            let mut worst = 0.0f64;
            for (p, q) in pairs(x, y, d)? {
                let (closed, series, zeta) = match &eps {
                    Some(e) => (
                        component_kernel(&a, e, &ht, &p, &q)?,
                        heat_kernel_series(&a, &ht, &p, &q, Some(e))?.value,
                        Some(component_kernel_zeta(&a, e, &ht, &p, &q, PiIntegration::Graded(30, 16))?),
                    ),
                    None => (heat_kernel(&a, &ht, &p, &q)?, heat_kernel_series(&a, &ht, &p, &q, None)?.value, None),
                };
                let mut err = rel(series, closed);
                let mut row = Row::new();
                put_point(&mut row, "x", &p);
                put_point(&mut row, "y", &q);
                row.insert("closed".into(), json!(closed));
                row.insert("series".into(), json!(series));
                if let Some(z) = zeta {
                    row.insert("zeta".into(), json!(z));
                    err = err.max(rel(z, closed));
                }
                row.insert("relerr".into(), json!(err));
                worst = worst.max(err);
                rows.push(row);
            }
            cfg.subcommand = "eval heat".into();
            cfg.dimension = Some(d);
            cfg.alpha = Some(a.as_slice().to_vec());
            cfg.eps = eps.map(Vec::from);
            cfg.parameters = json!({ "t": t });
            summary = json!({ "rows": rows.len(), "max_relerr": worst });
        }
        EvalCommand::Kernel { space, eps, gamma, x, y, route } => {
            let a = alpha_vec(space)?;
            let d = a.dim();
            let e = ParityVec::new(eps.clone())?;
            let gammas = gamma.iter().map(|g| ImagOrder::new(*g)).collect::<Result<Vec<_>, _>>()?;
            let mut worst = 0.0f64;
            for (p, q) in pairs(x, y, d)? {
                for &g in &gammas {
                    let mut row = Row::new();
                    put_point(&mut row, "x", &p);
                    put_point(&mut row, "y", &q);
                    row.insert("gamma".into(), json!(g.get()));
                    let z = (*route != Route::T).then(|| kernel_zeta_route(&a, &e, g, &p, &q)).transpose()?;
                    let t = (*route != Route::Zeta).then(|| kernel_t_route(&a, &e, g, &p, &q)).transpose()?;
                    for (tag, v) in [("zeta", &z), ("t", &t)] {
                        if let Some(v) = v {
                            row.insert(format!("{tag}_re"), json!(v.value.re));
                            row.insert(format!("{tag}_im"), json!(v.value.im));
                            row.insert(format!("{tag}_abserr"), json!(v.abserr));
                        }
                    }
                    if let (Some(z), Some(t)) = (&z, &t) {
                        let diff = (z.value - t.value).norm();
                        row.insert("difference".into(), json!(diff));
                        row.insert("relative_difference".into(), json!(diff / z.value.norm()));
                        worst = worst.max(diff / z.value.norm());
                    }
                    rows.push(row);
                }
            }
            cfg.subcommand = "eval kernel".into();
            cfg.dimension = Some(d);
            cfg.alpha = Some(a.as_slice().to_vec());
            cfg.eps = Some(eps.clone());
            cfg.gamma = Some(gamma.clone());
            cfg.parameters = json!({ "route": route });
            summary = match route {
                Route::Both => json!({ "rows": rows.len(), "max_relative_difference": worst }),
                _ => json!({ "rows": rows.len() }),
            };
        }
    }
    let format = cfg.format;
    Document::new(cfg, rows, summary).emit(format, out).map_err(Failure::Check)
}

fn verify(args: &VerifyArgs, mut cfg: RunConfig, out: Option<&Path>) -> Outcome {
    let suite: Suite = args.suite.parse()?;
    let mut opts = SuiteOptions { dim: args.d, truncation: args.truncation, quick: args.quick, ..SuiteOptions::default() };
    if let Some(s) = cfg.seed {
        opts.seed = s;
    }
    if let Some(a) = &args.alpha {
        let d = args.d.unwrap_or(a.len());
        let v = if a.len() == 1 { vec![a[0]; d] } else { a.clone() };
        opts.alpha = Some(AlphaVec::new(v)?);
    }
    if let Some(g) = &args.gamma {
        opts.gammas = Some(g.iter().map(|g| ImagOrder::new(*g)).collect::<Result<_, _>>()?);
    }
    for t in &args.tolerances {
        let (k, v) = t.split_once('=').ok_or_else(|| usage(format!("--tol `{t}` is not key=value")))?;
        let v: f64 = v.parse().map_err(|_| usage(format!("--tol `{t}`: `{v}` is not a number")))?;
        opts.tolerances.insert(k.to_string(), v);
    }
    let reports = suites::run(suite, &opts)?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for r in &reports {
        for c in &r.checks {
            if !c.passed {
                failed.push(format!("{} {}: {:.3e} > {:.1e}", c.suite, c.name, c.measured, c.tolerance));
            }
            if let Value::Object(m) = serde_json::to_value(c).map_err(|e| Failure::Check(e.to_string()))? {
                rows.push(m);
            }
        }
    }
    let summary = json!({
        "passed": failed.is_empty(),
        "checks": rows.len(),
        "failed": failed.len(),
        "suites": reports.iter().map(|r| json!({ "suite": r.suite, "passed": r.passed(), "checks": r.checks.len(), "seconds": r.seconds })).collect::<Vec<_>>(),
    });
    cfg.subcommand = format!("verify {suite}");
    cfg.dimension = args.d;
    cfg.alpha = opts.alpha.as_ref().map(|a| a.as_slice().to_vec());
    cfg.gamma = args.gamma.clone();
    cfg.truncation = args.truncation;
    cfg.parameters = json!({ "quick": args.quick, "tolerances": opts.tolerances });
    let format = cfg.format;
    Document::new(cfg, rows, summary).emit(format, out).map_err(Failure::Check)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

fn load_config(path: &Path) -> Result<SweepConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn sweep_rows(report: &SweepReport, stage: &str, rows: &mut Vec<Row>) {
    for p in &report.parts {
        for r in &p.records {
            let mut row = Row::new();
            row.insert("stage".into(), json!(stage));
            row.insert("part".into(), json!(p.label));
            if let Ok(Value::Object(m)) = serde_json::to_value(r) {
                row.extend(m);
            }
            rows.push(row);
        }
    }
}

fn sweep_summary(report: &SweepReport) -> Value {
    json!({
        "c_emp": report.c_emp(),
        "all_finite": report.all_finite(),
        "argmax_near_diagonal": report.argmax_near_diagonal(),
        "band_radius": report.band_radius,
        "parts": report.parts.iter().map(|p| json!({
            "label": p.label,
            "c_emp": p.c_emp,
            "all_finite": p.all_finite,
            "argmax": p.argmax_record(),
        })).collect::<Vec<_>>(),
        "warnings": report.warnings,
    })
}

fn sweep(args: &SweepArgs, mut cfg: RunConfig, out: Option<&Path>) -> Outcome {
    let kind: SweepKind = args.kind.parse()?;
    let mut sc = load_config(&args.config)?;
    if let Some(s) = cfg.seed {
        sc.seed = s;
    }
    sc.validate()?;
    let mut rows = Vec::new();
    let (summary, finite) = if args.refine {
        let r = refinement_check(kind, &sc)?;
        sweep_rows(&r.coarse, "coarse", &mut rows);
        sweep_rows(&r.fine, "fine", &mut rows);
        let finite = r.coarse.all_finite() && r.fine.all_finite();
        (
            json!({
                "kind": kind.name(),
                "coarse": sweep_summary(&r.coarse),
                "fine": sweep_summary(&r.fine),
                "max_relative_change": r.max_relative_change(),
            }),
            finite,
        )
    } else {
        let r = run_sweep(kind, &sc)?;
        sweep_rows(&r, "coarse", &mut rows);
        let mut s = sweep_summary(&r);
        s["kind"] = json!(kind.name());
        (s, r.all_finite())
    };
    cfg.subcommand = format!("sweep {}", kind.name());
    cfg.dimension = Some(sc.dim());
    cfg.alpha = Some(sc.alpha.as_slice().to_vec());
    cfg.gamma = Some(sc.gammas.iter().map(|g| g.get()).collect());
    cfg.eps = Some(sc.eps.as_slice().to_vec());
    cfg.parameters = serde_json::to_value(&sc).map_err(|e| Failure::Check(e.to_string()))?;
    let format = cfg.format;
    Document::new(cfg, rows, summary).emit(format, out).map_err(Failure::Check)?;
    if finite {
        Ok(())
    } else {
        Err(Failure::Check("sweep produced nonfinite ratios".into()))
    }
}
