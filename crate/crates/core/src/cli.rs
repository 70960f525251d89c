//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! code with everything that would go to stdout and stderr, so the binary
//! is a thin wrapper and tests can drive the whole surface in-process.
//!
//! Exit codes: 0 success, 1 a property check failed (index symmetry or
//! coordinate invariance), 2 invalid usage or input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::{self, BuildParams};
use crate::chart::{Axis, Chart, Role};
use crate::checker::{self, CheckOptions, Verdict};
use crate::entropy::{shannon_entropy, DensitySpec};
use crate::error::Error;
use crate::expr::Expr;
use crate::geodesic::{distance, DistanceResult, SolverConfig};
use crate::hessian::{self, Potential, WarpSpec};
use crate::scalar::{projective_equiv, Scalar, PROJECTIVE_TOL};
use crate::tensor::{MetricSpec, TensorField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "metric-pair",
    version,
    about = "Generalized metric tensors, their induced distances, and a catalog of line elements",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct MetricArgs {
    /// Catalog id (see `catalog`).
    #[arg(long, conflicts_with = "metric_file")]
    metric: Option<String>,
    /// JSON file holding a metric (or a bare tensor field).
    #[arg(long, value_name = "PATH")]
    metric_file: Option<PathBuf>,
    /// Builder parameter override; repeatable. Values are numbers or expressions.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
    /// Shorthand for `--param dim=N`.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// JSON settings merged under the explicit flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct SolverArgs {
    /// Curve segments N.
    #[arg(long)]
    segments: Option<usize>,
    /// `simpson` or `midpoint`.
    #[arg(long)]
    quadrature: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step_tol: Option<f64>,
    #[arg(long)]
    value_tol: Option<f64>,
    /// Restart noise as a fraction of the chord length.
    #[arg(long)]
    noise: Option<f64>,
    /// `lbfgs` or `gradient-descent`.
    #[arg(long)]
    method: Option<String>,
    /// Two-leg polygon search starts (0 disables).
    #[arg(long)]
    corner_starts: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the named line elements, or build one and print it as JSON.
    Catalog {
        /// Build this entry instead of listing.
        #[arg(long)]
        id: Option<String>,
        #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
        params: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Line element ds^{U+L}: full contraction of the metric with the
    /// displacement at a point.
    Eval {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        disp: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Induced distance: infimum over discretized curves of the integral of
    /// |ds|^{1/(U+L)}, from the chord, noisy restarts and a polygon search.
    Distance {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Target point; repeat for a sweep (one row per target).
        #[arg(long, allow_hyphen_values = true, required = true)]
        to: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Metrizability checks: index symmetry, sign pattern, smoothness,
    /// coordinate invariance of the line element, distance axioms, and the
    /// point-set conditions of the Urysohn metrization theorem.
    Check {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample points for the sign probe.
        #[arg(long)]
        points: Option<usize>,
        /// Probe directions per point.
        #[arg(long)]
        vectors: Option<usize>,
        #[arg(long)]
        invariance_samples: Option<usize>,
        #[arg(long)]
        smoothness_samples: Option<usize>,
        /// Random pairs for the distance axioms (0 with --triples 0 skips them).
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        triples: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hessian structure: order-L coordinate partials of a potential as a
    /// fully-symmetric (0,L) tensor (symbolic), or their finite-difference
    /// values at --point.
    Hessian {
        /// Potential expression in the axis names.
        #[arg(long, allow_hyphen_values = true)]
        potential: String,
        /// Comma-separated axis names, each optionally `name:role`.
        #[arg(long)]
        axes: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Relative finite-difference step (scaled by 1 + |x|).
        #[arg(long)]
        fd_step: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Warped product g_B + f^2 g_F of a base and a fiber metric, or a
    /// component comparison of FLRW with its warped-product form.
    Warp {
        /// Base metric: catalog id or JSON path.
        #[arg(long, required_unless_present = "verify_flrw")]
        base: Option<String>,
        #[arg(
            long = "base-param",
            value_name = "NAME=VALUE",
            allow_hyphen_values = true
        )]
        base_params: Vec<String>,
        /// Fiber metric: catalog id or JSON path.
        #[arg(long, required_unless_present = "verify_flrw")]
        fiber: Option<String>,
        #[arg(
            long = "fiber-param",
            value_name = "NAME=VALUE",
            allow_hyphen_values = true
        )]
        fiber_params: Vec<String>,
        /// Warping function in the base coordinates.
        #[arg(long, allow_hyphen_values = true)]
        warp: String,
        /// Compare catalog FLRW (scale factor = --warp, in t) with
        /// (R, -c^2 dt^2) warped with R^3.
        #[arg(long)]
        verify_flrw: bool,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        t_range: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shannon entropy -∫ P ln P of a density on an interval (composite Simpson).
    Entropy {
        #[arg(long, allow_hyphen_values = true)]
        density: String,
        #[arg(long, default_value = "x")]
        var: String,
        /// `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        interval: String,
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Projective equivalence of complex tuples: b = λ a for some nonzero λ.
    Projective {
        /// Comma-separated complex literals such as `1+2i,3`.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = PROJECTIVE_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Settings file for `--config`. Explicit flags win; unknown keys are
/// rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: Option<String>,
    pub metric_file: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    /// Partial solver settings (any subset of the solver fields).
    pub solver: Option<serde_json::Map<String, Value>>,
    /// Partial check settings: points, vectors, invariance_samples,
    /// smoothness_samples, pairs, triples.
    pub check: Option<serde_json::Map<String, Value>>,
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

/// A rendered report in all three formats.
struct Report {
    json: String,
    csv: String,
    table: String,
    failed: bool,
}

/// Parses `argv` (including the program name) and executes it.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let (output, result) = dispatch(cli.cmd);
    match result.and_then(|(cfg, report)| emit(&output, &cfg, report)) {
        Ok(o) => o,
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Lib(e)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn emit(output: &OutputArgs, cfg: &RunConfig, report: Report) -> CliResult<Outcome> {
    let format = output.format.or(cfg.format).unwrap_or_default();
    let text = match format {
        Format::Json => report.json,
        Format::Csv => report.csv,
        Format::Table => report.table,
    };
    let code = if report.failed { 1 } else { 0 };
    match output.out.clone().or_else(|| cfg.out.clone()) {
        Some(path) => {
            std::fs::write(&path, text)
                .map_err(|e| Failure::Usage(format!("--out {}: {e}", path.display())))?;
            Ok(Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            })
        }
        None => Ok(Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        }),
    }
}

fn dispatch(cmd: Command) -> (OutputArgs, CliResult<(RunConfig, Report)>) {
    match cmd {
        Command::Catalog { id, params, output } => {
            let r = load_config(&output)
                .and_then(|cfg| Ok((cfg.clone(), cmd_catalog(id, &params, &cfg)?)));
            (output, r)
        }
        Command::Eval {
            metric,
            point,
            disp,
            output,
        } => {
            let r = load_config(&output)
                .and_then(|cfg| Ok((cfg.clone(), cmd_eval(&metric, &point, &disp, &cfg)?)));
            (output, r)
        }
        Command::Distance {
            metric,
            from,
            to,
            seed,
            solver,
            output,
        } => {
            let r = load_config(&output).and_then(|cfg| {
                Ok((
                    cfg.clone(),
                    cmd_distance(&metric, &from, &to, seed, &solver, &cfg)?,
                ))
            });
            (output, r)
        }
        Command::Check {
            metric,
            seed,
            points,
            vectors,
            invariance_samples,
            smoothness_samples,
            pairs,
            triples,
            solver,
            output,
        } => {
            let flags = [
                ("points", points),
                ("vectors", vectors),
                ("invariance_samples", invariance_samples),
                ("smoothness_samples", smoothness_samples),
                ("pairs", pairs),
                ("triples", triples),
            ];
            let r = load_config(&output).and_then(|cfg| {
                Ok((
                    cfg.clone(),
                    cmd_check(&metric, seed, &flags, &solver, &cfg)?,
                ))
            });
            (output, r)
        }
        Command::Hessian {
            potential,
            axes,
            order,
            point,
            fd_step,
            output,
        } => {
            let r = load_config(&output).and_then(|cfg| {
                Ok((
                    cfg,
                    cmd_hessian(&potential, &axes, order, point.as_deref(), fd_step)?,
                ))
            });
            (output, r)
        }
        Command::Warp {
            base,
            base_params,
            fiber,
            fiber_params,
            warp,
            verify_flrw,
            c,
            t_range,
            samples,
            seed,
            output,
        } => {
            let r = load_config(&output).and_then(|cfg| {
                let report = if verify_flrw {
                    let seed = seed.or(cfg.seed).ok_or_else(|| {
                        Failure::Usage("--seed is required with --verify-flrw".into())
                    })?;
                    cmd_verify_flrw(&warp, c, &t_range, samples, seed)?
                } else {
                    let base = load_metric_ref(
                        base.as_deref().unwrap_or_default(),
                        &base_params,
                        "--base",
                    )?;
                    let fiber = load_metric_ref(
                        fiber.as_deref().unwrap_or_default(),
                        &fiber_params,
                        "--fiber",
                    )?;
                    cmd_warp(base, fiber, &warp)?
                };
                Ok((cfg, report))
            });
            (output, r)
        }
        Command::Entropy {
            density,
            var,
            interval,
            nodes,
            output,
        } => {
            let r = load_config(&output)
                .and_then(|cfg| Ok((cfg, cmd_entropy(&density, &var, &interval, nodes)?)));
            (output, r)
        }
        Command::Projective { a, b, tol, output } => {
            let r = load_config(&output).and_then(|cfg| Ok((cfg, cmd_projective(&a, &b, tol)?)));
            (output, r)
        }
    }
}

// ---------------------------------------------------------------- parsing

fn load_config(output: &OutputArgs) -> CliResult<RunConfig> {
    let Some(path) = &output.config else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))
}

fn parse_list(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Usage(format!("{flag}: `{t}` is not a finite decimal")))
        })
        .collect()
}

fn parse_kv(flag: &str, items: &[String]) -> CliResult<BuildParams> {
    let mut out = BuildParams::new();
    for item in items {
        let Some((k, v)) = item.split_once('=') else {
            return usage(format!("{flag}: expected NAME=VALUE, got `{item}`"));
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn read_metric_file(path: &Path) -> CliResult<MetricSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    match serde_json::from_str::<MetricSpec>(&text) {
        Ok(m) => Ok(m),
        Err(first) => match serde_json::from_str::<TensorField>(&text) {
            Ok(t) => {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(MetricSpec::from_tensor(name, t)?)
            }
            Err(_) => usage(format!("{}: {first}", path.display())),
        },
    }
}

fn load_metric(args: &MetricArgs, cfg: &RunConfig) -> CliResult<MetricSpec> {
    let mut params = cfg.params.clone();
    params.extend(parse_kv("--param", &args.params)?);
    if let Some(d) = args.dim.or(cfg.dim) {
        params.insert("dim".into(), d.to_string());
    }
    // explicit flags replace the config's metric choice wholesale
    let (id, file) = if args.metric.is_some() || args.metric_file.is_some() {
        (args.metric.clone(), args.metric_file.clone())
    } else {
        (cfg.metric.clone(), cfg.metric_file.clone())
    };
    match (id, file) {
        (Some(id), _) => Ok(catalog::build(&id, &params)?),
        (None, Some(path)) => {
            if !params.is_empty() {
                return usage("--param only applies to catalog entries");
            }
            read_metric_file(&path)
        }
        (None, None) => usage("one of --metric or --metric-file is required"),
    }
}

fn load_metric_ref(reference: &str, params: &[String], flag: &str) -> CliResult<MetricSpec> {
    let params = parse_kv(flag, params)?;
    if catalog::ids().contains(&reference) {
        Ok(catalog::build(reference, &params)?)
    } else if Path::new(reference).exists() {
        read_metric_file(Path::new(reference))
    } else {
        usage(format!(
            "{flag}: `{reference}` is neither a catalog id nor a file"
        ))
    }
}

fn solver_config(flags: &SolverArgs, seed: u64, cfg: &RunConfig) -> CliResult<SolverConfig> {
    let mut v = serde_json::to_value(SolverConfig::default()).expect("solver config serializes");
    let obj = v.as_object_mut().expect("object");
    if let Some(extra) = &cfg.solver {
        for (k, val) in extra {
            obj.insert(k.clone(), val.clone());
        }
    }
    let mut set = |k: &str, val: Option<Value>| {
        if let Some(val) = val {
            obj.insert(k.to_string(), val);
        }
    };
    set("segments", flags.segments.map(Value::from));
    set("quadrature", flags.quadrature.clone().map(Value::from));
    set("restarts", flags.restarts.map(Value::from));
    set("max_iters", flags.max_iters.map(Value::from));
    set("step_tol", flags.step_tol.map(Value::from));
    set("value_tol", flags.value_tol.map(Value::from));
    set("noise", flags.noise.map(Value::from));
    set("method", flags.method.clone().map(Value::from));
    set("corner_starts", flags.corner_starts.map(Value::from));
    set("seed", Some(Value::from(seed)));
    let cfg: SolverConfig =
        serde_json::from_value(v).map_err(|e| Failure::Usage(format!("solver settings: {e}")))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn require_seed(flag: Option<u64>, cfg: &RunConfig) -> CliResult<u64> {
    flag.or(cfg.seed)
        .ok_or_else(|| Failure::Usage("--seed is required for sampling commands".into()))
}

// ------------------------------------------------------------- formatting

/// Number text shared by the JSON and CSV renderings.
fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("f64 serializes")
}

fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn scalar_cells(s: &Scalar) -> String {
    nums(&s.components())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Indeterminate => "indeterminate",
    }
}

// ------------------------------------------------------------ subcommands

fn cmd_catalog(id: Option<String>, params: &[String], cfg: &RunConfig) -> CliResult<Report> {
    match id.or(cfg.metric.clone()) {
        Some(id) => {
            let mut p = cfg.params.clone();
            p.extend(parse_kv("--param", params)?);
            let m = catalog::build(&id, &p)?;
            let mut csv = String::from("index,expression\n");
            for (idx, e) in m.tensor().components() {
                let ix: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(csv, "{},\"{}\"", ix.join(";"), e);
            }
            let json = to_json(&m);
            Ok(Report {
                table: json.clone(),
                json,
                csv,
                failed: false,
            })
        }
        None => {
            let list = catalog::list();
            let mut csv = String::from("id,title,rank,codomain,params\n");
            let mut table = String::new();
            for e in &list {
                let names: Vec<&str> = e.params.iter().map(|p| p.name).collect();
                let _ = writeln!(
                    csv,
                    "{},\"{}\",({};{}),{},{}",
                    e.id,
                    e.title,
                    e.rank[0],
                    e.rank[1],
                    e.codomain.name(),
                    names.join(";")
                );
                let _ = writeln!(
                    table,
                    "{:<18} ({},{}) {:<10} {}",
                    e.id,
                    e.rank[0],
                    e.rank[1],
                    e.codomain.name(),
                    e.title
                );
            }
            Ok(Report {
                json: catalog::catalog_json(),
                csv,
                table,
                failed: false,
            })
        }
    }
}

#[derive(Serialize)]
struct EvalReport<'a> {
    metric: &'a str,
    point: Vec<f64>,
    disp: Vec<f64>,
    order: usize,
    line_element: Scalar,
    /// `|ds^n|^{1/n}`, the distance integrand.
    integrand: f64,
}

fn cmd_eval(args: &MetricArgs, point: &str, disp: &str, cfg: &RunConfig) -> CliResult<Report> {
    let m = load_metric(args, cfg)?;
    let p = parse_list("--point", point)?;
    let dc = parse_list("--disp", disp)?;
    let value = m.line_element(&p, &dc)?;
    let order = m.order();
    let integrand = value.norm().powf(1.0 / order as f64);
    let r = EvalReport {
        metric: &m.name,
        point: p.clone(),
        disp: dc.clone(),
        order,
        line_element: value,
        integrand,
    };
    let csv = format!(
        "metric,point,disp,order,line_element,integrand\n{},{},{},{},{},{}\n",
        m.name,
        nums(&p),
        nums(&dc),
        order,
        scalar_cells(&value),
        num(integrand)
    );
    Ok(Report {
        json: to_json(&r),
        csv,
        table: format!("{value}\n"),
        failed: false,
    })
}

#[derive(Serialize)]
struct DistanceReport<'a> {
    metric: &'a str,
    from: Vec<f64>,
    results: Vec<DistanceEntry>,
}

#[derive(Serialize)]
struct DistanceEntry {
    to: Vec<f64>,
    #[serde(flatten)]
    result: DistanceResult,
}

fn cmd_distance(
    args: &MetricArgs,
    from: &str,
    to: &[String],
    seed: Option<u64>,
    solver: &SolverArgs,
    cfg: &RunConfig,
) -> CliResult<Report> {
    let seed = require_seed(seed, cfg)?;
    let solver = solver_config(solver, seed, cfg)?;
    let m = load_metric(args, cfg)?;
    let p = parse_list("--from", from)?;
    let mut results = Vec::new();
    for t in to {
        let q = parse_list("--to", t)?;
        let result = distance(&m, &p, &q, &solver)?;
        results.push(DistanceEntry { to: q, result });
    }
    let mut csv = String::from("from,to,value,converged\n");
    let mut table = String::new();
    for e in &results {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            nums(&p),
            nums(&e.to),
            num(e.result.value),
            e.result.converged
        );
        let _ = writeln!(
            table,
            "d({:?}, {:?}) = {}  [chord {}, {:?}, converged {}]",
            p, e.to, e.result.value, e.result.chord, e.result.source, e.result.converged
        );
    }
    let r = DistanceReport {
        metric: &m.name,
        from: p.clone(),
        results,
    };
    Ok(Report {
        json: to_json(&r),
        csv,
        table,
        failed: false,
    })
}

fn cmd_check(
    args: &MetricArgs,
    seed: Option<u64>,
    flags: &[(&str, Option<usize>)],
    solver: &SolverArgs,
    cfg: &RunConfig,
) -> CliResult<Report> {
    let seed = require_seed(seed, cfg)?;
    let mut opts = CheckOptions::new(seed);
    let mut v = serde_json::to_value(&opts).expect("options serialize");
    let obj = v.as_object_mut().expect("object");
    if let Some(extra) = &cfg.check {
        for (k, val) in extra {
            if k == "seed" || k == "solver" {
                return usage(format!("config check.{k}: set it at the top level"));
            }
            obj.insert(k.clone(), val.clone());
        }
    }
    for (k, val) in flags {
        if let Some(n) = val {
            obj.insert(k.to_string(), Value::from(*n));
        }
    }
    opts = serde_json::from_value(v).map_err(|e| Failure::Usage(format!("check settings: {e}")))?;
    opts.solver = solver_config(solver, seed, cfg)?;
    let m = load_metric(args, cfg)?;
    let report = checker::check_metric(&m, &opts)?;

    let mut table = String::new();
    let _ = writeln!(table, "metric: {}", report.metric);
    let _ = writeln!(table, "seed: {}", report.seed);
    let _ = writeln!(
        table,
        "index symmetry: {} (max deviation {:e})",
        verdict(report.symmetry.verdict),
        report.symmetry.max_deviation
    );
    let _ = writeln!(table, "classification: {}", report.definiteness.label());
    let _ = writeln!(
        table,
        "positive-definite: {}",
        verdict(report.positive_definite)
    );
    let _ = writeln!(table, "smoothness: {}", verdict(report.smoothness.verdict));
    let _ = writeln!(
        table,
        "invariance: {} (max relative deviation {:e} over {} samples)",
        verdict(report.invariance.verdict),
        report.invariance.max_relative_deviation,
        report.invariance.samples
    );
    if let Some(d) = &report.distance_axioms {
        let _ = writeln!(
            table,
            "distance: {} (nonnegativity {}, symmetry {}, triangle {}, identity {}, topology {})",
            d.kind,
            verdict(d.nonnegativity.verdict),
            verdict(d.symmetry.verdict),
            verdict(d.triangle.verdict),
            verdict(d.identity_of_indiscernibles.verdict),
            verdict(d.topology.verdict)
        );
    }
    let _ = writeln!(table, "point-set conditions: {}", report.point_set.status);

    let mut csv = String::from("check,verdict,value\n");
    let _ = writeln!(
        csv,
        "index_symmetry,{},{}",
        verdict(report.symmetry.verdict),
        num(report.symmetry.max_deviation)
    );
    let _ = writeln!(csv, "classification,{},", report.definiteness.label());
    let _ = writeln!(
        csv,
        "positive_definite,{},",
        verdict(report.positive_definite)
    );
    let _ = writeln!(
        csv,
        "smoothness,{},{}",
        verdict(report.smoothness.verdict),
        num(report.smoothness.worst_contraction)
    );
    let _ = writeln!(
        csv,
        "invariance,{},{}",
        verdict(report.invariance.verdict),
        num(report.invariance.max_relative_deviation)
    );
    if let Some(d) = &report.distance_axioms {
        for (name, a) in [
            ("nonnegativity", &d.nonnegativity),
            ("distance_symmetry", &d.symmetry),
            ("triangle", &d.triangle),
            ("identity_of_indiscernibles", &d.identity_of_indiscernibles),
            ("topology", &d.topology),
        ] {
            let _ = writeln!(csv, "{name},{},{}", verdict(a.verdict), num(a.margin));
        }
        let _ = writeln!(csv, "distance_kind,{},", d.kind);
    }
    Ok(Report {
        json: to_json(&report),
        csv,
        table,
        failed: report.has_failures(),
    })
}

fn parse_axes(spec: &str) -> CliResult<Chart> {
    let mut axes = Vec::new();
    for item in spec.split(',') {
        let (name, role) = match item.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (item.trim(), "space"),
        };
        let role = match role {
            "time" => Role::Time,
            "space" => Role::Space,
            "probability" => Role::Probability,
            "entropy" => Role::Entropy,
            "information" => Role::Information,
            "generic" => Role::Generic,
            other => return usage(format!("--axes: unknown role `{other}`")),
        };
        axes.push(Axis::new(name, role));
    }
    Ok(Chart::new(axes)?)
}

fn cmd_hessian(
    potential: &str,
    axes: &str,
    order: usize,
    point: Option<&str>,
    fd_step: Option<f64>,
) -> CliResult<Report> {
    let chart = parse_axes(axes)?;
    let p = Potential::parse(potential, chart)?;
    if let Some(h) = fd_step {
        if !(h > 0.0 && h.is_finite()) {
            return usage("--fd-step must be positive");
        }
    }
    match point {
        Some(pt) => {
            let x = parse_list("--point", pt)?;
            let r = hessian::hessian_metric(&p, order, &x, fd_step)?;
            let mut csv = String::from("index,value\n");
            let mut table = String::new();
            for (idx, v) in &r.table.entries {
                let ix: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(csv, "{},{}", ix.join(";"), num(v.re()));
                let _ = writeln!(table, "H{:?} = {}", idx, v);
            }
            let _ = writeln!(
                table,
                "max asymmetry before averaging: {:e}",
                r.max_asymmetry
            );
            let _ = writeln!(table, "note: {}", r.note);
            Ok(Report {
                json: to_json(&r),
                csv,
                table,
                failed: false,
            })
        }
        None => {
            if fd_step.is_some() {
                return usage("--fd-step needs --point");
            }
            let t = hessian::hessian_field(&p, order)?;
            Ok(field_report(&t))
        }
    }
}

fn field_report(t: &TensorField) -> Report {
    let mut csv = String::from("index,expression\n");
    let mut table = String::new();
    for (idx, e) in t.components() {
        let ix: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(csv, "{},\"{}\"", ix.join(";"), e);
        let _ = writeln!(table, "{:?}: {}", idx, e);
    }
    Report {
        json: to_json(t),
        csv,
        table,
        failed: false,
    }
}

fn cmd_warp(base: MetricSpec, fiber: MetricSpec, warp: &str) -> CliResult<Report> {
    let warp = Expr::parse(warp, &base.chart().scope())?;
    let spec = WarpSpec {
        base: base.tensor().clone(),
        fiber: fiber.tensor().clone(),
        warp,
    };
    let m = hessian::warped_product(&spec)?;
    let mut r = field_report(m.tensor());
    r.json = to_json(&m);
    Ok(r)
}

fn cmd_verify_flrw(a: &str, c: f64, t_range: &str, samples: usize, seed: u64) -> CliResult<Report> {
    let t = parse_list("--t-range", t_range)?;
    let [lo, hi] = t[..] else {
        return usage("--t-range expects `lo,hi`");
    };
    let v = hessian::verify_flrw_warped(a, c, lo, hi, samples, seed)?;
    let csv = format!(
        "equivalent,max_deviation,samples\n{},{},{}\n",
        v.equivalent,
        num(v.max_deviation),
        v.samples
    );
    let table = format!(
        "flrw vs warped product: {} (max deviation {:e} over {} samples)\n",
        if v.equivalent {
            "equivalent"
        } else {
            "different"
        },
        v.max_deviation,
        v.samples
    );
    Ok(Report {
        json: to_json(&v),
        csv,
        table,
        failed: false,
    })
}

fn cmd_entropy(density: &str, var: &str, interval: &str, nodes: usize) -> CliResult<Report> {
    let iv = parse_list("--interval", interval)?;
    let [lo, hi] = iv[..] else {
        return usage("--interval expects `a,b`");
    };
    let d = DensitySpec::parse(density, var, lo, hi, nodes)?;
    let r = shannon_entropy(&d)?;
    let csv = format!(
        "entropy,total_mass,nodes\n{},{},{}\n",
        num(r.entropy),
        num(r.total_mass),
        r.nodes
    );
    let table = format!(
        "entropy: {}\ntotal mass: {}\nnodes: {}\n",
        r.entropy, r.total_mass, r.nodes
    );
    Ok(Report {
        json: to_json(&r),
        csv,
        table,
        failed: false,
    })
}

fn parse_complex_tuple(flag: &str, s: &str) -> CliResult<Vec<Complex64>> {
    s.split(',')
        .map(|t| match Expr::parse_scalar(t.trim()) {
            Ok(Scalar::Real(r)) => Ok(Complex64::new(r, 0.0)),
            Ok(Scalar::Complex(z)) => Ok(z),
            Ok(_) => usage(format!("{flag}: `{t}` is not a complex number")),
            Err(e) => usage(format!("{flag}: {e}")),
        })
        .collect()
}

#[derive(Serialize)]
struct ProjectiveReport {
    equivalent: bool,
    tolerance: f64,
}

fn cmd_projective(a: &str, b: &str, tol: f64) -> CliResult<Report> {
    let a = parse_complex_tuple("--a", a)?;
    let b = parse_complex_tuple("--b", b)?;
    let eq = projective_equiv(&a, &b, tol)?;
    let r = ProjectiveReport {
        equivalent: eq,
        tolerance: tol,
    };
    let csv = format!("equivalent,tolerance\n{},{}\n", eq, num(tol));
    Ok(Report {
        json: to_json(&r),
        csv,
        table: format!("{eq}\n"),
        failed: false,
    })
}
