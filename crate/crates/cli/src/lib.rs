//! Command-line front end for `kmetric-core`.
//!
//! [`run`] parses arguments, executes one subcommand on a dedicated thread
//! pool, and returns the JSON report together with the process exit code.
//! Exit codes: 0 success, 1 negative verification, 2 input error, 3 solver
//! error.

pub mod formats;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use kmetric_core::coboundary::{embed_l2_to_lp, jl_reduce, DEFAULT_CPRIME};
use kmetric_core::corpus::{self, CorpusInstance, Expected, Payload};
use kmetric_core::metric::{min_bounding_chain, VerificationReport};
use kmetric_core::simplex::{boundary_of_simplex, Combinations};
use kmetric_core::volume::{volume_metric, volume_to_coboundary};
use kmetric_core::{
    apex_extend, apex_extend_chain_matrix, check_strong, eval_coboundary_metric, frechet_embed,
    hypertree_to_l1, is_hypertree, metric, Chain, Error, Norm, SimplexKey, VerifyOptions,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::formats::InputError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kmetric", version, about = "Build, verify, and embed finite k-metric spaces")]
pub struct Cli {
    /// Worker threads for parallel linear programs (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the weak (and optionally strong) simplex inequality.
    Verify {
        file: PathBuf,
        #[arg(long)]
        strong: bool,
        /// Solve every strong-inequality program and report all margins.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = metric::DEFAULT_METRIC_TOL)]
        tol: f64,
    },
    /// Cheapest facet chain bounding the boundary of a target simplex.
    MinChain {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Embed into a coboundary k-metric.
    Embed {
        #[command(subcommand)]
        method: EmbedMethod,
    },
    /// Coboundary k-metric of a chain matrix under an ℓp norm.
    Eval {
        file: PathBuf,
        /// Norm exponent: a number ≥ 1 or `inf`.
        #[arg(long)]
        p: Norm,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Volume k-metric of a point cloud, or its cone-chain matrix.
    Volume {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        to_coboundary: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apex extension of a k-metric or a chain matrix.
    Apex {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hypertree conditions of a weighted complex, optionally with its ℓ1 chain matrix.
    Hypertree {
        file: PathBuf,
        #[arg(long)]
        to_l1: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a corpus instance.
    Gen {
        /// subdivided_triangle, four_point_c32, six_point_c4, discrete,
        /// perimeter, maxside, random_strong, random_hypertree, random_chains,
        /// random_cloud, random_triangle
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Point cloud for `perimeter` and `maxside`.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum EmbedMethod {
    /// Isometric ℓ∞ embedding of a strong k-metric.
    Frechet {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Gaussian dimension reduction of an ℓ2 chain matrix.
    Jl {
        file: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CPRIME)]
        cprime: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Move an ℓ2 chain matrix to ℓp.
    L2lp {
        file: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub total_ms: f64,
}

/// The JSON document printed on success (and on negative verification).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub status: &'static str,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub command: Vec<String>,
    pub error: ErrorBody,
    pub exit_code: i32,
}

#[derive(Debug)]
enum Failure {
    Input(InputError),
    Core(Error),
    Output(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn into_body(self) -> (ErrorBody, i32) {
        let plain = |kind, message: String| ErrorBody {
            kind,
            message,
            file: None,
            line: None,
            column: None,
            field: None,
            details: None,
        };
        match self {
            Failure::Input(e) => (
                ErrorBody {
                    kind: "input",
                    message: e.to_string(),
                    file: e.file,
                    line: e.line,
                    column: e.column,
                    field: e.field,
                    details: None,
                },
                EXIT_INPUT,
            ),
            Failure::Output(msg) => (plain("output", msg), EXIT_INPUT),
            Failure::Core(e) => {
                let message = e.to_string();
                match e {
                    Error::Argument(_) | Error::Size(_) => (plain("input", message), EXIT_INPUT),
                    Error::NotFillable(_) => (plain("not_fillable", message), EXIT_NEGATIVE),
                    Error::NotStrong { simplex, value, achieved } => {
                        let mut body = plain("not_strong", message);
                        body.details = Some(json!({ "simplex": simplex, "value": value, "achieved": achieved }));
                        (body, EXIT_NEGATIVE)
                    }
                    Error::Solver(_) => (plain("solver", message), EXIT_SOLVER),
                    Error::NotCoboundary { facet, residual } => {
                        let mut body = plain("solver", message);
                        body.details = Some(json!({ "facet": facet, "residual": residual }));
                        (body, EXIT_SOLVER)
                    }
                }
            }
        }
    }
}

/// A finite number, or the string `"inf"` / `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Nonzero coefficients of a chain as `[{s, c}]`.
pub fn sparse_chain(c: &Chain) -> Value {
    let entries: Vec<Value> = Combinations::new(c.n(), c.dim() + 1)
        .zip(c.coeffs())
        .filter(|(_, &x)| x != 0.0)
        .map(|(s, &x)| json!({ "s": s, "c": x }))
        .collect();
    Value::Array(entries)
}

pub fn verification_json(r: &VerificationReport) -> Value {
    let witness = r.strong_witness.as_ref().map(|w| {
        json!({
            "simplex": w.simplex.vertices(),
            "value": w.value,
            "cost": w.cost,
            "chain": sparse_chain(&w.chain),
        })
    });
    json!({
        "n": r.n,
        "k": r.k,
        "weak": r.is_weak,
        "strong": r.is_strong,
        "pseudo": r.is_pseudo(),
        "pseudo_violations": r.pseudo_violations.iter().map(|s| s.vertices().to_vec()).collect::<Vec<_>>(),
        "weak_violations": r.weak_violations.iter().map(|v| json!({
            "simplex": v.simplex.vertices(),
            "y": v.y,
            "value": v.value,
            "bound": v.bound,
        })).collect::<Vec<_>>(),
        "strong_witness": witness,
        "min_margin": r.min_margin(),
        "margins": r.strong_margins.iter().map(|m| json!({
            "simplex": m.simplex.vertices(),
            "value": m.value,
            "cost": m.cost,
            "margin": m.margin(),
        })).collect::<Vec<_>>(),
    })
}

fn expected_json(inst: &CorpusInstance) -> Value {
    let map: serde_json::Map<String, Value> = inst
        .expected
        .iter()
        .map(|(k, v)| {
            let v = match v {
                Expected::Flag(b) => json!(b),
                Expected::Number(x) => json!(x),
                Expected::Table(t) => json!(t),
            };
            (k.clone(), v)
        })
        .collect();
    Value::Object(map)
}

fn payload_json(p: &Payload) -> Value {
    let v = match p {
        Payload::Metric(d) => serde_json::to_value(formats::metric_to_file(d)),
        Payload::Chains(f) => serde_json::to_value(formats::chains_to_file(f)),
        Payload::Complex(c) => serde_json::to_value(formats::complex_to_file(c)),
        Payload::Cloud(c) => serde_json::to_value(formats::cloud_to_file(c)),
    };
    v.expect("file types serialize")
}

/// Result of one subcommand before it is wrapped into a report.
struct Outcome {
    status: &'static str,
    results: Value,
    output: Option<Value>,
}

impl Outcome {
    fn ok(results: Value, output: Option<Value>) -> Self {
        Outcome { status: "ok", results, output }
    }
}

struct Context {
    inputs: Vec<InputDigest>,
}

impl Context {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let (text, sha256) = formats::read_input(path)?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256 });
        Ok(text)
    }

    fn parse<T>(
        &mut self,
        path: &Path,
        parse: impl FnOnce(&str) -> Result<T, InputError>,
    ) -> Result<T, Failure> {
        let text = self.read(path)?;
        parse(&text).map_err(|e| Failure::Input(e.in_file(&path.display().to_string())))
    }
}

fn need(v: Option<usize>, flag: &str, name: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| Failure::Core(Error::Argument(format!("`gen {name}` needs --{flag}"))))
}

fn execute(cmd: &Command, ctx: &mut Context) -> Result<Outcome, Failure> {
    match cmd {
        Command::Verify { file, strong, exhaustive, tol } => {
            let d = ctx.parse(file, formats::parse_metric)?;
            let opts = VerifyOptions { tol: *tol, exhaustive: *exhaustive, ..Default::default() };
            let report = if *strong { check_strong(&d, &opts)? } else { metric::check_weak_with(&d, &opts) };
            let negative = !report.is_weak || report.is_strong == Some(false);
            Ok(Outcome {
                status: if negative { "negative" } else { "ok" },
                results: verification_json(&report),
                output: None,
            })
        }
        Command::MinChain { file, target, .. } => {
            let complex = ctx.parse(file, formats::parse_complex)?;
            let mut sorted = target.clone();
            sorted.sort_unstable();
            let key = SimplexKey::new(sorted, complex.n())?;
            if key.len() != complex.k() {
                return Err(Error::Argument(format!("target needs {} vertices", complex.k())).into());
            }
            let (weights, mask) = complex.weights_and_mask();
            let bc = min_bounding_chain(&weights, &boundary_of_simplex(complex.n(), &key)?, Some(&mask))?;
            let results = json!({ "target": key.vertices(), "cost": bc.cost, "support": sparse_chain(&bc.chain) });
            Ok(Outcome::ok(results, Some(serde_json::to_value(formats::chain_to_file(&bc.chain)).unwrap())))
        }
        Command::Embed { method } => match method {
            EmbedMethod::Frechet { file, .. } => {
                let d = ctx.parse(file, formats::parse_metric)?;
                let f = frechet_embed(&d)?;
                let results = json!({ "columns": f.m(), "n": f.n(), "k": f.k() });
                Ok(Outcome::ok(results, Some(serde_json::to_value(formats::chains_to_file(&f)).unwrap())))
            }
            EmbedMethod::Jl { file, eps, seed, cprime, .. } => {
                let f = ctx.parse(file, formats::parse_chain_matrix)?;
                let e = jl_reduce(&f, *eps, *cprime, *seed)?;
                let results = json!({
                    "source_columns": f.m(),
                    "target_dim": e.target_dim,
                    "eps": eps,
                    "cprime": cprime,
                    "seed": seed,
                    "distortion": num(e.distortion),
                    "within_eps": e.distortion <= *eps,
                });
                Ok(Outcome::ok(results, Some(serde_json::to_value(formats::chains_to_file(&e.chains)).unwrap())))
            }
            EmbedMethod::L2lp { file, p, eps, seed, .. } => {
                let f = ctx.parse(file, formats::parse_chain_matrix)?;
                let e = embed_l2_to_lp(&f, *p, *eps, *seed)?;
                let results = json!({
                    "source_columns": f.m(),
                    "target_dim": e.target_dim,
                    "p": p,
                    "eps": eps,
                    "seed": seed,
                    "distortion": num(e.distortion),
                    "within_eps": e.distortion <= *eps,
                });
                Ok(Outcome::ok(results, Some(serde_json::to_value(formats::chains_to_file(&e.chains)).unwrap())))
            }
        },
        Command::Eval { file, p, .. } => {
            let f = ctx.parse(file, formats::parse_chain_matrix)?;
            let d = eval_coboundary_metric(&f, *p);
            let results = json!({ "n": d.n(), "k": d.k(), "norm": p.to_string() });
            Ok(Outcome::ok(results, Some(serde_json::to_value(formats::metric_to_file(&d)).unwrap())))
        }
        Command::Volume { file, k, to_coboundary, .. } => {
            let cloud = ctx.parse(file, formats::parse_cloud)?;
            let mut warnings = Vec::new();
            if *k > cloud.m() + 1 {
                warnings.push(format!("arity {k} exceeds ambient dimension + 1; every volume is zero"));
            }
            if *to_coboundary {
                let f = volume_to_coboundary(&cloud, *k)?;
                let results = json!({ "columns": f.m(), "warnings": warnings });
                Ok(Outcome::ok(results, Some(serde_json::to_value(formats::chains_to_file(&f)).unwrap())))
            } else {
                let d = volume_metric(&cloud, *k)?;
                let results = json!({ "n": d.n(), "k": d.k(), "warnings": warnings });
                Ok(Outcome::ok(results, Some(serde_json::to_value(formats::metric_to_file(&d)).unwrap())))
            }
        }
        Command::Apex { file, .. } => {
            let input = ctx.parse(file, formats::parse_metric_or_chains)?;
            let (results, output) = match input {
                formats::MetricOrChains::Metric(d) => {
                    let ext = apex_extend(&d)?;
                    (
                        json!({ "kind": "metric", "apex_index": ext.apex_index, "n": ext.extended.n(), "k": ext.extended.k() }),
                        serde_json::to_value(formats::metric_to_file(&ext.extended)).unwrap(),
                    )
                }
                formats::MetricOrChains::Chains(f) => {
                    let g = apex_extend_chain_matrix(&f)?;
                    (
                        json!({ "kind": "chains", "apex_index": f.n(), "n": g.n(), "k": g.k() }),
                        serde_json::to_value(formats::chains_to_file(&g)).unwrap(),
                    )
                }
            };
            Ok(Outcome::ok(results, Some(output)))
        }
        Command::Hypertree { file, to_l1, .. } => {
            let complex = ctx.parse(file, formats::parse_complex)?;
            let r = is_hypertree(&complex);
            let results = json!({
                "facets": r.facets,
                "rank": r.rank,
                "cycle_dim": r.cycle_dim,
                "acyclic": r.acyclic,
                "fills_cycles": r.fills_cycles,
                "hypertree": r.is_hypertree,
            });
            if !*to_l1 {
                let status = if r.is_hypertree { "ok" } else { "negative" };
                return Ok(Outcome { status, results, output: None });
            }
            if !r.is_hypertree {
                return Ok(Outcome { status: "negative", results, output: None });
            }
            let f = hypertree_to_l1(&complex)?;
            Ok(Outcome::ok(results, Some(serde_json::to_value(formats::chains_to_file(&f)).unwrap())))
        }
        Command::Gen { name, n, k, m, seed, points, .. } => {
            let inst = match name.as_str() {
                "discrete" => corpus::discrete_metric(need(*n, "n", name)?, need(*k, "k", name)?)?,
                "random_strong" => corpus::random_strong_metric(need(*n, "n", name)?, need(*k, "k", name)?, *seed)?,
                "perimeter" | "maxside" => {
                    let path = points.as_ref().ok_or_else(|| {
                        Failure::Core(Error::Argument(format!("`gen {name}` needs --points")))
                    })?;
                    let cloud = ctx.parse(path, formats::parse_cloud)?;
                    if name == "perimeter" {
                        corpus::perimeter_3metric(&cloud)?
                    } else {
                        corpus::maxside_3metric(&cloud)?
                    }
                }
                "random_hypertree" => {
                    let c = corpus::random_hypertree(need(*n, "n", name)?, need(*k, "k", name)?, *seed)?;
                    plain_instance(name, Payload::Complex(c))
                }
                "random_chains" => {
                    let f = corpus::random_chain_matrix(need(*n, "n", name)?, need(*k, "k", name)?, need(*m, "m", name)?, *seed)?;
                    plain_instance(name, Payload::Chains(f))
                }
                "random_cloud" => {
                    let c = corpus::random_cloud(need(*n, "n", name)?, need(*m, "m", name)?, *seed)?;
                    plain_instance(name, Payload::Cloud(c))
                }
                "random_triangle" => {
                    let d = corpus::random_triangle_metric(need(*n, "n", name)?, *seed)?;
                    plain_instance(name, Payload::Metric(d))
                }
                other => corpus::named(other)?,
            };
            let mut results = json!({ "name": inst.name, "expected": expected_json(&inst) });
            if let Some(f) = &inst.inducing_chains {
                results["inducing_chains"] = serde_json::to_value(formats::chains_to_file(f)).unwrap();
            }
            Ok(Outcome::ok(results, Some(payload_json(&inst.payload))))
        }
    }
}

fn plain_instance(name: &str, payload: Payload) -> CorpusInstance {
    CorpusInstance { name: name.to_string(), payload, inducing_chains: None, expected: Default::default() }
}

fn output_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::MinChain { output, .. }
        | Command::Eval { output, .. }
        | Command::Volume { output, .. }
        | Command::Apex { output, .. }
        | Command::Hypertree { output, .. }
        | Command::Gen { output, .. } => output.as_ref(),
        Command::Embed { method } => match method {
            EmbedMethod::Frechet { output, .. } | EmbedMethod::Jl { output, .. } | EmbedMethod::L2lp { output, .. } => {
                output.as_ref()
            }
        },
        Command::Verify { .. } => None,
    }
}

/// Runs the parsed command line; returns the JSON to print and the exit code.
pub fn run_cli(cli: &Cli, argv: Vec<String>) -> (String, i32) {
    let start = Instant::now();
    let mut ctx = Context { inputs: Vec::new() };
    let outcome = match build_pool(cli.jobs) {
        Ok(pool) => pool.install(|| execute(&cli.command, &mut ctx)),
        Err(e) => Err(Failure::Core(e)),
    };
    let outcome = outcome.and_then(|o| {
        let path = output_path(&cli.command);
        if let (Some(path), Some(value)) = (path, &o.output) {
            std::fs::write(path, formats::to_json(value))
                .map_err(|e| Failure::Output(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok((o, path.map(|p| p.display().to_string())))
    });
    match outcome {
        Ok((o, written)) => {
            let code = if o.status == "negative" { EXIT_NEGATIVE } else { EXIT_OK };
            let report = RunReport {
                command: argv,
                inputs: ctx.inputs,
                status: o.status,
                results: o.results,
                output: if written.is_some() { None } else { o.output },
                output_file: written,
                timing: Timing { total_ms: start.elapsed().as_secs_f64() * 1e3 },
            };
            (formats::to_json(&report), code)
        }
        Err(f) => {
            let (error, exit_code) = f.into_body();
            (formats::to_json(&ErrorReport { command: argv, error, exit_code }), exit_code)
        }
    }
}

fn build_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Argument("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    builder.build().map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))
}

/// Parses `argv` (including the program name) and runs it. Argument errors
/// become an input-error report.
pub fn run<I, S>(argv: I) -> (String, i32)
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(&argv) {
        Ok(cli) => run_cli(&cli, argv),
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (e.to_string(), EXIT_OK);
            }
            let body = ErrorBody {
                kind: "usage",
                message: e.to_string().trim().to_string(),
                file: None,
                line: None,
                column: None,
                field: None,
                details: None,
            };
            (formats::to_json(&ErrorReport { command: argv, error: body, exit_code: EXIT_INPUT }), EXIT_INPUT)
        }
    }
}
