//! Command-line front end.
//!
//! Exit codes: 0 on success (for `run`, only when the swarm converged), 1 on
//! usage or evaluation errors, 2 when `run` stopped at the iteration cap.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, binomial_standard_error, cluster_result, default_cluster_radius,
    theoretical_success_probability, Cluster, DEFAULT_SUCCESS_RADIUS,
};
use crate::domain::BoxDomain;
use crate::engine::{
    default_v0, initialize_swarm, Observer, Raindrop, RunConfig, Runner, Sweep, DEFAULT_EPSILON,
    DEFAULT_MAX_ITERATIONS, DEFAULT_RAINDROPS,
};
use crate::objectives::{self, ObjectiveSpec};
use crate::oracle::{self, GridSpec, DEFAULT_BUDGET, DEFAULT_RESOLUTION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CAP: i32 = 2;

const DEFAULT_TRIALS: usize = 500;
const DEFAULT_BASIN_RESOLUTION: usize = 101;

#[derive(Debug, Parser)]
#[command(name = "raindrop", version, about = "Raindrop global optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize one objective and write trace.csv and report.json
    Run(RunArgs),
    /// Estimate the probability that a run finds the known optimum
    SuccessProb(SuccessArgs),
    /// Exhaustive grid references
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// JSON file with default values for any of the flags (snake_case keys)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective name
    #[arg(long)]
    objective: Option<String>,
    /// Dimension for objectives that accept any
    #[arg(long = "dim")]
    dimension: Option<usize>,
    /// Box bounds as "lo1,hi1;lo2,hi2;..."
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Number of raindrops
    #[arg(long = "n")]
    n_raindrops: Option<usize>,
    /// Initial speed (default: longest box side / 4)
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-iters")]
    max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Write positions_<j>.csv every k sweeps (0 = off)
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Radius for grouping resting raindrops (default: 2·epsilon·√n)
    #[arg(long, allow_hyphen_values = true)]
    cluster_radius: Option<f64>,
}

#[derive(Debug, Args)]
struct SuccessArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// Success radius around the known optimum
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<f64>,
    /// Use this single-raindrop success ratio instead of measuring it on a grid
    #[arg(long, allow_hyphen_values = true)]
    theoretical_ratio: Option<f64>,
    /// Grid resolution for measuring the success ratio
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OracleMode {
    Grid,
    Basin,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    mode: Option<OracleMode>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<f64>,
    /// Maximum number of grid points
    #[arg(long)]
    budget: Option<u64>,
}

/// Values accepted from `--config`. Every field is optional; flags win.
///
/// The keys match those written to report.json, so a report can be fed back
/// as a config to reproduce its run.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct FileConfig {
    objective: Option<String>,
    dimension: Option<usize>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    out: Option<PathBuf>,
    n_raindrops: Option<usize>,
    v0: Option<f64>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    max_iterations: Option<usize>,
    snapshot_every: Option<usize>,
    cluster_radius: Option<f64>,
    trials: Option<usize>,
    radius: Option<f64>,
    theoretical_ratio: Option<f64>,
    resolution: Option<usize>,
    mode: Option<OracleMode>,
    budget: Option<u64>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Parses `"lo1,hi1;lo2,hi2"`.
pub fn parse_bounds(s: &str) -> anyhow::Result<BoxDomain> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (k, pair) in s.split(';').enumerate() {
        let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
        let [lo, hi] = parts[..] else {
            bail!("malformed bounds {s:?}: axis {k} needs `lo,hi`");
        };
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| anyhow!("malformed bounds {s:?}: `{t}` is not a number"))
        };
        lower.push(parse(lo)?);
        upper.push(parse(hi)?);
    }
    Ok(BoxDomain::new(lower, upper)?)
}

struct Problem {
    spec: ObjectiveSpec,
    out: PathBuf,
}

fn resolve_problem(
    args: &ProblemArgs,
    file: &FileConfig,
    default_out: &str,
) -> anyhow::Result<Problem> {
    let name = args
        .objective
        .clone()
        .or(file.objective.clone())
        .unwrap_or_else(|| "sinc2d".into());
    let domain = match (&args.bounds, &file.lower, &file.upper) {
        (Some(b), _, _) => Some(parse_bounds(b)?),
        (None, Some(lo), Some(hi)) => Some(BoxDomain::new(lo.clone(), hi.clone())?),
        (None, None, None) => None,
        _ => bail!("config file must give both `lower` and `upper`"),
    };
    let dimension = args
        .dimension
        .or(file.dimension)
        .or(domain.as_ref().map(BoxDomain::dim));
    let mut spec = objectives::lookup(&name, dimension)?;
    if let Some(domain) = domain {
        if domain.dim() != spec.dimension() {
            bail!(
                "bounds have {} axes but objective `{name}` has dimension {}",
                domain.dim(),
                spec.dimension()
            );
        }
        if let Some((x, _)) = &spec.known_optimum {
            if !domain.contains(x) {
                spec.known_optimum = None;
            }
        }
        spec.default_domain = domain;
    }
    let out = args
        .out
        .clone()
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from(default_out));
    Ok(Problem { spec, out })
}

fn resolve_config(
    args: &SearchArgs,
    file: &FileConfig,
    domain: &BoxDomain,
) -> anyhow::Result<RunConfig> {
    let config = RunConfig {
        n_raindrops: args
            .n_raindrops
            .or(file.n_raindrops)
            .unwrap_or(DEFAULT_RAINDROPS),
        v0: args.v0.or(file.v0).unwrap_or_else(|| default_v0(domain)),
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
        max_iterations: args
            .max_iterations
            .or(file.max_iterations)
            .unwrap_or(DEFAULT_MAX_ITERATIONS),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    config.validate()?;
    Ok(config)
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// The report written next to trace.csv.
#[derive(Debug, Serialize)]
struct RunReport<'a> {
    objective: &'a str,
    dimension: usize,
    lower: &'a [f64],
    upper: &'a [f64],
    n_raindrops: usize,
    v0: f64,
    epsilon: f64,
    max_iterations: usize,
    seed: u64,
    snapshot_every: usize,
    cluster_radius: f64,
    global_best_x: &'a [f64],
    global_best_f: f64,
    iterations_used: usize,
    converged: bool,
    clusters: &'a [Cluster],
    trace_path: &'a str,
}

/// Writes positions_<j>.csv for the initial swarm, every `every` sweeps and the final sweep.
struct Snapshots<'a> {
    dir: &'a Path,
    every: usize,
    last: Option<(usize, Vec<Raindrop>)>,
    error: Option<anyhow::Error>,
}

impl Snapshots<'_> {
    fn write(&mut self, iteration: usize, drops: &[Raindrop]) {
        if self.every == 0 || self.error.is_some() {
            return;
        }
        let n = drops.first().map_or(0, |d| d.position().len());
        let mut csv = String::from("raindrop");
        for k in 0..n {
            let _ = write!(csv, ",x_{k}");
        }
        csv.push_str(",speed\n");
        for (i, d) in drops.iter().enumerate() {
            let _ = writeln!(csv, "{i},{},{}", join(d.position()), d.speed());
        }
        if let Err(e) = write_file(&self.dir.join(format!("positions_{iteration}.csv")), &csv) {
            self.error = Some(e);
        }
    }

    fn finish(mut self) -> anyhow::Result<()> {
        if let Some((j, drops)) = self.last.take() {
            if !j.is_multiple_of(self.every) {
                self.write(j, &drops);
            }
        }
        self.error.map_or(Ok(()), Err)
    }
}

impl Observer for Snapshots<'_> {
    fn on_start(&mut self, drops: &[Raindrop], _values: &[f64]) {
        self.write(0, drops);
    }

    fn on_sweep(&mut self, sweep: &Sweep<'_>) {
        if self.every == 0 {
            return;
        }
        if sweep.iteration.is_multiple_of(self.every) {
            self.write(sweep.iteration, sweep.after);
        }
        // The final sweep is only known once the run returns.
        self.last = Some((sweep.iteration, sweep.after.to_vec()));
    }

    fn wants_before(&self) -> bool {
        false
    }
}

fn cmd_run(args: RunArgs, stdout: &mut dyn std::io::Write) -> anyhow::Result<i32> {
    let file = FileConfig::load(args.problem.config.as_deref())?;
    let Problem { spec, out } = resolve_problem(&args.problem, &file, "out")?;
    let domain = &spec.default_domain;
    let config = resolve_config(&args.search, &file, domain)?;
    let snapshot_every = args.snapshot_every.or(file.snapshot_every).unwrap_or(0);
    let cluster_radius = args
        .cluster_radius
        .or(file.cluster_radius)
        .unwrap_or_else(|| default_cluster_radius(config.epsilon, domain.dim()));

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let runner = Runner::new(config.clone(), &spec.objective, domain)?;
    let mut snapshots = Snapshots {
        dir: &out,
        every: snapshot_every,
        last: None,
        error: None,
    };
    let result = runner.run_observed(initialize_swarm(&config, domain)?, &mut snapshots)?;
    snapshots.finish()?;
    let clusters = cluster_result(&result, cluster_radius)?;

    let n = domain.dim();
    let mut trace = String::from("iteration,velocity_l2,best_f");
    for k in 0..n {
        let _ = write!(trace, ",best_x_{k}");
    }
    trace.push('\n');
    for t in &result.trace {
        let _ = writeln!(
            trace,
            "{},{},{},{}",
            t.iteration,
            t.velocity_l2,
            t.best_f,
            join(&t.best_x)
        );
    }
    write_file(&out.join("trace.csv"), &trace)?;

    let report = RunReport {
        objective: spec.name(),
        dimension: n,
        lower: domain.lower(),
        upper: domain.upper(),
        n_raindrops: config.n_raindrops,
        v0: config.v0,
        epsilon: config.epsilon,
        max_iterations: config.max_iterations,
        seed: config.seed,
        snapshot_every,
        cluster_radius,
        global_best_x: &result.global_best_x,
        global_best_f: result.global_best_f,
        iterations_used: result.iterations_used,
        converged: result.converged,
        clusters: &clusters,
        trace_path: "trace.csv",
    };
    write_file(&out.join("report.json"), &to_json(&report)?)?;

    writeln!(
        stdout,
        "global best f = {} at [{}] after {} iterations ({})",
        result.global_best_f,
        join(&result.global_best_x),
        result.iterations_used,
        if result.converged {
            "converged"
        } else {
            "iteration cap reached"
        }
    )?;
    Ok(if result.converged { EXIT_OK } else { EXIT_CAP })
}

#[derive(Debug, Serialize)]
struct SuccessReport<'a> {
    objective: &'a str,
    dimension: usize,
    lower: &'a [f64],
    upper: &'a [f64],
    n_raindrops: usize,
    v0: f64,
    epsilon: f64,
    max_iterations: usize,
    seed: u64,
    trials: usize,
    radius: f64,
    successes: usize,
    rate: f64,
    ratio: f64,
    ratio_source: &'static str,
    resolution: Option<usize>,
    predicted: f64,
    gap: f64,
    standard_error: f64,
}

fn cmd_success_prob(args: SuccessArgs, stdout: &mut dyn std::io::Write) -> anyhow::Result<i32> {
    let file = FileConfig::load(args.problem.config.as_deref())?;
    let Problem { spec, out } = resolve_problem(&args.problem, &file, "out")?;
    spec.require_optimum()?;
    let domain = &spec.default_domain;
    let config = resolve_config(&args.search, &file, domain)?;
    let trials = args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    let radius = args
        .radius
        .or(file.radius)
        .unwrap_or(DEFAULT_SUCCESS_RADIUS);

    let estimate =
        analysis::empirical_success_probability(&config, &spec, trials, radius, config.seed)?;
    let (ratio, source, resolution) = match args.theoretical_ratio.or(file.theoretical_ratio) {
        Some(r) => (r, "supplied", None),
        None => {
            let resolution = args
                .resolution
                .or(file.resolution)
                .unwrap_or(DEFAULT_BASIN_RESOLUTION);
            let m = oracle::basin_measure_estimate(
                &spec,
                &config,
                &GridSpec::new(resolution)?,
                radius,
            )?;
            (m.ratio, "oracle", Some(resolution))
        }
    };
    let predicted = theoretical_success_probability(ratio, config.n_raindrops)?;
    let report = SuccessReport {
        objective: spec.name(),
        dimension: domain.dim(),
        lower: domain.lower(),
        upper: domain.upper(),
        n_raindrops: config.n_raindrops,
        v0: config.v0,
        epsilon: config.epsilon,
        max_iterations: config.max_iterations,
        seed: config.seed,
        trials,
        radius,
        successes: estimate.successes,
        rate: estimate.rate,
        ratio,
        ratio_source: source,
        resolution,
        predicted,
        gap: (estimate.rate - predicted).abs(),
        standard_error: binomial_standard_error(predicted, trials),
    };
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_file(&out.join("success.json"), &to_json(&report)?)?;
    writeln!(
        stdout,
        "empirical rate {:.4} ({}/{}), predicted {:.5} from ratio {:.4} ({source}), gap {:.4}",
        report.rate, report.successes, trials, predicted, ratio, report.gap
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct OracleReport<'a> {
    objective: &'a str,
    dimension: usize,
    lower: &'a [f64],
    upper: &'a [f64],
    mode: OracleMode,
    resolution: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

fn cmd_oracle(args: OracleArgs, stdout: &mut dyn std::io::Write) -> anyhow::Result<i32> {
    let file = FileConfig::load(args.problem.config.as_deref())?;
    let Problem { spec, out } = resolve_problem(&args.problem, &file, "out")?;
    let domain = &spec.default_domain;
    let mode = args.mode.or(file.mode).unwrap_or(OracleMode::Grid);
    let resolution = args
        .resolution
        .or(file.resolution)
        .unwrap_or(DEFAULT_RESOLUTION);
    let grid = GridSpec::new(resolution)?
        .with_budget(args.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET));
    let mut report = OracleReport {
        objective: spec.name(),
        dimension: domain.dim(),
        lower: domain.lower(),
        upper: domain.upper(),
        mode,
        resolution,
        point: None,
        value: None,
        v0: None,
        epsilon: None,
        radius: None,
        t_measure: None,
        s_measure: None,
        ratio: None,
    };
    let point;
    match mode {
        OracleMode::Grid => {
            let (x, v) = oracle::grid_search(&spec.objective, domain, &grid)?;
            point = x;
            writeln!(stdout, "grid minimum {v} at [{}]", join(&point))?;
            report.point = Some(&point);
            report.value = Some(v);
        }
        OracleMode::Basin => {
            let v0 = args.v0.or(file.v0).unwrap_or_else(|| default_v0(domain));
            let epsilon = args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
            let radius = args
                .radius
                .or(file.radius)
                .unwrap_or(DEFAULT_SUCCESS_RADIUS);
            let config = RunConfig {
                n_raindrops: 1,
                v0,
                epsilon,
                ..RunConfig::for_domain(domain)
            };
            let m = oracle::basin_measure_estimate(&spec, &config, &grid, radius)?;
            writeln!(
                stdout,
                "ratio {:.4} (|T| = {}, |S| = {})",
                m.ratio, m.t_measure, m.s_measure
            )?;
            report.v0 = Some(v0);
            report.epsilon = Some(epsilon);
            report.radius = Some(radius);
            report.t_measure = Some(m.t_measure);
            report.s_measure = Some(m.s_measure);
            report.ratio = Some(m.ratio);
        }
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_file(&out.join("oracle.json"), &to_json(&report)?)?;
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(
    args: I,
    stdout: &mut dyn std::io::Write,
    stderr: &mut dyn std::io::Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return EXIT_ERROR;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a, stdout),
        Command::SuccessProb(a) => cmd_success_prob(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
