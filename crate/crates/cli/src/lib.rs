//! Command implementations behind the `nbwalk` binary.
//!
//! Each `cmd_*` function returns a JSON value (what the binary prints) and
//! writes any requested files. Errors carry the process exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use nbwalk::evolve::{mixing_report, EvolveError, MixingOptions, StartSet, Threshold};
use nbwalk::graph::{
    cycle_decorated_expander, is_bipartite, is_connected, random_regular, DecoratedGraph,
    GraphError,
};
use nbwalk::montecarlo::{cycle_trap_frequency, load_experiment, WalkError};
use nbwalk::nbkernel::{
    rate_curve_data, rate_curve_grid, ramanujan_bound, rates, write_rate_curve_csv, KernelError,
};
use nbwalk::spectra::{
    eigenvalues_dense_with, lambda_power_estimate, trace_lower_bound, EigenOptions, SpectraError,
};
use nbwalk::{RegularGraph, Spectrum64, WalkKind};

/// Seed used when `--seed` is not given. Always echoed in the output.
pub const DEFAULT_SEED: u64 = 1;

/// Largest `n` for which `evolve` takes the worst case over all start vertices.
pub const ALL_STARTS_LIMIT: usize = 5000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 usage, 2 generation (and invalid graph input), 3 numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Graph(_) => 2,
            CliError::Evolve(EvolveError::InvalidVertex(_) | EvolveError::NoStarts) => 1,
            CliError::Walk(_) => 1,
            CliError::Spectra(_) | CliError::Kernel(_) | CliError::Evolve(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Generator spec: `complete:n`, `random:n,d`, `decorated:m,g,d`, `cycle:n`
/// or `petersen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenSpec {
    Complete(usize),
    Cycle(usize),
    Petersen,
    Random {
        n: usize,
        d: usize,
    },
    Decorated {
        cycles: usize,
        cycle_len: usize,
        d: usize,
    },
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<usize> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("bad number in `{s}`: {e}"))?
        };
        match (kind, nums.as_slice()) {
            ("complete", &[n]) => Ok(GenSpec::Complete(n)),
            ("cycle", &[n]) => Ok(GenSpec::Cycle(n)),
            ("petersen", &[]) => Ok(GenSpec::Petersen),
            ("random", &[n, d]) => Ok(GenSpec::Random { n, d }),
            ("decorated", &[cycles, cycle_len, d]) => Ok(GenSpec::Decorated {
                cycles,
                cycle_len,
                d,
            }),
            _ => Err(format!(
                "unknown generator `{s}` (expected complete:n | random:n,d | decorated:m,g,d | cycle:n | petersen)"
            )),
        }
    }
}

impl std::fmt::Display for GenSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenSpec::Complete(n) => write!(f, "complete:{n}"),
            GenSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GenSpec::Petersen => f.write_str("petersen"),
            GenSpec::Random { n, d } => write!(f, "random:{n},{d}"),
            GenSpec::Decorated {
                cycles,
                cycle_len,
                d,
            } => write!(f, "decorated:{cycles},{cycle_len},{d}"),
        }
    }
}

impl GenSpec {
    pub fn build(&self, seed: u64) -> Result<RegularGraph, GraphError> {
        Ok(match *self {
            GenSpec::Complete(n) => RegularGraph::complete(n)?,
            GenSpec::Cycle(n) => RegularGraph::cycle(n)?,
            GenSpec::Petersen => RegularGraph::petersen(),
            GenSpec::Random { n, d } => random_regular(n, d, seed)?,
            GenSpec::Decorated {
                cycles,
                cycle_len,
                d,
            } => cycle_decorated_expander(cycles, cycle_len, d, seed)?.graph,
        })
    }
}

/// Threshold flag: `half-n`, `n-squared` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdArg(pub Threshold<f64>);

impl FromStr for ThresholdArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half-n" => Ok(ThresholdArg(Threshold::HalfN)),
            "n-squared" => Ok(ThresholdArg(Threshold::NSquared)),
            _ => match s.parse::<f64>() {
                Ok(x) if x > 0.0 && x.is_finite() => Ok(ThresholdArg(Threshold::Value(x))),
                _ => Err(format!(
                    "bad threshold `{s}` (expected half-n | n-squared | positive number)"
                )),
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nbwalk",
    version,
    about = "Mixing and load experiments for non-backtracking random walks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Graph file in JSON ({"n", "d", "adj"}).
    #[arg(long, value_name = "PATH")]
    pub graph: Option<PathBuf>,
    /// Generate the graph: complete:n | random:n,d | decorated:m,g,d | cycle:n | petersen.
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: Option<GenSpec>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph and write it as JSON.
    Generate {
        #[arg(long = "gen", value_name = "SPEC")]
        generator: GenSpec,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; the graph goes to stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Spectral parameters and theoretical mixing rates of both walks.
    Rates {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Adjacency eigenvalues as CSV.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Exact distribution evolution and fitted mixing rate.
    Evolve {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "nb")]
        walk: WalkKind,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value = "half-n")]
        threshold: ThresholdArg,
        /// Take the worst case over N sampled start vertices instead of all.
        #[arg(long, value_name = "N")]
        sampled_starts: Option<usize>,
        /// Writes PREFIX.json and PREFIX.csv.
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
    },
    /// Max visit load of nb walk, simple walk and balls-and-bins.
    Maxload {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Walk length; defaults to n.
        #[arg(long)]
        steps: Option<usize>,
        /// Writes PREFIX.json and PREFIX.csv.
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
    },
    /// Frequency of walks trapped going k times round a decoration cycle.
    Traps {
        /// decorated:m,g,d
        #[arg(long = "gen", value_name = "SPEC")]
        generator: GenSpec,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Rate curves of both walks against λ, one CSV per degree.
    Curves {
        #[arg(long = "d", value_name = "D", default_values_t = [3usize, 10])]
        degrees: Vec<usize>,
        /// Evenly spaced λ values on [0, d] (the knee 2 sqrt(d-1) is added).
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Output directory.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
}

/// Loads or generates the graph; returns it with the effective seed.
pub fn load_graph(source: &Source, seed: Option<u64>) -> Result<(RegularGraph, Value), CliError> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    match (&source.graph, &source.generator) {
        (Some(path), None) => Ok((
            RegularGraph::read_json_file(path)?,
            json!(path.display().to_string()),
        )),
        (None, Some(spec)) => Ok((spec.build(seed)?, json!(spec.to_string()))),
        _ => Err(CliError::Usage(
            "give exactly one of --graph or --gen".into(),
        )),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Dense spectrum when it fits, otherwise a power-iteration estimate of λ.
fn measure_lambda(g: &RegularGraph) -> Result<(f64, Option<Spectrum64>, &'static str), CliError> {
    let opts = EigenOptions::<f64>::default();
    if g.n() <= opts.dense_limit {
        let s = eigenvalues_dense_with(g, &opts)?;
        Ok((s.lambda_star(), Some(s), "dense"))
    } else {
        let (lambda, _) = lambda_power_estimate(g, 20_000, 1e-10, DEFAULT_SEED);
        Ok((lambda, None, "power-iteration"))
    }
}

pub fn cmd_generate(
    spec: GenSpec,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let g = spec.build(seed)?;
    let summary = json!({
        "gen": spec.to_string(),
        "seed": seed,
        "n": g.n(),
        "d": g.d(),
        "out": out.map(|p| p.display().to_string()),
    });
    match out {
        Some(path) => write_text(path, &g.to_json())?,
        None => return Ok(serde_json::from_str(&g.to_json()).expect("graph json")),
    }
    Ok(summary)
}

pub fn cmd_rates(
    source: &Source,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let (g, origin) = load_graph(source, seed)?;
    let (n, d) = (g.n(), g.d());
    if d < 3 {
        return Err(CliError::Usage(format!("rates need d >= 3, got d = {d}")));
    }
    let (lambda, _, method) = measure_lambda(&g)?;
    let r = rates(lambda, d)?;
    let warning = if !is_connected(&g) {
        Some("graph is disconnected: λ = d and neither walk mixes")
    } else if is_bipartite(&g) {
        Some("graph is bipartite: λ = d and neither walk mixes")
    } else {
        None
    };
    let report = json!({
        "source": origin,
        "seed": seed.unwrap_or(DEFAULT_SEED),
        "n": n,
        "d": d,
        "lambda": lambda,
        "lambda_method": method,
        "rho": r.rho,
        "rho_nb": r.rho_nb,
        "ratio": r.ratio(),
        "trace_bound": if n > d { json!(trace_lower_bound::<f64>(n, d)) } else { Value::Null },
        "ramanujan_bound": ramanujan_bound::<f64>(d),
        "is_ramanujan": r.is_ramanujan(),
        "warning": warning,
    });
    if let Some(path) = out {
        write_text(path, &to_pretty(&report))?;
    }
    Ok(report)
}

pub fn cmd_spectrum(
    source: &Source,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let (g, origin) = load_graph(source, seed)?;
    let s = eigenvalues_dense_with::<f64>(&g, &EigenOptions::default())?;
    if let Some(path) = out {
        let file = File::create(path).map_err(io_err(path))?;
        s.write_csv(BufWriter::new(file)).map_err(io_err(path))?;
    }
    Ok(json!({
        "source": origin,
        "seed": seed.unwrap_or(DEFAULT_SEED),
        "n": g.n(),
        "d": g.d(),
        "lambda": s.lambda_star(),
        "eigenvalues": s.eigenvalues,
    }))
}

pub struct EvolveArgs {
    pub walk: WalkKind,
    pub horizon: usize,
    pub threshold: Threshold<f64>,
    pub sampled_starts: Option<usize>,
}

pub fn cmd_evolve(
    source: &Source,
    seed: Option<u64>,
    args: &EvolveArgs,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let seed_value = seed.unwrap_or(DEFAULT_SEED);
    let (g, origin) = load_graph(source, seed)?;
    let starts = match args.sampled_starts {
        Some(count) => StartSet::Sampled {
            count,
            seed: seed_value,
        },
        None if g.n() > ALL_STARTS_LIMIT => {
            return Err(CliError::Usage(format!(
                "n = {} exceeds {ALL_STARTS_LIMIT}; pass --sampled-starts N",
                g.n()
            )))
        }
        None => StartSet::All,
    };
    let opts = MixingOptions {
        horizon: args.horizon,
        threshold: args.threshold,
        starts,
        ..Default::default()
    };
    let report = mixing_report(&g, args.walk, &opts)?;
    let (lambda, _, method) = measure_lambda(&g)?;
    let theory = if g.d() >= 3 {
        let r = rates(lambda, g.d())?;
        Some(match args.walk {
            WalkKind::Simple => r.rho,
            WalkKind::Nb => r.rho_nb,
        })
    } else {
        (args.walk == WalkKind::Simple).then(|| lambda / g.d() as f64)
    };
    let value = json!({
        "source": origin,
        "seed": seed_value,
        "walk": args.walk,
        "n": g.n(),
        "d": g.d(),
        "lambda": lambda,
        "lambda_method": method,
        "fitted_rate": report.fitted_rate,
        "theory_rate": theory,
        "tau": report.tau,
        "threshold": report.threshold,
        "horizon": report.horizon(),
        "starts": match &report.sampled_starts {
            Some(v) => json!(v),
            None => json!("all"),
        },
        "deviations": report.deviations,
    });
    if let Some(prefix) = out {
        write_text(&with_ext(prefix, "json"), &to_pretty(&value))?;
        let path = with_ext(prefix, "csv");
        let mut csv = String::from("k,deviation\n");
        for (k, x) in report.deviations.iter().enumerate() {
            csv.push_str(&format!("{k},{x:.16e}\n"));
        }
        write_text(&path, &csv)?;
    }
    Ok(value)
}

pub fn cmd_maxload(
    source: &Source,
    seed: Option<u64>,
    trials: usize,
    steps: Option<usize>,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let seed_value = seed.unwrap_or(DEFAULT_SEED);
    let (g, origin) = load_graph(source, seed)?;
    let steps = steps.unwrap_or(g.n());
    let report = load_experiment(&g, steps, trials, seed_value)?;
    let mut value = report.summary_json();
    value["source"] = origin;
    value["per_trial"] = json!(report.trials);
    if let Some(prefix) = out {
        write_text(&with_ext(prefix, "json"), &to_pretty(&value))?;
        let path = with_ext(prefix, "csv");
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        report.write_csv(&mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
    }
    Ok(value)
}

pub fn cmd_traps(
    spec: GenSpec,
    seed: Option<u64>,
    k: usize,
    trials: usize,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let GenSpec::Decorated {
        cycles,
        cycle_len,
        d,
    } = spec
    else {
        return Err(CliError::Usage("traps need --gen decorated:m,g,d".into()));
    };
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let dg: DecoratedGraph = cycle_decorated_expander(cycles, cycle_len, d, seed)?;
    let r = cycle_trap_frequency(&dg, k, trials, seed)?;
    let value = json!({
        "gen": spec.to_string(),
        "seed": seed,
        "k": k,
        "cycle_len": r.cycle_len,
        "d": r.d,
        "steps": r.steps,
        "trials": r.trials,
        "segments_per_trial": r.segments_per_trial,
        "trapped_segments": r.trapped_segments,
        "observed": r.observed,
        "predicted": r.predicted,
        "standard_error": r.standard_error,
        "z": r.z_score(),
        "success_probability": r.success_probability,
        "trials_with_trap": r.trials_with_trap(),
        "load_exceeds_k_when_trapped": r.load_exceeds_k_when_trapped(),
        "per_trial": r.per_trial,
        "max_loads": r.max_loads,
    });
    if let Some(path) = out {
        write_text(path, &to_pretty(&value))?;
    }
    Ok(value)
}

pub fn cmd_curves(degrees: &[usize], grid: usize, out: &Path) -> Result<Value, CliError> {
    if let Some(&d) = degrees.iter().find(|&&d| d < 3) {
        return Err(CliError::Usage(format!("rate curves need d >= 3, got {d}")));
    }
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut files = Vec::new();
    for &d in degrees {
        let rows = rate_curve_data(d, &rate_curve_grid::<f64>(d, grid))?;
        let path = out.join(format!("rates_d{d}.csv"));
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        write_rate_curve_csv(&rows, &mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
        files.push(json!({"d": d, "rows": rows.len(), "path": path.display().to_string()}));
    }
    Ok(json!({ "grid": grid, "files": files }))
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<Value, CliError> {
    match cli.command {
        Command::Generate {
            generator,
            seed,
            out,
        } => cmd_generate(generator, seed, out.as_deref()),
        Command::Rates { source, seed, out } => cmd_rates(&source, seed, out.as_deref()),
        Command::Spectrum { source, seed, out } => cmd_spectrum(&source, seed, out.as_deref()),
        Command::Evolve {
            source,
            seed,
            walk,
            horizon,
            threshold,
            sampled_starts,
            out,
        } => cmd_evolve(
            &source,
            seed,
            &EvolveArgs {
                walk,
                horizon,
                threshold: threshold.0,
                sampled_starts,
            },
            out.as_deref(),
        ),
        Command::Maxload {
            source,
            seed,
            trials,
            steps,
            out,
        } => cmd_maxload(&source, seed, trials, steps, out.as_deref()),
        Command::Traps {
            generator,
            seed,
            k,
            trials,
            out,
        } => cmd_traps(generator, seed, k, trials, out.as_deref()),
        Command::Curves { degrees, grid, out } => cmd_curves(&degrees, grid, &out),
    }
}
