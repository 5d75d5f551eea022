//! Command-line front end. `main` parses arguments, runs one subcommand and
//! returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::Grid;
use crate::dsbm::MetaGraphKind;
use crate::error::{Error, Result};
use crate::experiments::bench::{dsbm_bench, DsbmBenchConfig};
use crate::experiments::cloud::{cloud_scatter, Bandwidth, CloudScatterConfig};
use crate::experiments::converge::{converge, ConvergeConfig};
use crate::experiments::graph::{graph_scatter, GraphScatterConfig, LaplacianKind};
use crate::experiments::{Output, Report};
use crate::io;
use crate::pointcloud::{Method, Sampling};
use crate::properties::{parse_selector, run_check, CheckOutcome};

#[derive(Debug, Parser)]
#[command(name = "geoscatter", version = crate::experiments::VERSION, about = "Geometric scattering on graphs and point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scattering features of signals on a graph given as an edge list.
    GraphScatter(GraphArgs),
    /// Scattering features of signals on a point cloud.
    CloudScatter(CloudArgs),
    /// Discretization errors on the unit circle as N grows.
    Converge(ConvergeArgs),
    /// Node classification on a directed stochastic block model.
    DsbmBench(BenchArgs),
    /// Randomized invariant checks.
    PropertySuite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long = "J", default_value_t = 3)]
    pub j_max: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Emit scattering moments of orders 1..=Q.
    #[arg(long, value_name = "Q")]
    pub moments: Option<u32>,
    #[arg(long, value_parser = ["phi0", "l1"])]
    pub nonwindowed: Option<String>,
    /// Emit H¹U[p]f instead of the windowed coefficients.
    #[arg(long)]
    pub residual: bool,
}

impl OutputArgs {
    fn output(&self) -> Result<Output> {
        Output::from_flags(self.moments, self.nonwindowed.as_deref(), self.residual)
    }
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub signals: PathBuf,
    /// One positive weight per node; only with `--laplacian un`.
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub signed: bool,
    #[arg(long, value_enum, default_value = "un")]
    pub laplacian: LaplacianKind,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Feature CSV path; the manifest goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodFlag {
    Markov,
    Eigen,
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    /// One point per row.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub signals: PathBuf,
    #[arg(long, value_enum, default_value = "markov")]
    pub method: MethodFlag,
    /// Highest eigenpair index kept by the eigen method.
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long, conflicts_with_all = ["eps_c", "knn"])]
    pub eps: Option<f64>,
    /// ε = C·N^{−2/(d+6)}.
    #[arg(long = "eps-C", conflicts_with = "knn")]
    pub eps_c: Option<f64>,
    /// Adaptive Gaussian kernel with bandwidth from the k-th neighbour.
    #[arg(long)]
    pub knn: Option<usize>,
    #[arg(long)]
    pub intrinsic_dim: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
    pub ns: Vec<usize>,
    /// Samples drawn per N.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, default_value_t = 9)]
    pub kappa: usize,
    #[arg(long = "t", value_delimiter = ',', default_value = "1")]
    pub ts: Vec<f64>,
    /// Signal is cos(kθ).
    #[arg(long, default_value_t = 2)]
    pub frequency: usize,
    #[arg(long = "eps-C", default_value_t = 1.0)]
    pub eps_c: f64,
    #[arg(long = "J", default_value_t = 3)]
    pub j_max: usize,
    #[arg(long, value_enum, default_value = "iid")]
    pub sampling: Sampling,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_parser = parse_kind)]
    pub kind: MetaGraphKind,
    #[arg(long = "J")]
    pub j_max: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub splits: Option<usize>,
    /// Comma-separated RBF widths, scaled by 1/feature_dim.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long = "lambda", value_delimiter = ',')]
    pub lambda_reg: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<MetaGraphKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// `all` or a comma-separated list of frame, equivariance, invariance,
    /// nonexpansive, energy, jlimit, stability.
    #[arg(default_value = "all")]
    pub selector: String,
    /// Overrides each check's default trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => io::write_json(p, value),
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}

fn emit_features(out: Option<&Path>, maps: &[crate::scattering::ScatteringFeatureMap]) -> Result<()> {
    match out {
        Some(p) => io::write_features(std::fs::File::create(p)?, maps),
        None => io::write_features(std::io::stdout().lock(), maps),
    }
}

/// Manifest path for a feature file: same stem, `.json` extension.
pub fn manifest_path(features: &Path) -> PathBuf {
    features.with_extension("json")
}

fn run_graph(a: &GraphArgs) -> Result<()> {
    let config = GraphScatterConfig {
        directed: a.directed,
        signed: a.signed,
        laplacian: a.laplacian,
        q: a.q,
        j_max: a.output.j_max,
        layers: a.output.layers,
        output: a.output.output()?,
    };
    let edges = io::read_edges(io::open(&a.edges)?)?;
    let signals = io::read_signals(io::open(&a.signals)?)?;
    let measure = a.measure.as_ref().map(|p| io::read_measure(io::open(p)?)).transpose()?;
    let mut maps = Vec::new();
    let report = Report::timed("graph-scatter", a.seed, config, |c| {
        let (m, summary) = graph_scatter(c, &edges, &signals, measure.clone())?;
        maps = m;
        Ok(summary)
    })?;
    emit_features(a.out.as_deref(), &maps)?;
    match &a.out {
        Some(p) => io::write_json(&manifest_path(p), &report),
        None => Ok(()),
    }
}

fn run_cloud(a: &CloudArgs) -> Result<()> {
    let method = match (a.method, a.kappa) {
        (MethodFlag::Markov, _) => Method::Markov,
        (MethodFlag::Eigen, Some(kappa)) => Method::Eigen { kappa },
        (MethodFlag::Eigen, None) => return Err(Error::Usage("--method eigen requires --kappa".into())),
    };
    let bandwidth = match (a.eps, a.eps_c, a.knn) {
        (Some(e), _, _) => Bandwidth::Eps(e),
        (_, Some(c), _) => Bandwidth::EpsC(c),
        (_, _, Some(k)) => Bandwidth::Knn(k),
        _ => Bandwidth::EpsC(1.0),
    };
    let config = CloudScatterConfig {
        bandwidth,
        method,
        j_max: a.output.j_max,
        layers: a.output.layers,
        output: a.output.output()?,
        intrinsic_dim: a.intrinsic_dim,
    };
    let points = io::read_table(io::open(&a.points)?)?;
    let signals = io::read_signals(io::open(&a.signals)?)?;
    let mut maps = Vec::new();
    let report = Report::timed("cloud-scatter", a.seed, config, |c| {
        let (m, summary) = cloud_scatter(c, &points, &signals)?;
        maps = m;
        Ok(summary)
    })?;
    emit_features(a.out.as_deref(), &maps)?;
    match &a.out {
        Some(p) => io::write_json(&manifest_path(p), &report),
        None => Ok(()),
    }
}

fn run_converge(a: &ConvergeArgs) -> Result<()> {
    let config = ConvergeConfig {
        ns: a.ns.clone(),
        seeds: a.seeds,
        kappa: a.kappa,
        ts: a.ts.clone(),
        frequency: a.frequency,
        eps_c: a.eps_c,
        j_max: a.j_max,
        sampling: a.sampling,
        ..ConvergeConfig::default()
    };
    let report = Report::timed("converge", a.seed, config, |c| converge(c, a.seed))?;
    emit_json(a.out.as_deref(), &report)
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let mut config = DsbmBenchConfig::for_kind(a.kind);
    if let Some(v) = a.j_max {
        config.j_max = v;
    }
    if let Some(v) = a.q {
        config.q = v;
    }
    if let Some(v) = a.layers {
        config.layers = v;
    }
    if let Some(v) = a.n {
        config.n = v;
    }
    if let Some(v) = a.realizations {
        config.realizations = v;
    }
    if let Some(v) = a.splits {
        config.splits = v;
    }
    let defaults = Grid::default();
    config.grid = Grid {
        gamma: a.gamma.clone().unwrap_or(defaults.gamma),
        lambda_reg: a.lambda_reg.clone().unwrap_or(defaults.lambda_reg),
        scale_gamma_by_dim: true,
    };
    let report = Report::timed("dsbm-bench", a.seed, config, |c| dsbm_bench(c, a.seed))?;
    log::info!("{}: {:.4} ± {:.4}", a.kind, report.result.mean, report.result.std);
    emit_json(a.out.as_deref(), &report)
}

fn run_suite(a: &SuiteArgs) -> Result<bool> {
    let checks = parse_selector(&a.selector)?;
    #[derive(Serialize)]
    struct SuiteConfig {
        selector: String,
        trials: Option<usize>,
    }
    let config = SuiteConfig {
        selector: a.selector.clone(),
        trials: a.trials,
    };
    let report = Report::timed("property-suite", a.seed, config, |_| {
        checks
            .iter()
            .map(|c| run_check(*c, a.trials.unwrap_or_else(|| c.default_trials()), a.seed))
            .collect::<Result<Vec<CheckOutcome>>>()
    })?;
    for o in &report.result {
        log::info!("{}: {} ({} / {} failed)", o.name, if o.passed { "pass" } else { "FAIL" }, o.failures, o.trials);
    }
    emit_json(a.out.as_deref(), &report)?;
    Ok(report.result.iter().all(|o| o.passed))
}

/// Runs a parsed command. Property-suite failures map to the numerical exit code.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GraphScatter(a) => run_graph(a),
        Command::CloudScatter(a) => run_cloud(a),
        Command::Converge(a) => run_converge(a),
        Command::DsbmBench(a) => run_bench(a),
        Command::PropertySuite(a) => {
            if run_suite(a)? {
                Ok(())
            } else {
                Err(Error::Numerical {
                    message: "property suite reported failures".into(),
                    residual: f64::NAN,
                })
            }
        }
    }
}

/// Parses `std::env::args`, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
