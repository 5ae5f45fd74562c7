//! Config-driven experiment runner for the routing-chain simulator.
//!
//! Subcommands: sample, density, moments, fig3, recover-xi, graph-scaling,
//! capacity, validate. Experiments read an optional flat key=value config
//! file; command-line flags override file values. Reruns with the same
//! resolved config and seed produce byte-identical output files at any
//! thread count.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::RunError;
use config::{ConfigError, Diagnostics, Experiment, RawConfig};
use output::OutputError;

/// Environment variable with the default worker-thread count.
const THREADS_ENV: &str = "ROUTECHAIN_THREADS";

#[derive(Parser)]
#[command(
    name = "routechain",
    version,
    about = "Routing-chain simulator and analytics runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an ensemble of end-to-end distances
    Sample(ExperimentArgs),
    /// Evaluate an analytic density on a grid
    Density(ExperimentArgs),
    /// Estimate even moments with bootstrap intervals
    Moments(ExperimentArgs),
    /// Sweep persistence radius over contour length and emit histograms
    Fig3(ExperimentArgs),
    /// Recover the persistence radius from sampled ensembles
    #[command(name = "recover-xi")]
    RecoverXi(ExperimentArgs),
    /// Mean routed path length versus network size
    #[command(name = "graph-scaling")]
    GraphScaling(ExperimentArgs),
    /// Relay-load transport capacity versus network size
    Capacity(ExperimentArgs),
    /// Check a configuration without running it
    Validate(ValidateArgs),
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// Flat key=value config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (execution-only; absent from run records)
    #[arg(long)]
    threads: Option<usize>,
    /// rrs|drs|ors, or walk|greedy|shortest for graph experiments
    #[arg(long)]
    strategy: Option<String>,
    /// 2 or 3
    #[arg(long)]
    dimension: Option<u32>,
    #[arg(long = "step-length", allow_negative_numbers = true)]
    step_length: Option<f64>,
    #[arg(long = "persistence-radius", allow_negative_numbers = true)]
    persistence_radius: Option<f64>,
    #[arg(long = "n-hops")]
    n_hops: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Machine-readable result path
    #[arg(long)]
    out: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
    /// Moment orders, comma separated
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long)]
    bootstrap: Option<usize>,
    /// exact|gaussian|propagator
    #[arg(long = "density-kind")]
    density_kind: Option<String>,
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
    /// Persistence/contour ratios for fig3, comma separated
    #[arg(long = "xi-over-l", value_delimiter = ',')]
    xi_over_l: Option<Vec<f64>>,
    /// Persistence radii for recover-xi, comma separated
    #[arg(long = "xi-list", value_delimiter = ',')]
    xi_list: Option<Vec<f64>>,
    #[arg(long = "contour-length", allow_negative_numbers = true)]
    contour_length: Option<f64>,
    /// Step length as a fraction of xi in recover-xi
    #[arg(long = "step-factor", allow_negative_numbers = true)]
    step_factor: Option<f64>,
    /// Network sizes, comma separated
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// unit|fixed-density
    #[arg(long)]
    convention: Option<String>,
    #[arg(long = "radius-coeff", allow_negative_numbers = true)]
    radius_coeff: Option<f64>,
    #[arg(long)]
    pairs: Option<usize>,
    /// Knowledge range as a multiple of the radio radius
    #[arg(long = "knowledge-factor", allow_negative_numbers = true)]
    knowledge_factor: Option<f64>,
    #[arg(long = "flows-per-node", allow_negative_numbers = true)]
    flows_per_node: Option<f64>,
    /// Per-node transmission budget W
    #[arg(long = "node-rate", allow_negative_numbers = true)]
    node_rate: Option<f64>,
    #[arg(long = "retry-budget")]
    retry_budget: Option<usize>,
    #[arg(long = "max-hop-factor")]
    max_hop_factor: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct ValidateArgs {
    /// Experiment to validate (otherwise taken from the config file)
    #[arg(long)]
    experiment: Option<String>,
    #[command(flatten)]
    args: ExperimentArgs,
}

impl ExperimentArgs {
    fn to_raw(&self) -> RawConfig {
        RawConfig {
            experiment: None,
            strategy: self.strategy.clone(),
            dimension: self.dimension,
            step_length: self.step_length,
            persistence_radius: self.persistence_radius,
            n_hops: self.n_hops,
            samples: self.samples,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format.clone(),
            bins: self.bins,
            orders: self.orders.clone(),
            bootstrap: self.bootstrap,
            density_kind: self.density_kind.clone(),
            grid_points: self.grid_points,
            xi_over_l: self.xi_over_l.clone(),
            xi_list: self.xi_list.clone(),
            contour_length: self.contour_length,
            step_factor: self.step_factor,
            n_list: self.n_list.clone(),
            convention: self.convention.clone(),
            radius_coeff: self.radius_coeff,
            pairs: self.pairs,
            knowledge_factor: self.knowledge_factor,
            flows_per_node: self.flows_per_node,
            node_rate: self.node_rate,
            retry_budget: self.retry_budget,
            max_hop_factor: self.max_hop_factor,
        }
    }

    fn resolve_raw(&self) -> Result<RawConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        Ok(file.merged_under(self.to_raw()))
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn print_diagnostics(diags: &Diagnostics) {
    for w in &diags.warnings {
        println!("warning: {w}");
    }
    for e in &diags.errors {
        println!("error: {e}");
    }
}

fn thread_count(args: &ExperimentArgs) -> Option<usize> {
    args.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    })
}

fn run_experiment(experiment: Experiment, args: &ExperimentArgs) -> ExitCode {
    let raw = match args.resolve_raw() {
        Ok(raw) => raw,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let (cfg, diags) = match config::resolve(experiment, raw) {
        Ok(pair) => pair,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    print_diagnostics(&diags);
    if !diags.is_valid() {
        return ExitCode::from(EXIT_CONFIG);
    }
    let work = || commands::run(&cfg);
    let result = match thread_count(args) {
        Some(threads) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool,
                Err(e) => return fail(EXIT_NUMERIC, e),
            };
            pool.install(work)
        }
        None => work(),
    };
    match result {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Config(e)) => fail(EXIT_CONFIG, e),
        Err(RunError::Output(OutputError::Io(e))) => fail(EXIT_IO, e),
        Err(RunError::Output(e)) => fail(EXIT_NUMERIC, e),
        Err(RunError::Numeric(e)) => fail(EXIT_NUMERIC, e),
    }
}

fn run_validate(v: &ValidateArgs) -> ExitCode {
    let raw = match v.args.resolve_raw() {
        Ok(raw) => raw,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let name = v
        .experiment
        .clone()
        .or_else(|| raw.experiment.clone())
        .unwrap_or_default();
    let Some(experiment) = Experiment::from_name(&name) else {
        return fail(
            EXIT_CONFIG,
            format!(
                "unknown or missing experiment `{name}`; pass --experiment or set `experiment =` in the config"
            ),
        );
    };
    match config::resolve(experiment, raw) {
        Ok((_, diags)) => {
            print_diagnostics(&diags);
            if diags.is_valid() {
                println!("valid: {} configuration ok", experiment.name());
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CONFIG)
            }
        }
        Err(e) => fail(EXIT_CONFIG, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sample(args) => run_experiment(Experiment::Sample, args),
        Command::Density(args) => run_experiment(Experiment::Density, args),
        Command::Moments(args) => run_experiment(Experiment::Moments, args),
        Command::Fig3(args) => run_experiment(Experiment::Fig3, args),
        Command::RecoverXi(args) => run_experiment(Experiment::RecoverXi, args),
        Command::GraphScaling(args) => run_experiment(Experiment::GraphScaling, args),
        Command::Capacity(args) => run_experiment(Experiment::Capacity, args),
        Command::Validate(args) => run_validate(args),
    }
}
