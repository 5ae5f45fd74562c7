//! Experiment configuration: flag defaults, flat key-value config files, and
//! flag-over-file merging.
//!
//! Every run embeds its fully resolved configuration (without execution-only
//! knobs like thread count) in the machine-readable output, so a record is
//! sufficient to reproduce the run byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("config file {path}: {message}")]
    File { path: String, message: String },
    #[error("config experiment `{file}` does not match subcommand `{cli}`")]
    ExperimentMismatch { file: String, cli: String },
}

/// Experiment selector, mirroring the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sample,
    Density,
    Moments,
    Fig3,
    RecoverXi,
    GraphScaling,
    Capacity,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::Density => "density",
            Experiment::Moments => "moments",
            Experiment::Fig3 => "fig3",
            Experiment::RecoverXi => "recover-xi",
            Experiment::GraphScaling => "graph-scaling",
            Experiment::Capacity => "capacity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sample" => Experiment::Sample,
            "density" => Experiment::Density,
            "moments" => Experiment::Moments,
            "fig3" => Experiment::Fig3,
            "recover-xi" => Experiment::RecoverXi,
            "graph-scaling" => Experiment::GraphScaling,
            "capacity" => Experiment::Capacity,
            _ => return None,
        })
    }
}

/// All tunables across experiments, each optional until resolution.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub strategy: Option<String>,
    pub dimension: Option<u32>,
    pub step_length: Option<f64>,
    pub persistence_radius: Option<f64>,
    pub n_hops: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub bins: Option<usize>,
    pub orders: Option<Vec<usize>>,
    pub bootstrap: Option<usize>,
    pub density_kind: Option<String>,
    pub grid_points: Option<usize>,
    pub xi_over_l: Option<Vec<f64>>,
    pub xi_list: Option<Vec<f64>>,
    pub contour_length: Option<f64>,
    pub step_factor: Option<f64>,
    pub n_list: Option<Vec<usize>>,
    pub convention: Option<String>,
    pub radius_coeff: Option<f64>,
    pub pairs: Option<usize>,
    pub knowledge_factor: Option<f64>,
    pub flows_per_node: Option<f64>,
    pub node_rate: Option<f64>,
    pub retry_budget: Option<usize>,
    pub max_hop_factor: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "strategy",
    "dimension",
    "step-length",
    "persistence-radius",
    "n-hops",
    "samples",
    "seed",
    "out",
    "format",
    "bins",
    "orders",
    "bootstrap",
    "density-kind",
    "grid-points",
    "xi-over-l",
    "xi-list",
    "contour-length",
    "step-factor",
    "n-list",
    "convention",
    "radius-coeff",
    "pairs",
    "knowledge-factor",
    "flows-per-node",
    "node-rate",
    "retry-budget",
    "max-hop-factor",
];

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| ConfigError::InvalidValue {
                    key: key.to_string(),
                    message: format!("`{s}`: {e}"),
                })
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| ConfigError::InvalidValue {
            key: key.to_string(),
            message: format!("`{}`: {e}", value.trim()),
        })
}

impl RawConfig {
    /// Parse a flat `key = value` file; `#` starts a comment. Unknown keys
    /// are rejected, not ignored.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = RawConfig::default();
        for (line_no, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::File {
                path: path.display().to_string(),
                message: format!("line {}: expected `key = value`", line_no + 1),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        match key {
            "experiment" => self.experiment = Some(value.to_string()),
            "strategy" => self.strategy = Some(value.to_string()),
            "dimension" => self.dimension = Some(parse_scalar(key, value)?),
            "step-length" => self.step_length = Some(parse_scalar(key, value)?),
            "persistence-radius" => self.persistence_radius = Some(parse_scalar(key, value)?),
            "n-hops" => self.n_hops = Some(parse_scalar(key, value)?),
            "samples" => self.samples = Some(parse_scalar(key, value)?),
            "seed" => self.seed = Some(parse_scalar(key, value)?),
            "out" => self.out = Some(value.to_string()),
            "format" => self.format = Some(value.to_string()),
            "bins" => self.bins = Some(parse_scalar(key, value)?),
            "orders" => self.orders = Some(parse_list(key, value)?),
            "bootstrap" => self.bootstrap = Some(parse_scalar(key, value)?),
            "density-kind" => self.density_kind = Some(value.to_string()),
            "grid-points" => self.grid_points = Some(parse_scalar(key, value)?),
            "xi-over-l" => self.xi_over_l = Some(parse_list(key, value)?),
            "xi-list" => self.xi_list = Some(parse_list(key, value)?),
            "contour-length" => self.contour_length = Some(parse_scalar(key, value)?),
            "step-factor" => self.step_factor = Some(parse_scalar(key, value)?),
            "n-list" => self.n_list = Some(parse_list(key, value)?),
            "convention" => self.convention = Some(value.to_string()),
            "radius-coeff" => self.radius_coeff = Some(parse_scalar(key, value)?),
            "pairs" => self.pairs = Some(parse_scalar(key, value)?),
            "knowledge-factor" => self.knowledge_factor = Some(parse_scalar(key, value)?),
            "flows-per-node" => self.flows_per_node = Some(parse_scalar(key, value)?),
            "node-rate" => self.node_rate = Some(parse_scalar(key, value)?),
            "retry-budget" => self.retry_budget = Some(parse_scalar(key, value)?),
            "max-hop-factor" => self.max_hop_factor = Some(parse_scalar(key, value)?),
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Overlay `flags` (CLI) on top of `self` (file): flags win.
    pub fn merged_under(mut self, flags: RawConfig) -> RawConfig {
        macro_rules! take {
            ($field:ident) => {
                if flags.$field.is_some() {
                    self.$field = flags.$field;
                }
            };
        }
        take!(experiment);
        take!(strategy);
        take!(dimension);
        take!(step_length);
        take!(persistence_radius);
        take!(n_hops);
        take!(samples);
        take!(seed);
        take!(out);
        take!(format);
        take!(bins);
        take!(orders);
        take!(bootstrap);
        take!(density_kind);
        take!(grid_points);
        take!(xi_over_l);
        take!(xi_list);
        take!(contour_length);
        take!(step_factor);
        take!(n_list);
        take!(convention);
        take!(radius_coeff);
        take!(pairs);
        take!(knowledge_factor);
        take!(flows_per_node);
        take!(node_rate);
        take!(retry_budget);
        take!(max_hop_factor);
        self
    }
}

/// Output format of the machine-readable result file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Fully resolved, validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub strategy: String,
    pub dimension: u32,
    pub step_length: f64,
    pub persistence_radius: f64,
    pub n_hops: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: String,
    pub format: OutputFormat,
    pub bins: usize,
    pub orders: Vec<usize>,
    pub bootstrap: usize,
    pub density_kind: String,
    pub grid_points: usize,
    pub xi_over_l: Vec<f64>,
    pub xi_list: Vec<f64>,
    pub contour_length: f64,
    pub step_factor: f64,
    pub n_list: Vec<usize>,
    pub convention: String,
    pub radius_coeff: f64,
    pub pairs: usize,
    pub knowledge_factor: f64,
    pub flows_per_node: f64,
    pub node_rate: f64,
    pub retry_budget: usize,
    pub max_hop_factor: usize,
}

/// Validation outcome: hard errors and advisory warnings.
#[derive(Debug, Default, Clone)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn resolve(
    experiment: Experiment,
    raw: RawConfig,
) -> Result<(ResolvedConfig, Diagnostics), ConfigError> {
    if let Some(file_exp) = raw.experiment.as_deref() {
        if file_exp != experiment.name() {
            return Err(ConfigError::ExperimentMismatch {
                file: file_exp.to_string(),
                cli: experiment.name().to_string(),
            });
        }
    }
    let default_strategy = match experiment {
        Experiment::GraphScaling | Experiment::Capacity => "shortest",
        _ => "rrs",
    };
    let cfg = ResolvedConfig {
        experiment,
        strategy: raw.strategy.unwrap_or_else(|| default_strategy.into()),
        dimension: raw.dimension.unwrap_or(3),
        step_length: raw.step_length.unwrap_or(1.0),
        persistence_radius: raw.persistence_radius.unwrap_or(0.0),
        n_hops: raw.n_hops.unwrap_or(1000),
        samples: raw.samples.unwrap_or(10_000),
        seed: raw.seed.unwrap_or(42),
        out: raw.out.unwrap_or_else(|| "out.csv".into()),
        format: match raw.format.as_deref() {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => {
                return Err(ConfigError::InvalidValue {
                    key: "format".into(),
                    message: format!("`{other}` (expected csv or json)"),
                })
            }
        },
        bins: raw.bins.unwrap_or(50),
        orders: raw.orders.unwrap_or_else(|| vec![0, 1, 2]),
        bootstrap: raw.bootstrap.unwrap_or(400),
        density_kind: raw.density_kind.unwrap_or_else(|| "exact".into()),
        grid_points: raw.grid_points.unwrap_or(200),
        xi_over_l: raw
            .xi_over_l
            .unwrap_or_else(|| vec![1e-3, 1e-1, 0.2, 0.5, 3.0, 8.0]),
        xi_list: raw.xi_list.unwrap_or_else(|| vec![0.2, 0.5, 1.0]),
        contour_length: raw.contour_length.unwrap_or(10.0),
        step_factor: raw.step_factor.unwrap_or(1.0 / 3.0),
        n_list: raw
            .n_list
            .unwrap_or_else(|| vec![250, 500, 1000, 2000, 4000]),
        convention: raw.convention.unwrap_or_else(|| "unit".into()),
        radius_coeff: raw.radius_coeff.unwrap_or(1.5),
        pairs: raw.pairs.unwrap_or(200),
        knowledge_factor: raw.knowledge_factor.unwrap_or(2.0),
        flows_per_node: raw.flows_per_node.unwrap_or(1.0),
        node_rate: raw.node_rate.unwrap_or(1.0),
        retry_budget: raw.retry_budget.unwrap_or(20),
        max_hop_factor: raw.max_hop_factor.unwrap_or(50),
    };
    let diags = validate(&cfg);
    Ok((cfg, diags))
}

/// Semantic validation; every problem is reported, nothing runs.
pub fn validate(cfg: &ResolvedConfig) -> Diagnostics {
    let mut d = Diagnostics::default();
    let err = |d: &mut Diagnostics, m: String| d.errors.push(m);

    let chain_experiment = !matches!(
        cfg.experiment,
        Experiment::GraphScaling | Experiment::Capacity
    );
    if chain_experiment && !["rrs", "drs", "ors"].contains(&cfg.strategy.as_str()) {
        err(
            &mut d,
            format!("strategy: `{}` is not one of rrs|drs|ors", cfg.strategy),
        );
    }
    if ![2, 3].contains(&cfg.dimension) {
        err(
            &mut d,
            format!("dimension: {} is not 2 or 3", cfg.dimension),
        );
    }
    if !(cfg.step_length > 0.0 && cfg.step_length.is_finite()) {
        err(
            &mut d,
            format!("step-length: {} must be positive", cfg.step_length),
        );
    }
    if !(cfg.persistence_radius >= 0.0 && cfg.persistence_radius.is_finite()) {
        err(
            &mut d,
            format!(
                "persistence-radius: {} must be nonnegative",
                cfg.persistence_radius
            ),
        );
    }
    if cfg.n_hops == 0 {
        err(&mut d, "n-hops: must be at least 1".into());
    }
    match cfg.experiment {
        Experiment::Sample => {
            if cfg.samples == 0 {
                err(&mut d, "samples: must be at least 1".into());
            }
        }
        Experiment::Density => {
            if !["exact", "gaussian", "propagator"].contains(&cfg.density_kind.as_str()) {
                err(
                    &mut d,
                    format!(
                        "density-kind: `{}` is not one of exact|gaussian|propagator",
                        cfg.density_kind
                    ),
                );
            }
            if cfg.grid_points < 2 {
                err(&mut d, "grid-points: need at least 2".into());
            }
            if cfg.density_kind == "propagator" {
                let l = cfg.n_hops as f64 * cfg.step_length;
                if cfg.persistence_radius > 0.0 && l / cfg.persistence_radius < 0.01 {
                    d.warnings.push(format!(
                        "density: L/xi = {:.3e} is below 0.01; the angular propagator \
                         refuses to evaluate there rather than return an unconverged sum",
                        l / cfg.persistence_radius
                    ));
                }
                if cfg.persistence_radius == 0.0 {
                    d.warnings
                        .push("density: propagator with xi = 0 is the uniform density".into());
                }
            }
        }
        Experiment::Moments => {
            if cfg.samples < 100 {
                err(
                    &mut d,
                    "samples: moment estimation needs at least 100".into(),
                );
            }
            if let Some(&bad) = cfg.orders.iter().find(|&&l| l > 4) {
                err(&mut d, format!("orders: order {bad} exceeds the cap 4"));
            }
            if cfg.orders.is_empty() {
                err(&mut d, "orders: list is empty".into());
            }
        }
        Experiment::Fig3 => {
            if cfg.xi_over_l.is_empty() {
                err(&mut d, "xi-over-l: list is empty".into());
            }
            if cfg.xi_over_l.iter().any(|&x| !(x > 0.0)) {
                err(&mut d, "xi-over-l: ratios must be positive".into());
            } else if cfg.xi_over_l.iter().any(|&x| x < 1e-6) {
                err(
                    &mut d,
                    "xi-over-l: ratios below 1e-6 would need more than 3e6 hops per sample".into(),
                );
            }
            if cfg.bins < 2 {
                err(&mut d, "bins: need at least 2".into());
            }
            if cfg.samples == 0 {
                err(&mut d, "samples: must be at least 1".into());
            }
        }
        Experiment::RecoverXi => {
            if cfg.xi_list.is_empty() {
                err(&mut d, "xi-list: list is empty".into());
            }
            if cfg.xi_list.iter().any(|&x| !(x > 0.0)) {
                err(&mut d, "xi-list: values must be positive".into());
            }
            if !(cfg.contour_length > 0.0) {
                err(
                    &mut d,
                    format!("contour-length: {} must be positive", cfg.contour_length),
                );
            }
            if !(cfg.step_factor > 0.0) {
                err(&mut d, "step-factor: must be positive".into());
            } else if cfg
                .xi_list
                .iter()
                .any(|&xi| xi > 0.0 && cfg.contour_length / (xi * cfg.step_factor) > 1e6)
            {
                err(
                    &mut d,
                    "xi-list: smallest radius would need more than 1e6 hops per sample                      at this step-factor"
                        .into(),
                );
            }
            if cfg.samples < 100 {
                err(&mut d, "samples: recovery needs at least 100".into());
            }
        }
        Experiment::GraphScaling | Experiment::Capacity => {
            if cfg.n_list.is_empty() {
                err(&mut d, "n-list: list is empty".into());
            } else {
                let mut sorted = cfg.n_list.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() < 4 {
                    err(&mut d, "n-list: need at least 4 distinct sizes".into());
                } else if (sorted[sorted.len() - 1] as f64) < 10.0 * sorted[0] as f64 {
                    err(&mut d, "n-list: sizes must span at least a decade".into());
                }
                if sorted.first() == Some(&0) {
                    err(&mut d, "n-list: sizes must be positive".into());
                }
            }
            if !["unit", "fixed-density"].contains(&cfg.convention.as_str()) {
                err(
                    &mut d,
                    format!(
                        "convention: `{}` is not one of unit|fixed-density",
                        cfg.convention
                    ),
                );
            }
            if !["walk", "greedy", "shortest"].contains(&cfg.strategy.as_str()) {
                err(
                    &mut d,
                    format!(
                        "strategy: `{}` is not one of walk|greedy|shortest",
                        cfg.strategy
                    ),
                );
            }
            if !(cfg.radius_coeff > 0.0) {
                err(&mut d, "radius-coeff: must be positive".into());
            }
            if cfg.pairs == 0 {
                err(&mut d, "pairs: must be at least 1".into());
            }
            if cfg.knowledge_factor < 1.0 {
                err(
                    &mut d,
                    "knowledge-factor: must be >= 1 (knowledge range >= radio radius)".into(),
                );
            }
            if cfg.experiment == Experiment::Capacity && !(cfg.node_rate > 0.0) {
                err(&mut d, "node-rate: must be positive".into());
            }
            if cfg.experiment == Experiment::Capacity && !(cfg.flows_per_node > 0.0) {
                err(&mut d, "flows-per-node: must be positive".into());
            }
        }
    }
    d
}

impl ResolvedConfig {
    /// The reproducibility record: every semantic knob, sorted by key.
    /// Execution-only settings (thread count) are deliberately absent.
    pub fn record(&self) -> BTreeMap<String, serde_json::Value> {
        use serde_json::json;
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), json!(self.experiment.name()));
        m.insert("seed".into(), json!(self.seed));
        m.insert("format".into(), json!(self.format.name()));
        m.insert("out".into(), json!(self.out));
        match self.experiment {
            Experiment::Sample => {
                m.insert("strategy".into(), json!(self.strategy));
                m.insert("dimension".into(), json!(self.dimension));
                m.insert("step-length".into(), json!(self.step_length));
                m.insert("persistence-radius".into(), json!(self.persistence_radius));
                m.insert("n-hops".into(), json!(self.n_hops));
                m.insert("samples".into(), json!(self.samples));
            }
            Experiment::Density => {
                m.insert("density-kind".into(), json!(self.density_kind));
                m.insert("n-hops".into(), json!(self.n_hops));
                m.insert("step-length".into(), json!(self.step_length));
                m.insert("persistence-radius".into(), json!(self.persistence_radius));
                m.insert("dimension".into(), json!(self.dimension));
                m.insert("grid-points".into(), json!(self.grid_points));
            }
            Experiment::Moments => {
                m.insert("strategy".into(), json!(self.strategy));
                m.insert("dimension".into(), json!(self.dimension));
                m.insert("step-length".into(), json!(self.step_length));
                m.insert("persistence-radius".into(), json!(self.persistence_radius));
                m.insert("n-hops".into(), json!(self.n_hops));
                m.insert("samples".into(), json!(self.samples));
                m.insert("orders".into(), json!(self.orders));
                m.insert("bootstrap".into(), json!(self.bootstrap));
            }
            Experiment::Fig3 => {
                m.insert("xi-over-l".into(), json!(self.xi_over_l));
                m.insert("samples".into(), json!(self.samples));
                m.insert("bins".into(), json!(self.bins));
                m.insert("dimension".into(), json!(self.dimension));
            }
            Experiment::RecoverXi => {
                m.insert("xi-list".into(), json!(self.xi_list));
                m.insert("contour-length".into(), json!(self.contour_length));
                m.insert("step-factor".into(), json!(self.step_factor));
                m.insert("samples".into(), json!(self.samples));
                m.insert("dimension".into(), json!(self.dimension));
                m.insert("bootstrap".into(), json!(self.bootstrap));
            }
            Experiment::GraphScaling => {
                m.insert("strategy".into(), json!(self.strategy));
                m.insert("n-list".into(), json!(self.n_list));
                m.insert("dimension".into(), json!(self.dimension));
                m.insert("convention".into(), json!(self.convention));
                m.insert("radius-coeff".into(), json!(self.radius_coeff));
                m.insert("pairs".into(), json!(self.pairs));
                m.insert("knowledge-factor".into(), json!(self.knowledge_factor));
                m.insert("retry-budget".into(), json!(self.retry_budget));
                m.insert("max-hop-factor".into(), json!(self.max_hop_factor));
            }
            Experiment::Capacity => {
                m.insert("strategy".into(), json!(self.strategy));
                m.insert("n-list".into(), json!(self.n_list));
                m.insert("dimension".into(), json!(self.dimension));
                m.insert("radius-coeff".into(), json!(self.radius_coeff));
                m.insert("flows-per-node".into(), json!(self.flows_per_node));
                m.insert("node-rate".into(), json!(self.node_rate));
                m.insert("retry-budget".into(), json!(self.retry_budget));
                m.insert("max-hop-factor".into(), json!(self.max_hop_factor));
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = RawConfig::default();
        assert!(matches!(
            cfg.set("not-a-key", "1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(cfg.set("seed", "7").is_ok());
        assert_eq!(cfg.seed, Some(7));
    }

    #[test]
    fn flags_override_file() {
        let mut file = RawConfig::default();
        file.set("samples", "100").unwrap();
        file.set("seed", "1").unwrap();
        let mut flags = RawConfig::default();
        flags.set("seed", "2").unwrap();
        let merged = file.merged_under(flags);
        assert_eq!(merged.samples, Some(100));
        assert_eq!(merged.seed, Some(2));
    }

    #[test]
    fn validate_reports_named_fields() {
        let mut raw = RawConfig::default();
        raw.set("persistence-radius", "-1").unwrap();
        let (_, diags) = resolve(Experiment::Sample, raw).unwrap();
        assert!(!diags.is_valid());
        assert!(diags
            .errors
            .iter()
            .any(|e| e.contains("persistence-radius")));
    }

    #[test]
    fn validate_warns_on_propagator_floor() {
        let mut raw = RawConfig::default();
        raw.set("density-kind", "propagator").unwrap();
        raw.set("n-hops", "1").unwrap();
        raw.set("step-length", "0.001").unwrap();
        raw.set("persistence-radius", "1.0").unwrap();
        let (_, diags) = resolve(Experiment::Density, raw).unwrap();
        assert!(diags.is_valid());
        assert!(diags.warnings.iter().any(|w| w.contains("refuses")));
    }

    #[test]
    fn validate_rejects_runaway_derived_hop_counts() {
        let mut raw = RawConfig::default();
        raw.set("xi-over-l", "0.1,1e-9").unwrap();
        let (_, diags) = resolve(Experiment::Fig3, raw).unwrap();
        assert!(diags.errors.iter().any(|e| e.contains("xi-over-l")));
        let mut raw = RawConfig::default();
        raw.set("xi-list", "1e-7").unwrap();
        raw.set("contour-length", "10").unwrap();
        let (_, diags) = resolve(Experiment::RecoverXi, raw).unwrap();
        assert!(diags.errors.iter().any(|e| e.contains("xi-list")));
    }

    #[test]
    fn validate_rejects_empty_n_list() {
        let mut raw = RawConfig::default();
        raw.set("n-list", "").unwrap();
        let (_, diags) = resolve(Experiment::GraphScaling, raw).unwrap();
        assert!(diags.errors.iter().any(|e| e.contains("n-list")));
    }

    #[test]
    fn experiment_mismatch_is_an_error() {
        let mut raw = RawConfig::default();
        raw.set("experiment", "fig3").unwrap();
        assert!(matches!(
            resolve(Experiment::Sample, raw),
            Err(ConfigError::ExperimentMismatch { .. })
        ));
    }
}
