//! Experiment implementations behind the CLI subcommands.

use std::collections::BTreeMap;

use serde_json::json;
use thiserror::Error;

use routechain::analytics::{
    drs_fourth_moment_asymptotic, drs_fourth_moment_in_regime, drs_second_moment,
    gaussian_rrs_density, ors_moment, rrs_moment_exact, AngularPropagator, ExactRrsDensity,
};
use routechain::estimation::{build_histogram, estimate_moments, recover_from_second_moment};
use routechain::netsim::{
    capacity_scaling_experiment, scaling_experiment, CapacityConfig, DomainConvention,
    RouteStrategy, ScalingConfig,
};
use routechain::pathmodel::{sample_ensemble, Dim, StrategyKind, StrategyParams};

use crate::config::{ConfigError, Experiment, ResolvedConfig};
use crate::output::{Cell, OutputError, RunOutput, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

macro_rules! numeric_from {
    ($($ty:path),*) => {
        $(impl From<$ty> for RunError {
            fn from(e: $ty) -> Self {
                RunError::Numeric(e.to_string())
            }
        })*
    };
}
numeric_from!(
    routechain::pathmodel::PathModelError,
    routechain::analytics::AnalyticsError,
    routechain::estimation::EstimationError,
    routechain::netsim::NetsimError
);

fn dim_of(cfg: &ResolvedConfig) -> Dim {
    if cfg.dimension == 2 {
        Dim::Two
    } else {
        Dim::Three
    }
}

fn strategy_params(cfg: &ResolvedConfig) -> Result<StrategyParams, RunError> {
    let kind = match cfg.strategy.as_str() {
        "rrs" => StrategyKind::Rrs,
        "drs" => StrategyKind::Drs,
        "ors" => StrategyKind::Ors,
        other => {
            return Err(ConfigError::InvalidValue {
                key: "strategy".into(),
                message: format!("`{other}`"),
            }
            .into())
        }
    };
    Ok(StrategyParams::new(kind, dim_of(cfg), cfg.step_length)
        .with_persistence(cfg.persistence_radius))
}

/// Run the experiment, write result files, and return human-readable summary
/// lines for stdout.
pub fn run(cfg: &ResolvedConfig) -> Result<Vec<String>, RunError> {
    let output = match cfg.experiment {
        Experiment::Sample => run_sample(cfg)?,
        Experiment::Density => run_density(cfg)?,
        Experiment::Moments => run_moments(cfg)?,
        Experiment::Fig3 => run_fig3(cfg)?,
        Experiment::RecoverXi => run_recover_xi(cfg)?,
        Experiment::GraphScaling => run_graph_scaling(cfg)?,
        Experiment::Capacity => run_capacity(cfg)?,
    };
    let written = output.write()?;
    let mut lines = vec![format!(
        "{}: wrote {}",
        cfg.experiment.name(),
        written
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )];
    for (k, v) in &output.summary {
        lines.push(format!("  {k} = {v}"));
    }
    Ok(lines)
}

fn run_sample(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let params = strategy_params(cfg)?;
    let ensemble = sample_ensemble(&params, cfg.n_hops, cfg.samples, cfg.seed)?;
    let mut table = Table::new(vec!["sample_index", "distance"]);
    for (i, &r) in ensemble.distances.iter().enumerate() {
        table.push(vec![Cell::Int(i as u64), Cell::Num(r)]);
    }
    let (mean, _) = routechain::numeric::mean_and_variance(&ensemble.distances);
    let mean_sq =
        ensemble.distances.iter().map(|r| r * r).sum::<f64>() / ensemble.distances.len() as f64;
    let mut summary = BTreeMap::new();
    summary.insert("contour_length".into(), json!(ensemble.contour_length()));
    summary.insert("mean_distance".into(), json!(mean));
    summary.insert("mean_square_distance".into(), json!(mean_sq));
    Ok(RunOutput {
        config: cfg.clone(),
        tables: vec![(String::new(), table)],
        summary,
    })
}

fn run_density(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let contour_length = cfg.n_hops as f64 * cfg.step_length;
    let mut table = Table::new(vec!["x", "density"]);
    let mut summary = BTreeMap::new();
    match cfg.density_kind.as_str() {
        "exact" => {
            let density = ExactRrsDensity::new(cfg.n_hops, cfg.step_length)?;
            let max = density.max_radius();
            for i in 0..cfg.grid_points {
                let r = max * i as f64 / (cfg.grid_points - 1) as f64;
                table.push(vec![Cell::Num(r), Cell::Num(density.density(r)?)]);
            }
            summary.insert("kind".into(), json!("exact"));
            summary.insert("support_max".into(), json!(max));
        }
        "gaussian" => {
            for i in 0..cfg.grid_points {
                let r = contour_length * i as f64 / (cfg.grid_points - 1) as f64;
                let p = gaussian_rrs_density(r, contour_length, cfg.step_length, dim_of(cfg))?;
                table.push(vec![Cell::Num(r), Cell::Num(p)]);
            }
            summary.insert("kind".into(), json!("gaussian"));
            summary.insert(
                "second_moment".into(),
                json!(contour_length * cfg.step_length),
            );
        }
        "propagator" => {
            let propagator = AngularPropagator::auto(contour_length, cfg.persistence_radius)?;
            for i in 0..cfg.grid_points {
                let c = -1.0 + 2.0 * i as f64 / (cfg.grid_points - 1) as f64;
                table.push(vec![Cell::Num(c), Cell::Num(propagator.evaluate(c)?)]);
            }
            summary.insert("kind".into(), json!("propagator"));
            summary.insert("l_max".into(), json!(propagator.l_max));
        }
        other => {
            return Err(ConfigError::InvalidValue {
                key: "density-kind".into(),
                message: format!("`{other}`"),
            }
            .into())
        }
    }
    Ok(RunOutput {
        config: cfg.clone(),
        tables: vec![(String::new(), table)],
        summary,
    })
}

fn analytic_moment(cfg: &ResolvedConfig, order: usize) -> Result<Option<f64>, RunError> {
    let contour_length = cfg.n_hops as f64 * cfg.step_length;
    let three_d = cfg.dimension == 3;
    Ok(match cfg.strategy.as_str() {
        // <R^2> = N a^2 holds in any dimension; the higher random-strategy
        // moments implemented here are the three-dimensional series
        "rrs" => match order {
            0 => Some(1.0),
            1 => Some(rrs_moment_exact(1, cfg.n_hops, cfg.step_length)?),
            _ if three_d => Some(rrs_moment_exact(order, cfg.n_hops, cfg.step_length)?),
            _ => None,
        },
        "ors" => Some(ors_moment(2 * order as u32, contour_length)),
        "drs" => match order {
            0 => Some(1.0),
            1 => Some(drs_second_moment(contour_length, cfg.persistence_radius)?),
            2 if three_d
                && cfg.persistence_radius > 0.0
                && drs_fourth_moment_in_regime(contour_length, cfg.persistence_radius) =>
            {
                Some(drs_fourth_moment_asymptotic(
                    contour_length,
                    cfg.persistence_radius,
                )?)
            }
            _ => None,
        },
        _ => None,
    })
}

fn run_moments(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let params = strategy_params(cfg)?;
    let ensemble = sample_ensemble(&params, cfg.n_hops, cfg.samples, cfg.seed)?;
    let mut moments = estimate_moments(&ensemble.distances, &cfg.orders, cfg.bootstrap, cfg.seed)?;
    let mut analytic = Vec::with_capacity(cfg.orders.len());
    for &l in &cfg.orders {
        analytic.push(analytic_moment(cfg, l)?);
    }
    moments.analytic = analytic;
    let mut table = Table::new(vec!["order", "empirical", "ci_low", "ci_high", "analytic"]);
    for i in 0..moments.orders.len() {
        table.push(vec![
            Cell::Int(moments.orders[i] as u64),
            Cell::Num(moments.empirical[i]),
            Cell::Num(moments.ci_low[i]),
            Cell::Num(moments.ci_high[i]),
            moments.analytic[i].map_or(Cell::Empty, Cell::Num),
        ]);
    }
    let mut summary = BTreeMap::new();
    summary.insert("contour_length".into(), json!(ensemble.contour_length()));
    summary.insert("samples".into(), json!(ensemble.distances.len()));
    Ok(RunOutput {
        config: cfg.clone(),
        tables: vec![(String::new(), table)],
        summary,
    })
}

/// Hop count for one stiffness-sweep curve: keep the step well below the
/// persistence radius so the continuum formulas apply.
pub fn fig3_hops(xi_over_l: f64) -> usize {
    ((3.0 / xi_over_l).ceil() as usize).max(200)
}

fn run_fig3(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let contour_length = 1.0;
    let mut tables = Vec::new();
    let mut means = Vec::new();
    let mut modes = Vec::new();
    for &ratio in &cfg.xi_over_l {
        let n_hops = fig3_hops(ratio);
        let step = contour_length / n_hops as f64;
        let params = StrategyParams::new(StrategyKind::Drs, dim_of(cfg), step)
            .with_persistence(ratio * contour_length);
        let ensemble = sample_ensemble(&params, n_hops, cfg.samples, cfg.seed)?;
        let hist = build_histogram(&ensemble.distances, contour_length, cfg.bins)?;
        let mut table = Table::new(vec!["bin_lo", "bin_hi", "density", "stderr"]);
        for i in 0..cfg.bins {
            table.push(vec![
                Cell::Num(hist.bin_edges()[i]),
                Cell::Num(hist.bin_edges()[i + 1]),
                Cell::Num(hist.density()[i]),
                Cell::Num(hist.stderr()[i]),
            ]);
        }
        means.push(hist.mean_normalized());
        modes.push(hist.mode_bin_center());
        tables.push((format!("xi{ratio}"), table));
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    let mut summary = BTreeMap::new();
    summary.insert("xi_over_l".into(), json!(cfg.xi_over_l));
    summary.insert("mean_r_over_l".into(), json!(means));
    summary.insert("mode_r_over_l".into(), json!(modes));
    summary.insert("means_strictly_increasing".into(), json!(increasing));
    Ok(RunOutput {
        config: cfg.clone(),
        tables,
        summary,
    })
}

fn run_recover_xi(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let contour_length = cfg.contour_length;
    let mut table = Table::new(vec![
        "xi_true",
        "xi_hat",
        "a_eff_hat",
        "rel_error",
        "saturated",
    ]);
    let mut worst_rel = 0.0f64;
    for &xi in &cfg.xi_list {
        let step = (xi * cfg.step_factor).min(contour_length / 2.0);
        let n_hops = (contour_length / step).ceil() as usize;
        let step = contour_length / n_hops as f64;
        let params = StrategyParams::new(StrategyKind::Drs, dim_of(cfg), step).with_persistence(xi);
        let ensemble = sample_ensemble(&params, n_hops, cfg.samples, cfg.seed)?;
        let moments = estimate_moments(&ensemble.distances, &[1], cfg.bootstrap.min(50), cfg.seed)?;
        let recovered = recover_from_second_moment(moments.empirical[0], contour_length)?;
        let rel = (recovered.xi_hat - xi).abs() / xi;
        worst_rel = worst_rel.max(rel);
        table.push(vec![
            Cell::Num(xi),
            Cell::Num(recovered.xi_hat),
            Cell::Num(recovered.a_eff_hat),
            Cell::Num(rel),
            Cell::Int(recovered.saturated as u64),
        ]);
    }
    let mut summary = BTreeMap::new();
    summary.insert("contour_length".into(), json!(contour_length));
    summary.insert("worst_rel_error".into(), json!(worst_rel));
    Ok(RunOutput {
        config: cfg.clone(),
        tables: vec![(String::new(), table)],
        summary,
    })
}

fn route_strategy(cfg: &ResolvedConfig) -> Result<RouteStrategy, RunError> {
    Ok(match cfg.strategy.as_str() {
        "walk" => RouteStrategy::RandomWalk,
        "greedy" => RouteStrategy::Greedy {
            range_factor: cfg.knowledge_factor,
        },
        "shortest" => RouteStrategy::Shortest,
        other => {
            return Err(ConfigError::InvalidValue {
                key: "strategy".into(),
                message: format!("`{other}` (expected walk|greedy|shortest)"),
            }
            .into())
        }
    })
}

fn run_graph_scaling(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let convention = if cfg.convention == "fixed-density" {
        DomainConvention::FixedDensity
    } else {
        DomainConvention::UnitDomain
    };
    let scaling = scaling_experiment(&ScalingConfig {
        n_list: cfg.n_list.clone(),
        dimension: dim_of(cfg),
        convention,
        radius_coeff: cfg.radius_coeff,
        pairs_per_n: cfg.pairs,
        strategy: route_strategy(cfg)?,
        seed: cfg.seed,
        retry_budget: cfg.retry_budget,
        max_hops_factor: cfg.max_hop_factor,
    })?;
    let mut table = Table::new(vec!["N", "mean_length_meters", "stderr"]);
    for p in &scaling.points {
        table.push(vec![
            Cell::Int(p.n_nodes as u64),
            Cell::Num(p.mean_length),
            Cell::Num(p.stderr),
        ]);
    }
    let mut summary = BTreeMap::new();
    summary.insert("fitted_exponent".into(), json!(scaling.fit.exponent));
    summary.insert("exponent_stderr".into(), json!(scaling.fit.stderr));
    summary.insert("r_squared".into(), json!(scaling.fit.r_squared));
    summary.insert(
        "excluded_pairs".into(),
        json!(scaling
            .points
            .iter()
            .map(|p| p.excluded_pairs)
            .collect::<Vec<_>>()),
    );
    Ok(RunOutput {
        config: cfg.clone(),
        tables: vec![(String::new(), table)],
        summary,
    })
}

fn run_capacity(cfg: &ResolvedConfig) -> Result<RunOutput, RunError> {
    let capacity = capacity_scaling_experiment(&CapacityConfig {
        n_list: cfg.n_list.clone(),
        dimension: dim_of(cfg),
        radius_coeff: cfg.radius_coeff,
        flows_per_node: cfg.flows_per_node,
        strategy: route_strategy(cfg)?,
        per_node_rate: cfg.node_rate,
        seed: cfg.seed,
        retry_budget: cfg.retry_budget,
        max_hops_factor: cfg.max_hop_factor,
    })?;
    let mut table = Table::new(vec!["N", "per_node_throughput", "capacity_bit_meters"]);
    for p in &capacity.points {
        table.push(vec![
            Cell::Int(p.n_nodes as u64),
            Cell::Num(p.per_node_throughput),
            Cell::Num(p.capacity_bit_meters),
        ]);
    }
    let mut summary = BTreeMap::new();
    summary.insert("fitted_exponent".into(), json!(capacity.fit.exponent));
    summary.insert("exponent_stderr".into(), json!(capacity.fit.stderr));
    summary.insert("r_squared".into(), json!(capacity.fit.r_squared));
    summary.insert(
        "excluded_flows".into(),
        json!(capacity
            .points
            .iter()
            .map(|p| p.excluded_flows)
            .collect::<Vec<_>>()),
    );
    Ok(RunOutput {
        config: cfg.clone(),
        tables: vec![(String::new(), table)],
        summary,
    })
}
