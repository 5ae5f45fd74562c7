//! Random geometric deployments and graph-level routing experiments:
//! random-walk, knowledge-range greedy, and shortest-path routing, plus
//! path-length scaling and relay-load transport capacity under a perfect MAC.

use std::io::{self, BufRead, Write};

use rand_core::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::estimation::{fit_log_log, EstimationError, PowerLawFit};
use crate::pathmodel::Dim;
use crate::rng::{derive_seed, domain, stream_rng, uniform_01, uniform_index};

#[derive(Debug, Error)]
pub enum NetsimError {
    #[error("deployment needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("radio radius must lie in (0, 1), got {0}")]
    InvalidRadius(f64),
    #[error("node {0} out of range")]
    NodeOutOfRange(u32),
    #[error("source equals destination")]
    SameSourceDestination,
    #[error("source node {0} has no neighbors")]
    IsolatedSource(u32),
    #[error("nodes {src} and {dst} are disconnected")]
    DisconnectedPair { src: u32, dst: u32 },
    #[error("knowledge range {range} below radio radius {radio}")]
    KnowledgeRangeTooSmall { range: f64, radio: f64 },
    #[error("flow {0} did not reach its destination")]
    UnreachedFlow(usize),
    #[error("flow {0} carries no node trace")]
    MissingTrace(usize),
    #[error("capacity accounting needs at least one flow")]
    NoFlows,
    #[error("scaling experiment needs >= 4 node counts spanning a decade")]
    DegenerateNodeGrid,
    #[error("deployment file malformed: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Node positions in the unit square/cube with radio-radius adjacency.
#[derive(Debug, Clone)]
pub struct Deployment {
    positions: Vec<[f64; 3]>,
    dimension: Dim,
    radio_radius: f64,
    adjacency: Vec<Vec<u32>>,
    seed: u64,
}

impl Deployment {
    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn dimension(&self) -> Dim {
        self.dimension
    }

    pub fn radio_radius(&self) -> f64 {
        self.radio_radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.adjacency[node as usize]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn distance(&self, a: u32, b: u32) -> f64 {
        let pa = self.positions[a as usize];
        let pb = self.positions[b as usize];
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt()
    }

    fn check_node(&self, node: u32) -> Result<(), NetsimError> {
        if (node as usize) < self.positions.len() {
            Ok(())
        } else {
            Err(NetsimError::NodeOutOfRange(node))
        }
    }

    /// Connected-component label per node (labels are representative ids).
    pub fn component_labels(&self) -> Vec<u32> {
        let n = self.positions.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for i in 0..n as u32 {
            for &j in &self.adjacency[i as usize] {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj) as usize] = ri.min(rj);
                }
            }
        }
        (0..n as u32).map(|i| find(&mut parent, i)).collect()
    }

    /// Size of the largest connected component.
    pub fn giant_component_size(&self) -> usize {
        let labels = self.component_labels();
        let mut counts = std::collections::HashMap::new();
        for l in labels {
            *counts.entry(l).or_insert(0usize) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }
}

/// Uniform node placement with exact pairwise-threshold adjacency.
///
/// Node `i` is placed from the stream `(seed, i)` and the edge `(i, j)`
/// exists iff |x_i - x_j| <= r exactly, so the graph is independent of the
/// bucket layout used to accelerate the pair search.
pub fn generate_deployment(
    n_nodes: usize,
    radio_radius: f64,
    dimension: Dim,
    seed: u64,
) -> Result<Deployment, NetsimError> {
    if n_nodes < 2 {
        return Err(NetsimError::TooFewNodes(n_nodes));
    }
    if !(radio_radius > 0.0 && radio_radius < 1.0) {
        return Err(NetsimError::InvalidRadius(radio_radius));
    }
    let positions: Vec<[f64; 3]> = (0..n_nodes)
        .map(|i| {
            let mut rng = stream_rng(seed, domain::NODE_PLACEMENT, i as u64);
            match dimension {
                Dim::Two => [uniform_01(&mut rng), uniform_01(&mut rng), 0.0],
                Dim::Three => [
                    uniform_01(&mut rng),
                    uniform_01(&mut rng),
                    uniform_01(&mut rng),
                ],
            }
        })
        .collect();
    let cells = default_cells_per_axis(n_nodes, radio_radius, dimension);
    let adjacency = build_adjacency_bucketed(&positions, radio_radius, dimension, cells);
    Ok(Deployment {
        positions,
        dimension,
        radio_radius,
        adjacency,
        seed,
    })
}

fn default_cells_per_axis(n_nodes: usize, radius: f64, dimension: Dim) -> usize {
    let by_radius = (1.0 / radius).floor() as usize;
    let by_count = (n_nodes as f64)
        .powf(1.0 / dimension.as_usize() as f64)
        .ceil() as usize;
    by_radius.clamp(1, by_count.max(1))
}

/// Grid-bucket adjacency; cell width >= r so candidates sit in adjacent cells.
pub(crate) fn build_adjacency_bucketed(
    positions: &[[f64; 3]],
    radius: f64,
    dimension: Dim,
    cells_per_axis: usize,
) -> Vec<Vec<u32>> {
    let m = cells_per_axis
        .max(1)
        .min((1.0 / radius).floor().max(1.0) as usize);
    let dims = dimension.as_usize();
    let mz = if dims == 3 { m } else { 1 };
    let cell_of = |p: &[f64; 3]| -> usize {
        let cx = ((p[0] * m as f64) as usize).min(m - 1);
        let cy = ((p[1] * m as f64) as usize).min(m - 1);
        let cz = if dims == 3 {
            ((p[2] * m as f64) as usize).min(m - 1)
        } else {
            0
        };
        (cz * m + cy) * m + cx
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); m * m * mz];
    for (i, p) in positions.iter().enumerate() {
        buckets[cell_of(p)].push(i as u32);
    }
    let r2 = radius * radius;
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); positions.len()];
    for (i, p) in positions.iter().enumerate() {
        let cx = ((p[0] * m as f64) as usize).min(m - 1) as isize;
        let cy = ((p[1] * m as f64) as usize).min(m - 1) as isize;
        let cz = if dims == 3 {
            ((p[2] * m as f64) as usize).min(m - 1) as isize
        } else {
            0
        };
        let z_range = if dims == 3 { -1..=1 } else { 0..=0 };
        for dz in z_range {
            let z = cz + dz;
            if z < 0 || z >= mz as isize {
                continue;
            }
            for dy in -1..=1 {
                let y = cy + dy;
                if y < 0 || y >= m as isize {
                    continue;
                }
                for dx in -1..=1 {
                    let x = cx + dx;
                    if x < 0 || x >= m as isize {
                        continue;
                    }
                    let bucket = &buckets[((z as usize) * m + y as usize) * m + x as usize];
                    for &j in bucket {
                        if (j as usize) <= i {
                            continue;
                        }
                        let q = positions[j as usize];
                        let d2 =
                            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                        if d2 <= r2 {
                            adjacency[i].push(j);
                            adjacency[j as usize].push(i as u32);
                        }
                    }
                }
            }
        }
    }
    for list in adjacency.iter_mut() {
        list.sort_unstable();
    }
    adjacency
}

/// Reference O(N^2) adjacency, for equivalence checks against the buckets.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn build_adjacency_naive(positions: &[[f64; 3]], radius: f64) -> Vec<Vec<u32>> {
    let r2 = radius * radius;
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); positions.len()];
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let (p, q) = (positions[i], positions[j]);
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            if d2 <= r2 {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }
    adjacency
}

/// Outcome of a single routed pair.
#[derive(Debug, Clone)]
pub struct RouteResult {
    pub reached: bool,
    pub hop_count: usize,
    /// Euclidean source-destination distance.
    pub displacement: f64,
    /// Visited nodes from source to the final node, when requested.
    pub trace: Option<Vec<u32>>,
}

fn pair_preamble(
    deployment: &Deployment,
    source: u32,
    destination: u32,
) -> Result<(), NetsimError> {
    deployment.check_node(source)?;
    deployment.check_node(destination)?;
    if source == destination {
        return Err(NetsimError::SameSourceDestination);
    }
    Ok(())
}

/// Uniform random-walk routing: a uniformly random neighbor at each step,
/// terminating at the destination or after `max_hops`.
pub fn route_random_walk<R: RngCore>(
    deployment: &Deployment,
    source: u32,
    destination: u32,
    max_hops: usize,
    rng: &mut R,
    keep_trace: bool,
) -> Result<RouteResult, NetsimError> {
    pair_preamble(deployment, source, destination)?;
    if deployment.degree(source) == 0 {
        return Err(NetsimError::IsolatedSource(source));
    }
    let mut trace = keep_trace.then(|| vec![source]);
    let mut current = source;
    for hop in 1..=max_hops {
        let neighbors = deployment.neighbors(current);
        current = neighbors[uniform_index(rng, neighbors.len())];
        if let Some(t) = trace.as_mut() {
            t.push(current);
        }
        if current == destination {
            return Ok(RouteResult {
                reached: true,
                hop_count: hop,
                displacement: deployment.distance(source, destination),
                trace,
            });
        }
    }
    Ok(RouteResult {
        reached: false,
        hop_count: max_hops,
        displacement: deployment.distance(source, destination),
        trace,
    })
}

/// Knowledge-range greedy routing.
///
/// When the destination lies within `knowledge_range` of the current node the
/// packet hops to the neighbor closest to the destination (lowest index on
/// ties); otherwise it hops to a uniformly random neighbor. The last visited
/// node is tabu; if the tabu empties the candidate set the step restarts
/// uniformly over all neighbors.
pub fn route_greedy_knowledge<R: RngCore>(
    deployment: &Deployment,
    source: u32,
    destination: u32,
    knowledge_range: f64,
    max_hops: usize,
    rng: &mut R,
    keep_trace: bool,
) -> Result<RouteResult, NetsimError> {
    pair_preamble(deployment, source, destination)?;
    if knowledge_range < deployment.radio_radius() {
        return Err(NetsimError::KnowledgeRangeTooSmall {
            range: knowledge_range,
            radio: deployment.radio_radius(),
        });
    }
    if deployment.degree(source) == 0 {
        return Err(NetsimError::IsolatedSource(source));
    }
    let mut trace = keep_trace.then(|| vec![source]);
    let mut current = source;
    let mut previous: Option<u32> = None;
    for hop in 1..=max_hops {
        let neighbors = deployment.neighbors(current);
        let candidates: Vec<u32> = neighbors
            .iter()
            .copied()
            .filter(|&n| Some(n) != previous)
            .collect();
        let pool: &[u32] = if candidates.is_empty() {
            neighbors
        } else {
            &candidates
        };
        let next = if deployment.distance(current, destination) <= knowledge_range {
            let mut best = pool[0];
            let mut best_d = deployment.distance(best, destination);
            for &c in &pool[1..] {
                let d = deployment.distance(c, destination);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        } else {
            pool[uniform_index(rng, pool.len())]
        };
        previous = Some(current);
        current = next;
        if let Some(t) = trace.as_mut() {
            t.push(current);
        }
        if current == destination {
            return Ok(RouteResult {
                reached: true,
                hop_count: hop,
                displacement: deployment.distance(source, destination),
                trace,
            });
        }
    }
    Ok(RouteResult {
        reached: false,
        hop_count: max_hops,
        displacement: deployment.distance(source, destination),
        trace,
    })
}

/// Minimum-hop routing via breadth-first search, ties broken toward the
/// lowest node index along the reconstructed path.
pub fn route_shortest(
    deployment: &Deployment,
    source: u32,
    destination: u32,
) -> Result<RouteResult, NetsimError> {
    pair_preamble(deployment, source, destination)?;
    let n = deployment.n_nodes();
    let mut dist = vec![u32::MAX; n];
    dist[source as usize] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        if u == destination {
            break;
        }
        let next_d = dist[u as usize] + 1;
        for &v in deployment.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = next_d;
                queue.push_back(v);
            }
        }
    }
    if dist[destination as usize] == u32::MAX {
        return Err(NetsimError::DisconnectedPair {
            src: source,
            dst: destination,
        });
    }
    // walk back choosing the lowest-index predecessor at each level
    let mut path = vec![destination];
    let mut current = destination;
    while current != source {
        let want = dist[current as usize] - 1;
        let parent = deployment
            .neighbors(current)
            .iter()
            .copied()
            .find(|&v| dist[v as usize] == want)
            .expect("BFS predecessor exists");
        path.push(parent);
        current = parent;
    }
    path.reverse();
    Ok(RouteResult {
        reached: true,
        hop_count: dist[destination as usize] as usize,
        displacement: deployment.distance(source, destination),
        trace: Some(path),
    })
}

/// Relay-load transport capacity under a perfect MAC.
///
/// Every node has transmission budget `per_node_rate`; a node's load is the
/// number of flow traversals in which it transmits (every trace node except
/// the terminal one). The uniform per-flow throughput is then
/// `per_node_rate / max_load` and the transport capacity is the sum of
/// throughput x source-destination distance over flows, in bit-meters/s.
pub fn transport_capacity_estimate(
    deployment: &Deployment,
    flows: &[RouteResult],
    per_node_rate: f64,
) -> Result<(f64, f64), NetsimError> {
    if flows.is_empty() {
        return Err(NetsimError::NoFlows);
    }
    let mut load = vec![0u64; deployment.n_nodes()];
    let mut total_distance = 0.0;
    for (i, flow) in flows.iter().enumerate() {
        if !flow.reached {
            return Err(NetsimError::UnreachedFlow(i));
        }
        let trace = flow.trace.as_ref().ok_or(NetsimError::MissingTrace(i))?;
        for &node in &trace[..trace.len() - 1] {
            load[node as usize] += 1;
        }
        total_distance += flow.displacement;
    }
    let max_load = load.iter().copied().max().unwrap_or(0).max(1);
    let throughput = per_node_rate / max_load as f64;
    Ok((throughput, throughput * total_distance))
}

/// Domain convention for scaling experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainConvention {
    /// Unit square/cube with the connectivity radius shrinking in N.
    UnitDomain,
    /// Unit node density: lengths scale by N^{1/d} relative to the unit
    /// domain, radius held fixed in physical units.
    FixedDensity,
}

/// Graph routing strategy used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RouteStrategy {
    RandomWalk,
    /// Knowledge range expressed as a multiple of the radio radius.
    Greedy {
        range_factor: f64,
    },
    Shortest,
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub dimension: Dim,
    pub convention: DomainConvention,
    /// c in r = c (ln N / N)^{1/d}.
    pub radius_coeff: f64,
    pub pairs_per_n: usize,
    pub strategy: RouteStrategy,
    pub seed: u64,
    /// Resampling attempts per pair before it is excluded.
    pub retry_budget: usize,
    /// Walk cap, in units of N hops.
    pub max_hops_factor: usize,
}

impl ScalingConfig {
    pub fn connectivity_radius(&self, n_nodes: usize) -> f64 {
        let n = n_nodes as f64;
        let inv_dim = 1.0 / self.dimension.as_usize() as f64;
        (self.radius_coeff * (n.ln() / n).powf(inv_dim)).min(0.999)
    }

    /// Length unit in meters for the chosen convention.
    pub fn length_scale(&self, n_nodes: usize) -> f64 {
        match self.convention {
            DomainConvention::UnitDomain => 1.0,
            DomainConvention::FixedDensity => {
                (n_nodes as f64).powf(1.0 / self.dimension.as_usize() as f64)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalingPoint {
    pub n_nodes: usize,
    /// Mean routed path length, hops x radius, in meters.
    pub mean_length: f64,
    pub stderr: f64,
    pub routed_pairs: usize,
    pub excluded_pairs: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    pub fit: PowerLawFit,
}

/// Mean routed path length versus network size, with a log-log exponent fit.
///
/// Disconnected sampled pairs are resampled up to the retry budget and then
/// excluded (counted per point). Routing randomness for pair `p` of the
/// size-N experiment flows from the stream `(seed_N, p)`.
pub fn scaling_experiment(config: &ScalingConfig) -> Result<ScalingResult, NetsimError> {
    check_node_grid(&config.n_list)?;
    let mut points = Vec::with_capacity(config.n_list.len());
    for &n_nodes in &config.n_list {
        let n_seed = derive_seed(config.seed, 0xdeb1, n_nodes as u64);
        let radius = config.connectivity_radius(n_nodes);
        let deployment = generate_deployment(n_nodes, radius, config.dimension, n_seed)?;
        let labels = deployment.component_labels();
        let max_hops = config.max_hops_factor.max(1) * n_nodes;
        let outcomes: Vec<Option<f64>> = (0..config.pairs_per_n)
            .into_par_iter()
            .map(|p| {
                let mut rng = stream_rng(n_seed, domain::ROUTE_PAIR, p as u64);
                for _ in 0..=config.retry_budget {
                    let source = uniform_index(&mut rng, n_nodes) as u32;
                    let destination = uniform_index(&mut rng, n_nodes) as u32;
                    if source == destination
                        || labels[source as usize] != labels[destination as usize]
                    {
                        continue;
                    }
                    let result = match config.strategy {
                        RouteStrategy::RandomWalk => route_random_walk(
                            &deployment,
                            source,
                            destination,
                            max_hops,
                            &mut rng,
                            false,
                        ),
                        RouteStrategy::Greedy { range_factor } => route_greedy_knowledge(
                            &deployment,
                            source,
                            destination,
                            range_factor * radius,
                            max_hops,
                            &mut rng,
                            false,
                        ),
                        RouteStrategy::Shortest => route_shortest(&deployment, source, destination),
                    };
                    match result {
                        Ok(r) if r.reached => return Some(r.hop_count as f64),
                        _ => continue,
                    }
                }
                None
            })
            .collect();
        let meters_per_hop = radius * config.length_scale(n_nodes);
        let lengths: Vec<f64> = outcomes
            .iter()
            .flatten()
            .map(|hops| hops * meters_per_hop)
            .collect();
        let excluded = outcomes.iter().filter(|o| o.is_none()).count();
        if lengths.is_empty() {
            return Err(NetsimError::DisconnectedPair { src: 0, dst: 0 });
        }
        let (mean, var) = crate::numeric::mean_and_variance(&lengths);
        points.push(ScalingPoint {
            n_nodes,
            mean_length: mean,
            stderr: (var / lengths.len() as f64).sqrt(),
            routed_pairs: lengths.len(),
            excluded_pairs: excluded,
        });
    }
    let fit = fit_log_log(
        &points
            .iter()
            .map(|p| (p.n_nodes as f64, p.mean_length))
            .collect::<Vec<_>>(),
    )?;
    Ok(ScalingResult { points, fit })
}

fn check_node_grid(n_list: &[usize]) -> Result<(), NetsimError> {
    let mut distinct: Vec<usize> = n_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 || distinct[0] == 0 {
        return Err(NetsimError::DegenerateNodeGrid);
    }
    if (distinct[distinct.len() - 1] as f64) / (distinct[0] as f64) < 10.0 {
        return Err(NetsimError::DegenerateNodeGrid);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CapacityConfig {
    pub n_list: Vec<usize>,
    pub dimension: Dim,
    /// c in r = c (ln N / N)^{1/d}.
    pub radius_coeff: f64,
    /// Flows per network, as a multiple of N (1.0 = one flow per node).
    pub flows_per_node: f64,
    pub strategy: RouteStrategy,
    pub per_node_rate: f64,
    pub seed: u64,
    pub retry_budget: usize,
    pub max_hops_factor: usize,
}

#[derive(Debug, Clone)]
pub struct CapacityPoint {
    pub n_nodes: usize,
    pub per_node_throughput: f64,
    pub capacity_bit_meters: f64,
    pub routed_flows: usize,
    pub excluded_flows: usize,
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub points: Vec<CapacityPoint>,
    pub fit: PowerLawFit,
}

/// Transport-capacity scaling across network sizes.
pub fn capacity_scaling_experiment(config: &CapacityConfig) -> Result<CapacityResult, NetsimError> {
    check_node_grid(&config.n_list)?;
    let mut points = Vec::with_capacity(config.n_list.len());
    for &n_nodes in &config.n_list {
        let n_seed = derive_seed(config.seed, 0xca9a, n_nodes as u64);
        let n = n_nodes as f64;
        let inv_dim = 1.0 / config.dimension.as_usize() as f64;
        let radius = (config.radius_coeff * (n.ln() / n).powf(inv_dim)).min(0.999);
        let deployment = generate_deployment(n_nodes, radius, config.dimension, n_seed)?;
        let labels = deployment.component_labels();
        let n_flows = ((n_nodes as f64 * config.flows_per_node).round() as usize).max(1);
        let max_hops = config.max_hops_factor.max(1) * n_nodes;
        let flows: Vec<Option<RouteResult>> = (0..n_flows)
            .into_par_iter()
            .map(|p| {
                let mut rng = stream_rng(n_seed, domain::ROUTE_PAIR, p as u64);
                for _ in 0..=config.retry_budget {
                    let source = uniform_index(&mut rng, n_nodes) as u32;
                    let destination = uniform_index(&mut rng, n_nodes) as u32;
                    if source == destination
                        || labels[source as usize] != labels[destination as usize]
                    {
                        continue;
                    }
                    let result = match config.strategy {
                        RouteStrategy::RandomWalk => route_random_walk(
                            &deployment,
                            source,
                            destination,
                            max_hops,
                            &mut rng,
                            true,
                        ),
                        RouteStrategy::Greedy { range_factor } => route_greedy_knowledge(
                            &deployment,
                            source,
                            destination,
                            range_factor * radius,
                            max_hops,
                            &mut rng,
                            true,
                        ),
                        RouteStrategy::Shortest => route_shortest(&deployment, source, destination),
                    };
                    match result {
                        Ok(r) if r.reached => return Some(r),
                        _ => continue,
                    }
                }
                None
            })
            .collect();
        let excluded = flows.iter().filter(|f| f.is_none()).count();
        let routed: Vec<RouteResult> = flows.into_iter().flatten().collect();
        if routed.is_empty() {
            return Err(NetsimError::NoFlows);
        }
        let (throughput, capacity) =
            transport_capacity_estimate(&deployment, &routed, config.per_node_rate)?;
        points.push(CapacityPoint {
            n_nodes,
            per_node_throughput: throughput,
            capacity_bit_meters: capacity,
            routed_flows: routed.len(),
            excluded_flows: excluded,
        });
    }
    let fit = fit_log_log(
        &points
            .iter()
            .map(|p| (p.n_nodes as f64, p.capacity_bit_meters))
            .collect::<Vec<_>>(),
    )?;
    Ok(CapacityResult { points, fit })
}

// ---------------------------------------------------------------------------
// CSV serialization: node file (node_id,x,y[,z]) plus edge list
// ---------------------------------------------------------------------------

/// Write `node_id,x,y[,z]` rows with a metadata comment header.
pub fn write_nodes_csv<W: Write>(deployment: &Deployment, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "# dimension={} radio_radius={:.17e} seed={}",
        deployment.dimension.as_usize(),
        deployment.radio_radius,
        deployment.seed
    )?;
    match deployment.dimension {
        Dim::Two => writeln!(out, "node_id,x,y")?,
        Dim::Three => writeln!(out, "node_id,x,y,z")?,
    }
    for (i, p) in deployment.positions.iter().enumerate() {
        match deployment.dimension {
            Dim::Two => writeln!(out, "{i},{:.17e},{:.17e}", p[0], p[1])?,
            Dim::Three => writeln!(out, "{i},{:.17e},{:.17e},{:.17e}", p[0], p[1], p[2])?,
        }
    }
    Ok(())
}

/// Write the undirected edge list as `node_a,node_b` with a < b.
pub fn write_edges_csv<W: Write>(deployment: &Deployment, out: &mut W) -> io::Result<()> {
    writeln!(out, "node_a,node_b")?;
    for (i, neighbors) in deployment.adjacency.iter().enumerate() {
        for &j in neighbors {
            if (i as u32) < j {
                writeln!(out, "{i},{j}")?;
            }
        }
    }
    Ok(())
}

/// Rebuild a deployment from the node CSV written by [`write_nodes_csv`];
/// adjacency is regenerated from the recorded radius.
pub fn read_nodes_csv<R: BufRead>(input: R) -> Result<Deployment, NetsimError> {
    let mut dimension = None;
    let mut radius = None;
    let mut seed = 0u64;
    let mut positions: Vec<[f64; 3]> = Vec::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for field in meta.split_whitespace() {
                if let Some(v) = field.strip_prefix("dimension=") {
                    dimension = match v {
                        "2" => Some(Dim::Two),
                        "3" => Some(Dim::Three),
                        _ => return Err(NetsimError::MalformedFile(format!("dimension {v}"))),
                    };
                } else if let Some(v) = field.strip_prefix("radio_radius=") {
                    radius =
                        Some(v.parse::<f64>().map_err(|e| {
                            NetsimError::MalformedFile(format!("radio_radius: {e}"))
                        })?);
                } else if let Some(v) = field.strip_prefix("seed=") {
                    seed = v
                        .parse::<u64>()
                        .map_err(|e| NetsimError::MalformedFile(format!("seed: {e}")))?;
                }
            }
            continue;
        }
        if line.starts_with("node_id") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(NetsimError::MalformedFile(format!("row `{line}`")));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| NetsimError::MalformedFile(format!("coordinate `{s}`: {e}")))
        };
        positions.push([
            parse(fields[1])?,
            parse(fields[2])?,
            if fields.len() > 3 {
                parse(fields[3])?
            } else {
                0.0
            },
        ]);
    }
    let dimension =
        dimension.ok_or_else(|| NetsimError::MalformedFile("missing dimension metadata".into()))?;
    let radius =
        radius.ok_or_else(|| NetsimError::MalformedFile("missing radius metadata".into()))?;
    if positions.len() < 2 {
        return Err(NetsimError::TooFewNodes(positions.len()));
    }
    let cells = default_cells_per_axis(positions.len(), radius, dimension);
    let adjacency = build_adjacency_bucketed(&positions, radius, dimension, cells);
    Ok(Deployment {
        positions,
        dimension,
        radio_radius: radius,
        adjacency,
        seed,
    })
}
