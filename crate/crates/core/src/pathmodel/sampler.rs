//! Path samplers for the three routing strategies and seeded ensemble
//! generation.

use rand_core::RngCore;
use rayon::prelude::*;

use crate::rng::{domain, stream_rng, uniform_01};

use super::kernel::{vmf_cosine, DirectedKernel};
use super::{
    norm, normalize, Dim, PathModelError, RoutePath, SampleEnsemble, StrategyKind, StrategyParams,
};

/// Uniform unit direction on the circle (2D) or sphere (3D).
fn uniform_direction<R: RngCore>(dim: Dim, rng: &mut R) -> [f64; 3] {
    match dim {
        Dim::Three => {
            let w = 2.0 * uniform_01(rng) - 1.0;
            let phi = 2.0 * std::f64::consts::PI * uniform_01(rng);
            let s = (1.0 - w * w).max(0.0).sqrt();
            let (sin_phi, cos_phi) = phi.sin_cos();
            [s * cos_phi, s * sin_phi, w]
        }
        Dim::Two => {
            let theta = 2.0 * std::f64::consts::PI * uniform_01(rng);
            let (sin_t, cos_t) = theta.sin_cos();
            [cos_t, sin_t, 0.0]
        }
    }
}

fn check_hops_and_step(n_hops: usize, step_length: f64) -> Result<(), PathModelError> {
    if n_hops == 0 {
        return Err(PathModelError::ZeroHops);
    }
    if !(step_length > 0.0 && step_length.is_finite()) {
        return Err(PathModelError::NonPositiveStep(step_length));
    }
    Ok(())
}

/// Sample a random-strategy path: every hop direction independent and uniform.
pub fn sample_rrs_path<R: RngCore>(
    n_hops: usize,
    step_length: f64,
    dimension: Dim,
    rng: &mut R,
) -> Result<RoutePath, PathModelError> {
    check_hops_and_step(n_hops, step_length)?;
    let dirs = (0..n_hops)
        .map(|_| uniform_direction(dimension, rng))
        .collect();
    Ok(RoutePath::from_unit_directions(
        dirs,
        step_length,
        dimension,
    ))
}

/// Sample a directed-strategy path.
///
/// The first hop direction is uniform; each subsequent direction is drawn
/// from the stiffness kernel around the previous one (see
/// [`super::StrategyParams::persistence_radius`]). `persistence_radius = 0`
/// reproduces the random strategy exactly.
pub fn sample_drs_path<R: RngCore>(
    n_hops: usize,
    step_length: f64,
    persistence_radius: f64,
    dimension: Dim,
    rng: &mut R,
) -> Result<RoutePath, PathModelError> {
    check_hops_and_step(n_hops, step_length)?;
    if !(persistence_radius >= 0.0 && persistence_radius.is_finite()) {
        return Err(PathModelError::NegativePersistence(persistence_radius));
    }
    let kernel = DirectedKernel::new(dimension, step_length, persistence_radius);
    let dirs = drs_directions(&kernel, n_hops, dimension, rng);
    Ok(RoutePath::from_unit_directions(
        dirs,
        step_length,
        dimension,
    ))
}

fn drs_directions<R: RngCore>(
    kernel: &DirectedKernel,
    n_hops: usize,
    dimension: Dim,
    rng: &mut R,
) -> Vec<[f64; 3]> {
    let mut dirs = Vec::with_capacity(n_hops);
    match kernel {
        DirectedKernel::Uniform => {
            for _ in 0..n_hops {
                dirs.push(uniform_direction(dimension, rng));
            }
        }
        DirectedKernel::Sphere { kappa } => {
            let mut prev = uniform_direction(Dim::Three, rng);
            dirs.push(prev);
            for _ in 1..n_hops {
                let w = vmf_cosine(*kappa, rng);
                prev = super::kernel::rotate_about(prev, w, rng);
                dirs.push(prev);
            }
        }
        DirectedKernel::Circle { table } => {
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut theta = two_pi * uniform_01(rng);
            let (s, c) = theta.sin_cos();
            dirs.push([c, s, 0.0]);
            for _ in 1..n_hops {
                theta = (theta + table.sample(rng)).rem_euclid(two_pi);
                let (s, c) = theta.sin_cos();
                dirs.push([c, s, 0.0]);
            }
        }
    }
    dirs
}

/// Deterministic optimal-strategy path: identical hops of length `a` straight
/// at the destination, hop count rounded up so the chain covers the distance.
///
/// The last hop overshoots a non-integer remainder; the source-to-destination
/// distance d then satisfies d / (N a) in (1 - a/L, 1].
pub fn ors_path(
    source: [f64; 3],
    destination: [f64; 3],
    step_length: f64,
) -> Result<RoutePath, PathModelError> {
    if !(step_length > 0.0 && step_length.is_finite()) {
        return Err(PathModelError::NonPositiveStep(step_length));
    }
    let delta = [
        destination[0] - source[0],
        destination[1] - source[1],
        destination[2] - source[2],
    ];
    let dist = norm(delta);
    if dist == 0.0 {
        return Err(PathModelError::CoincidentEndpoints);
    }
    let ratio = dist / step_length;
    // absorb float fuzz before rounding up so d = k a gives exactly k hops
    let n_hops = ((ratio - 1e-9 * ratio.max(1.0)).ceil() as usize).max(1);
    let dir = normalize(delta);
    let dim = if delta[2] == 0.0 && source[2] == 0.0 && destination[2] == 0.0 {
        Dim::Two
    } else {
        Dim::Three
    };
    Ok(RoutePath::from_unit_directions(
        vec![dir; n_hops],
        step_length,
        dim,
    ))
}

/// End-to-end distance of one sampled chain, without materializing the path.
fn sample_distance<R: RngCore>(
    params: &StrategyParams,
    kernel: Option<&DirectedKernel>,
    n_hops: usize,
    rng: &mut R,
) -> f64 {
    let a = params.step_length;
    match (params.kind, kernel) {
        (StrategyKind::Ors, _) => n_hops as f64 * a,
        (StrategyKind::Rrs, _) | (StrategyKind::Drs, Some(DirectedKernel::Uniform)) => {
            let mut sum = [0.0; 3];
            for _ in 0..n_hops {
                let d = uniform_direction(params.dimension, rng);
                sum[0] += d[0];
                sum[1] += d[1];
                sum[2] += d[2];
            }
            a * norm(sum)
        }
        (StrategyKind::Drs, Some(DirectedKernel::Sphere { kappa })) => {
            let mut prev = uniform_direction(Dim::Three, rng);
            let mut sum = prev;
            for _ in 1..n_hops {
                let w = vmf_cosine(*kappa, rng);
                prev = super::kernel::rotate_about(prev, w, rng);
                sum[0] += prev[0];
                sum[1] += prev[1];
                sum[2] += prev[2];
            }
            a * norm(sum)
        }
        (StrategyKind::Drs, Some(DirectedKernel::Circle { table })) => {
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut theta = two_pi * uniform_01(rng);
            let (mut sx, mut sy) = (theta.cos(), theta.sin());
            for _ in 1..n_hops {
                theta = (theta + table.sample(rng)).rem_euclid(two_pi);
                sx += theta.cos();
                sy += theta.sin();
            }
            a * (sx * sx + sy * sy).sqrt()
        }
        (StrategyKind::Drs, None) => unreachable!("DRS requires a kernel"),
    }
}

fn build_kernel(params: &StrategyParams) -> Option<DirectedKernel> {
    match params.kind {
        StrategyKind::Drs => Some(DirectedKernel::new(
            params.dimension,
            params.step_length,
            params.persistence_radius,
        )),
        _ => None,
    }
}

/// Generate a seeded ensemble of end-to-end distances.
///
/// Sample `i` draws from the stream `(seed, i)`, so the result is independent
/// of worker count and scheduling; generation runs on the current rayon pool.
pub fn sample_ensemble(
    params: &StrategyParams,
    n_hops: usize,
    n_samples: usize,
    seed: u64,
) -> Result<SampleEnsemble, PathModelError> {
    params.validate()?;
    check_hops_and_step(n_hops, params.step_length)?;
    let kernel = build_kernel(params);
    let distances: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, domain::PATH_SAMPLE, i as u64);
            sample_distance(params, kernel.as_ref(), n_hops, &mut rng)
        })
        .collect();
    debug_assert!(distances
        .iter()
        .all(|&r| r >= 0.0 && r <= n_hops as f64 * params.step_length * (1.0 + 1e-12)));
    Ok(SampleEnsemble {
        params: *params,
        n_hops,
        seed,
        distances,
        paths: None,
    })
}

/// Like [`sample_ensemble`], additionally retaining each full [`RoutePath`].
///
/// Distances are bit-identical to the distance-only generator for the same
/// `(params, n_hops, seed)`.
pub fn sample_ensemble_with_paths(
    params: &StrategyParams,
    n_hops: usize,
    n_samples: usize,
    seed: u64,
) -> Result<SampleEnsemble, PathModelError> {
    params.validate()?;
    check_hops_and_step(n_hops, params.step_length)?;
    let kernel = build_kernel(params);
    let generated: Vec<(f64, RoutePath)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, domain::PATH_SAMPLE, i as u64);
            let dirs: Vec<[f64; 3]> = match params.kind {
                StrategyKind::Ors => {
                    let dir = uniform_direction(params.dimension, &mut rng);
                    vec![dir; n_hops]
                }
                StrategyKind::Rrs => (0..n_hops)
                    .map(|_| uniform_direction(params.dimension, &mut rng))
                    .collect(),
                StrategyKind::Drs => drs_directions(
                    kernel.as_ref().expect("DRS kernel"),
                    n_hops,
                    params.dimension,
                    &mut rng,
                ),
            };
            // accumulate before scaling so the value is bit-identical to the
            // distance-only generator
            let distance = match params.kind {
                StrategyKind::Ors => n_hops as f64 * params.step_length,
                _ => {
                    let mut sum = [0.0; 3];
                    for d in &dirs {
                        sum[0] += d[0];
                        sum[1] += d[1];
                        sum[2] += d[2];
                    }
                    params.step_length * norm(sum)
                }
            };
            let path = RoutePath::from_unit_directions(dirs, params.step_length, params.dimension);
            (distance, path)
        })
        .collect();
    let mut distances = Vec::with_capacity(n_samples);
    let mut paths = Vec::with_capacity(n_samples);
    for (distance, path) in generated {
        distances.push(distance);
        paths.push(path);
    }
    Ok(SampleEnsemble {
        params: *params,
        n_hops,
        seed,
        distances,
        paths: Some(paths),
    })
}

/// Mean tangent correlation `< u_n . u_{n+k} >` for lags `k = 1..=max_lag`,
/// averaged over hop positions and samples.
///
/// For the directed strategy this decays as `exp(-k a / xi)`.
pub fn tangent_autocorrelation(
    params: &StrategyParams,
    n_hops: usize,
    max_lag: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>, PathModelError> {
    params.validate()?;
    check_hops_and_step(n_hops, params.step_length)?;
    assert!(max_lag >= 1 && max_lag < n_hops);
    let kernel = build_kernel(params);
    let per_sample: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, domain::PATH_SAMPLE, i as u64);
            let dirs = match params.kind {
                StrategyKind::Drs => drs_directions(
                    kernel.as_ref().expect("DRS kernel"),
                    n_hops,
                    params.dimension,
                    &mut rng,
                ),
                _ => (0..n_hops)
                    .map(|_| uniform_direction(params.dimension, &mut rng))
                    .collect(),
            };
            let mut sums = vec![0.0; max_lag];
            for (lag_idx, sum) in sums.iter_mut().enumerate() {
                let k = lag_idx + 1;
                let mut acc = 0.0;
                for n in 0..n_hops - k {
                    acc += super::dot(dirs[n], dirs[n + k]);
                }
                *sum = acc / (n_hops - k) as f64;
            }
            sums
        })
        .collect();
    // serial reduction in sample order keeps the result thread-count independent
    let mut mean = vec![0.0; max_lag];
    for sums in &per_sample {
        for (m, s) in mean.iter_mut().zip(sums) {
            *m += s;
        }
    }
    for m in mean.iter_mut() {
        *m /= n_samples as f64;
    }
    Ok(mean)
}
