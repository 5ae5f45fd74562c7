//! Distribution-level invariants of the samplers and estimators: isotropy,
//! per-component step variance, Gaussian convergence, zero-stiffness
//! equivalence, bootstrap coverage, and round-trip identifiability.

use rand_core::RngCore;
use routechain::analytics::gaussian_rrs_density;
use routechain::estimation::{estimate_moments, ks_distance, recover_from_second_moment};
use routechain::numeric::mean_and_variance;
use routechain::pathmodel::{
    sample_ensemble, sample_ensemble_with_paths, sample_rrs_path, Dim, StrategyKind, StrategyParams,
};
use routechain::rng::{domain, stream_rng, uniform_01, uniform_open01};

#[test]
fn per_component_step_variance_is_a2_over_3() {
    // 3D unit steps: each Cartesian component has mean square a^2/3
    let a = 0.7;
    let mut rng = stream_rng(301, domain::TEST, 0);
    let path = sample_rrs_path(100_000, a, Dim::Three, &mut rng).unwrap();
    for component in 0..3 {
        let squares: Vec<f64> = path
            .steps()
            .iter()
            .map(|s| s[component] * s[component])
            .collect();
        let (mean, var) = mean_and_variance(&squares);
        let se = (var / squares.len() as f64).sqrt();
        let expect = a * a / 3.0;
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "component {component}: mean={mean} expect={expect} se={se}"
        );
    }
}

#[test]
fn mean_end_to_end_vector_vanishes() {
    // isotropy: every component of the mean end-to-end vector is within
    // three standard errors of zero, for both stochastic strategies
    for &(kind, xi, seed) in &[
        (StrategyKind::Rrs, 0.0, 302u64),
        (StrategyKind::Drs, 2.0, 303),
    ] {
        let params = StrategyParams::new(kind, Dim::Three, 1.0).with_persistence(xi);
        let ensemble = sample_ensemble_with_paths(&params, 50, 20_000, seed).unwrap();
        let paths = ensemble.paths.as_ref().unwrap();
        for component in 0..3 {
            let values: Vec<f64> = paths
                .iter()
                .map(|p| p.end_to_end_vector()[component])
                .collect();
            let (mean, var) = mean_and_variance(&values);
            let se = (var / values.len() as f64).sqrt();
            assert!(
                mean.abs() < 3.0 * se,
                "{kind:?} component {component}: mean={mean} se={se}"
            );
        }
    }
}

#[test]
fn zero_stiffness_directed_equals_random() {
    // xi = 0 makes the directed sampler the random one in law
    for dim in [Dim::Two, Dim::Three] {
        let rrs = StrategyParams::new(StrategyKind::Rrs, dim, 1.0);
        let drs = StrategyParams::new(StrategyKind::Drs, dim, 1.0).with_persistence(0.0);
        let a = sample_ensemble(&rrs, 100, 10_000, 304).unwrap();
        let b = sample_ensemble(&drs, 100, 10_000, 305).unwrap();
        let ks = ks_distance(&a.distances, &b.distances).unwrap();
        assert!(ks.p_value > 0.01, "dim={dim:?} p={}", ks.p_value);
    }
}

#[test]
fn gaussian_minus_exact_sup_distance_shrinks_with_hops() {
    // sup-norm distance of the radial pdfs decreases monotonically in N
    let mut distances = Vec::new();
    for &n in &[5usize, 10, 20, 40] {
        let exact = routechain::analytics::ExactRrsDensity::new(n, 1.0).unwrap();
        let mut sup = 0.0f64;
        for i in 0..=300 {
            let r = n as f64 * i as f64 / 300.0;
            let f_exact = exact.radial_pdf(r).unwrap();
            let f_gauss = 4.0
                * std::f64::consts::PI
                * r
                * r
                * gaussian_rrs_density(r, n as f64, 1.0, Dim::Three).unwrap();
            sup = sup.max((f_exact - f_gauss).abs());
        }
        distances.push((n, sup));
    }
    for pair in distances.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "sup distance not decreasing: {distances:?}"
        );
    }
}

/// Standard normal via Box-Muller over a counter-based stream.
fn normal_pair<R: RngCore>(rng: &mut R) -> (f64, f64) {
    let u = uniform_open01(rng);
    let v = uniform_01(rng);
    let radius = (-2.0 * u.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * v;
    (radius * angle.cos(), radius * angle.sin())
}

#[test]
fn bootstrap_intervals_cover_known_truth() {
    // synthetic 3D Gaussian ensembles with <R^2> = 3: the 95% interval
    // must cover the truth in 93..=97% of 500 repetitions
    let reps = 500;
    let n = 1000;
    let mut covered = 0;
    for rep in 0..reps {
        let mut rng = stream_rng(306, domain::TEST, rep as u64);
        let distances: Vec<f64> = (0..n)
            .map(|_| {
                let (x, y) = normal_pair(&mut rng);
                let (z, _) = normal_pair(&mut rng);
                (x * x + y * y + z * z).sqrt()
            })
            .collect();
        let moments = estimate_moments(&distances, &[1], 300, 307 + rep as u64).unwrap();
        if moments.ci_low[0] <= 3.0 && 3.0 <= moments.ci_high[0] {
            covered += 1;
        }
    }
    let rate = covered as f64 / reps as f64;
    assert!(
        (0.93..=0.97).contains(&rate),
        "coverage {covered}/{reps} = {rate}"
    );
}

#[test]
fn random_strategy_histogram_concentrates_at_small_r() {
    // diffusive chains: mass concentrated at small R/L, mode below 0.2
    let params = StrategyParams::new(StrategyKind::Rrs, Dim::Three, 1.0);
    let ensemble = sample_ensemble(&params, 1000, 20_000, 319).unwrap();
    let hist =
        routechain::estimation::build_histogram(&ensemble.distances, ensemble.contour_length(), 50)
            .unwrap();
    assert!(
        hist.mode_bin_center() < 0.2,
        "mode {}",
        hist.mode_bin_center()
    );
    assert!(hist.mean_normalized() < 0.1);
}

#[test]
fn bootstrap_interval_covers_chain_moment_across_runs() {
    // repeated sampled ensembles: the 95% interval for <R^2> contains the
    // true N a^2 in at least 90% of runs
    let runs = 40;
    let mut covered = 0;
    for run in 0..runs {
        let params = StrategyParams::new(StrategyKind::Rrs, Dim::Three, 1.0);
        let ensemble = sample_ensemble(&params, 1000, 400, 320 + run as u64).unwrap();
        let moments = estimate_moments(&ensemble.distances, &[1], 300, 360 + run as u64).unwrap();
        if moments.ci_low[0] <= 1000.0 && 1000.0 <= moments.ci_high[0] {
            covered += 1;
        }
    }
    assert!(
        covered * 10 >= runs * 9,
        "interval covered truth in {covered}/{runs} runs"
    );
}

#[test]
fn persistence_recovery_round_trip_from_samples() {
    // sample at known xi, recover within 5% (xi/L <= 0.1 regime)
    let contour = 10.0;
    for &(xi, seed) in &[(0.5f64, 308u64), (1.0, 309)] {
        let a = xi / 5.0;
        let n_hops = (contour / a).round() as usize;
        let params = StrategyParams::new(StrategyKind::Drs, Dim::Three, a).with_persistence(xi);
        let ensemble = sample_ensemble(&params, n_hops, 100_000, seed).unwrap();
        let r2: Vec<f64> = ensemble.distances.iter().map(|r| r * r).collect();
        let (m2, _) = mean_and_variance(&r2);
        let recovered = recover_from_second_moment(m2, contour).unwrap();
        assert!(
            (recovered.xi_hat - xi).abs() / xi < 0.05,
            "xi={xi} got={}",
            recovered.xi_hat
        );
        assert!(!recovered.saturated);
    }
}

#[test]
fn histogram_sweep_means_order_with_stiffness() {
    // compressed stiffness sweep: mean R/L strictly increasing in xi/L
    let ratios = [0.01f64, 0.2, 2.0];
    let mut means = Vec::new();
    for (i, &ratio) in ratios.iter().enumerate() {
        let contour = 1.0;
        let n_hops = ((3.0 / ratio).ceil() as usize).max(200);
        let a = contour / n_hops as f64;
        let params = StrategyParams::new(StrategyKind::Drs, Dim::Three, a).with_persistence(ratio);
        let ensemble = sample_ensemble(&params, n_hops, 20_000, 310 + i as u64).unwrap();
        let hist =
            routechain::estimation::build_histogram(&ensemble.distances, contour, 50).unwrap();
        means.push(hist.mean_normalized());
    }
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
}
