//! Empirical end-to-end distributions, moments with uncertainty, persistence
//! and effective radius recovery, critical-exponent fits, and two-sample
//! Kolmogorov-Smirnov comparison.
//!
//! All transformations are pure over immutable sample arrays; bootstrap
//! resampling uses the same counter-based streams as the path samplers.

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::drs_second_moment;
use crate::numeric::{kolmogorov_sf, quantile_sorted};
use crate::rng::{domain, stream_rng, uniform_index};

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("input sample set is empty")]
    EmptyInput,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("distance {value} outside [0, {max}]")]
    DistanceOutOfRange { value: f64, max: f64 },
    #[error("histogram needs at least 2 bins, got {0}")]
    InvalidBinCount(usize),
    #[error("contour length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("moment order {0} not supported (orders 0..=4)")]
    UnsupportedOrder(usize),
    #[error("moment set does not contain order {0}")]
    MissingMomentOrder(usize),
    #[error("second moment {m2} admits no persistence radius below L^2 = {l2}")]
    BallisticSaturation { m2: f64, l2: f64 },
    #[error("second moment must be positive, got {0}")]
    NonPositiveMoment(f64),
    #[error("power-law fit needs {need} positive points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("fit input must be positive, got {0}")]
    NonPositiveFitValue(f64),
    #[error("fit abscissae must span at least a decade and be distinct")]
    DegenerateRange,
}

/// Empirical end-to-end distribution over the normalized radius R/L.
#[derive(Debug, Clone)]
pub struct RadialHistogram {
    bin_edges: Vec<f64>,
    density: Vec<f64>,
    stderr: Vec<f64>,
    sample_count: usize,
    contour_length: f64,
    mean_normalized: f64,
}

impl RadialHistogram {
    /// Ascending normalized bin edges (length bins + 1).
    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    /// Per-bin density, normalized so sum(density * width) = 1.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Per-bin binomial standard error of the density.
    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn contour_length(&self) -> f64 {
        self.contour_length
    }

    /// Mean of R/L over the raw (unbinned) sample.
    pub fn mean_normalized(&self) -> f64 {
        self.mean_normalized
    }

    /// Center of the highest-density bin (lowest bin on ties).
    pub fn mode_bin_center(&self) -> f64 {
        let mut best = 0;
        for (i, &d) in self.density.iter().enumerate() {
            if d > self.density[best] {
                best = i;
            }
        }
        0.5 * (self.bin_edges[best] + self.bin_edges[best + 1])
    }
}

/// Histogram of end-to-end distances over R/L in [0, 1].
pub fn build_histogram(
    distances: &[f64],
    contour_length: f64,
    n_bins: usize,
) -> Result<RadialHistogram, EstimationError> {
    if distances.is_empty() {
        return Err(EstimationError::EmptyInput);
    }
    if n_bins < 2 {
        return Err(EstimationError::InvalidBinCount(n_bins));
    }
    if !(contour_length > 0.0 && contour_length.is_finite()) {
        return Err(EstimationError::NonPositiveLength(contour_length));
    }
    let max_allowed = contour_length * (1.0 + 1e-9);
    let mut counts = vec![0usize; n_bins];
    let mut sum_normalized = 0.0;
    for &r in distances {
        if !(0.0..=max_allowed).contains(&r) {
            return Err(EstimationError::DistanceOutOfRange {
                value: r,
                max: max_allowed,
            });
        }
        let x = r / contour_length;
        sum_normalized += x;
        let idx = ((x * n_bins as f64) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let n = distances.len() as f64;
    let width = 1.0 / n_bins as f64;
    let mut density = Vec::with_capacity(n_bins);
    let mut stderr = Vec::with_capacity(n_bins);
    for &c in &counts {
        let p = c as f64 / n;
        density.push(p / width);
        stderr.push((p * (1.0 - p) / n).sqrt() / width);
    }
    let bin_edges = (0..=n_bins).map(|i| i as f64 * width).collect();
    Ok(RadialHistogram {
        bin_edges,
        density,
        stderr,
        sample_count: distances.len(),
        contour_length,
        mean_normalized: sum_normalized / n,
    })
}

/// Even moments < R^{2l} > with bootstrap confidence intervals.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub orders: Vec<usize>,
    pub empirical: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub analytic: Vec<Option<f64>>,
}

impl MomentSet {
    pub fn order_index(&self, l: usize) -> Option<usize> {
        self.orders.iter().position(|&o| o == l)
    }

    /// Fill the analytic column from a per-order closed form.
    pub fn attach_analytic<F: Fn(usize) -> Option<f64>>(&mut self, f: F) {
        for (i, &l) in self.orders.iter().enumerate() {
            self.analytic[i] = f(l);
        }
    }
}

/// Plug-in estimates of < R^{2l} > with percentile-bootstrap 95% intervals.
///
/// Requires at least 100 samples; orders are limited to 0..=4 and order 0
/// returns exactly one with a zero-width interval. Replicate `b` resamples
/// through the stream `(seed, b)`.
pub fn estimate_moments(
    distances: &[f64],
    orders: &[usize],
    n_bootstrap: usize,
    seed: u64,
) -> Result<MomentSet, EstimationError> {
    if distances.is_empty() {
        return Err(EstimationError::EmptyInput);
    }
    if distances.len() < 100 {
        return Err(EstimationError::TooFewSamples {
            got: distances.len(),
            need: 100,
        });
    }
    if let Some(&bad) = orders.iter().find(|&&l| l > 4) {
        return Err(EstimationError::UnsupportedOrder(bad));
    }
    let r2: Vec<f64> = distances.iter().map(|&r| r * r).collect();
    let n = r2.len();
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let point = |sample: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut sums = vec![0.0f64; max_order + 1];
        for i in 0..n {
            let x = sample(i);
            let mut p = 1.0;
            sums[0] += 1.0;
            for s in sums.iter_mut().skip(1) {
                p *= x;
                *s += p;
            }
        }
        sums.iter().map(|s| s / n as f64).collect()
    };
    let empirical_all = point(&|i| r2[i]);
    let replicates: Vec<Vec<f64>> = (0..n_bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, domain::BOOTSTRAP, b as u64);
            let mut sums = vec![0.0f64; max_order + 1];
            for _ in 0..n {
                let x = r2[uniform_index(&mut rng, n)];
                let mut p = 1.0;
                sums[0] += 1.0;
                for s in sums.iter_mut().skip(1) {
                    p *= x;
                    *s += p;
                }
            }
            sums.iter().map(|s| s / n as f64).collect()
        })
        .collect();
    let mut empirical = Vec::with_capacity(orders.len());
    let mut ci_low = Vec::with_capacity(orders.len());
    let mut ci_high = Vec::with_capacity(orders.len());
    for &l in orders {
        if l == 0 {
            empirical.push(1.0);
            ci_low.push(1.0);
            ci_high.push(1.0);
            continue;
        }
        empirical.push(empirical_all[l]);
        if n_bootstrap == 0 {
            ci_low.push(empirical_all[l]);
            ci_high.push(empirical_all[l]);
        } else {
            let mut reps: Vec<f64> = replicates.iter().map(|r| r[l]).collect();
            reps.sort_by(f64::total_cmp);
            ci_low.push(quantile_sorted(&reps, 0.025));
            ci_high.push(quantile_sorted(&reps, 0.975));
        }
    }
    Ok(MomentSet {
        orders: orders.to_vec(),
        empirical,
        ci_low,
        ci_high,
        analytic: vec![None; orders.len()],
    })
}

/// Persistence radius recovered from a measured second moment.
#[derive(Debug, Clone, Copy)]
pub struct RecoveredRadius {
    pub xi_hat: f64,
    pub a_eff_hat: f64,
    /// True when the moment sits so close to the ballistic ceiling L^2 that
    /// the inversion hит the top of its bracket; xi_hat is then a floor.
    pub saturated: bool,
}

/// Upper end of the inversion bracket, in units of L.
const XI_BRACKET_FACTOR: f64 = 1e3;

/// Invert < R^2 > = 2 [ xi L - xi^2 (1 - e^{-L/xi}) ] for xi by bisection.
///
/// The map xi -> < R^2 > is strictly increasing, so bisection on
/// (0, 1000 L] is safe; tolerance 1e-10 relative.
pub fn recover_from_second_moment(
    m2: f64,
    contour_length: f64,
) -> Result<RecoveredRadius, EstimationError> {
    if !(contour_length > 0.0 && contour_length.is_finite()) {
        return Err(EstimationError::NonPositiveLength(contour_length));
    }
    if !(m2 > 0.0) {
        return Err(EstimationError::NonPositiveMoment(m2));
    }
    let l2 = contour_length * contour_length;
    if m2 >= l2 {
        return Err(EstimationError::BallisticSaturation { m2, l2 });
    }
    let eval = |xi: f64| drs_second_moment(contour_length, xi).expect("valid xi");
    let hi = XI_BRACKET_FACTOR * contour_length;
    if m2 >= eval(hi) {
        return Ok(RecoveredRadius {
            xi_hat: hi,
            a_eff_hat: 2.0 * hi,
            saturated: true,
        });
    }
    let mut lo = 0.0;
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < m2 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * hi.max(1e-300) {
            break;
        }
    }
    let xi_hat = 0.5 * (lo + hi);
    Ok(RecoveredRadius {
        xi_hat,
        a_eff_hat: 2.0 * xi_hat,
        saturated: false,
    })
}

/// Recover (xi, a_eff) from the order-1 entry of a [`MomentSet`].
pub fn recover_persistence_radius(
    moments: &MomentSet,
    contour_length: f64,
) -> Result<RecoveredRadius, EstimationError> {
    let idx = moments
        .order_index(1)
        .ok_or(EstimationError::MissingMomentOrder(1))?;
    recover_from_second_moment(moments.empirical[idx], contour_length)
}

/// Ordinary least-squares power-law fit y = c x^beta on log-log axes.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub log_intercept: f64,
}

/// Least-squares slope of log y against log x.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<PowerLawFit, EstimationError> {
    if points.len() < 2 {
        return Err(EstimationError::TooFewPoints {
            got: points.len(),
            need: 2,
        });
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(EstimationError::NonPositiveFitValue(if x > 0.0 {
                y
            } else {
                x
            }));
        }
        logs.push((x.ln(), y.ln()));
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(EstimationError::DegenerateRange);
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let sst: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let stderr = if logs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    Ok(PowerLawFit {
        exponent: slope,
        stderr,
        r_squared,
        log_intercept: intercept,
    })
}

/// Fitted critical exponent nu from < R^2 >(L) ~ (a L)^{2 nu}.
#[derive(Debug, Clone, Copy)]
pub struct ExponentFit {
    pub nu_hat: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub fit_range: (f64, f64),
    /// Set when nu_hat falls outside the [0.4, 1.1] band this artifact's
    /// samplers can produce; the fit is still returned.
    pub flagged: bool,
}

/// Least-squares fit of log < R^2 > = const + 2 nu log L.
///
/// Requires at least four distinct contour lengths spanning a decade.
pub fn fit_critical_exponent(
    per_length_moments: &[(f64, f64)],
) -> Result<ExponentFit, EstimationError> {
    if per_length_moments.len() < 4 {
        return Err(EstimationError::TooFewPoints {
            got: per_length_moments.len(),
            need: 4,
        });
    }
    let mut lengths: Vec<f64> = per_length_moments.iter().map(|p| p.0).collect();
    lengths.sort_by(f64::total_cmp);
    lengths.dedup();
    if lengths.len() < 4 {
        return Err(EstimationError::DegenerateRange);
    }
    let (min_l, max_l) = (lengths[0], lengths[lengths.len() - 1]);
    if !(min_l > 0.0) || max_l / min_l < 10.0 {
        return Err(EstimationError::DegenerateRange);
    }
    let fit = fit_log_log(per_length_moments)?;
    let nu_hat = fit.exponent / 2.0;
    Ok(ExponentFit {
        nu_hat,
        stderr: fit.stderr / 2.0,
        r_squared: fit.r_squared,
        fit_range: (min_l, max_l),
        flagged: !(0.4..=1.1).contains(&nu_hat),
    })
}

/// Two-sample Kolmogorov-Smirnov comparison.
#[derive(Debug, Clone, Copy)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample KS statistic with the asymptotic p-value.
pub fn ks_distance(sample_a: &[f64], sample_b: &[f64]) -> Result<KsTest, EstimationError> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(EstimationError::EmptyInput);
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        let xa = a[i];
        let xb = b[j];
        let x = xa.min(xb);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain as rng_domain, stream_rng, uniform_01};

    #[test]
    fn histogram_all_mass_in_last_bin_for_ors() {
        let distances = vec![10.0; 500];
        let h = build_histogram(&distances, 10.0, 50).unwrap();
        assert_eq!(h.sample_count(), 500);
        let total: f64 = h
            .density()
            .iter()
            .zip(h.bin_edges().windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!((h.mode_bin_center() - 0.99).abs() < 1e-12);
        assert_eq!(h.density()[49], 50.0);
        assert!(h.density()[..49].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn histogram_mass_and_errors() {
        let mut rng = stream_rng(5, rng_domain::TEST, 0);
        let distances: Vec<f64> = (0..10_000).map(|_| 10.0 * uniform_01(&mut rng)).collect();
        let h = build_histogram(&distances, 10.0, 25).unwrap();
        let total: f64 = h
            .density()
            .iter()
            .zip(h.bin_edges().windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(h.density().iter().all(|&d| d >= 0.0));
        // uniform sample: every bin within 5 binomial sigma of density 1
        for (d, s) in h.density().iter().zip(h.stderr()) {
            assert!((d - 1.0).abs() < 5.0 * s);
        }
        assert!((h.mean_normalized() - 0.5).abs() < 0.02);
    }

    #[test]
    fn histogram_error_paths() {
        assert!(matches!(
            build_histogram(&[], 1.0, 10),
            Err(EstimationError::EmptyInput)
        ));
        assert!(matches!(
            build_histogram(&[0.5], 1.0, 1),
            Err(EstimationError::InvalidBinCount(1))
        ));
        assert!(matches!(
            build_histogram(&[1.5], 1.0, 10),
            Err(EstimationError::DistanceOutOfRange { .. })
        ));
        assert!(matches!(
            build_histogram(&[-0.1], 1.0, 10),
            Err(EstimationError::DistanceOutOfRange { .. })
        ));
        // boundary tolerance: distances exactly at L land in the last bin
        let h = build_histogram(&[1.0, 1.0 + 5e-10], 1.0, 10).unwrap();
        assert_eq!(h.density()[9], 10.0);
    }

    #[test]
    fn moments_of_constant_sample() {
        let distances = vec![2.0; 200];
        let ms = estimate_moments(&distances, &[0, 1, 2], 50, 3).unwrap();
        assert_eq!(ms.empirical[0], 1.0);
        assert_eq!(ms.ci_low[0], 1.0);
        assert_eq!(ms.ci_high[0], 1.0);
        assert!((ms.empirical[1] - 4.0).abs() < 1e-12);
        assert!((ms.empirical[2] - 16.0).abs() < 1e-12);
        assert!((ms.ci_low[1] - 4.0).abs() < 1e-12);
        assert!((ms.ci_high[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn moments_guard_rails() {
        assert!(matches!(
            estimate_moments(&[], &[1], 10, 0),
            Err(EstimationError::EmptyInput)
        ));
        let few = vec![1.0; 50];
        assert!(matches!(
            estimate_moments(&few, &[1], 10, 0),
            Err(EstimationError::TooFewSamples { .. })
        ));
        let ok = vec![1.0; 100];
        assert!(matches!(
            estimate_moments(&ok, &[5], 10, 0),
            Err(EstimationError::UnsupportedOrder(5))
        ));
    }

    #[test]
    fn moments_bootstrap_is_seed_deterministic() {
        let mut rng = stream_rng(6, rng_domain::TEST, 1);
        let distances: Vec<f64> = (0..500).map(|_| 1.0 + uniform_01(&mut rng)).collect();
        let a = estimate_moments(&distances, &[1, 2], 200, 11).unwrap();
        let b = estimate_moments(&distances, &[1, 2], 200, 11).unwrap();
        assert_eq!(a.ci_low, b.ci_low);
        assert_eq!(a.ci_high, b.ci_high);
        let c = estimate_moments(&distances, &[1, 2], 200, 12).unwrap();
        assert_ne!(a.ci_low, c.ci_low);
        assert!(a.ci_low[0] <= a.empirical[0] && a.empirical[0] <= a.ci_high[0]);
    }

    #[test]
    fn recovery_round_trip() {
        let m2 = drs_second_moment(10.0, 1.0).unwrap();
        let rec = recover_from_second_moment(m2, 10.0).unwrap();
        assert!((rec.xi_hat - 1.0).abs() < 1e-6, "xi_hat={}", rec.xi_hat);
        assert!((rec.a_eff_hat - 2.0).abs() < 2e-6);
        assert!(!rec.saturated);
        for &xi in &[0.01, 0.3, 7.0, 200.0] {
            let m2 = drs_second_moment(10.0, xi).unwrap();
            let rec = recover_from_second_moment(m2, 10.0).unwrap();
            assert!(
                (rec.xi_hat - xi).abs() < 1e-6 * xi.max(1.0),
                "xi={xi} got={}",
                rec.xi_hat
            );
        }
    }

    #[test]
    fn recovery_saturation_and_errors() {
        let l = 10.0;
        assert!(matches!(
            recover_from_second_moment(100.0, l),
            Err(EstimationError::BallisticSaturation { .. })
        ));
        assert!(matches!(
            recover_from_second_moment(120.0, l),
            Err(EstimationError::BallisticSaturation { .. })
        ));
        assert!(matches!(
            recover_from_second_moment(0.0, l),
            Err(EstimationError::NonPositiveMoment(_))
        ));
        // just below the ceiling: returned with the saturation warning
        let rec = recover_from_second_moment(l * l * (1.0 - 1e-9), l).unwrap();
        assert!(rec.saturated);
        assert!(rec.xi_hat >= 100.0 * l);
    }

    #[test]
    fn recovery_from_moment_set() {
        let distances = vec![2.0; 200];
        let mut ms = estimate_moments(&distances, &[0, 1], 10, 0).unwrap();
        ms.empirical[1] = drs_second_moment(10.0, 0.5).unwrap();
        let rec = recover_persistence_radius(&ms, 10.0).unwrap();
        assert!((rec.xi_hat - 0.5).abs() < 1e-6);
        let no_order = estimate_moments(&distances, &[0], 10, 0).unwrap();
        assert!(matches!(
            recover_persistence_radius(&no_order, 10.0),
            Err(EstimationError::MissingMomentOrder(1))
        ));
    }

    #[test]
    fn exponent_fit_recovers_synthetic_laws() {
        // <R^2> = a L exactly: nu = 1/2
        let diffusive: Vec<(f64, f64)> = [10.0, 50.0, 200.0, 1000.0]
            .iter()
            .map(|&l| (l, 2.5 * l))
            .collect();
        let fit = fit_critical_exponent(&diffusive).unwrap();
        assert!((fit.nu_hat - 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(!fit.flagged);
        assert_eq!(fit.fit_range, (10.0, 1000.0));
        // <R^2> = L^2 exactly: nu = 1
        let ballistic: Vec<(f64, f64)> = [10.0, 50.0, 200.0, 1000.0]
            .iter()
            .map(|&l| (l, l * l))
            .collect();
        let fit = fit_critical_exponent(&ballistic).unwrap();
        assert!((fit.nu_hat - 1.0).abs() < 1e-12);
        // out-of-band exponent is flagged, not rejected
        let weird: Vec<(f64, f64)> = [10.0f64, 50.0, 200.0, 1000.0]
            .iter()
            .map(|&l| (l, l.powf(3.0)))
            .collect();
        assert!(fit_critical_exponent(&weird).unwrap().flagged);
    }

    #[test]
    fn exponent_fit_guard_rails() {
        let three: Vec<(f64, f64)> = vec![(1.0, 1.0), (10.0, 2.0), (100.0, 3.0)];
        assert!(matches!(
            fit_critical_exponent(&three),
            Err(EstimationError::TooFewPoints { .. })
        ));
        let narrow: Vec<(f64, f64)> = vec![(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)];
        assert!(matches!(
            fit_critical_exponent(&narrow),
            Err(EstimationError::DegenerateRange)
        ));
        let negative: Vec<(f64, f64)> = vec![(1.0, 1.0), (10.0, -2.0), (100.0, 3.0), (1000.0, 4.0)];
        assert!(matches!(
            fit_critical_exponent(&negative),
            Err(EstimationError::NonPositiveFitValue(_))
        ));
    }

    #[test]
    fn log_log_fit_noise_free_slope() {
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|i| {
                let x = 2.0f64.powi(i);
                (x, 3.0 * x.powf(0.77))
            })
            .collect();
        let fit = fit_log_log(&pts).unwrap();
        assert!((fit.exponent - 0.77).abs() < 1e-12);
        assert!((fit.log_intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let ks = ks_distance(&a, &a).unwrap();
        assert_eq!(ks.statistic, 0.0);
        assert!(ks.p_value > 0.99);
        let b = vec![10.0, 11.0, 12.0];
        let ks = ks_distance(&a, &b).unwrap();
        assert_eq!(ks.statistic, 1.0);
        assert!(matches!(
            ks_distance(&[], &a),
            Err(EstimationError::EmptyInput)
        ));
    }

    #[test]
    fn ks_same_law_passes() {
        let mut rng = stream_rng(7, rng_domain::TEST, 2);
        let a: Vec<f64> = (0..10_000).map(|_| uniform_01(&mut rng)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| uniform_01(&mut rng)).collect();
        let ks = ks_distance(&a, &b).unwrap();
        assert!(ks.p_value > 0.01, "p={}", ks.p_value);
        // shifted law is detected
        let c: Vec<f64> = a.iter().map(|&x| x + 0.1).collect();
        let ks = ks_distance(&a, &c).unwrap();
        assert!(ks.p_value < 1e-6);
    }
}
