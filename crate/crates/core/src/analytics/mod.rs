//! Closed-form end-to-end densities, propagators, and moments.
//!
//! These are the analytic counterparts of the sampled ensembles in
//! [`crate::pathmodel`] and serve as the oracle the samplers are tested
//! against: the diffusive Gaussian kernel, the exact fixed-step random-flight
//! density, the Bernoulli-number moment series, the directed-strategy moment
//! formulas, the spectral propagator of hop directions, and the optimal
//! strategy's delta shell.

mod rayleigh;

pub use rayleigh::{exact_rrs_density, ExactRrsDensity};

use thiserror::Error;

use crate::numeric::legendre_p;
use crate::pathmodel::Dim;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("length parameter must be positive and finite, got {0}")]
    NonPositiveLength(f64),
    #[error("persistence radius must be nonnegative and finite, got {0}")]
    NegativePersistence(f64),
    #[error("radius must lie in [0, {max}], got {r}")]
    OutOfSupport { r: f64, max: f64 },
    #[error("moment order {0} exceeds the precomputed series limit 8")]
    MomentOrderTooLarge(usize),
    #[error("n_hops must be at least 1")]
    ZeroHops,
    #[error("cosine argument must lie in [-1, 1], got {0}")]
    CosineOutOfRange(f64),
    #[error("arc/persistence ratio {0:e} below the convergence floor 0.01")]
    ArcRatioTooSmall(f64),
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
}

fn check_positive(value: f64) -> Result<f64, AnalyticsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(AnalyticsError::NonPositiveLength(value))
    }
}

/// Normalized diffusion kernel for the random strategy at contour length L.
///
/// 3D: (3 / 2 pi L a)^{3/2} exp(-3 R^2 / 2 L a); 2D: (1 / pi L a)
/// exp(-R^2 / L a). Both integrate to one against the shell measure and have
/// second moment L a. Valid as a description of sampled chains when
/// R^2 << N a^2; the function itself is defined for all R >= 0.
pub fn gaussian_rrs_density(
    r: f64,
    contour_length: f64,
    step_length: f64,
    dimension: Dim,
) -> Result<f64, AnalyticsError> {
    let l = check_positive(contour_length)?;
    let a = check_positive(step_length)?;
    if r < 0.0 {
        return Err(AnalyticsError::NegativeRadius(r));
    }
    let la = l * a;
    let pi = std::f64::consts::PI;
    Ok(match dimension {
        Dim::Three => (3.0 / (2.0 * pi * la)).powf(1.5) * (-1.5 * r * r / la).exp(),
        Dim::Two => (1.0 / (pi * la)) * (-r * r / la).exp(),
    })
}

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact even moment < R^{2l} > of the fixed-step random strategy with
/// `n_hops` hops in 3D, from the Bernoulli-number partition sum over
/// integer compositions l = sum_i i m_i. (The order-1 moment N a^2 is
/// dimension-free; higher orders are specific to 3D.)
///
/// Implemented for moment orders l <= 8.
pub fn rrs_moment_exact(l: usize, n_hops: usize, step_length: f64) -> Result<f64, AnalyticsError> {
    if l > 8 {
        return Err(AnalyticsError::MomentOrderTooLarge(l));
    }
    if n_hops == 0 {
        return Err(AnalyticsError::ZeroHops);
    }
    let a = check_positive(step_length)?;
    if l == 0 {
        return Ok(1.0);
    }
    let n = n_hops as f64;
    // per-order factors N 2^{2i} (-1)^i B_{2i} / ((2i)! 2i)
    let factors: Vec<f64> = (1..=l)
        .map(|i| {
            let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
            n * 4.0f64.powi(i as i32) * sign * BERNOULLI_EVEN[i - 1]
                / (factorial(2 * i) * 2.0 * i as f64)
        })
        .collect();
    // enumerate multiplicities m_i with sum i m_i = l
    fn partition_sum(factors: &[f64], order: usize, remaining: usize) -> f64 {
        if order == 0 {
            return if remaining == 0 { 1.0 } else { 0.0 };
        }
        let mut total = 0.0;
        let mut power = 1.0;
        let mut m_factorial = 1.0;
        let mut m = 0;
        loop {
            total += power / m_factorial * partition_sum(factors, order - 1, remaining - m * order);
            m += 1;
            if m * order > remaining {
                break;
            }
            power *= factors[order - 1];
            m_factorial *= m as f64;
        }
        total
    }
    let sum = partition_sum(&factors, l, l);
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(a.powi(2 * l as i32) * sign * factorial(2 * l + 1) * sum)
}

/// Large-scale limit of the random-strategy moments:
/// < R^{2l} > = (2l+1)!!/3^l (a L)^l.
pub fn rrs_moment_limit(l: usize, contour_length: f64, step_length: f64) -> f64 {
    let mut double_factorial = 1.0;
    let mut k = 2 * l + 1;
    while k > 1 {
        double_factorial *= k as f64;
        k -= 2;
    }
    double_factorial / 3.0f64.powi(l as i32) * (step_length * contour_length).powi(l as i32)
}

/// Directed-strategy second moment
/// < R^2 > = 2 [ xi L - xi^2 (1 - e^{-L/xi}) ].
///
/// This is the continuum (a -> 0) expression; it tends to zero as xi -> 0 at
/// fixed L, whereas a chain with any finite step keeps < R^2 > = a L there —
/// callers wanting the random-strategy value at xi = 0 should use
/// [`rrs_moment_exact`] or [`rrs_moment_limit`].
pub fn drs_second_moment(contour_length: f64, xi: f64) -> Result<f64, AnalyticsError> {
    let l = check_positive(contour_length)?;
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(AnalyticsError::NegativePersistence(xi));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let x = l / xi;
    if x < 0.1 {
        // 2 xi^2 (x - 1 + e^{-x}) expanded to avoid cancellation
        let mut term = x * x / 2.0;
        let mut sum = term;
        for k in 3..30 {
            term *= -x / k as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        Ok(2.0 * xi * xi * sum)
    } else {
        Ok(2.0 * xi * (l - xi * (-(-x).exp_m1())))
    }
}

/// Directed-strategy fourth moment in the diffusive regime L/xi >> 1:
/// (20/3) xi^2 L^2 (1 - (52/15) xi/L).
///
/// Meaningful for L/xi >= 10 or so; see [`drs_fourth_moment_in_regime`].
pub fn drs_fourth_moment_asymptotic(contour_length: f64, xi: f64) -> Result<f64, AnalyticsError> {
    let l = check_positive(contour_length)?;
    let xi = check_positive(xi)?;
    Ok((20.0 / 3.0) * xi * xi * l * l * (1.0 - (52.0 / 15.0) * xi / l))
}

/// Whether `(contour_length, xi)` lies in the regime where
/// [`drs_fourth_moment_asymptotic`] is trustworthy.
pub fn drs_fourth_moment_in_regime(contour_length: f64, xi: f64) -> bool {
    xi > 0.0 && contour_length / xi >= 10.0
}

/// Effective radius of the directed strategy: the step size of the random
/// strategy that reproduces its large-scale moments, a_eff = 2 xi.
pub fn effective_radius(xi: f64) -> f64 {
    2.0 * xi
}

/// Moments of the optimal strategy: < R^n > = L^n (delta shell at R = L).
pub fn ors_moment(order: u32, contour_length: f64) -> f64 {
    contour_length.powi(order as i32)
}

/// Delta-shell end-to-end density of the optimal strategy.
///
/// All probability mass sits on the sphere R = L; the volume density is
/// delta(R - L) / (4 pi R^2), represented here through its CDF and moments.
#[derive(Debug, Clone, Copy)]
pub struct OrsDensity {
    pub contour_length: f64,
}

impl OrsDensity {
    pub fn new(contour_length: f64) -> Result<Self, AnalyticsError> {
        Ok(Self {
            contour_length: check_positive(contour_length)?,
        })
    }

    /// Radial CDF: a unit step at R = L.
    pub fn cdf(&self, r: f64) -> f64 {
        if r >= self.contour_length {
            1.0
        } else {
            0.0
        }
    }

    pub fn moment(&self, order: u32) -> f64 {
        ors_moment(order, self.contour_length)
    }
}

/// How a [`RadialDensity`] is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationKind {
    /// Gaussian over all of space (support truncated only by vanishing tails).
    FullSpaceGaussian,
    /// Exact density with compact support [0, N a].
    CompactSupportExact,
    /// Singular shell at R = L.
    DeltaShell,
}

/// A radial end-to-end density with its support and normalization contract.
#[derive(Debug, Clone)]
pub enum RadialDensity {
    Gaussian {
        contour_length: f64,
        step_length: f64,
        dimension: Dim,
    },
    Exact(ExactRrsDensity),
    Shell(OrsDensity),
}

impl RadialDensity {
    /// Density value at radius `r` (per volume in 3D, per area in 2D).
    pub fn evaluate(&self, r: f64) -> Result<f64, AnalyticsError> {
        match self {
            RadialDensity::Gaussian {
                contour_length,
                step_length,
                dimension,
            } => gaussian_rrs_density(r, *contour_length, *step_length, *dimension),
            RadialDensity::Exact(d) => d.density(r),
            RadialDensity::Shell(s) => {
                if r < 0.0 {
                    Err(AnalyticsError::NegativeRadius(r))
                } else if r == s.contour_length {
                    Ok(f64::INFINITY)
                } else {
                    Ok(0.0)
                }
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            RadialDensity::Gaussian { contour_length, .. } => (0.0, *contour_length),
            RadialDensity::Exact(d) => (0.0, d.max_radius()),
            RadialDensity::Shell(s) => (0.0, s.contour_length),
        }
    }

    pub fn dimension(&self) -> Dim {
        match self {
            RadialDensity::Gaussian { dimension, .. } => *dimension,
            _ => Dim::Three,
        }
    }

    pub fn normalization_kind(&self) -> NormalizationKind {
        match self {
            RadialDensity::Gaussian { .. } => NormalizationKind::FullSpaceGaussian,
            RadialDensity::Exact(_) => NormalizationKind::CompactSupportExact,
            RadialDensity::Shell(_) => NormalizationKind::DeltaShell,
        }
    }
}

/// Spectral propagator of hop directions over arc length L:
/// P(u_b . u_a | L) = sum_l ((2l+1)/4 pi) exp(-l(l+1) L / 2 xi) P_l(cos).
///
/// The sum over spherical-harmonic orders m is collapsed by the Legendre
/// addition theorem. Only the l = 0 term carries solid-angle mass, so the
/// propagator integrates to one for any truncation order.
#[derive(Debug, Clone, Copy)]
pub struct AngularPropagator {
    pub xi: f64,
    pub contour_length: f64,
    pub l_max: usize,
}

impl AngularPropagator {
    pub const DEFAULT_L_MAX: usize = 64;
    /// Truncation tail budget for the automatic order search.
    pub const TAIL_TOLERANCE: f64 = 1e-8;
    /// Smallest L/xi the automatic evaluator accepts.
    pub const MIN_ARC_RATIO: f64 = 0.01;

    /// Propagator with an explicit truncation order.
    pub fn with_order(contour_length: f64, xi: f64, l_max: usize) -> Result<Self, AnalyticsError> {
        let contour_length = check_positive(contour_length)?;
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(AnalyticsError::NegativePersistence(xi));
        }
        Ok(Self {
            xi,
            contour_length,
            l_max,
        })
    }

    /// Propagator whose order is doubled from 64 until the truncation tail
    /// bound drops below 1e-8. Refuses L/xi < 0.01 rather than returning an
    /// unconverged sum.
    pub fn auto(contour_length: f64, xi: f64) -> Result<Self, AnalyticsError> {
        let contour_length = check_positive(contour_length)?;
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(AnalyticsError::NegativePersistence(xi));
        }
        if xi == 0.0 {
            return Ok(Self {
                xi,
                contour_length,
                l_max: 0,
            });
        }
        let ratio = contour_length / xi;
        if ratio < Self::MIN_ARC_RATIO {
            return Err(AnalyticsError::ArcRatioTooSmall(ratio));
        }
        let mut l_max = Self::DEFAULT_L_MAX;
        while tail_bound(l_max, ratio) > Self::TAIL_TOLERANCE && l_max < 1 << 14 {
            l_max *= 2;
        }
        Ok(Self {
            xi,
            contour_length,
            l_max,
        })
    }

    /// Evaluate at the cosine of the angle between initial and final
    /// directions.
    pub fn evaluate(&self, cos_angle: f64) -> Result<f64, AnalyticsError> {
        if !(-1.0..=1.0).contains(&cos_angle) {
            return Err(AnalyticsError::CosineOutOfRange(cos_angle));
        }
        let inv_4pi = 0.25 / std::f64::consts::PI;
        if self.xi == 0.0 {
            return Ok(inv_4pi);
        }
        let tau = self.contour_length / self.xi;
        let mut sum = 0.0;
        let mut p_prev = 1.0; // P_0
        let mut p = cos_angle; // P_1
        for l in 0..=self.l_max {
            let pl = match l {
                0 => 1.0,
                1 => cos_angle,
                _ => {
                    let kf = (l - 1) as f64;
                    let next = ((2.0 * kf + 1.0) * cos_angle * p - kf * p_prev) / (kf + 1.0);
                    p_prev = p;
                    p = next;
                    next
                }
            };
            let lf = l as f64;
            sum += (2.0 * lf + 1.0) * (-0.5 * lf * (lf + 1.0) * tau).exp() * pl;
        }
        let value = sum * inv_4pi;
        // the spectral sum cancels to ~1e-17 where the kernel is
        // exponentially small; suppress that noise, keep real undershoots
        if value < 0.0 && value > -1e-12 {
            return Ok(0.0);
        }
        Ok(value)
    }
}

fn tail_bound(l_max: usize, tau: f64) -> f64 {
    // |P_l| <= 1, so terms are bounded by (2l+1)/(4 pi) e^{-l(l+1) tau/2};
    // consecutive bounds shrink by at least e^{-(l+1) tau}, giving a
    // geometric envelope for the truncated tail.
    let l = (l_max + 1) as f64;
    let first = (2.0 * l + 1.0) / (4.0 * std::f64::consts::PI) * (-0.5 * l * (l + 1.0) * tau).exp();
    let q = (-(l + 1.0) * tau).exp() * (2.0 * l + 3.0) / (2.0 * l + 1.0);
    if q < 1.0 {
        first / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

/// One-shot convenience wrapper around [`AngularPropagator::with_order`].
pub fn angular_propagator(
    cos_angle: f64,
    contour_length: f64,
    xi: f64,
    l_max: usize,
) -> Result<f64, AnalyticsError> {
    AngularPropagator::with_order(contour_length, xi, l_max)?.evaluate(cos_angle)
}

/// Sanity check used in tests: Legendre polynomial consistency of the
/// propagator evaluation loop against the standalone recurrence.
#[doc(hidden)]
pub fn propagator_term(l: usize, cos_angle: f64, tau: f64) -> f64 {
    (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI)
        * (-0.5 * l as f64 * (l as f64 + 1.0) * tau).exp()
        * legendre_p(l, cos_angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{adaptive_simpson, gauss_legendre, integrate_gl};

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn gaussian_peak_value_3d() {
        // (3/(200 pi))^{3/2} at R = 0, L = 100, a = 1
        let p = gaussian_rrs_density(0.0, 100.0, 1.0, Dim::Three).unwrap();
        assert!((p - 3.2992e-4).abs() / 3.2992e-4 < 1e-4);
    }

    #[test]
    fn gaussian_normalization_and_second_moment() {
        for dim in [Dim::Two, Dim::Three] {
            let (l, a) = (100.0, 1.0);
            let shell = move |r: f64| match dim {
                Dim::Three => 4.0 * PI * r * r,
                Dim::Two => 2.0 * PI * r,
            };
            let mass = adaptive_simpson(
                &|r| shell(r) * gaussian_rrs_density(r, l, a, dim).unwrap(),
                0.0,
                l,
                1e-10,
            );
            assert!((mass - 1.0).abs() < 1e-6, "dim={dim:?} mass={mass}");
            let m2 = adaptive_simpson(
                &|r| shell(r) * r * r * gaussian_rrs_density(r, l, a, dim).unwrap(),
                0.0,
                l,
                1e-10,
            );
            assert!((m2 - l * a).abs() < 1e-4, "dim={dim:?} m2={m2}");
        }
    }

    #[test]
    fn gaussian_rejects_bad_lengths() {
        assert!(gaussian_rrs_density(1.0, 0.0, 1.0, Dim::Three).is_err());
        assert!(gaussian_rrs_density(1.0, 10.0, -1.0, Dim::Three).is_err());
        assert!(gaussian_rrs_density(-0.5, 10.0, 1.0, Dim::Three).is_err());
    }

    #[test]
    fn rrs_moments_low_orders() {
        // l = 0 normalization, l = 1 is N a^2, l = 2 matches the
        // combinatorial identity (5/3) N^2 - (2/3) N
        assert_eq!(rrs_moment_exact(0, 100, 1.0).unwrap(), 1.0);
        assert!((rrs_moment_exact(1, 100, 1.0).unwrap() - 100.0).abs() < 1e-9);
        let n = 100.0;
        let expect = (5.0 / 3.0) * n * n - (2.0 / 3.0) * n;
        let got = rrs_moment_exact(2, 100, 1.0).unwrap();
        assert!((got - expect).abs() / expect < 1e-12, "got={got}");
        // step-length scaling a^{2l}
        let scaled = rrs_moment_exact(2, 100, 0.5).unwrap();
        assert!((scaled - expect * 0.5f64.powi(4)).abs() / scaled < 1e-12);
    }

    #[test]
    fn rrs_moments_single_hop_are_unity() {
        // N = 1 means R = a always, so < R^{2l} > = a^{2l}
        for l in 0..=8 {
            let m = rrs_moment_exact(l, 1, 1.0).unwrap();
            assert!((m - 1.0).abs() < 1e-9, "l={l} m={m}");
        }
    }

    #[test]
    fn rrs_moments_two_hops_closed_form() {
        // N = 2: R^2 = 2 a^2 (1 + cos), cos uniform on [-1,1], so
        // < R^{2l} > = 4^l / (l+1)
        for l in 1..=8 {
            let expect = 4.0f64.powi(l as i32) / (l as f64 + 1.0);
            let got = rrs_moment_exact(l, 2, 1.0).unwrap();
            assert!(
                (got - expect).abs() / expect < 1e-10,
                "l={l} got={got} expect={expect}"
            );
        }
    }

    #[test]
    fn rrs_moment_order_cap() {
        assert!(matches!(
            rrs_moment_exact(9, 10, 1.0),
            Err(AnalyticsError::MomentOrderTooLarge(9))
        ));
        assert!(matches!(
            rrs_moment_exact(1, 0, 1.0),
            Err(AnalyticsError::ZeroHops)
        ));
    }

    #[test]
    fn rrs_limit_values() {
        assert_eq!(rrs_moment_limit(0, 10.0, 1.0), 1.0);
        assert!((rrs_moment_limit(1, 10.0, 1.0) - 10.0).abs() < 1e-12);
        assert!((rrs_moment_limit(2, 10.0, 1.0) - 500.0 / 3.0).abs() < 1e-10);
        // exact moments approach the limit as N grows at fixed a L
        let a = 1.0;
        for l in 1..=3usize {
            let n = 4000;
            let exact = rrs_moment_exact(l, n, a).unwrap();
            let limit = rrs_moment_limit(l, n as f64 * a, a);
            assert!(
                (exact - limit).abs() / limit < 2e-3 * l as f64,
                "l={l} exact={exact} limit={limit}"
            );
        }
    }

    #[test]
    fn drs_second_moment_reference_points() {
        // direct evaluation at L = 10, xi = 1
        let v = drs_second_moment(10.0, 1.0).unwrap();
        assert!((v - 18.000090799859525).abs() < 1e-9);
        // ballistic limit: L = 1, xi = 1e6 gives L^2 - L^3/(3 xi) + ...
        let b = drs_second_moment(1.0, 1e6).unwrap();
        assert!((b - 0.9999996666667).abs() < 1e-9, "b={b}");
        // large L/xi: 2 xi L (1 - xi/L) to relative error < 1e-4
        let l = 100.0;
        let xi = 1.0;
        let asym = 2.0 * xi * l * (1.0 - xi / l);
        let exact = drs_second_moment(l, xi).unwrap();
        assert!((exact - asym).abs() / exact < 1e-4);
        // xi = 0 returns the continuum limit 0
        assert_eq!(drs_second_moment(10.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn drs_second_moment_monotone_and_bounded() {
        let l = 10.0;
        let mut prev = 0.0;
        for i in 1..=60 {
            let xi = 0.05 * i as f64;
            let v = drs_second_moment(l, xi).unwrap();
            assert!(v > prev);
            assert!(v < l * l);
            prev = v;
        }
        let mut prev = 0.0;
        for i in 1..=60 {
            let length = 0.5 * i as f64;
            let v = drs_second_moment(length, 2.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn drs_fourth_moment_structure() {
        // leading coefficient 20/3 and consistency with the effective-radius
        // form (5/3)(a_eff L)^2 at a_eff = 2 xi
        let (l, xi) = (1e7, 1.0);
        let v = drs_fourth_moment_asymptotic(l, xi).unwrap();
        assert!((v / (xi * xi * l * l) - 20.0 / 3.0).abs() < 1e-5);
        let a_eff = effective_radius(xi);
        let limit_form = rrs_moment_limit(2, l, a_eff);
        assert!((v - limit_form).abs() / limit_form < 1e-5);
        assert!(drs_fourth_moment_in_regime(100.0, 1.0));
        assert!(!drs_fourth_moment_in_regime(5.0, 1.0));
        assert!(drs_fourth_moment_asymptotic(1.0, 0.0).is_err());
    }

    #[test]
    fn effective_radius_is_twice_xi() {
        assert_eq!(effective_radius(1.0), 2.0);
        assert_eq!(effective_radius(0.0), 0.0);
        // degenerate xi = 0: moments collapse consistently
        assert_eq!(drs_second_moment(5.0, 0.0).unwrap(), 0.0);
        assert_eq!(rrs_moment_limit(1, 5.0, effective_radius(0.0)), 0.0);
    }

    #[test]
    fn ors_density_and_moments() {
        let d = OrsDensity::new(7.0).unwrap();
        assert_eq!(d.moment(2), 49.0);
        assert_eq!(d.moment(0), 1.0);
        // CDF jump of height 1 at R = L
        assert_eq!(d.cdf(6.999999), 0.0);
        assert_eq!(d.cdf(7.0), 1.0);
        assert_eq!(d.cdf(100.0), 1.0);
        let shell = RadialDensity::Shell(d);
        assert_eq!(shell.normalization_kind(), NormalizationKind::DeltaShell);
        assert_eq!(shell.evaluate(3.0).unwrap(), 0.0);
        assert!(shell.evaluate(7.0).unwrap().is_infinite());
    }

    #[test]
    fn propagator_uniformizes_at_large_arc() {
        let p = AngularPropagator::auto(1e9, 1.0).unwrap();
        for &c in &[-1.0, -0.3, 0.2, 1.0] {
            let v = p.evaluate(c).unwrap();
            assert!((v - 0.25 / PI).abs() < 1e-12, "c={c} v={v}");
        }
    }

    #[test]
    fn propagator_normalizes_over_solid_angle() {
        // integral over the sphere: 2 pi int_{-1}^{1} P(c) dc = 1
        let (nodes, weights) = gauss_legendre(64);
        for &(l, xi) in &[(0.5, 1.0), (0.05, 1.0), (3.0, 0.7)] {
            let p = AngularPropagator::auto(l, xi).unwrap();
            let integral =
                2.0 * PI * integrate_gl(&|c| p.evaluate(c).unwrap(), -1.0, 1.0, &nodes, &weights);
            assert!((integral - 1.0).abs() < 1e-8, "L={l} int={integral}");
        }
        // holds for any truncation order, including l_max = 0
        let p0 = AngularPropagator::with_order(0.5, 1.0, 0).unwrap();
        let integral =
            2.0 * PI * integrate_gl(&|c| p0.evaluate(c).unwrap(), -1.0, 1.0, &nodes, &weights);
        assert!((integral - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_directional_correlation() {
        // int cos P dOmega = e^{-L/xi}: the l = 1 spectral coefficient,
        // cross-checked by quadrature
        let (nodes, weights) = gauss_legendre(64);
        for &(l, xi) in &[(0.3, 1.0), (1.0, 1.0), (2.0, 0.5)] {
            let p = AngularPropagator::auto(l, xi).unwrap();
            let corr = 2.0
                * PI
                * integrate_gl(&|c| c * p.evaluate(c).unwrap(), -1.0, 1.0, &nodes, &weights);
            let expect = (-l / xi).exp();
            assert!(
                (corr - expect).abs() < 1e-7,
                "L={l} corr={corr} expect={expect}"
            );
        }
    }

    #[test]
    fn propagator_positivity_on_grid() {
        // truncation positivity for L/xi >= 0.05 at l_max >= 60
        let p = AngularPropagator::with_order(0.05, 1.0, 80).unwrap();
        for i in 0..=200 {
            let c = -1.0 + 2.0 * i as f64 / 200.0;
            let v = p.evaluate(c).unwrap();
            assert!(v >= 0.0, "c={c} v={v}");
        }
    }

    #[test]
    fn propagator_auto_guards() {
        assert!(matches!(
            AngularPropagator::auto(0.005, 1.0),
            Err(AnalyticsError::ArcRatioTooSmall(_))
        ));
        // at the smallest accepted ratio the default order is already
        // converged: doubling to 128 must not change the value
        let p = AngularPropagator::auto(0.01, 1.0).unwrap();
        assert!(tail_bound(p.l_max, 0.01) < AngularPropagator::TAIL_TOLERANCE);
        let refined = AngularPropagator::with_order(0.01, 1.0, 2 * p.l_max).unwrap();
        for &c in &[-0.9, 0.0, 0.9] {
            let a = p.evaluate(c).unwrap();
            let b = refined.evaluate(c).unwrap();
            assert!((a - b).abs() < 1e-8, "c={c} a={a} b={b}");
        }
        assert!(matches!(
            p.evaluate(1.5),
            Err(AnalyticsError::CosineOutOfRange(_))
        ));
    }

    #[test]
    fn propagator_semigroup_property() {
        // Chapman-Kolmogorov on the sphere: composing over L1 then L2 by
        // numerical quadrature equals the propagator over L1 + L2
        let xi = 1.0;
        let (l1, l2) = (0.4, 0.7);
        let pa = AngularPropagator::auto(l1, xi).unwrap();
        let pb = AngularPropagator::auto(l2, xi).unwrap();
        let pc = AngularPropagator::auto(l1 + l2, xi).unwrap();
        let (nodes, weights) = gauss_legendre(48);
        let n_phi = 96;
        for &gamma in &[0.0f64, 0.8, 2.2] {
            let (sg, cg) = gamma.sin_cos();
            // integrate over intermediate direction u: polar angle t, azimuth phi
            let composed = integrate_gl(
                &|ct: f64| {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    let mut phi_sum = 0.0;
                    for j in 0..n_phi {
                        let phi = 2.0 * PI * j as f64 / n_phi as f64;
                        let cos_bu = cg * ct + sg * st * phi.cos();
                        phi_sum += pb.evaluate(cos_bu.clamp(-1.0, 1.0)).unwrap();
                    }
                    phi_sum * (2.0 * PI / n_phi as f64) * pa.evaluate(ct).unwrap()
                },
                -1.0,
                1.0,
                &nodes,
                &weights,
            );
            let direct = pc.evaluate(cg).unwrap();
            assert!(
                (composed - direct).abs() < 1e-4,
                "gamma={gamma} composed={composed} direct={direct}"
            );
        }
    }
}
