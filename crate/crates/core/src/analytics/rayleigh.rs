//! Exact end-to-end density of the fixed-step random strategy in 3D
//! (the classic random flight with N unit-length hops).
//!
//! For 2 <= N <= 30 the density is built by the exact convolution recursion
//! g_N(r) = (1/2) int_{|r-1|}^{min(r+1, N-1)} g_{N-1}(s) ds, where
//! g_N = f_N / r and f_N is the radial pdf in units of the step length.
//! Each integer panel [k, k+1] carries the polynomial piece in a local
//! Chebyshev basis, so the recursion reduces to antiderivative transforms,
//! panel shifts and one reflection — no alternating binomial sums, hence no
//! catastrophic cancellation at large N.
//!
//! Above N = 30 the density is evaluated from the Fourier inversion
//! P(R) = (1/2 pi^2 R) int k sin(kR) (sin(ka)/ka)^N dk with panel-by-panel
//! Gauss-Legendre quadrature between the zeros of sin(kR), truncated where
//! the damped kernel is beyond double precision.

use super::AnalyticsError;

const MAX_SPLINE_HOPS: usize = 30;
const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Chebyshev panel primitives (plain convention f = sum c_k T_k on [-1, 1])
// ---------------------------------------------------------------------------

fn cheb_eval(coeffs: &[f64], zeta: f64) -> f64 {
    // Clenshaw recurrence
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().rev() {
        let b0 = 2.0 * zeta * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    b1 - zeta * b2
}

/// Antiderivative with respect to the panel variable (d rhat = h d zeta),
/// shifted so the value at zeta = -1 is zero.
fn cheb_antiderivative(coeffs: &[f64], h: f64) -> Vec<f64> {
    let d = coeffs.len();
    let mut out = vec![0.0; d + 1];
    if d > 0 {
        out[1] += h * coeffs[0];
    }
    if d > 1 {
        out[2] += h * coeffs[1] / 4.0;
    }
    for (k, &c) in coeffs.iter().enumerate().skip(2) {
        let kf = k as f64;
        out[k + 1] += h * c / (2.0 * (kf + 1.0));
        out[k - 1] -= h * c / (2.0 * (kf - 1.0));
    }
    // pin the integration constant: A(-1) = 0
    let mut at_minus_one = 0.0;
    let mut sign = -1.0;
    for &b in out.iter().skip(1) {
        at_minus_one += sign * b;
        sign = -sign;
    }
    out[0] = -at_minus_one;
    out
}

/// Coefficients of f(-zeta): T_k(-z) = (-1)^k T_k(z).
fn cheb_reflect(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
        .collect()
}

/// Coefficients of (alpha + beta zeta) f(zeta).
fn cheb_mul_affine(coeffs: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len() + 1];
    for (k, &c) in coeffs.iter().enumerate() {
        out[k] += alpha * c;
        out[k + 1] += 0.5 * beta * c;
        let lower = (k as i32 - 1).unsigned_abs() as usize;
        out[lower] += 0.5 * beta * c;
    }
    out
}

fn scaled_difference(hi: &[f64], lo: &[f64], s: f64) -> Vec<f64> {
    let len = hi.len().max(lo.len());
    (0..len)
        .map(|k| {
            let a = hi.get(k).copied().unwrap_or(0.0);
            let b = lo.get(k).copied().unwrap_or(0.0);
            s * (a - b)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Piecewise spline of ghat_N = fhat_N / rhat
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Spline {
    /// Chebyshev pieces of ghat_N, panel k over rhat in [k, k+1].
    g: Vec<Vec<f64>>,
    /// Cumulative CDF pieces of the radial pdf rhat * ghat_N.
    cdf: Vec<Vec<f64>>,
}

impl Spline {
    fn build(n_hops: usize) -> Self {
        debug_assert!((2..=MAX_SPLINE_HOPS).contains(&n_hops));
        let mut g: Vec<Vec<f64>> = vec![vec![0.5], vec![0.5]];
        for _ in 3..=n_hops {
            let prev_panels = g.len();
            let mut big_g = Vec::with_capacity(prev_panels);
            let mut cum = 0.0;
            for piece in &g {
                let mut a = cheb_antiderivative(piece, 0.5);
                a[0] += cum;
                cum = cheb_eval(&a, 1.0);
                big_g.push(a);
            }
            let total = cum;
            let mut next = Vec::with_capacity(prev_panels + 1);
            for j in 0..=prev_panels {
                let hi: Vec<f64> = if j + 1 < prev_panels {
                    big_g[j + 1].clone()
                } else {
                    vec![total]
                };
                let lo: Vec<f64> = if j == 0 {
                    cheb_reflect(&big_g[0])
                } else {
                    big_g[j - 1].clone()
                };
                next.push(scaled_difference(&hi, &lo, 0.5));
            }
            g = next;
        }
        // radial pdf fhat = rhat ghat; accumulate its CDF panel by panel
        let mut cdf = Vec::with_capacity(g.len());
        let mut cum = 0.0;
        for (k, piece) in g.iter().enumerate() {
            let pdf = cheb_mul_affine(piece, k as f64 + 0.5, 0.5);
            let mut a = cheb_antiderivative(&pdf, 0.5);
            a[0] += cum;
            cum = cheb_eval(&a, 1.0);
            cdf.push(a);
        }
        let total = cum;
        debug_assert!((total - 1.0).abs() < 1e-10, "spline mass {total}");
        for piece in cdf.iter_mut() {
            for c in piece.iter_mut() {
                *c /= total;
            }
        }
        for piece in g.iter_mut() {
            for c in piece.iter_mut() {
                *c /= total;
            }
        }
        Spline { g, cdf }
    }

    fn locate(&self, rhat: f64) -> (usize, f64) {
        let k = (rhat.floor() as usize).min(self.g.len() - 1);
        (k, 2.0 * (rhat - k as f64) - 1.0)
    }

    fn ghat(&self, rhat: f64) -> f64 {
        let (k, zeta) = self.locate(rhat);
        cheb_eval(&self.g[k], zeta)
    }

    fn cdf(&self, rhat: f64) -> f64 {
        let (k, zeta) = self.locate(rhat);
        cheb_eval(&self.cdf[k], zeta).clamp(0.0, 1.0)
    }
}

// ---------------------------------------------------------------------------
// Fourier-inversion quadrature for large N
// ---------------------------------------------------------------------------

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 * (1.0 - x * x / 20.0)
    } else {
        x.sin() / x
    }
}

/// Radial pdf fhat(rhat) in step-length units for N > MAX_SPLINE_HOPS hops,
/// via fhat = 4 pi rhat^2 Phat with the damped Fourier inversion.
fn radial_pdf_by_transform(rhat: f64, n_hops: usize) -> f64 {
    let n = n_hops as f64;
    // integrand support: gaussian core exp(-N x^2/6) plus power tail x^{1-N}
    let cut_gauss = (270.0 / n).sqrt();
    let cut_power = (1e19f64).powf(1.0 / (n - 2.0));
    let x_max = cut_gauss.max(cut_power).max(0.5);
    let (nodes, weights) = crate::numeric::gauss_legendre(16);
    let base_width = if rhat > 1e-12 {
        (std::f64::consts::PI / rhat).min(0.5)
    } else {
        0.5
    };
    let mut acc = 0.0;
    let mut x_lo = 0.0;
    while x_lo < x_max {
        let x_hi = (x_lo + base_width).min(x_max);
        let f = |x: f64| {
            let damp = sinc(x).powi(n_hops as i32);
            if rhat > 1e-12 {
                x * (x * rhat).sin() * damp
            } else {
                x * x * damp
            }
        };
        acc += crate::numeric::integrate_gl(&f, x_lo, x_hi, &nodes, &weights);
        x_lo = x_hi;
    }
    let p_hat = if rhat > 1e-12 {
        acc / (2.0 * std::f64::consts::PI.powi(2) * rhat)
    } else {
        acc / (2.0 * std::f64::consts::PI.powi(2))
    };
    (FOUR_PI * rhat * rhat * p_hat).max(0.0)
}

// ---------------------------------------------------------------------------
// Public type
// ---------------------------------------------------------------------------

/// Exact end-to-end density of an N-hop random-strategy chain in 3D.
#[derive(Debug, Clone)]
pub struct ExactRrsDensity {
    n_hops: usize,
    step_length: f64,
    spline: Option<Spline>,
}

impl ExactRrsDensity {
    pub fn new(n_hops: usize, step_length: f64) -> Result<Self, AnalyticsError> {
        if n_hops == 0 {
            return Err(AnalyticsError::ZeroHops);
        }
        if !(step_length > 0.0 && step_length.is_finite()) {
            return Err(AnalyticsError::NonPositiveLength(step_length));
        }
        let spline = if (2..=MAX_SPLINE_HOPS).contains(&n_hops) {
            Some(Spline::build(n_hops))
        } else {
            None
        };
        Ok(Self {
            n_hops,
            step_length,
            spline,
        })
    }

    pub fn n_hops(&self) -> usize {
        self.n_hops
    }

    pub fn step_length(&self) -> f64 {
        self.step_length
    }

    /// Upper end of the support, N a.
    pub fn max_radius(&self) -> f64 {
        self.n_hops as f64 * self.step_length
    }

    fn check_support(&self, r: f64) -> Result<f64, AnalyticsError> {
        let max = self.max_radius();
        if r < 0.0 || r > max * (1.0 + 1e-12) {
            return Err(AnalyticsError::OutOfSupport { r, max });
        }
        Ok((r / self.step_length).min(self.n_hops as f64))
    }

    /// Volume density P(R).
    ///
    /// For N = 1 the density is a delta shell at R = a; by convention this
    /// method then returns the radial CDF instead (a unit step at R = a).
    /// For N = 2 the true density diverges like 1/R as R -> 0.
    pub fn density(&self, r: f64) -> Result<f64, AnalyticsError> {
        let rhat = self.check_support(r)?;
        if self.n_hops == 1 {
            return Ok(if r >= self.step_length { 1.0 } else { 0.0 });
        }
        let a3 = self.step_length.powi(3);
        match &self.spline {
            Some(spline) => {
                // P = ghat / (4 pi rhat a^3); for N >= 3 ghat vanishes
                // linearly at 0, so step off the origin before dividing
                let eval_at = if self.n_hops >= 3 && rhat < 1e-7 {
                    1e-7
                } else {
                    rhat
                };
                // the spline is nonnegative; tiny negatives at the support
                // edge are Chebyshev rounding
                Ok((spline.ghat(eval_at) / (FOUR_PI * eval_at * a3)).max(0.0))
            }
            None => {
                let eval_at = rhat.max(1e-7);
                let fhat = radial_pdf_by_transform(eval_at, self.n_hops);
                Ok(fhat / (FOUR_PI * eval_at * eval_at * a3))
            }
        }
    }

    /// Radial pdf 4 pi R^2 P(R), normalized to unit integral over [0, N a].
    pub fn radial_pdf(&self, r: f64) -> Result<f64, AnalyticsError> {
        let rhat = self.check_support(r)?;
        if self.n_hops == 1 {
            return Err(AnalyticsError::OutOfSupport {
                r,
                max: self.max_radius(),
            });
        }
        let fhat = match &self.spline {
            Some(spline) => (rhat * spline.ghat(rhat)).max(0.0),
            None => radial_pdf_by_transform(rhat, self.n_hops),
        };
        Ok(fhat / self.step_length)
    }

    /// Radial CDF P(R' <= R). Exact from the spline antiderivative for
    /// N <= 30; quadrature of the radial pdf otherwise.
    pub fn radial_cdf(&self, r: f64) -> Result<f64, AnalyticsError> {
        let rhat = self.check_support(r)?;
        if self.n_hops == 1 {
            return Ok(if r >= self.step_length { 1.0 } else { 0.0 });
        }
        match &self.spline {
            Some(spline) => Ok(spline.cdf(rhat)),
            None => {
                let f = |x: f64| radial_pdf_by_transform(x, self.n_hops);
                Ok(crate::numeric::adaptive_simpson(&f, 0.0, rhat, 1e-9).clamp(0.0, 1.0))
            }
        }
    }
}

/// One-shot evaluation of the exact random-strategy density; see
/// [`ExactRrsDensity::density`] for the N = 1 CDF convention.
pub fn exact_rrs_density(r: f64, n_hops: usize, step_length: f64) -> Result<f64, AnalyticsError> {
    ExactRrsDensity::new(n_hops, step_length)?.density(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::gaussian_rrs_density;
    use crate::numeric::{gauss_legendre, integrate_gl};
    use crate::pathmodel::Dim;

    #[test]
    fn two_hop_reference_value() {
        // P(1) = 1/(8 pi) for N = 2, a = 1
        let p = exact_rrs_density(1.0, 2, 1.0).unwrap();
        assert!((p - 1.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-14);
        // radial pdf is R/2 on [0, 2]
        let d = ExactRrsDensity::new(2, 1.0).unwrap();
        for &r in &[0.25, 0.8, 1.5, 1.99] {
            assert!((d.radial_pdf(r).unwrap() - r / 2.0).abs() < 1e-12);
        }
        // step-length scaling
        let d2 = ExactRrsDensity::new(2, 2.0).unwrap();
        assert!((d2.radial_pdf(1.0).unwrap() - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn three_hop_piecewise_form() {
        // fhat_3 = r^2/2 on [0,1] and r(3-r)/4 on [1,3]
        let d = ExactRrsDensity::new(3, 1.0).unwrap();
        assert!((d.radial_pdf(0.5).unwrap() - 0.125).abs() < 1e-12);
        assert!((d.radial_pdf(2.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((d.radial_pdf(2.9).unwrap() - 2.9 * 0.1 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_hop_returns_cdf_step() {
        let d = ExactRrsDensity::new(1, 1.0).unwrap();
        assert_eq!(d.density(0.5).unwrap(), 0.0);
        assert_eq!(d.density(1.0).unwrap(), 1.0);
        assert_eq!(d.radial_cdf(0.999).unwrap(), 0.0);
        assert_eq!(d.radial_cdf(1.0).unwrap(), 1.0);
    }

    #[test]
    fn support_is_enforced() {
        let d = ExactRrsDensity::new(4, 1.0).unwrap();
        assert!(matches!(
            d.density(-0.1),
            Err(AnalyticsError::OutOfSupport { .. })
        ));
        assert!(matches!(
            d.density(4.1),
            Err(AnalyticsError::OutOfSupport { .. })
        ));
        assert!(matches!(
            exact_rrs_density(1.0, 0, 1.0),
            Err(AnalyticsError::ZeroHops)
        ));
    }

    #[test]
    fn spline_cdf_normalizes_and_is_monotone() {
        for n in [2usize, 5, 12, 30] {
            let d = ExactRrsDensity::new(n, 1.0).unwrap();
            assert!((d.radial_cdf(n as f64).unwrap() - 1.0).abs() < 1e-12);
            assert!(d.radial_cdf(0.0).unwrap() < 1e-14);
            let mut prev = 0.0;
            for i in 0..=200 {
                let r = n as f64 * i as f64 / 200.0;
                let c = d.radial_cdf(r).unwrap();
                assert!(c >= prev - 1e-12, "n={n} r={r}");
                prev = c;
            }
        }
    }

    #[test]
    fn spline_moments_match_exact_formulas() {
        // integrate panel by panel: the pdf is polynomial inside each integer
        // panel, so per-panel Gauss-Legendre is exact
        let (nodes, weights) = gauss_legendre(32);
        for n in [4usize, 9, 20, 30] {
            let d = ExactRrsDensity::new(n, 1.0).unwrap();
            let moment = |power: i32| -> f64 {
                (0..n)
                    .map(|k| {
                        integrate_gl(
                            &|r: f64| r.powi(power) * d.radial_pdf(r).unwrap(),
                            k as f64,
                            (k + 1) as f64,
                            &nodes,
                            &weights,
                        )
                    })
                    .sum()
            };
            let m2 = moment(2);
            assert!((m2 - n as f64).abs() / (n as f64) < 1e-10, "n={n} m2={m2}");
            let m4 = moment(4);
            let expect = crate::analytics::rrs_moment_exact(2, n, 1.0).unwrap();
            assert!((m4 - expect).abs() / expect < 1e-10, "n={n} m4={m4}");
        }
    }

    #[test]
    fn density_is_continuous_at_panel_boundaries() {
        let d = ExactRrsDensity::new(8, 1.0).unwrap();
        for k in 1..8 {
            let r = k as f64;
            let eps = 1e-9;
            let left = d.radial_pdf(r - eps).unwrap();
            let right = d.radial_pdf(r + eps).unwrap();
            assert!(
                (left - right).abs() < 1e-6 * left.abs().max(1e-3),
                "k={k} left={left} right={right}"
            );
        }
    }

    #[test]
    fn transform_agrees_with_spline() {
        // the quadrature path is an independent route to the same density
        for n in [10usize, 25] {
            let d = ExactRrsDensity::new(n, 1.0).unwrap();
            let peak = (0..200)
                .map(|i| d.radial_pdf(n as f64 * i as f64 / 200.0).unwrap())
                .fold(0.0f64, f64::max);
            for i in 1..60 {
                let r = n as f64 * i as f64 / 60.0;
                let spline_val = d.radial_pdf(r).unwrap();
                let transform_val = radial_pdf_by_transform(r, n);
                assert!(
                    (spline_val - transform_val).abs() < 1e-7 * peak,
                    "n={n} r={r} spline={spline_val} transform={transform_val}"
                );
            }
        }
    }

    #[test]
    fn transform_path_normalizes() {
        let d = ExactRrsDensity::new(40, 1.0).unwrap();
        let (nodes, weights) = gauss_legendre(64);
        let mass = integrate_gl(&|r| d.radial_pdf(r).unwrap(), 0.0, 40.0, &nodes, &weights);
        assert!((mass - 1.0).abs() < 1e-6, "mass={mass}");
        let m2 = integrate_gl(
            &|r| r * r * d.radial_pdf(r).unwrap(),
            0.0,
            40.0,
            &nodes,
            &weights,
        );
        assert!((m2 - 40.0).abs() / 40.0 < 1e-6, "m2={m2}");
    }

    #[test]
    fn gaussian_limit_at_twenty_hops() {
        // sup distance between exact and Gaussian radial forms < 5% of peak
        let n = 20usize;
        let d = ExactRrsDensity::new(n, 1.0).unwrap();
        let shell = |r: f64| 4.0 * std::f64::consts::PI * r * r;
        let mut sup = 0.0f64;
        let mut peak = 0.0f64;
        for i in 0..=400 {
            let r = n as f64 * i as f64 / 400.0;
            let exact = d.radial_pdf(r).unwrap();
            let gauss = shell(r) * gaussian_rrs_density(r, n as f64, 1.0, Dim::Three).unwrap();
            sup = sup.max((exact - gauss).abs());
            peak = peak.max(exact);
        }
        assert!(sup < 0.05 * peak, "sup={sup} peak={peak}");
    }
}
