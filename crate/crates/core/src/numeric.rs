//! Shared numerical kernels: special functions, quadrature, and summary
//! statistics used across the analytics and estimation modules.

/// Natural log of the gamma function (Lanczos, g = 7, 9 coefficients).
///
/// Relative error below 2e-10 for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf(a: f64, x: f64) -> f64 {
    // Lentz's algorithm on the standard continued fraction.
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom: P(X > x).
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    gamma_q(dof as f64 / 2.0, x / 2.0)
}

/// Kolmogorov distribution survival function
/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=1000 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Legendre polynomial P_l(x) by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p_prev = 1.0;
            let mut p = x;
            for k in 1..l {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
                p_prev = p;
                p = next;
            }
            p
        }
    }
}

/// Langevin function L(k) = coth(k) - 1/k, the mean cosine of a
/// von Mises-Fisher distribution on the sphere with concentration k.
pub fn langevin(kappa: f64) -> f64 {
    debug_assert!(kappa >= 0.0);
    if kappa < 1e-3 {
        // coth(k) - 1/k cancels below here; next series term is 2 k^5/945
        kappa / 3.0 - kappa.powi(3) / 45.0
    } else if kappa > 20.0 {
        1.0 - 1.0 / kappa
    } else {
        1.0 / kappa.tanh() - 1.0 / kappa
    }
}

/// Inverse of [`langevin`]: the concentration whose mean cosine is `rho`.
pub fn inverse_langevin(rho: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&rho));
    if rho < 1e-12 {
        return 3.0 * rho;
    }
    if rho > 1.0 - 1e-9 {
        return 1.0 / (1.0 - rho);
    }
    // Cohen's Pade initial guess, then Newton.
    let mut kappa = rho * (3.0 - rho * rho) / (1.0 - rho * rho);
    for _ in 0..60 {
        let f = langevin(kappa) - rho;
        let deriv = if kappa > 20.0 {
            1.0 / (kappa * kappa)
        } else if kappa < 1e-3 {
            // 1/k^2 - csch^2(k) cancels catastrophically here; use its series
            1.0 / 3.0 - kappa * kappa / 15.0
        } else {
            1.0 / (kappa * kappa) - 1.0 / kappa.sinh().powi(2)
        };
        let step = f / deriv;
        kappa -= step;
        if !kappa.is_finite() || kappa <= 0.0 {
            kappa = 1e-12;
        }
        if step.abs() < 1e-13 * kappa.max(1.0) {
            break;
        }
    }
    kappa
}

/// Ratio I1(k)/I0(k) of modified Bessel functions, the mean cosine of a
/// von Mises distribution on the circle with concentration k.
pub fn bessel_i1_i0_ratio(kappa: f64) -> f64 {
    debug_assert!(kappa >= 0.0);
    if kappa == 0.0 {
        return 0.0;
    }
    if kappa > 150.0 {
        // uniform asymptotic expansion; next omitted term is O(1/kappa^6)
        let inv = 1.0 / kappa;
        return 1.0
            - 0.5 * inv
            - 0.125 * inv * inv
            - 0.125 * inv.powi(3)
            - (25.0 / 128.0) * inv.powi(4)
            - (13.0 / 32.0) * inv.powi(5);
    }
    // ascending series of both orders; the largest term is ~exp(kappa),
    // far below f64 overflow for kappa <= 150
    let half = 0.5 * kappa;
    let x2 = half * half;
    let mut term0 = 1.0;
    let mut sum0 = 1.0;
    let mut term1 = half;
    let mut sum1 = half;
    for k in 1..600 {
        let kf = k as f64;
        term0 *= x2 / (kf * kf);
        sum0 += term0;
        term1 *= x2 / (kf * (kf + 1.0));
        sum1 += term1;
        if term0 < 1e-18 * sum0 && term1 < 1e-18 * sum1 {
            break;
        }
    }
    sum1 / sum0
}

/// Inverse of [`bessel_i1_i0_ratio`].
pub fn inverse_bessel_ratio(rho: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&rho));
    if rho < 1e-12 {
        return 2.0 * rho;
    }
    if rho > 1.0 - 1e-9 {
        return 0.5 / (1.0 - rho);
    }
    // Newton with derivative r' = 1 - r^2 - r/k.
    let mut kappa = if rho < 0.5 {
        2.0 * rho / (1.0 - rho * rho)
    } else {
        0.5 / (1.0 - rho)
    };
    for _ in 0..80 {
        let r = bessel_i1_i0_ratio(kappa);
        let deriv = 1.0 - r * r - r / kappa;
        let step = (r - rho) / deriv;
        kappa -= step;
        if !kappa.is_finite() || kappa <= 0.0 {
            kappa = 1e-12;
        }
        if step.abs() < 1e-13 * kappa.max(1.0) {
            break;
        }
    }
    kappa
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Accurate to machine precision for n <= 128.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and its derivative at x
            let mut p_prev = 1.0;
            let mut p = x;
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
                p_prev = p;
                p = next;
            }
            dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate `f` over [a, b] with a fixed Gauss-Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Sample mean and unbiased variance.
pub fn mean_and_variance(data: &[f64]) -> (f64, f64) {
    assert!(!data.is_empty());
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    if data.len() < 2 {
        return (mean, 0.0);
    }
    let ss = data.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Standard error of the sample mean.
pub fn standard_error(data: &[f64]) -> f64 {
    let (_, var) = mean_and_variance(data);
    (var / data.len() as f64).sqrt()
}

/// Linear-interpolation quantile of pre-sorted data, q in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
