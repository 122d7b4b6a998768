//! Quadrature helpers: adaptive Gauss-Legendre panels and Filon-type
//! oscillatory integration on uniform grids.
//!
//! The spectral tables are smooth but their angular integrands oscillate as
//! `trig^2(k u d / 2)`, so the angular integral uses fixed-order panels whose
//! count scales with the oscillation number and doubles until convergence.
//! The time-domain kernels integrate a tabulated slowly-varying factor
//! against `cos(w t)` / `sin(w t)`; there the grid would need ~t points per
//! period for naive Simpson, while Filon's method interpolates only the
//! smooth factor quadratically and integrates the trigonometric weight
//! exactly, keeping the error uniform in `t`.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Legendre nodes and weights on (-1, 1) by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let step = p / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = 0.0;
    for j in 0..n {
        let p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
    }
    let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
    (p0, dp)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(16))
}

/// Integrate a pair of components sharing one integrand evaluation over
/// [a, b], doubling the panel count from `panels0` until both components
/// move by less than `tol` relative to the larger component's magnitude.
pub fn integrate_pair_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    panels0: usize,
    context: &'static str,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> (f64, f64),
{
    let eval = |panels: usize| -> (f64, f64) {
        let (xs, ws) = gl16();
        let h = (b - a) / panels as f64;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let half = 0.5 * h;
            for (&x, &w) in xs.iter().zip(ws) {
                let (f0, f1) = f(mid + half * x);
                s0 += w * f0;
                s1 += w * f1;
            }
        }
        (s0 * 0.5 * h, s1 * 0.5 * h)
    };

    let mut panels = panels0.max(1);
    let (mut prev0, mut prev1) = eval(panels);
    loop {
        panels *= 2;
        let (cur0, cur1) = eval(panels);
        let scale = cur0.abs().max(cur1.abs()).max(f64::MIN_POSITIVE);
        let change = (cur0 - prev0).abs().max((cur1 - prev1).abs());
        if change <= tol * scale {
            return Ok((cur0, cur1));
        }
        if panels > 1 << 16 {
            return Err(Error::ConvergenceFailure {
                context,
                achieved: change / scale,
                requested: tol,
            });
        }
        prev0 = cur0;
        prev1 = cur1;
    }
}

/// Filon weights alpha, beta, gamma for panel phase `theta = h t`.
///
/// Closed forms cancel catastrophically near theta = 0, so small arguments
/// switch to the Taylor series (matched to ~1e-15 at the crossover).
fn filon_coeffs(theta: f64) -> (f64, f64, f64) {
    if theta.abs() >= 0.5 {
        filon_coeffs_closed(theta)
    } else {
        filon_coeffs_series(theta)
    }
}

fn filon_coeffs_closed(theta: f64) -> (f64, f64, f64) {
    let s = theta.sin();
    let co = theta.cos();
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let alpha = 1.0 / theta + s * co / t2 - 2.0 * s * s / t3;
    let beta = 2.0 * ((1.0 + co * co) / t2 - 2.0 * s * co / t3);
    let gamma = 4.0 * (s / t3 - co / t2);
    (alpha, beta, gamma)
}

fn filon_coeffs_series(theta: f64) -> (f64, f64, f64) {
    let t2 = theta * theta;
    // alpha = sum_m (-1)^m 4^m (2m-2)/((2m+1)! (2m+2)) theta^(2m-1) and the
    // matching even-power sums for beta and gamma
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = 0.0;
    let mut fact = 2.0; // (2m)! running value, m = 1
    let mut pow4 = 4.0; // 4^m
    let mut t_even = 1.0; // theta^(2m-2)
    for m in 1..=9u32 {
        let m2 = 2.0 * f64::from(m);
        let fact_2m1 = fact * (m2 + 1.0); // (2m+1)!
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        alpha += sign * pow4 * (m2 - 2.0) / (fact_2m1 * (m2 + 2.0)) * t_even * theta;
        beta += sign * pow4 * (m2 - 3.0) / (fact * (m2 + 1.0)) * t_even;
        gamma += -sign * 4.0 * m2 / fact_2m1 * t_even;
        fact = fact_2m1 * (m2 + 2.0); // (2m+2)! for the next m
        pow4 *= 4.0;
        t_even *= t2;
    }
    (alpha, beta, gamma)
}

/// Int_0^{(n-1)h} f(x) cos(t x) dx for f tabulated on the uniform grid
/// x_j = j h with an odd number of points. At t = 0 this reduces to
/// composite Simpson, so plain integrals reuse the same code path.
pub fn filon_cos(f: &[f64], h: f64, t: f64) -> f64 {
    filon(f, h, t, false)
}

/// Int_0^{(n-1)h} f(x) sin(t x) dx, same grid contract as [`filon_cos`].
pub fn filon_sin(f: &[f64], h: f64, t: f64) -> f64 {
    filon(f, h, t, true)
}

fn filon(f: &[f64], h: f64, t: f64, sine: bool) -> f64 {
    let n = f.len();
    assert!(n >= 3 && n % 2 == 1, "filon grid needs an odd point count >= 3");
    let (alpha, beta, gamma) = filon_coeffs(h * t);
    let b = (n - 1) as f64 * h;

    let mut even = 0.0;
    let mut odd = 0.0;
    for (j, &fj) in f.iter().enumerate() {
        let phase = t * j as f64 * h;
        let w = if sine { phase.sin() } else { phase.cos() };
        if j % 2 == 0 {
            even += fj * w;
        } else {
            odd += fj * w;
        }
    }
    let (w0, wn) = if sine {
        (0.0, (t * b).sin())
    } else {
        (1.0, (t * b).cos())
    };
    even -= 0.5 * (f[0] * w0 + f[n - 1] * wn);

    let boundary = if sine {
        -alpha * (f[n - 1] * (t * b).cos() - f[0])
    } else {
        alpha * (f[n - 1] * (t * b).sin() - 0.0)
    };
    h * (boundary + beta * even + gamma * odd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_16_integrates_high_degree_polynomials() {
        let (xs, ws) = gauss_legendre(16);
        // exact for degree <= 31: check x^30 over (-1,1) = 2/31
        let s: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| w * x.powi(30))
            .sum();
        assert_abs_diff_eq!(s, 2.0 / 31.0, epsilon = 1e-14);
        let total: f64 = ws.iter().sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_pair_handles_oscillatory_component() {
        // Int_0^1 cos^2(20 x) dx = 1/2 + sin(40)/80, Int_0^1 x dx = 1/2
        let f = |x: f64| ((20.0 * x).cos().powi(2), x);
        let (i0, i1) = integrate_pair_adaptive(f, 0.0, 1.0, 1e-12, 4, "test").unwrap();
        assert_abs_diff_eq!(i0, 0.5 + (40.0f64).sin() / 80.0, epsilon = 1e-10);
        assert_abs_diff_eq!(i1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn filon_coefficient_branches_agree_where_both_are_accurate() {
        for &theta in &[0.3, 0.45, 0.5, 0.6, 0.7] {
            let series = filon_coeffs_series(theta);
            let closed = filon_coeffs_closed(theta);
            assert_abs_diff_eq!(series.0, closed.0, epsilon = 1e-13);
            assert_abs_diff_eq!(series.1, closed.1, epsilon = 1e-13);
            assert_abs_diff_eq!(series.2, closed.2, epsilon = 1e-13);
        }
        // tiny arguments approach the Simpson limit smoothly
        let (a0, b0, g0) = filon_coeffs(0.0);
        assert_eq!(a0, 0.0);
        assert_abs_diff_eq!(b0, 2.0 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(g0, 4.0 / 3.0, epsilon = 1e-16);
    }

    #[test]
    fn filon_matches_exponential_integrals() {
        // Int_0^L e^(-x/5) cos(t x) dx and the sine analog, closed forms
        let l = 40.0;
        let n = 2001;
        let h = l / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|j| (-(j as f64) * h / 5.0).exp()).collect();
        let a = 0.2;
        for &t in &[0.0, 0.05, 0.7, 3.0, 12.5] {
            let denom = a * a + t * t;
            let e = (-a * l).exp();
            let want_cos = (a - e * (a * (t * l).cos() - t * (t * l).sin())) / denom;
            let want_sin = (t - e * (t * (t * l).cos() + a * (t * l).sin())) / denom;
            assert_abs_diff_eq!(filon_cos(&f, h, t), want_cos, epsilon = 1e-9);
            assert_abs_diff_eq!(filon_sin(&f, h, t), want_sin, epsilon = 1e-9);
        }
    }

    #[test]
    fn filon_at_zero_frequency_is_simpson() {
        let n = 201;
        let h = 0.01;
        let f: Vec<f64> = (0..n).map(|j| (j as f64 * h).powi(3) + 1.0).collect();
        let b: f64 = (n - 1) as f64 * h;
        assert_abs_diff_eq!(filon_cos(&f, h, 0.0), b.powi(4) / 4.0 + b, epsilon = 1e-12);
        assert_eq!(filon_sin(&f, h, 0.0), 0.0);
    }
}
