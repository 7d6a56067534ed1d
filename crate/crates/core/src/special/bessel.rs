//! Modified Bessel functions of the first kind, I_N(x).
//!
//! The Taylor coefficients at the origin follow the standard series:
//! the j-th derivative of I_N at 0 with j = N + 2n equals
//! j! / (2^{N+2n} n! (N+n)!) and vanishes otherwise. Some references print
//! 2^{-(N+2n)}/(N+n)!, which drops the j!/n! factor and is inconsistent with
//! the expansion of the angular kernels.

use crate::error::{Error, Result};
use std::f64::consts::PI;

fn asymptotic_threshold(n: u32) -> f64 {
    40.0 + (n as f64).powi(2)
}

/// Asymptotic series terms a_k(n) / x^k for e^{-x} I_n(x) √(2πx).
fn asymptotic_sum(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// e^{-x} I_n(x) by the power series, summed in log space.
fn scaled_series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let q = half * half;
    let nf = n as f64;
    if x < 600.0 && n < 150 {
        let lead = half.powi(n as i32) / libm::tgamma(nf + 1.0) * (-x).exp();
        let mut t = 1.0;
        let mut sum = 1.0;
        for k in 0.. {
            let kf = k as f64;
            t *= q / ((kf + 1.0) * (kf + 1.0 + nf));
            sum += t;
            if kf > half && t < 1e-17 * sum {
                break;
            }
        }
        return lead * sum;
    }
    // Log-space summation for arguments where the prefactor would underflow.
    let ln_t0 = nf * half.ln() - libm::lgamma(nf + 1.0);
    let mut ln_terms = Vec::new();
    let mut ln_t = ln_t0;
    let mut ln_max = ln_t0;
    for k in 0.. {
        ln_terms.push(ln_t);
        ln_max = ln_max.max(ln_t);
        let kf = k as f64;
        ln_t += q.ln() - ((kf + 1.0) * (kf + 1.0 + nf)).ln();
        if kf > half && ln_t < ln_max - 40.0 {
            break;
        }
    }
    let s: f64 = ln_terms.iter().map(|l| (l - ln_max).exp()).sum();
    (ln_max + s.ln() - x).exp()
}

/// e^{-x} I_n(x) for x >= 0.
pub fn bessel_i_scaled(n: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax > asymptotic_threshold(n) {
        asymptotic_sum(n, ax) / (2.0 * PI * ax).sqrt()
    } else {
        scaled_series(n, ax)
    };
    if x < 0.0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

/// I_n(x).
pub fn bessel_i(n: u32, x: f64) -> f64 {
    bessel_i_scaled(n, x) * x.abs().exp()
}

/// j-th derivative of I_n at the origin.
pub fn bessel_i_derivative_at_zero(n: u32, j: u32) -> f64 {
    if j < n || (j - n) % 2 == 1 {
        return 0.0;
    }
    let m = (j - n) / 2;
    let ln = libm::lgamma(j as f64 + 1.0)
        - (j as f64) * std::f64::consts::LN_2
        - libm::lgamma(m as f64 + 1.0)
        - libm::lgamma((n + m) as f64 + 1.0);
    ln.exp()
}

/// I_1(B)/I_0(B).
pub fn bessel_ratio(b: f64) -> f64 {
    bessel_i_scaled(1, b) / bessel_i_scaled(0, b)
}

/// 1 - I_1(B)/I_0(B), without cancellation for large B.
pub fn bessel_ratio_complement(b: f64) -> f64 {
    if b > asymptotic_threshold(1) {
        // (I_0 - I_1) e^{-b} √(2πb) = Σ (-1)^k [a_k(0) - a_k(1)] / b^k
        let mut t0 = 1.0;
        let mut t1 = 1.0;
        let mut diff = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            let o = (2.0 * kf - 1.0).powi(2);
            let n0 = -t0 * (0.0 - o) / (kf * 8.0 * b);
            let n1 = -t1 * (4.0 - o) / (kf * 8.0 * b);
            if n0.abs() > t0.abs() {
                break;
            }
            t0 = n0;
            t1 = n1;
            diff += t0 - t1;
            if (t0 - t1).abs() < 1e-18 * diff.abs() {
                break;
            }
        }
        diff / asymptotic_sum(0, b)
    } else {
        1.0 - bessel_ratio(b)
    }
}

/// Solves I_1(B)/I_0(B) = u for B >= 0, with u in [0, 1).
pub fn bessel_ratio_inverse(u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain("bessel_ratio_inverse", format!("u = {u} outside [0, 1)")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    // Best & Fisher starting value.
    let mut b = if u < 0.53 {
        2.0 * u + u.powi(3) + 5.0 * u.powi(5) / 6.0
    } else if u < 0.85 {
        -0.4 + 1.39 * u + 0.43 / (1.0 - u)
    } else {
        1.0 / (u.powi(3) - 4.0 * u * u + 3.0 * u)
    };
    let use_complement = u > 0.5;
    let target_c = 1.0 - u;
    let resid = |b: f64| {
        if use_complement {
            target_c - bessel_ratio_complement(b)
        } else {
            bessel_ratio(b) - u
        }
    };
    let mut lo = 0.0;
    let mut hi = b.max(1e-3);
    while resid(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence {
                routine: "bessel_ratio_inverse",
                iterations: 0,
            });
        }
    }
    b = b.clamp(lo, hi);
    for _ in 0..200 {
        let f = resid(b);
        if f == 0.0 {
            return Ok(b);
        }
        if f > 0.0 {
            hi = b;
        } else {
            lo = b;
        }
        let r = bessel_ratio(b);
        let deriv = if b > 0.0 { 1.0 - r / b - r * r } else { 0.5 };
        let mut next = b - f / deriv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - b).abs();
        b = next;
        if step <= 4e-16 * b || hi - lo <= 4e-16 * b {
            return Ok(b);
        }
    }
    Err(Error::NoConvergence {
        routine: "bessel_ratio_inverse",
        iterations: 200,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.8
        assert!((bessel_i(0, 1.0) - 1.2660658777520082).abs() < 1e-15);
        assert!((bessel_i(1, 1.0) - 0.5651591039924851).abs() < 1e-15);
        assert!((bessel_i(2, 2.0) - 0.6889484476987382).abs() < 1e-15);
        assert_eq!(bessel_i(0, 0.0), 1.0);
        assert_eq!(bessel_i(1, 0.0), 0.0);
    }

    #[test]
    fn branches_agree_at_threshold() {
        for n in 0..5 {
            let x = asymptotic_threshold(n);
            let a = scaled_series(n, x);
            let b = asymptotic_sum(n, x) / (2.0 * PI * x).sqrt();
            assert!((a - b).abs() < 1e-14 * a, "n={n}: {a} {b}");
        }
    }

    #[test]
    fn ratio_inverse_round_trip() {
        for u in [1e-6, 0.1, 0.5, 0.53, 0.84, 0.9, 0.999, 1.0 - 1e-9] {
            let b = bessel_ratio_inverse(u).unwrap();
            let back = 1.0 - bessel_ratio_complement(b);
            assert!((back - u).abs() < 1e-14, "u={u}");
        }
    }

    #[test]
    fn complement_matches_direct() {
        for b in [45.0, 60.0, 200.0] {
            let direct = 1.0 - bessel_ratio(b);
            assert!((bessel_ratio_complement(b) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_coefficients() {
        assert_eq!(bessel_i_derivative_at_zero(0, 0), 1.0);
        assert!((bessel_i_derivative_at_zero(2, 2) - 0.25).abs() < 1e-16);
        assert!((bessel_i_derivative_at_zero(0, 2) - 0.5).abs() < 1e-16);
        assert_eq!(bessel_i_derivative_at_zero(1, 2), 0.0);
    }
}
