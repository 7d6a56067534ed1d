//! Complete Fermi-Dirac integrals φ_s(x) = -Li_s(-e^x).
//!
//! Integer orders use closed forms, the dilogarithm, reflection and Taylor
//! expansions around zero. Negative integer orders use rational functions of
//! the logistic function for small orders and a pole expansion otherwise.
//! Non-integer positive orders fall back on adaptive quadrature of the
//! defining integral.

use super::eta::{eta, eta_int, eta_over_factorial_ln};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Order s of a Fermi integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiOrder(pub f64);

impl FermiOrder {
    /// The order as an integer, when it is one (and in the tabulated range).
    pub fn as_integer(self) -> Option<i32> {
        let s = self.0;
        (s.fract() == 0.0 && s.abs() < 1e6).then_some(s as i32)
    }
}

impl From<f64> for FermiOrder {
    fn from(s: f64) -> Self {
        FermiOrder(s)
    }
}

impl From<i32> for FermiOrder {
    fn from(k: i32) -> Self {
        FermiOrder(k as f64)
    }
}

/// Logistic function, φ_0.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x), φ_1.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// B_{2k} / (2k+1)!, k = 1..
const DILOG_COEF: [f64; 10] = [
    1.0 / 6.0 / 6.0,
    -1.0 / 30.0 / 120.0,
    1.0 / 42.0 / 5040.0,
    -1.0 / 30.0 / 362880.0,
    5.0 / 66.0 / 39916800.0,
    -691.0 / 2730.0 / 6227020800.0,
    7.0 / 6.0 / 1307674368000.0,
    -3617.0 / 510.0 / 355687428096000.0,
    43867.0 / 798.0 / 121645100408832000.0,
    -174611.0 / 330.0 / 51090942171709440000.0,
];

/// φ_2 for x <= 0 via Li_2(z) = Σ B_n u^{n+1}/(n+1)!, u = -ln(1 - z).
fn phi2_nonpositive(x: f64) -> f64 {
    let u = -x.exp().ln_1p();
    let u2 = u * u;
    let mut pow = u * u2;
    let mut tail = 0.0;
    for c in DILOG_COEF {
        tail += c * pow;
        pow *= u2;
    }
    -(u - 0.25 * u2 + tail)
}

fn phi2(x: f64) -> f64 {
    if x <= 0.0 {
        phi2_nonpositive(x)
    } else {
        0.5 * x * x + PI * PI / 6.0 - phi2_nonpositive(-x)
    }
}

/// Reflection polynomial: φ_k(x) + (-1)^k φ_k(-x) = 2 Σ_j h(2j) x^{k-2j}/(k-2j)!.
fn reflection_poly(k: i32, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut j = 0;
    while 2 * j <= k {
        let p = k - 2 * j;
        sum += 2.0 * eta_int(2 * j) * x.powi(p) / libm::tgamma(p as f64 + 1.0);
        j += 1;
    }
    sum
}

/// φ_k for k >= 3 and x <= 0.
fn phi_pos_nonpositive(k: i32, x: f64) -> f64 {
    if x <= -LN_2 {
        let t = x.exp();
        let mut tj = t;
        let mut sum = 0.0;
        for j in 1..200 {
            let term = tj / (j as f64).powi(k);
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-17 * sum {
                break;
            }
            tj *= t;
        }
        sum
    } else {
        // Taylor expansion around zero: Σ h(k-m) x^m / m!.
        // h vanishes at even negative integers, so wait for two small terms.
        let mut sum = 0.0;
        let mut pw = 1.0;
        let mut quiet = 0;
        for m in 0..120 {
            let term = eta_int(k - m) * pw;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
            pw *= x / (m + 1) as f64;
        }
        sum
    }
}

fn phi_pos(k: i32, x: f64) -> f64 {
    if x <= 0.0 {
        phi_pos_nonpositive(k, x)
    } else {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        reflection_poly(k, x) + sign * phi_pos_nonpositive(k, -x)
    }
}

const MAX_POLY_ORDER: usize = 8;

/// Coefficients (in powers of σ) of φ_{-m} as a polynomial in the logistic σ.
fn logistic_polys() -> &'static Vec<Vec<f64>> {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut polys = vec![vec![0.0, 1.0]];
        for m in 0..MAX_POLY_ORDER {
            let p = &polys[m];
            // d/dx P(σ) = P'(σ) (σ - σ²)
            let mut next = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate().skip(1) {
                let d = c * i as f64;
                next[i] += d;
                next[i + 1] -= d;
            }
            polys.push(next);
        }
        polys
    })
}

/// φ_{-m}(y) for y <= 0 as a sum over the poles of the Fermi function.
fn phi_neg_poles(m: u32, y: f64) -> f64 {
    let p = (m + 1) as f64;
    let ln_fact = libm::lgamma(m as f64 + 1.0);
    let mut sum = 0.0;
    let mut first = 0.0;
    let mut j = 1u32;
    loop {
        let b = PI * j as f64;
        let r = y.hypot(b);
        let th = b.atan2(y);
        let mag = (ln_fact - p * r.ln()).exp();
        sum += mag * (p * th).cos();
        if j == 1 {
            first = mag;
        } else if mag < 1e-18 * first || j > 200_000 {
            break;
        }
        j += 2;
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * sign * sum
}

/// φ_{-m}(y) for y <= 0 from the alternating series Σ (-1)^{j+1} j^m e^{jy}.
fn phi_neg_direct(m: u32, y: f64) -> f64 {
    let peak = m as f64 / -y;
    let mut sum = 0.0;
    for j in 1..100_000u32 {
        let jf = j as f64;
        let term = (m as f64 * jf.ln() + jf * y).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if jf > peak && term < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn phi_neg(m: u32, x: f64) -> f64 {
    let y = -x.abs();
    let v = if (m as usize) <= MAX_POLY_ORDER {
        let sigma = logistic(y);
        let poly = &logistic_polys()[m as usize];
        poly.iter().rev().fold(0.0, |acc, c| acc * sigma + c)
    } else if -y >= m as f64 {
        phi_neg_direct(m, y)
    } else {
        phi_neg_poles(m, y)
    };
    if x > 0.0 && m % 2 == 0 {
        -v
    } else {
        v
    }
}

/// φ_k(x) for integer k. Infallible fast path used by the kernels.
pub fn phi_int(k: i32, x: f64) -> f64 {
    match k {
        0 => logistic(x),
        1 => softplus(x),
        2 => phi2(x),
        k if k > 2 => phi_pos(k, x),
        k => phi_neg((-k) as u32, x),
    }
}

/// φ_s(x) for s > 0 from the defining integral (1/Γ(s)) ∫ t^{s-1}/(e^{t-x}+1) dt.
pub fn fermi_phi_integral(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::UnsupportedOrder(s));
    }
    let occ = |t: f64| {
        let z = t - x;
        if z > 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    };
    // On [0, 1] substitute w = t^s to remove the endpoint singularity.
    let head = integrate_adaptive(|w: f64| occ(w.powf(1.0 / s)), 0.0, 1.0, 0.0, 1e-14)? / s;
    let t_end = x.max(0.0) + 50.0 + 10.0 * s;
    let mut knots = vec![1.0];
    if x > 1.0 {
        knots.push(x);
    }
    let mut t = 1.0;
    while t + 8.0 < t_end {
        t += 8.0;
        knots.push(t);
    }
    knots.push(t_end);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut body = 0.0;
    for w in knots.windows(2) {
        body += integrate_adaptive(|t: f64| t.powf(s - 1.0) * occ(t), w[0], w[1], 0.0, 1e-14)?;
    }
    Ok((head + body) / libm::tgamma(s))
}

/// φ_s(x) = -Li_s(-e^x).
///
/// Integer orders of any sign use closed forms. Non-integer orders need
/// s > 0 and are integrated numerically.
pub fn fermi_phi(order: impl Into<FermiOrder>, x: f64) -> Result<f64> {
    let order = order.into();
    if !x.is_finite() {
        return Err(Error::domain("fermi_phi", format!("non-finite argument {x}")));
    }
    let v = match order.as_integer() {
        Some(k) if (-400..=64).contains(&k) => phi_int(k, x),
        _ => fermi_phi_integral(order.0, x)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain("fermi_phi", format!("φ_{}({x}) overflows", order.0)))
    }
}

/// Power series Σ h(s-k) x^k / k!, convergent for |x| < π.
pub fn fermi_phi_series(order: impl Into<FermiOrder>, x: f64) -> Result<f64> {
    let s = order.into().0;
    if !(x.abs() < PI) {
        return Err(Error::domain("fermi_phi_series", format!("|x| = {} >= π", x.abs())));
    }
    if x == 0.0 {
        return Ok(eta(s));
    }
    let int_order = FermiOrder(s).as_integer().filter(|k| k.abs() < 1000);
    let ln_x = x.abs().ln();
    let ratio = x / PI;
    let mut sum = 0.0;
    let mut small = 0;
    for k in 0..20_000u32 {
        let term = match int_order {
            Some(si) => integer_series_term(si, k, ratio),
            None => match eta_over_factorial_ln(s, k) {
                Some((sign, ln)) => {
                    let parity = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                    sign * parity * (ln + k as f64 * ln_x).exp()
                }
                None => 0.0,
            },
        };
        sum += term;
        // two consecutive negligible terms (one of each parity pair may vanish)
        if term.abs() <= 1e-17 * sum.abs() {
            small += 1;
            if small >= 2 && k > 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence {
        routine: "fermi_phi_series",
        iterations: 20_000,
    })
}

/// Term h(s-k) x^k / k! of the Taylor series for integer s, with ratio = x/π.
///
/// For s - k = -m < 0 the coefficient is written through the odd-integer
/// zeta sum λ(m+1) so that no factorial or power of π is formed explicitly.
fn integer_series_term(s: i32, k: u32, ratio: f64) -> f64 {
    let j = s - k as i32;
    if j >= 0 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        return eta_int(j) * (ratio * PI).powi(k as i32) / fact;
    }
    let m = (-j) as u32;
    if m % 2 == 0 {
        return 0.0;
    }
    let p = (m + 1) as f64;
    let lambda = eta(p) * (1.0 - 2f64.powf(-p)) / (1.0 - 2f64.powf(1.0 - p));
    // m!/k! with k = m + s
    let fact_ratio = if s > 0 {
        1.0 / (1..=s as u32).map(|i| (m + i) as f64).product::<f64>()
    } else {
        (0..(-s) as u32).map(|i| (m - i) as f64).product::<f64>()
    };
    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    let sign_pole = if m.div_ceil(2) % 2 == 0 { 1.0 } else { -1.0 };
    sign_m * sign_pole * 2.0 * lambda * fact_ratio * PI.powi(s - 1) * ratio.powi(k as i32)
}

/// Inverse of φ_2 on (0, ∞).
pub fn fermi_phi_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain("fermi_phi_inverse", format!("y = {y} must be positive")));
    }
    let mut lo = y.ln();
    let mut hi = if y <= PI * PI / 12.0 { 0.0 } else { (2.0 * y).sqrt() };
    let mut x = if y < 0.1 {
        lo
    } else if y > 10.0 {
        (2.0 * (y - PI * PI / 6.0)).sqrt()
    } else {
        0.5 * (lo + hi)
    };
    x = x.clamp(lo, hi);
    for _ in 0..200 {
        let f = phi2(x) - y;
        if f == 0.0 {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - f / softplus(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let dx = (next - x).abs();
        x = next;
        if dx <= 1e-16 * x.abs().max(1.0) || hi - lo <= 1e-16 * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        routine: "fermi_phi_inverse",
        iterations: 200,
    })
}

/// φ_s(0) = h(s).
pub fn series_coefficient(s: f64) -> f64 {
    eta(s)
}
