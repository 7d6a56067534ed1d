//! Dirichlet eta function h(s) = (1 - 2^{1-s}) ζ(s), the value φ_s(0).

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

const BORWEIN_N: usize = 30;

fn borwein_d() -> &'static [f64; BORWEIN_N + 1] {
    static D: OnceLock<[f64; BORWEIN_N + 1]> = OnceLock::new();
    D.get_or_init(|| {
        let n = BORWEIN_N as f64;
        let mut d = [0.0; BORWEIN_N + 1];
        let mut t = 1.0 / n;
        let mut acc = 0.0;
        for (i, di) in d.iter_mut().enumerate() {
            acc += t;
            *di = n * acc;
            let fi = i as f64;
            t *= 4.0 * (n + fi) * (n - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        }
        d
    })
}

/// Borwein's accelerated alternating sum, valid for s >= 0.
fn eta_borwein(s: f64) -> f64 {
    let d = borwein_d();
    let dn = d[BORWEIN_N];
    let mut sum = 0.0;
    for k in 0..BORWEIN_N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / dn
}

/// sin(πx) with exact zeros at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// Sign and natural log of |h(s)|; `None` when h(s) = 0.
fn eta_sign_ln(s: f64) -> Option<(f64, f64)> {
    if s >= 0.0 {
        let v = eta(s);
        return (v != 0.0).then(|| (v.signum(), v.abs().ln()));
    }
    // Functional equation with every factor kept in log space.
    let sn = sin_pi(s / 2.0);
    if sn == 0.0 {
        return None;
    }
    let one_minus_s = 1.0 - s;
    let zeta_reflected = eta_borwein(one_minus_s) / (1.0 - 2f64.powf(s));
    let ln_abs = one_minus_s * LN_2
        + (-(2f64.powf(s - 1.0))).ln_1p()
        + s * LN_2
        + (s - 1.0) * PI.ln()
        + sn.abs().ln()
        + libm::lgamma(one_minus_s)
        + zeta_reflected.ln();
    Some((-sn.signum(), ln_abs))
}

/// h(s) = (1 - 2^{1-s}) ζ(s) for any real s, with h(1) = ln 2.
pub fn eta(s: f64) -> f64 {
    if s == 1.0 {
        return LN_2;
    }
    if s >= 0.0 {
        return eta_borwein(s);
    }
    match eta_sign_ln(s) {
        Some((sign, ln_abs)) => sign * ln_abs.exp(),
        None => 0.0,
    }
}

/// h(s - m) / m!, evaluated without intermediate overflow.
pub fn eta_over_factorial(s: f64, m: u32) -> f64 {
    match eta_over_factorial_ln(s, m) {
        Some((sign, ln_abs)) => sign * ln_abs.exp(),
        None => 0.0,
    }
}

/// Sign and log-magnitude of h(s - m) / m!; `None` when it vanishes.
pub fn eta_over_factorial_ln(s: f64, m: u32) -> Option<(f64, f64)> {
    let (sign, ln_abs) = eta_sign_ln(s - m as f64)?;
    Some((sign, ln_abs - libm::lgamma(m as f64 + 1.0)))
}

const INT_TABLE_MIN: i32 = -160;
const INT_TABLE_MAX: i32 = 64;

/// h(k) for integer k, tabulated once.
pub(crate) fn eta_int(k: i32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (INT_TABLE_MIN..=INT_TABLE_MAX).map(|k| eta(k as f64)).collect());
    if (INT_TABLE_MIN..=INT_TABLE_MAX).contains(&k) {
        table[(k - INT_TABLE_MIN) as usize]
    } else {
        eta(k as f64)
    }
}
