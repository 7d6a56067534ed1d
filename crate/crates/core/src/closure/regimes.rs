//! Regime functions X (Maxwell–Boltzmann) and Y, Z, Z⊥ (degenerate gas).

use crate::error::{Error, Result};
use crate::kernels::degenerate_kernel;
use crate::special::{bessel_i_scaled, bessel_ratio_inverse};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

fn check_u(routine: &'static str, u: f64) -> Result<()> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain(routine, format!("|u| = {u} outside [0, 1)")));
    }
    Ok(())
}

/// X(|u|) = (I_0(B) + I_2(B)) / (2 I_0(B)) with I_1(B)/I_0(B) = |u|.
pub fn regime_x(u: f64) -> Result<f64> {
    check_u("regime_x", u)?;
    let b = bessel_ratio_inverse(u)?;
    let i0 = bessel_i_scaled(0, b);
    Ok(0.5 * (1.0 + bessel_i_scaled(2, b) / i0))
}

/// 𝓕_1^2(ψ) / 𝓕_0^2(ψ), the degenerate-gas |u|.
pub fn degenerate_u(psi: f64) -> Result<f64> {
    Ok(degenerate_kernel(1, 2.0, psi)? / degenerate_kernel(0, 2.0, psi)?)
}

/// Solves 𝓕_1^2(ψ)/𝓕_0^2(ψ) = u for ψ in [0, 3π/4) by bisection.
pub fn psi_from_ratio(u: f64) -> Result<f64> {
    check_u("psi_from_ratio", u)?;
    if u == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 3.0 * FRAC_PI_4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if degenerate_u(mid)? < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Y, Z, Z⊥ and the polar angle ψ at which they were evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeYZ {
    pub y: f64,
    pub z: f64,
    pub z_perp: f64,
    pub psi: f64,
}

/// Degenerate-gas coefficients at |u|.
pub fn regime_yz(u: f64) -> Result<RegimeYZ> {
    check_u("regime_yz", u)?;
    let psi = psi_from_ratio(u)?;
    let f02 = degenerate_kernel(0, 2.0, psi)?;
    let f22 = degenerate_kernel(2, 2.0, psi)?;
    let f01 = degenerate_kernel(0, 1.0, psi)?;
    let f21 = degenerate_kernel(2, 1.0, psi)?;
    let root = (2.0 * f02).sqrt();
    Ok(RegimeYZ {
        y: 0.5 * (f02 + f22) / f02,
        z: 0.5 * (f01 - f21) / root,
        z_perp: 0.5 * (f01 + f21) / root,
        psi,
    })
}
