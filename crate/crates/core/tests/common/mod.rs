//! Brute-force momentum-space quadrature of equilibrium moments, used as an
//! independent oracle for the closure.
#![allow(dead_code)]

use graphene_hydro::quadrature::GaussLegendre;
use std::f64::consts::PI;

pub struct Moments2d {
    pub n: f64,
    pub nu: [f64; 2],
    pub p: [[f64; 2]; 2],
    pub q: [[f64; 2]; 2],
    /// ⟨k_BT s(f) + c|p| f⟩, without the potential term.
    pub eps: f64,
    /// ⟨ν_i (k_BT s(f) + c|p| f)⟩ / c, without the potential term.
    pub eps_flux: [f64; 2],
}

fn occupation(y: f64) -> f64 {
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// Fermion entropy f ln f + (1-f) ln(1-f) written in terms of y = ln((1-f)/f).
fn entropy(y: f64) -> f64 {
    // = -f y - ln(1 + e^{-y})
    let f = occupation(y);
    let softplus_neg = if y > 0.0 {
        (-y).exp().ln_1p()
    } else {
        -y + y.exp().ln_1p()
    };
    -f * y - softplus_neg
}

/// Moments of f = 1/(exp(x - A - B cos(θ - θ_B)) + 1) in reduced units
/// (c = k_BT = ħ = 1, so n_T = 1/2π), with x = c|p|/k_BT.
pub fn momentum_moments(a: f64, b: f64, theta_b: f64) -> Moments2d {
    let n_t = 1.0 / (2.0 * PI);
    let rule = GaussLegendre::new(24);
    let n_theta = 512;
    let x_max = (a + b).max(0.0) + 60.0;
    let panel = 0.5;
    let n_panels = (x_max / panel).ceil() as usize;
    let mut out = Moments2d {
        n: 0.0,
        nu: [0.0; 2],
        p: [[0.0; 2]; 2],
        q: [[0.0; 2]; 2],
        eps: 0.0,
        eps_flux: [0.0; 2],
    };
    for k in 0..n_theta {
        let th = 2.0 * PI * k as f64 / n_theta as f64;
        let w = [th.cos(), th.sin()];
        let eta = a + b * (th - theta_b).cos();
        let (mut r1, mut r0, mut re) = (0.0, 0.0, 0.0);
        for j in 0..n_panels {
            let lo = j as f64 * panel;
            let hi = lo + panel;
            r1 += rule.integrate(lo, hi, |x| x * occupation(x - eta));
            r0 += rule.integrate(lo, hi, |x| occupation(x - eta));
            re += rule.integrate(lo, hi, |x| x * (entropy(x - eta) + x * occupation(x - eta)));
        }
        let wt = n_t / n_theta as f64;
        out.n += wt * r1;
        out.eps += wt * re;
        for i in 0..2 {
            out.nu[i] += wt * w[i] * r1;
            out.eps_flux[i] += wt * w[i] * re;
            for j in 0..2 {
                out.p[i][j] += wt * w[i] * w[j] * r1;
                let delta = if i == j { 1.0 } else { 0.0 };
                out.q[i][j] += wt * (delta - w[i] * w[j]) * r0;
            }
        }
    }
    out
}
