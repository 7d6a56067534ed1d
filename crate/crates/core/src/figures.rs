//! Data behind the (A, B) ↦ (n, u) map and the regime-function curves, with the
//! structural checks used to validate them.

use crate::closure::regimes::{regime_x, regime_yz};
use crate::error::Result;
use crate::kernels::{kernel_batch, KernelDispatch};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One point of the multiplier-to-moment map; ν = n/n_T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSample {
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub u: f64,
    /// Signed distance (A + B)/√2 to the critical line A = -B.
    pub critical_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub u: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub z_perp: f64,
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn map_sample(a: f64, b: f64) -> Result<MapSample> {
    let v = kernel_batch(a, b, &[(0, 2.0), (1, 2.0)], &KernelDispatch::default())?;
    Ok(MapSample {
        a,
        b,
        nu: v[0],
        u: v[1] / v[0],
        critical_distance: (a + b) / std::f64::consts::SQRT_2,
    })
}

/// Tensor grid over `a` × `b`, row-major in `b`.
pub fn map_samples(a: &[f64], b: &[f64]) -> Result<Vec<MapSample>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &bb in b {
        for &aa in a {
            out.push(map_sample(aa, bb)?);
        }
    }
    Ok(out)
}

pub fn curve_sample(u: f64) -> Result<CurveSample> {
    let yz = regime_yz(u)?;
    Ok(CurveSample {
        u,
        x: regime_x(u)?,
        y: yz.y,
        z: yz.z,
        z_perp: yz.z_perp,
    })
}

pub fn regime_curves(us: &[f64]) -> Result<Vec<CurveSample>> {
    us.iter().map(|&u| curve_sample(u)).collect()
}

/// Outcome of one structural assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureCheck {
    pub name: String,
    pub passed: bool,
    /// The measured quantity compared against its threshold.
    pub value: f64,
    pub threshold: f64,
}

impl FigureCheck {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        FigureCheck {
            name: name.to_string(),
            passed: value <= threshold,
            value,
            threshold,
        }
    }
}

/// Below the critical line u depends on B only: the largest |u(A,B) - u(A',B)| over
/// pairs with A, A' < -B - margin.
pub fn isolines_parallel(b: &[f64], margin: f64, depth: f64) -> Result<FigureCheck> {
    let mut worst: f64 = 0.0;
    for &bb in b {
        let a_hi = -bb - margin;
        let reference = map_sample(a_hi - depth, bb)?.u;
        for a in linspace(a_hi - depth, a_hi, 9) {
            worst = worst.max((map_sample(a, bb)?.u - reference).abs());
        }
    }
    Ok(FigureCheck::at_most(
        "u isolines parallel to A axis below A = -B",
        worst,
        1e-3,
    ))
}

/// Above the critical line u depends on the polar angle only: the largest
/// |u(λA, λB) - u(A, B)| along rays from the origin at radii `r` and 2r.
pub fn isolines_radial(psis: &[f64], r: f64) -> Result<FigureCheck> {
    let mut worst: f64 = 0.0;
    for &psi in psis {
        let (a, b) = (r * psi.cos(), r * psi.sin());
        let near = map_sample(a, b)?.u;
        let far = map_sample(2.0 * a, 2.0 * b)?.u;
        worst = worst.max((far - near).abs());
    }
    Ok(FigureCheck::at_most("u isolines radial above A = -B", worst, 1e-3))
}

/// Monotonicity and endpoint checks on sampled regime curves (u ascending, from 0).
pub fn curve_checks(curves: &[CurveSample]) -> Vec<FigureCheck> {
    let mut out = Vec::new();
    let drops = curves
        .windows(2)
        .map(|w| w[0].x - w[1].x)
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(FigureCheck::at_most("X increasing", drops, 0.0));
    let first = curves.first().copied();
    let last = curves.last().copied();
    if let (Some(f), Some(l)) = (first, last) {
        let tail = 1.0 - l.u;
        out.push(FigureCheck::at_most("X(0) = 1/2", (f.x - 0.5).abs(), 1e-12));
        out.push(FigureCheck::at_most("X -> 1", (1.0 - l.x).abs(), 10.0 * tail));
        out.push(FigureCheck::at_most("Y(0) = 1/2", (f.y - 0.5).abs(), 1e-8));
        out.push(FigureCheck::at_most("Z(0) = 1/2", (f.z - 0.5).abs(), 1e-8));
        out.push(FigureCheck::at_most("Z_perp(0) = 1/2", (f.z_perp - 0.5).abs(), 1e-8));
        // leading terms near |u| = 1, with 5% allowance for the next order
        let z_lead = 14f64.powf(1.25) / (30.0 * PI).sqrt() * tail.powf(1.25);
        let zp_lead = 5f64.sqrt() * 14f64.powf(0.25) / (6.0 * PI).sqrt() * tail.powf(0.25);
        out.push(FigureCheck::at_most("Y -> 1", (1.0 - l.y).abs(), 1.05 * 2.0 * tail));
        out.push(FigureCheck::at_most("Z -> 0", l.z.abs(), 1.05 * z_lead));
        out.push(FigureCheck::at_most("Z_perp -> 0", l.z_perp.abs(), 1.05 * zp_lead));
    }
    out
}
