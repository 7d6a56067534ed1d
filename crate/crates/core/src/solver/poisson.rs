//! Spectral solve of γ (-Δ)^{1/2} V = n₊ - n₋ on a periodic grid.

use super::mesh::Mesh;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

fn wavenumber(i: usize, n: usize, length: f64) -> f64 {
    let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    2.0 * PI * m / length
}

/// Applies the Fourier multiplier `symbol(|k|)` to a real periodic field.
fn apply_multiplier(mesh: &Mesh, field: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let (nx, ny) = (mesh.nx, mesh.ny);
    let (lx, ly) = mesh.lengths();
    let mut planner = FftPlanner::<f64>::new();
    let fx = planner.plan_fft_forward(nx);
    let bx = planner.plan_fft_inverse(nx);
    let mut data: Vec<Complex<f64>> = field.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in data.chunks_mut(nx) {
        fx.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); ny];
    let (fy, by) = if ny > 1 {
        (Some(planner.plan_fft_forward(ny)), Some(planner.plan_fft_inverse(ny)))
    } else {
        (None, None)
    };
    if let Some(fy) = &fy {
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            fy.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }
    for j in 0..ny {
        let ky = if ny > 1 { wavenumber(j, ny, ly) } else { 0.0 };
        for i in 0..nx {
            let kx = wavenumber(i, nx, lx);
            data[j * nx + i] *= symbol(kx.hypot(ky));
        }
    }
    if let Some(by) = &by {
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            by.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }
    for row in data.chunks_mut(nx) {
        bx.process(row);
    }
    let norm = (nx * ny) as f64;
    data.iter().map(|c| c.re / norm).collect()
}

/// Zero-mean V with γ (-Δ)^{1/2} V = rho - mean(rho).
pub fn poisson_solve(mesh: &Mesh, rho: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if rho.len() != mesh.cells() {
        return Err(Error::domain("poisson_solve", "charge field does not match the mesh"));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain("poisson_solve", format!("γ = {gamma} must be positive")));
    }
    Ok(apply_multiplier(mesh, rho, |k| {
        if k == 0.0 {
            0.0
        } else {
            1.0 / (gamma * k)
        }
    }))
}

/// γ (-Δ)^{1/2} V, the operator inverted by [`poisson_solve`].
pub fn fractional_laplacian(mesh: &Mesh, v: &[f64], gamma: f64) -> Vec<f64> {
    apply_multiplier(mesh, v, |k| gamma * k)
}
