//! Drift-diffusion limit ∂_t n = (τ₀c²/2) ∇·[∇n ± μ(n) ∇V].

use crate::error::{Error, Result};
use crate::scales::PhysicalScales;
use crate::solver::Mesh;
use crate::special::fermi::{fermi_phi_inverse, softplus};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which closure limit supplies the mobility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    General,
    MaxwellBoltzmann,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub regime: Regime,
    pub tau0: f64,
    pub mesh: Mesh,
    /// Potential energy per cell.
    pub v: Vec<f64>,
    /// +1 for electrons, -1 for holes.
    pub sign: f64,
    pub scales: PhysicalScales,
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        self.scales.validate()?;
        if !(self.tau0 > 0.0) {
            return Err(Error::domain(
                "DiffusionConfig",
                format!("τ₀ = {} must be positive", self.tau0),
            ));
        }
        if self.sign.abs() != 1.0 {
            return Err(Error::domain("DiffusionConfig", "species sign must be ±1"));
        }
        if self.v.len() != self.mesh.cells() {
            return Err(Error::domain("DiffusionConfig", "potential does not match the mesh"));
        }
        Ok(())
    }

    /// D = τ₀c²/2.
    pub fn diffusivity(&self) -> f64 {
        0.5 * self.tau0 * self.scales.c * self.scales.c
    }

    /// Explicit limit Δx²/(2dD).
    pub fn max_dt(&self) -> f64 {
        self.mesh.dx * self.mesh.dx / (2.0 * self.mesh.dim() as f64 * self.diffusivity())
    }
}

/// Mobility μ(n) multiplying ∇V inside the bracket.
pub fn mobility(regime: Regime, n: f64, scales: &PhysicalScales) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::domain("mobility", format!("density {n} must be positive")));
    }
    Ok(match regime {
        Regime::General => scales.n_t() / scales.kbt * softplus(fermi_phi_inverse(n / scales.n_t())?),
        Regime::MaxwellBoltzmann => n / scales.kbt,
        Regime::Degenerate => n.sqrt() / (scales.hbar * scales.c * PI.sqrt()),
    })
}

/// Potential g(n) with g'(n) = 1/μ(n); g ± V is constant on steady states.
pub fn chemical_potential(regime: Regime, n: f64, scales: &PhysicalScales) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::domain(
            "chemical_potential",
            format!("density {n} must be positive"),
        ));
    }
    Ok(match regime {
        Regime::General => scales.kbt * fermi_phi_inverse(n / scales.n_t())?,
        Regime::MaxwellBoltzmann => scales.kbt * (n / scales.n_t()).ln(),
        Regime::Degenerate => 2.0 * scales.hbar * scales.c * PI.sqrt() * n.sqrt(),
    })
}

/// Face flux between cells l and r (towards r), Scharfetter-Gummel style:
/// the face mobility is the secant Δn/Δg so that steady states carry zero flux.
fn face_flux(cfg: &DiffusionConfig, nl: f64, nr: f64, gl: f64, gr: f64, vl: f64, vr: f64) -> Result<f64> {
    let dn = nr - nl;
    let dg = gr - gl;
    let mu = if dg.abs() > 1e-10 * (gl.abs() + gr.abs()).max(1e-300) {
        dn / dg
    } else {
        mobility(cfg.regime, 0.5 * (nl + nr), &cfg.scales)?
    };
    Ok(-cfg.diffusivity() * (dn + cfg.sign * mu * (vr - vl)) / cfg.mesh.dx)
}

/// Right-hand side ∂_t n of the flux-form discretization.
pub fn drift_diffusion_rhs(cfg: &DiffusionConfig, n: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mesh = cfg.mesh;
    if n.len() != mesh.cells() {
        return Err(Error::domain("drift_diffusion_rhs", "density does not match the mesh"));
    }
    let g = n
        .iter()
        .enumerate()
        .map(|(k, &nk)| {
            chemical_potential(cfg.regime, nk, &cfg.scales).map_err(|_| Error::Invariant {
                cell: k,
                detail: format!("non-positive density {nk}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; n.len()];
    for k in 0..n.len() {
        let (_, r) = mesh.x_neighbors(k);
        let f = face_flux(cfg, n[k], n[r], g[k], g[r], cfg.v[k], cfg.v[r])?;
        out[k] -= f / mesh.dx;
        out[r] += f / mesh.dx;
        if mesh.dim() == 2 {
            let (_, u) = mesh.y_neighbors(k);
            let f = face_flux(cfg, n[k], n[u], g[k], g[u], cfg.v[k], cfg.v[u])?;
            out[k] -= f / mesh.dx;
            out[u] += f / mesh.dx;
        }
    }
    Ok(out)
}

/// Forward-Euler step; rejects unstable steps and negative results.
pub fn drift_diffusion_step(cfg: &DiffusionConfig, n: &[f64], dt: f64) -> Result<Vec<f64>> {
    let limit = cfg.max_dt();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, limit });
    }
    let rhs = drift_diffusion_rhs(cfg, n)?;
    let out: Vec<f64> = n.iter().zip(&rhs).map(|(a, r)| a + dt * r).collect();
    if let Some(k) = out.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Invariant {
            cell: k,
            detail: format!("density {} after drift-diffusion step", out[k]),
        });
    }
    Ok(out)
}

/// Integrates to `t_end` with steps of at most `safety` times the stability limit.
pub fn run_drift_diffusion(cfg: &DiffusionConfig, n0: &[f64], t_end: f64, safety: f64) -> Result<Vec<f64>> {
    let dt_max = safety.clamp(1e-6, 1.0) * cfg.max_dt();
    let steps = (t_end / dt_max).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut n = n0.to_vec();
    for _ in 0..steps {
        n = drift_diffusion_step(cfg, &n, dt)?;
    }
    Ok(n)
}

/// max |∂_t n| relative to the diffusive scale D·max(n)/Δx².
pub fn stationarity_residual(cfg: &DiffusionConfig, n: &[f64]) -> Result<f64> {
    let rhs = drift_diffusion_rhs(cfg, n)?;
    let scale = cfg.diffusivity() * n.iter().fold(0.0f64, |a, b| a.max(b.abs())) / (cfg.mesh.dx * cfg.mesh.dx);
    Ok(rhs.iter().fold(0.0f64, |a, b| a.max(b.abs())) / scale)
}

/// Zero-flux state: g(n) ± V = g(n_ref) ± V_ref for the regime.
pub fn steady_state(cfg: &DiffusionConfig, n_at_zero_potential: f64) -> Result<Vec<f64>> {
    let sc = &cfg.scales;
    let g0 = chemical_potential(cfg.regime, n_at_zero_potential, sc)?;
    cfg.v
        .iter()
        .map(|&v| {
            let g = g0 - cfg.sign * v;
            match cfg.regime {
                Regime::General => Ok(sc.n_t() * crate::special::fermi::phi_int(2, g / sc.kbt)),
                Regime::MaxwellBoltzmann => Ok(sc.n_t() * (g / sc.kbt).exp()),
                Regime::Degenerate => {
                    let root = g / (2.0 * sc.hbar * sc.c * PI.sqrt());
                    if root > 0.0 {
                        Ok(root * root)
                    } else {
                        Err(Error::domain("steady_state", "degenerate profile reaches zero density"))
                    }
                }
            }
        })
        .collect()
}
