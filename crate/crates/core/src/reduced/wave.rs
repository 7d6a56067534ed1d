//! Linear-response wave equation ∂²_t n = (c²/2) Δn ± κ ∇·[φ₁(A₀) ∇V].

use crate::error::{Error, Result};
use crate::scales::PhysicalScales;
use crate::solver::Mesh;
use crate::special::fermi::{fermi_phi_inverse, softplus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveConfig {
    pub mesh: Mesh,
    pub scales: PhysicalScales,
    /// Potential energy per cell (static).
    pub v: Vec<f64>,
    /// Background density at which the mobility factor is frozen.
    pub n0: f64,
    pub sign: f64,
}

/// Propagation speed c/√2.
pub fn wave_speed(scales: &PhysicalScales) -> f64 {
    scales.c / std::f64::consts::SQRT_2
}

impl WaveConfig {
    pub fn validate(&self) -> Result<()> {
        self.scales.validate()?;
        if self.v.len() != self.mesh.cells() {
            return Err(Error::domain("WaveConfig", "potential does not match the mesh"));
        }
        if !(self.n0 > 0.0) {
            return Err(Error::domain("WaveConfig", "background density must be positive"));
        }
        Ok(())
    }

    /// Leapfrog limit Δx/(c_w √d).
    pub fn max_dt(&self) -> f64 {
        self.mesh.dx / (wave_speed(&self.scales) * (self.mesh.dim() as f64).sqrt())
    }

    /// Frozen forcing ± c Q(A₀, 0) ΔV = ± (n_T c²/2k_BT) φ₁(A₀) ΔV.
    pub fn source(&self) -> Result<Vec<f64>> {
        let sc = &self.scales;
        let a0 = fermi_phi_inverse(self.n0 / sc.n_t())?;
        let kappa = 0.5 * sc.n_t() * sc.c * sc.c / sc.kbt * softplus(a0);
        Ok(self
            .mesh
            .laplacian(&self.v)
            .into_iter()
            .map(|l| self.sign * kappa * l)
            .collect())
    }
}

/// n^{k+1} = 2n^k - n^{k-1} + dt² [c_w² Δn^k + s].
pub fn wave_step(cfg: &WaveConfig, n_prev: &[f64], n_curr: &[f64], dt: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let limit = cfg.max_dt();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, limit });
    }
    let src = cfg.source()?;
    Ok(advance(cfg, n_prev, n_curr, &src, dt))
}

fn advance(cfg: &WaveConfig, n_prev: &[f64], n_curr: &[f64], src: &[f64], dt: f64) -> Vec<f64> {
    let cw2 = wave_speed(&cfg.scales).powi(2);
    let lap = cfg.mesh.laplacian(n_curr);
    (0..n_curr.len())
        .map(|k| 2.0 * n_curr[k] - n_prev[k] + dt * dt * (cw2 * lap[k] + src[k]))
        .collect()
}

/// Runs `steps` leapfrog steps from (n⁰, n¹); returns the last two levels.
pub fn run_wave(
    cfg: &WaveConfig,
    mut n_prev: Vec<f64>,
    mut n_curr: Vec<f64>,
    dt: f64,
    steps: usize,
    mut on_step: impl FnMut(usize, &[f64], &[f64]),
) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let limit = cfg.max_dt();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, limit });
    }
    let src = cfg.source()?;
    for s in 0..steps {
        let next = advance(cfg, &n_prev, &n_curr, &src, dt);
        n_prev = std::mem::replace(&mut n_curr, next);
        on_step(s + 1, &n_prev, &n_curr);
    }
    Ok((n_prev, n_curr))
}

/// Energy conserved exactly by leapfrog at V = 0:
/// ‖(n^{k+1} - n^k)/dt‖² + c_w² ⟨∇n^{k+1}, ∇n^k⟩, a discrete form of ∫(∂_t n)² + (c²/2)|∇n|².
pub fn wave_energy(cfg: &WaveConfig, n_prev: &[f64], n_curr: &[f64], dt: f64) -> f64 {
    let cw2 = wave_speed(&cfg.scales).powi(2);
    let lap = cfg.mesh.laplacian(n_prev);
    let vol = cfg.mesh.cell_volume();
    let kinetic: f64 = n_curr.iter().zip(n_prev).map(|(a, b)| ((a - b) / dt).powi(2)).sum();
    let potential: f64 = -n_curr.iter().zip(&lap).map(|(a, l)| a * l).sum::<f64>();
    (kinetic + cw2 * potential) * vol
}
