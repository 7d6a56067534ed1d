//! Collimated flow ∂_t u + c(u·∇)u = ∓c u⊥(u⊥·∇K), K = V/k_BT, and its rays.

use crate::error::{Error, Result};
use crate::solver::Mesh;
use serde::{Deserialize, Serialize};

/// Default bound on max ||u| - 1|.
pub const DEFAULT_DRIFT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollimationRegime {
    /// Force term present.
    MaxwellBoltzmann,
    /// Z, Z⊥ → 0: force terms vanish and u obeys inviscid Burgers.
    Degenerate,
}

/// Boundary in x; y is always periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XBoundary {
    Periodic,
    /// Prescribed u on the left edge, zero-gradient outflow on the right.
    Inflow([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollimationState {
    pub mesh: Mesh,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    /// Optional density carried along by ∂_t n + c∇·(n u) = 0.
    pub n: Option<Vec<f64>>,
    /// K = V/k_BT per cell.
    pub k: Vec<f64>,
    pub boundary: XBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollimationConfig {
    pub c: f64,
    pub sign: f64,
    pub regime: CollimationRegime,
    pub drift_tol: f64,
}

impl CollimationConfig {
    pub fn new(c: f64, sign: f64) -> Self {
        CollimationConfig {
            c,
            sign,
            regime: CollimationRegime::MaxwellBoltzmann,
            drift_tol: DEFAULT_DRIFT_TOL,
        }
    }
}

impl CollimationState {
    /// Uniform unit direction at angle `theta` from the x axis.
    pub fn uniform(mesh: Mesh, theta: f64, k: Vec<f64>, boundary: XBoundary) -> Result<Self> {
        let s = CollimationState {
            mesh,
            ux: vec![theta.cos(); mesh.cells()],
            uy: vec![theta.sin(); mesh.cells()],
            n: None,
            k,
            boundary,
        };
        s.check_sizes()?;
        Ok(s)
    }

    fn check_sizes(&self) -> Result<()> {
        let c = self.mesh.cells();
        let n_ok = self.n.as_ref().map_or(true, |n| n.len() == c);
        if self.ux.len() != c || self.uy.len() != c || self.k.len() != c || !n_ok {
            return Err(Error::domain("CollimationState", "field size does not match mesh"));
        }
        Ok(())
    }

    /// max ||u| - 1| over the grid.
    pub fn norm_drift(&self) -> f64 {
        self.ux
            .iter()
            .zip(&self.uy)
            .map(|(x, y)| (x.hypot(*y) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Left and right x-neighbour values of `f` at cell k, honouring the boundary.
    fn x_pair(&self, f: &[f64], k: usize, inflow: Option<f64>) -> (f64, f64) {
        let (i, _) = self.mesh.ij(k);
        let (l, r) = self.mesh.x_neighbors(k);
        match self.boundary {
            XBoundary::Periodic => (f[l], f[r]),
            XBoundary::Inflow(_) => {
                let left = if i == 0 { inflow.unwrap_or(f[k]) } else { f[l] };
                let right = if i + 1 == self.mesh.nx { f[k] } else { f[r] };
                (left, right)
            }
        }
    }

    /// ∇K by central differences (one-sided at non-periodic edges).
    fn grad_k(&self, k: usize) -> [f64; 2] {
        let mesh = self.mesh;
        let (i, _) = mesh.ij(k);
        let (l, r) = mesh.x_neighbors(k);
        let gx = match self.boundary {
            XBoundary::Inflow(_) if i == 0 => (self.k[r] - self.k[k]) / mesh.dx,
            XBoundary::Inflow(_) if i + 1 == mesh.nx => (self.k[k] - self.k[l]) / mesh.dx,
            _ => (self.k[r] - self.k[l]) / (2.0 * mesh.dx),
        };
        let gy = if mesh.dim() == 2 {
            let (d, u) = mesh.y_neighbors(k);
            (self.k[u] - self.k[d]) / (2.0 * mesh.dx)
        } else {
            0.0
        };
        [gx, gy]
    }
}

/// Upwind transport followed by an exact rotation through ω dt with ω = ∓c u⊥·∇K.
/// The rotation preserves |u|; only the transport step produces norm drift.
pub fn collimation_step(state: &CollimationState, cfg: &CollimationConfig, dt: f64) -> Result<CollimationState> {
    state.check_sizes()?;
    let mesh = state.mesh;
    let limit = mesh.dx / (cfg.c * std::f64::consts::SQRT_2);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, limit });
    }
    let start = state.norm_drift();
    if start > cfg.drift_tol {
        return Err(Error::Invariant {
            cell: 0,
            detail: format!("norm drift {start:e} exceeds {:e}", cfg.drift_tol),
        });
    }
    let inflow = match state.boundary {
        XBoundary::Inflow(u) => Some(u),
        XBoundary::Periodic => None,
    };
    let cells = mesh.cells();
    let mut out = state.clone();
    let h = cfg.c * dt / mesh.dx;
    for k in 0..cells {
        let (ax, ay) = (state.ux[k], state.uy[k]);
        let mut new = [0.0; 2];
        for (comp, f) in [&state.ux, &state.uy].into_iter().enumerate() {
            let (fl, fr) = state.x_pair(f, k, inflow.map(|u| u[comp]));
            let mut d = if ax > 0.0 { ax * (f[k] - fl) } else { ax * (fr - f[k]) };
            if mesh.dim() == 2 {
                let (dn, up) = mesh.y_neighbors(k);
                d += if ay > 0.0 {
                    ay * (f[k] - f[dn])
                } else {
                    ay * (f[up] - f[k])
                };
            }
            new[comp] = f[k] - h * d;
        }
        let omega = match cfg.regime {
            CollimationRegime::MaxwellBoltzmann => {
                let g = state.grad_k(k);
                -cfg.sign * cfg.c * (-ay * g[0] + ax * g[1])
            }
            CollimationRegime::Degenerate => 0.0,
        };
        let (s, c) = (omega * dt).sin_cos();
        out.ux[k] = c * new[0] - s * new[1];
        out.uy[k] = s * new[0] + c * new[1];
    }
    if let Some(n) = &state.n {
        out.n = Some(transport_density(state, n, h, inflow.is_some()));
    }
    let drift = out.norm_drift();
    if drift > cfg.drift_tol {
        let cell = (0..cells)
            .max_by(|&a, &b| {
                let da = (out.ux[a].hypot(out.uy[a]) - 1.0).abs();
                let db = (out.ux[b].hypot(out.uy[b]) - 1.0).abs();
                da.total_cmp(&db)
            })
            .unwrap_or(0);
        return Err(Error::Invariant {
            cell,
            detail: format!("norm drift {drift:e} exceeds {:e}", cfg.drift_tol),
        });
    }
    Ok(out)
}

/// Upwind conservative update of ∂_t n + c∇·(n u) = 0; inflow carries the edge density.
fn transport_density(state: &CollimationState, n: &[f64], h: f64, inflow: bool) -> Vec<f64> {
    let mesh = state.mesh;
    let flux = |a: f64, nl: f64, nr: f64| if a > 0.0 { a * nl } else { a * nr };
    let mut out = n.to_vec();
    for k in 0..mesh.cells() {
        let (i, _) = mesh.ij(k);
        let (l, r) = mesh.x_neighbors(k);
        let right = if inflow && i + 1 == mesh.nx {
            flux(state.ux[k], n[k], n[k])
        } else {
            flux(0.5 * (state.ux[k] + state.ux[r]), n[k], n[r])
        };
        let left = if inflow && i == 0 {
            flux(state.ux[k], n[k], n[k])
        } else {
            flux(0.5 * (state.ux[l] + state.ux[k]), n[l], n[k])
        };
        out[k] -= h * (right - left);
        if mesh.dim() == 2 {
            let (d, u) = mesh.y_neighbors(k);
            let up = flux(0.5 * (state.uy[k] + state.uy[u]), n[k], n[u]);
            let down = flux(0.5 * (state.uy[d] + state.uy[k]), n[d], n[k]);
            out[k] -= h * (up - down);
        }
    }
    out
}

/// Advances to `t_end`; returns the state and the largest drift seen.
pub fn run_collimation(
    state: &CollimationState,
    cfg: &CollimationConfig,
    t_end: f64,
    cfl: f64,
) -> Result<(CollimationState, f64)> {
    let dt_max = cfl.clamp(1e-6, 1.0) * state.mesh.dx / (cfg.c * std::f64::consts::SQRT_2);
    let steps = (t_end / dt_max).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut s = state.clone();
    let mut worst = s.norm_drift();
    for _ in 0..steps {
        s = collimation_step(&s, cfg, dt)?;
        worst = worst.max(s.norm_drift());
    }
    Ok((s, worst))
}

/// Discrete ∇·(e^{∓K} u⊥) with u⊥ = (-u_y, u_x).
pub fn geometric_optics_residual(state: &CollimationState, sign: f64) -> Vec<f64> {
    let mesh = state.mesh;
    let w: Vec<f64> = state.k.iter().map(|k| (-sign * k).exp()).collect();
    let px: Vec<f64> = (0..mesh.cells()).map(|k| -w[k] * state.uy[k]).collect();
    let py: Vec<f64> = (0..mesh.cells()).map(|k| w[k] * state.ux[k]).collect();
    (0..mesh.cells())
        .map(|k| {
            let (i, _) = mesh.ij(k);
            let (l, r) = mesh.x_neighbors(k);
            let dx = match state.boundary {
                XBoundary::Inflow(_) if i == 0 => (px[r] - px[k]) / mesh.dx,
                XBoundary::Inflow(_) if i + 1 == mesh.nx => (px[k] - px[l]) / mesh.dx,
                _ => (px[r] - px[l]) / (2.0 * mesh.dx),
            };
            let dy = if mesh.dim() == 2 {
                let (d, u) = mesh.y_neighbors(k);
                (py[u] - py[d]) / (2.0 * mesh.dx)
            } else {
                0.0
            };
            dx + dy
        })
        .collect()
}

/// Smoothed potential step K(x) = (δK/2)(1 + tanh((x - x0)/w)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPotential {
    pub delta_k: f64,
    pub x0: f64,
    pub width: f64,
}

impl StepPotential {
    /// Step whose width is four grid spacings.
    pub fn for_grid(delta_k: f64, x0: f64, dx: f64) -> Self {
        StepPotential {
            delta_k,
            x0,
            width: 4.0 * dx,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        0.5 * self.delta_k * (1.0 + ((x - self.x0) / self.width).tanh())
    }

    pub fn slope(&self, x: f64) -> f64 {
        let t = ((x - self.x0) / self.width).tanh();
        0.5 * self.delta_k * (1.0 - t * t) / self.width
    }
}

/// Characteristic of the collimation equation: dx/ds = u, dθ/ds = ∓ u⊥·∇K, u = (cos θ, sin θ).
pub fn trace_ray(
    start: [f64; 2],
    theta: f64,
    sign: f64,
    grad_k: impl Fn([f64; 2]) -> [f64; 2],
    ds: f64,
    steps: usize,
) -> Vec<[f64; 3]> {
    let rhs = |y: [f64; 3]| {
        let (s, c) = y[2].sin_cos();
        let g = grad_k([y[0], y[1]]);
        [c, s, -sign * (-s * g[0] + c * g[1])]
    };
    let mut y = [start[0], start[1], theta];
    let mut path = Vec::with_capacity(steps + 1);
    path.push(y);
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * ds * k1[i]));
        let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * ds * k2[i]));
        let k4 = rhs(std::array::from_fn(|i| y[i] + ds * k3[i]));
        y = std::array::from_fn(|i| y[i] + ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        path.push(y);
    }
    path
}

/// Outcome of a ray bundle crossing a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnellReport {
    pub incident: f64,
    /// Far-field refracted angle of each ray.
    pub refracted: Vec<f64>,
    /// sin φ_i / sin φ_r per ray.
    pub ratios: Vec<f64>,
    /// e^{∓δK}.
    pub expected: f64,
    pub rays: Vec<Vec<[f64; 3]>>,
}

/// Launches `count` parallel rays at angle `incident` (from the step normal) and
/// measures their angles well past the step.
pub fn snell_bundle(step: &StepPotential, incident: f64, sign: f64, count: usize, ds: f64) -> Result<SnellReport> {
    if !(incident.abs() > 0.0 && incident.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain("snell_bundle", "incident angle must lie in (0, π/2)"));
    }
    let expected = (-sign * step.delta_k).exp();
    if (incident.sin() / expected).abs() >= 1.0 {
        return Err(Error::domain(
            "snell_bundle",
            "total internal reflection for this angle",
        ));
    }
    let margin = 20.0 * step.width;
    let x_start = step.x0 - margin;
    let x_end = step.x0 + margin;
    let steps = ((x_end - x_start) / (ds * incident.cos().abs().max(0.05)) * 1.5).ceil() as usize;
    let mut refracted = Vec::with_capacity(count);
    let mut rays = Vec::with_capacity(count);
    for r in 0..count {
        let y0 = r as f64 * step.width;
        let mut path = trace_ray([x_start, y0], incident, sign, |p| [step.slope(p[0]), 0.0], ds, steps);
        if let Some(cut) = path.iter().position(|p| p[0] >= x_end) {
            path.truncate(cut + 1);
        } else {
            return Err(Error::domain("snell_bundle", "ray did not cross the step"));
        }
        refracted.push(path.last().map(|p| p[2]).unwrap_or(incident));
        rays.push(path);
    }
    let ratios = refracted.iter().map(|r| incident.sin() / r.sin()).collect();
    Ok(SnellReport {
        incident,
        refracted,
        ratios,
        expected,
        rays,
    })
}
