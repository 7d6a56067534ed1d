//! Finite-volume integration of the bipolar moment system
//! ∂_t n + c ∂_i(n u_i) = 0, ∂_t(n u_i) + c ∂_j P_ij = σ F_j Q_ij - n u_i/τ₀.

use super::mesh::Mesh;
use super::poisson::poisson_solve;
use crate::closure::{close, forward_map, free_energy_density, ClosureTensors, MomentState, Multipliers};
use crate::error::{Error, Result};
use crate::scales::PhysicalScales;
use crate::special::fermi::{phi_int, softplus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Cells whose density falls below this fraction of the reference are floored.
pub const DENSITY_FLOOR: f64 = 1e-14;

/// Density and direction field of one species on the mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesField {
    pub n: Vec<f64>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

impl SpeciesField {
    pub fn uniform(cells: usize, n: f64, u: [f64; 2]) -> Self {
        SpeciesField {
            n: vec![n; cells],
            ux: vec![u[0]; cells],
            uy: vec![u[1]; cells],
        }
    }

    pub fn state(&self, k: usize) -> MomentState {
        MomentState {
            n: self.n[k],
            u: [self.ux[k], self.uy[k]],
        }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }
}

/// Electron and hole fields, potentials and mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub mesh: Mesh,
    pub periodic: [bool; 2],
    /// Index 0: electrons (σ = +1), index 1: holes (σ = -1).
    pub species: [SpeciesField; 2],
    /// Total potential energy V = V_int + V_ext.
    pub v: Vec<f64>,
    pub v_ext: Vec<f64>,
}

impl FieldGrid {
    pub fn uniform(mesh: Mesh, n_electrons: f64, n_holes: f64) -> Self {
        let c = mesh.cells();
        FieldGrid {
            mesh,
            periodic: [true, true],
            species: [
                SpeciesField::uniform(c, n_electrons, [0.0, 0.0]),
                SpeciesField::uniform(c, n_holes, [0.0, 0.0]),
            ],
            v: vec![0.0; c],
            v_ext: vec![0.0; c],
        }
    }

    /// Checks sizes, periodicity and the admissibility n > 0, |u| < 1.
    pub fn validate(&self) -> Result<()> {
        if self.periodic != [true, true] {
            return Err(Error::Unsupported("only periodic grids are supported".into()));
        }
        let cells = self.mesh.cells();
        if self.v.len() != cells || self.v_ext.len() != cells {
            return Err(Error::domain("FieldGrid", "potential size does not match mesh"));
        }
        for sp in &self.species {
            if sp.n.len() != cells || sp.ux.len() != cells || sp.uy.len() != cells {
                return Err(Error::domain("FieldGrid", "field size does not match mesh"));
            }
            for k in 0..cells {
                sp.state(k).validate().map_err(|e| Error::Invariant {
                    cell: k,
                    detail: e.to_string(),
                })?;
            }
        }
        Ok(())
    }

    /// Σ n dx^d for a species.
    pub fn mass(&self, species: usize) -> f64 {
        self.species[species].n.iter().sum::<f64>() * self.mesh.cell_volume()
    }
}

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl: f64,
    /// Relaxation time; `None` switches relaxation off.
    pub tau0: Option<f64>,
    pub t_end: f64,
    pub poisson: bool,
    /// Force sign per species (electrons, holes).
    pub force_sign: [f64; 2],
    pub scales: PhysicalScales,
}

impl SolverConfig {
    pub fn new(scales: PhysicalScales) -> Self {
        SolverConfig {
            cfl: 0.4,
            tau0: Some(scales.tau0),
            t_end: 1.0,
            poisson: false,
            force_sign: [1.0, -1.0],
            scales,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::domain(
                "SolverConfig",
                format!("CFL = {} outside (0, 1)", self.cfl),
            ));
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0) {
                return Err(Error::domain("SolverConfig", format!("τ₀ = {t} must be positive")));
            }
        }
        self.scales.validate()
    }

    /// Largest stable step c·dt ≤ CFL·dx.
    pub fn max_dt(&self, mesh: &Mesh) -> f64 {
        self.cfl * mesh.dx / self.scales.c
    }
}

/// Conserved variables (n, n u_x, n u_y) of one species.
#[derive(Debug, Clone, PartialEq)]
struct Conserved {
    n: Vec<f64>,
    jx: Vec<f64>,
    jy: Vec<f64>,
}

impl Conserved {
    fn from_field(f: &SpeciesField) -> Self {
        Conserved {
            n: f.n.clone(),
            jx: f.n.iter().zip(&f.ux).map(|(n, u)| n * u).collect(),
            jy: f.n.iter().zip(&f.uy).map(|(n, u)| n * u).collect(),
        }
    }

    fn to_field(&self) -> SpeciesField {
        SpeciesField {
            n: self.n.clone(),
            ux: self.jx.iter().zip(&self.n).map(|(j, n)| j / n).collect(),
            uy: self.jy.iter().zip(&self.n).map(|(j, n)| j / n).collect(),
        }
    }

    fn state(&self, k: usize) -> MomentState {
        MomentState {
            n: self.n[k],
            u: [self.jx[k] / self.n[k], self.jy[k] / self.n[k]],
        }
    }

    fn axpy(&self, dt: f64, rhs: &[[f64; 3]]) -> Conserved {
        Conserved {
            n: self.n.iter().zip(rhs).map(|(v, r)| v + dt * r[0]).collect(),
            jx: self.jx.iter().zip(rhs).map(|(v, r)| v + dt * r[1]).collect(),
            jy: self.jy.iter().zip(rhs).map(|(v, r)| v + dt * r[2]).collect(),
        }
    }

    fn average(&self, other: &Conserved) -> Conserved {
        let avg = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        Conserved {
            n: avg(&self.n, &other.n),
            jx: avg(&self.jx, &other.jx),
            jy: avg(&self.jy, &other.jy),
        }
    }

    /// Floors tiny densities (keeping u) and returns how many cells were touched.
    fn floor(&mut self, floor: f64) -> usize {
        let mut count = 0;
        for k in 0..self.n.len() {
            if self.n[k] < floor && self.n[k] > 0.0 {
                let s = floor / self.n[k];
                self.n[k] = floor;
                self.jx[k] *= s;
                self.jy[k] *= s;
                count += 1;
            }
        }
        count
    }

    fn check(&self, species: usize) -> Result<()> {
        for k in 0..self.n.len() {
            let n = self.n[k];
            let ua = self.jx[k].hypot(self.jy[k]) / n;
            if !(n > 0.0) || !(ua < 1.0) {
                return Err(Error::Invariant {
                    cell: k,
                    detail: format!("species {species}: n = {n}, |u| = {ua}"),
                });
            }
        }
        Ok(())
    }
}

/// Physical flux of (n, n u_x, n u_y) in direction `dir` (0 = x, 1 = y).
fn physical_flux(c: f64, n_u: [f64; 2], p: &[[f64; 2]; 2], dir: usize) -> [f64; 3] {
    [c * n_u[dir], c * p[0][dir], c * p[1][dir]]
}

/// Closed fluxes (x and y) of a conserved state q = (n, n u_x, n u_y).
pub fn closed_flux(q: [f64; 3], scales: &PhysicalScales) -> Result<[[f64; 3]; 2]> {
    let state = MomentState::new(q[0], [q[1] / q[0], q[2] / q[0]])?;
    let (_, t) = close(state, scales, None)?;
    Ok([
        physical_flux(scales.c, [q[1], q[2]], &t.p, 0),
        physical_flux(scales.c, [q[1], q[2]], &t.p, 1),
    ])
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    pub floored_cells: usize,
}

/// Total free energy and the two terms of its balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyReport {
    pub total: f64,
    pub boundary_flux: f64,
    /// ∫ (n₊ - n₋) ∂_t V dx, differenced against the previous report; zero on the first.
    pub source: f64,
}

/// Hyperbolic solver with warm-started closures.
#[derive(Debug, Clone)]
pub struct HydroSolver {
    pub grid: FieldGrid,
    pub cfg: SolverConfig,
    pub time: f64,
    seeds: [Vec<Option<Multipliers>>; 2],
    n_ref: [f64; 2],
    last_report: Option<(Vec<f64>, f64)>,
    floored_total: usize,
}

impl HydroSolver {
    pub fn new(mut grid: FieldGrid, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        grid.validate()?;
        let cells = grid.mesh.cells();
        let n_ref = [0, 1].map(|s| grid.species[s].n.iter().sum::<f64>() / cells as f64);
        if cfg.poisson {
            grid.v = total_potential(&grid.mesh, &grid.species[0].n, &grid.species[1].n, &grid.v_ext, &cfg)?;
        } else {
            grid.v = grid.v_ext.clone();
        }
        Ok(HydroSolver {
            grid,
            cfg,
            time: 0.0,
            seeds: [vec![None; cells], vec![None; cells]],
            n_ref,
            last_report: None,
            floored_total: 0,
        })
    }

    pub fn floored_cells(&self) -> usize {
        self.floored_total
    }

    /// Replaces the external potential (takes effect from the next step).
    pub fn set_external_potential(&mut self, v_ext: Vec<f64>) -> Result<()> {
        if v_ext.len() != self.grid.mesh.cells() {
            return Err(Error::domain("set_external_potential", "size does not match mesh"));
        }
        self.grid.v_ext = v_ext;
        self.grid.v = if self.cfg.poisson {
            total_potential(
                &self.grid.mesh,
                &self.grid.species[0].n,
                &self.grid.species[1].n,
                &self.grid.v_ext,
                &self.cfg,
            )?
        } else {
            self.grid.v_ext.clone()
        };
        Ok(())
    }

    fn closures(&mut self, species: usize, q: &Conserved) -> Result<Vec<ClosureTensors>> {
        let scales = self.cfg.scales;
        let seeds = &self.seeds[species];
        let out: Vec<(Multipliers, ClosureTensors)> = (0..q.n.len())
            .into_par_iter()
            .map(|k| {
                close(q.state(k), &scales, seeds[k]).map_err(|e| Error::Invariant {
                    cell: k,
                    detail: format!("closure failed for species {species}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let (m, t): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        self.seeds[species] = m.into_iter().map(Some).collect();
        Ok(t)
    }

    fn rhs(&mut self, species: usize, q: &Conserved, v: &[f64]) -> Result<Vec<[f64; 3]>> {
        let mesh = self.grid.mesh;
        let c = self.cfg.scales.c;
        let sigma = self.cfg.force_sign[species];
        let tens = self.closures(species, q)?;
        let cells = mesh.cells();
        let dirs = mesh.dim();
        let state = |k: usize| [q.n[k], q.jx[k], q.jy[k]];
        let scales = self.cfg.scales;
        let mult: Vec<Multipliers> = self.seeds[species].iter().map(|m| m.expect("closure seeds")).collect();
        let w: Vec<f64> = v.iter().map(|v| sigma * v / scales.kbt).collect();
        // Density and current of cell k at the potential level w_star, at fixed B.
        // Used only in the dissipative part, which then vanishes on equilibria.
        let lifted = |k: usize, w_star: f64| -> Result<[f64; 3]> {
            if w_star == w[k] {
                return Ok(state(k));
            }
            let m = Multipliers {
                a: mult[k].a - (w_star - w[k]),
                ..mult[k]
            };
            let st = forward_map(m, &scales).map_err(|e| Error::Invariant {
                cell: k,
                detail: format!("face reconstruction failed: {e}"),
            })?;
            Ok([st.n, st.n * st.u[0], st.n * st.u[1]])
        };
        let mut faces = Vec::with_capacity(cells * dirs);
        for k in 0..cells {
            faces.push((k, mesh.x_neighbors(k).1, 0));
            if dirs == 2 {
                faces.push((k, mesh.y_neighbors(k).1, 1));
            }
        }
        let face_flux: Vec<[f64; 3]> = faces
            .par_iter()
            .map(|&(k, r, dir)| {
                let (ql, qr) = (state(k), state(r));
                let fl = physical_flux(c, [ql[1], ql[2]], &tens[k].p, dir);
                let fr = physical_flux(c, [qr[1], qr[2]], &tens[r].p, dir);
                let w_star = w[k].max(w[r]);
                let (sl, sr) = (lifted(k, w_star)?, lifted(r, w_star)?);
                Ok([0, 1, 2].map(|m| 0.5 * (fl[m] + fr[m]) - 0.5 * c * (sr[m] - sl[m])))
            })
            .collect::<Result<_>>()?;
        let mut flux = vec![[[0.0; 3]; 2]; cells];
        for (&(k, _, dir), f) in faces.iter().zip(face_flux) {
            flux[k][dir] = f;
        }
        // Central-difference force, rescaled per direction so that the discrete
        // pressure gradient and force cancel exactly on equilibria.
        let balance = |k: usize, lo: usize, hi: usize| {
            let dw = w[hi] - w[lo];
            if dw == 0.0 {
                return 1.0;
            }
            let a = mult[k].a;
            let jump = phi_int(2, a - (w[hi] - w[k])) - phi_int(2, a - (w[lo] - w[k]));
            let slope = -softplus(a) * dw;
            if slope == 0.0 || !(jump / slope).is_finite() {
                1.0
            } else {
                jump / slope
            }
        };
        let force: Vec<[f64; 2]> = mesh
            .gradient(v)
            .into_iter()
            .enumerate()
            .map(|(k, g)| {
                let (l, r) = mesh.x_neighbors(k);
                let fx = -g[0] * balance(k, l, r);
                let fy = if dirs == 2 {
                    let (b, u) = mesh.y_neighbors(k);
                    -g[1] * balance(k, b, u)
                } else {
                    0.0
                };
                [fx, fy]
            })
            .collect();
        let mut out = vec![[0.0; 3]; cells];
        for k in 0..cells {
            let (l, _) = mesh.x_neighbors(k);
            let mut d = [0, 1, 2].map(|m| -(flux[k][0][m] - flux[l][0][m]) / mesh.dx);
            if dirs == 2 {
                let (b, _) = mesh.y_neighbors(k);
                for m in 0..3 {
                    d[m] -= (flux[k][1][m] - flux[b][1][m]) / mesh.dx;
                }
            }
            let qt = &tens[k].q;
            let f = force[k];
            d[1] += sigma * (qt[0][0] * f[0] + qt[0][1] * f[1]);
            d[2] += sigma * (qt[1][0] * f[0] + qt[1][1] * f[1]);
            out[k] = d;
        }
        Ok(out)
    }

    fn potential(&self, qs: &[Conserved; 2]) -> Result<Vec<f64>> {
        if self.cfg.poisson {
            total_potential(&self.grid.mesh, &qs[0].n, &qs[1].n, &self.grid.v_ext, &self.cfg)
        } else {
            Ok(self.grid.v_ext.clone())
        }
    }

    /// One SSP-RK2 step followed by exact relaxation. On error the grid is unchanged.
    pub fn step(&mut self, dt: f64) -> Result<StepReport> {
        let limit = self.cfg.max_dt(&self.grid.mesh);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Stability { dt, limit });
        }
        let n_ref = self.n_ref;
        let floor = |s: usize| DENSITY_FLOOR * n_ref[s];
        let q0 = [0, 1].map(|s| Conserved::from_field(&self.grid.species[s]));
        let v0 = self.potential(&q0)?;
        let mut floored = 0;
        let mut q1 = Vec::with_capacity(2);
        for s in 0..2 {
            let r = self.rhs(s, &q0[s], &v0)?;
            let mut q = q0[s].axpy(dt, &r);
            floored += q.floor(floor(s));
            q.check(s)?;
            q1.push(q);
        }
        let q1: [Conserved; 2] = [q1[0].clone(), q1[1].clone()];
        let v1 = self.potential(&q1)?;
        let mut q2 = Vec::with_capacity(2);
        for s in 0..2 {
            let r = self.rhs(s, &q1[s], &v1)?;
            let mut q = q0[s].average(&q1[s].axpy(dt, &r));
            if let Some(tau) = self.cfg.tau0 {
                let decay = (-dt / tau).exp();
                q.jx.iter_mut().for_each(|j| *j *= decay);
                q.jy.iter_mut().for_each(|j| *j *= decay);
            }
            floored += q.floor(floor(s));
            q.check(s)?;
            q2.push(q);
        }
        let q2: [Conserved; 2] = [q2[0].clone(), q2[1].clone()];
        let v2 = self.potential(&q2)?;
        self.grid.species = [q2[0].to_field(), q2[1].to_field()];
        self.grid.v = v2;
        self.time += dt;
        self.floored_total += floored;
        Ok(StepReport {
            dt,
            floored_cells: floored,
        })
    }

    /// Advances to `t_end`, halving the step after a rejected update.
    pub fn run_until(&mut self, t_end: f64, mut on_step: impl FnMut(&HydroSolver, &StepReport)) -> Result<usize> {
        let mut steps = 0;
        let dt_max = self.cfg.max_dt(&self.grid.mesh);
        while self.time < t_end * (1.0 - 1e-14) {
            let mut dt = dt_max.min(t_end - self.time);
            let mut tries = 0;
            let rep = loop {
                match self.step(dt) {
                    Ok(rep) => break rep,
                    Err(Error::Invariant { .. }) if tries < 8 => {
                        dt *= 0.5;
                        tries += 1;
                    }
                    Err(e) => return Err(e),
                }
            };
            steps += 1;
            on_step(self, &rep);
        }
        Ok(steps)
    }

    /// Free energy ∫⟨ε₊ + ε₋⟩ and its balance terms at the current state.
    pub fn free_energy_report(&mut self) -> Result<FreeEnergyReport> {
        let total = free_energy_total(&self.grid, &self.cfg, &mut self.seeds)?;
        let g = &self.grid;
        let source = match &self.last_report {
            Some((v_prev, t_prev)) if self.time > *t_prev => {
                let dt = self.time - t_prev;
                (0..g.mesh.cells())
                    .map(|k| {
                        let charge =
                            g.species[0].n[k] * self.cfg.force_sign[0] + g.species[1].n[k] * self.cfg.force_sign[1];
                        charge * (g.v[k] - v_prev[k]) / dt
                    })
                    .sum::<f64>()
                    * g.mesh.cell_volume()
            }
            _ => 0.0,
        };
        self.last_report = Some((g.v.clone(), self.time));
        Ok(FreeEnergyReport {
            total,
            boundary_flux: 0.0,
            source,
        })
    }
}

fn total_potential(mesh: &Mesh, ne: &[f64], nh: &[f64], v_ext: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let rho: Vec<f64> = ne.iter().zip(nh).map(|(a, b)| a - b).collect();
    let vi = poisson_solve(mesh, &rho, cfg.scales.gamma)?;
    Ok(vi.iter().zip(v_ext).map(|(a, b)| a + b).collect())
}

fn free_energy_total(grid: &FieldGrid, cfg: &SolverConfig, seeds: &mut [Vec<Option<Multipliers>>; 2]) -> Result<f64> {
    let mut total = 0.0;
    for s in 0..2 {
        let sp = &grid.species[s];
        let seed = &seeds[s];
        let vals: Vec<(Multipliers, f64)> = (0..sp.len())
            .into_par_iter()
            .map(|k| {
                let st = sp.state(k);
                let (m, _) = close(st, &cfg.scales, seed[k])?;
                Ok((
                    m,
                    free_energy_density(st, m, grid.v[k], &cfg.scales, cfg.force_sign[s])?,
                ))
            })
            .collect::<Result<_>>()?;
        seeds[s] = vals.iter().map(|(m, _)| Some(*m)).collect();
        total += vals.iter().map(|(_, e)| e).sum::<f64>();
    }
    Ok(total * grid.mesh.cell_volume())
}

/// Stateless single step; closures are solved from regime-aware seeds.
pub fn hyperbolic_step(grid: &FieldGrid, cfg: &SolverConfig, dt: f64) -> Result<FieldGrid> {
    let mut solver = HydroSolver::new(grid.clone(), *cfg)?;
    solver.step(dt)?;
    Ok(solver.grid)
}

/// Free energy of a grid; the source term is zero without time history.
pub fn free_energy_report(grid: &FieldGrid, cfg: &SolverConfig) -> Result<FreeEnergyReport> {
    let mut seeds = [vec![None; grid.mesh.cells()], vec![None; grid.mesh.cells()]];
    Ok(FreeEnergyReport {
        total: free_energy_total(grid, cfg, &mut seeds)?,
        boundary_flux: 0.0,
        source: 0.0,
    })
}
