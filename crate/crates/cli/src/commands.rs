//! One function per subcommand. Each writes its tables and returns the outcome
//! that goes into the manifest.

use crate::config::{require, DdInitial, GridSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Check, OutDir, Outcome, Table};
use graphene_hydro::closure::regimes::regime_yz;
use graphene_hydro::closure::{close, forward_map, invert_constraints};
use graphene_hydro::figures::{curve_checks, isolines_parallel, isolines_radial, linspace, map_sample, regime_curves};
use graphene_hydro::kernels::{kernel_quadrature, kernel_series_auto, KernelArgs, DEFAULT_TOL};
use graphene_hydro::reduced::{
    geometric_optics_residual, run_collimation, run_drift_diffusion, run_wave, snell_bundle, stationarity_residual,
    steady_state, wave_energy, wave_speed, CollimationConfig, CollimationRegime, CollimationState, DiffusionConfig,
    StepPotential, WaveConfig, XBoundary,
};
use graphene_hydro::solver::{FieldGrid, HydroSolver, Mesh, SolverConfig};
use graphene_hydro::{MomentState, Multipliers, PhysicalScales};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;

pub struct Context {
    pub seed: u64,
    pub scales: PhysicalScales,
}

impl Context {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn sine_profile(mesh: &Mesh, amplitude: f64) -> Vec<f64> {
    let (lx, _) = mesh.lengths();
    (0..mesh.cells())
        .map(|k| amplitude * (2.0 * PI * mesh.center(k).0 / lx).sin())
        .collect()
}

fn gaussian_profile(mesh: &Mesh, base: f64, height: f64, width: f64) -> Vec<f64> {
    let (lx, _) = mesh.lengths();
    (0..mesh.cells())
        .map(|k| {
            let x = mesh.center(k).0 - 0.5 * lx;
            base + height * (-x * x / (2.0 * width * width)).exp()
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grid_points(us: &mut Vec<f64>, tail: &[f64]) -> CliResult<()> {
    us.extend_from_slice(tail);
    require(us.windows(2).all(|w| w[0] < w[1]), || {
        "|u| samples must increase".into()
    })?;
    require(us.last().map_or(true, |&u| u < 1.0), || {
        "|u| samples must stay below 1".into()
    })
}

pub fn tabulate(cfg: &RunConfig, _ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.tabulate;
    require(
        spec.a_points >= 2 && spec.b_points >= 2 && spec.a_min < spec.a_max && spec.b_max > 0.0,
        || "tabulate needs a_min < a_max, b_max > 0 and at least two points per axis".into(),
    )?;
    let a = linspace(spec.a_min, spec.a_max, spec.a_points);
    let b = linspace(0.0, spec.b_max, spec.b_points);

    let mut map = Table::new("map", &["a", "b", "nu", "u", "critical_distance", "side"])
        .note("nu = n/n_T; critical_distance = (A + B)/sqrt(2) to the line A = -B; side = sign(A + B)");
    for &bb in &b {
        for &aa in &a {
            let s = map_sample(aa, bb)?;
            let side = if s.critical_distance == 0.0 {
                0.0
            } else {
                s.critical_distance.signum()
            };
            map.push(vec![s.a, s.b, s.nu, s.u, s.critical_distance, side]);
        }
    }
    out.write_table(&map)?;

    let mut line = Table::new("critical_line", &["a", "b", "nu", "u"]).note("samples on A = -B");
    for &bb in &b {
        let s = map_sample(-bb, bb)?;
        line.push(vec![s.a, s.b, s.nu, s.u]);
    }
    out.write_table(&line)?;

    let mut us = linspace(0.0, spec.u_max, spec.u_points);
    grid_points(&mut us, &spec.u_tail)?;
    let curves = regime_curves(&us)?;
    let mut table = Table::new("curves", &["u", "x", "y", "z", "z_perp"]);
    for c in &curves {
        table.push(vec![c.u, c.x, c.y, c.z, c.z_perp]);
    }
    out.write_table(&table)?;

    let mut outcome = Outcome::default();
    outcome.check(isolines_parallel(&linspace(0.0, 20.0, 9), 12.0, 20.0)?.into());
    outcome.check(isolines_radial(&linspace(0.0, 2.2, 9), 500.0)?.into());
    outcome
        .checks
        .extend(curve_checks(&curves).into_iter().map(Check::from));
    Ok(outcome)
}

pub fn invert(cfg: &RunConfig, ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.invert;
    require(spec.tol > 0.0, || "invert.tol must be positive".into())?;
    let sc = ctx.scales;
    let mut targets: Vec<(f64, [f64; 2])> = spec.states.iter().map(|s| (s.nu, [s.ux, s.uy])).collect();
    let mut rng = ctx.rng();
    for _ in 0..spec.random {
        let nu = 10f64.powf(rng.gen_range(-6.0..6.0));
        let ua = rng.gen_range(0.0..0.95);
        let th = rng.gen_range(-PI..PI);
        targets.push((nu, [ua * th.cos(), ua * th.sin()]));
    }

    let mut table = Table::new(
        "inversion",
        &["nu", "ux", "uy", "a", "b", "theta_b", "n_rel_error", "u_error"],
    )
    .note("nu = n/n_T; (a, b, theta_b) are the multipliers reproducing (n, u)");
    let (mut worst_n, mut worst_u) = (0.0f64, 0.0f64);
    for (nu, u) in targets {
        let state = MomentState::new(nu * sc.n_t(), u).map_err(CliError::usage)?;
        let m = invert_constraints(state, &sc, spec.tol)?;
        let back = forward_map(m, &sc)?;
        let en = (back.n / state.n - 1.0).abs();
        let eu = (back.u[0] - u[0]).abs().max((back.u[1] - u[1]).abs());
        worst_n = worst_n.max(en);
        worst_u = worst_u.max(eu);
        let _ = writeln!(
            std::io::stdout(),
            "nu={nu} ux={} uy={} A={} B={} theta_B={}",
            u[0],
            u[1],
            m.a,
            m.b,
            m.theta_b
        );
        table.push(vec![nu, u[0], u[1], m.a, m.b, m.theta_b, en, eu]);
    }
    out.write_table(&table)?;

    let mut outcome = Outcome::default();
    outcome.check(Check::at_most("density reproduced", worst_n, spec.tol));
    outcome.check(Check::at_most("direction reproduced", worst_u, spec.tol));
    Ok(outcome)
}

/// Least-squares k in f(u) - 1/2 ≈ k u².
fn small_u_curvature(us: &[f64], f: &[f64]) -> f64 {
    let sxy: f64 = us.iter().zip(f).map(|(u, v)| u * u * (v - 0.5)).sum();
    let sxx: f64 = us.iter().map(|u| u.powi(4)).sum();
    sxy / sxx
}

pub fn regimes(cfg: &RunConfig, _ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.regimes;
    let mut us = linspace(0.0, spec.u_max, spec.u_points);
    grid_points(&mut us, &spec.u_tail)?;
    let curves = regime_curves(&us)?;
    let mut table = Table::new("regimes", &["u", "x", "y", "z", "z_perp"])
        .note("x: Maxwell-Boltzmann closure function; y, z, z_perp: degenerate-gas closure functions");
    for c in &curves {
        table.push(vec![c.u, c.x, c.y, c.z, c.z_perp]);
    }
    out.write_table(&table)?;

    let mut outcome = Outcome::default();
    outcome
        .checks
        .extend(curve_checks(&curves).into_iter().map(Check::from));
    let small = linspace(1e-3, 1e-2, 10);
    let yz = small.iter().map(|&u| regime_yz(u)).collect::<Result<Vec<_>, _>>()?;
    let pick = |f: fn(&graphene_hydro::closure::regimes::RegimeYZ) -> f64| yz.iter().map(f).collect::<Vec<f64>>();
    let fits = [
        ("y", small_u_curvature(&small, &pick(|r| r.y)), 0.125),
        ("z", small_u_curvature(&small, &pick(|r| r.z)), -0.125),
        ("z_perp", small_u_curvature(&small, &pick(|r| r.z_perp)), -0.125),
    ];
    for (name, k, expected) in fits {
        outcome.scalar(&format!("{name}_small_u_curvature"), k);
        outcome.check(Check::at_most(
            format!("{name} small-|u| curvature {expected}"),
            (k / expected - 1.0).abs(),
            0.01,
        ));
    }
    Ok(outcome)
}

fn hydro_fields(grid: &FieldGrid) -> Table {
    let mut t = Table::new(
        "hydro_fields",
        &["x", "y", "n_e", "ux_e", "uy_e", "n_h", "ux_h", "uy_h", "v"],
    )
    .note("suffix _e: electrons, _h: holes; v: total potential energy");
    let [e, h] = &grid.species;
    for k in 0..grid.mesh.cells() {
        let (x, y) = grid.mesh.center(k);
        t.push(vec![
            x, y, e.n[k], e.ux[k], e.uy[k], h.n[k], h.ux[k], h.uy[k], grid.v[k],
        ]);
    }
    t
}

pub fn solve_hydro(cfg: &RunConfig, ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.hydro;
    let mesh = spec.grid.build()?;
    require(spec.t_end >= 0.0 && spec.report_every > 0, || {
        "hydro.t_end must be non-negative and hydro.report_every positive".into()
    })?;
    require(spec.noise.abs() < 1.0 && spec.density_amplitude.abs() < 1.0, || {
        "hydro perturbation amplitudes must be below 1".into()
    })?;
    let mut grid = FieldGrid::uniform(mesh, spec.n_electrons, spec.n_holes);
    let bump = sine_profile(&mesh, spec.density_amplitude);
    let mut rng = ctx.rng();
    for (s, sp) in grid.species.iter_mut().enumerate() {
        for k in 0..mesh.cells() {
            let mut factor = 1.0;
            if s == 0 {
                factor += bump[k];
            }
            if spec.noise != 0.0 {
                factor += spec.noise * rng.gen_range(-1.0..1.0);
            }
            sp.n[k] *= factor;
            sp.ux[k] = spec.ux;
        }
    }
    grid.v_ext = sine_profile(&mesh, spec.potential_amplitude);

    let mut sc = SolverConfig::new(ctx.scales);
    sc.cfl = spec.cfl;
    sc.t_end = spec.t_end;
    sc.poisson = spec.poisson;
    if !spec.relaxation {
        sc.tau0 = None;
    }
    sc.validate().map_err(CliError::usage)?;
    let mut solver = HydroSolver::new(grid, sc).map_err(|e| match e {
        graphene_hydro::Error::Unsupported(_) | graphene_hydro::Error::Domain { .. } => CliError::usage(e),
        other => other.into(),
    })?;
    let initial = solver.grid.clone();
    let mass0 = [initial.mass(0), initial.mass(1)];

    let mut diag = Table::new(
        "hydro_diagnostics",
        &["step", "t", "mass_e", "mass_h", "free_energy", "max_change"],
    )
    .note("max_change: largest |n - n(0)| over both species");
    let mut record = |solver: &mut HydroSolver, step: usize| -> CliResult<f64> {
        let fe = solver.free_energy_report()?.total;
        let g = &solver.grid;
        let change = max_abs_diff(&g.species[0].n, &initial.species[0].n)
            .max(max_abs_diff(&g.species[1].n, &initial.species[1].n));
        diag.push(vec![step as f64, solver.time, g.mass(0), g.mass(1), fe, change]);
        Ok(change)
    };
    record(&mut solver, 0)?;
    let dt_max = solver.cfg.max_dt(&mesh);
    let mut steps = 0;
    let mut change = 0.0;
    while solver.time < spec.t_end * (1.0 - 1e-14) {
        let chunk_end = (solver.time + spec.report_every as f64 * dt_max).min(spec.t_end);
        steps += solver.run_until(chunk_end, |_, _| {})?;
        change = record(&mut solver, steps)?;
    }
    out.write_table(&diag)?;
    out.write_table(&hydro_fields(&solver.grid))?;

    let mut outcome = Outcome::default();
    outcome.scalar("steps", steps as f64);
    outcome.scalar("floored_cells", solver.floored_cells() as f64);
    outcome.scalar("max_change", change);
    let col = |i: usize| diag.rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let (me, mh, fe) = (col(2), col(3), col(4));
    for (name, series, m0) in [("electron", &me, mass0[0]), ("hole", &mh, mass0[1])] {
        let drift = series.iter().map(|m| (m / m0 - 1.0).abs()).fold(0.0, f64::max);
        outcome.check(Check::at_most(format!("{name} mass conserved"), drift, 1e-13));
    }
    if spec.relaxation && !spec.poisson {
        // static potential: the free energy may only decrease
        let rise = diag
            .rows
            .windows(2)
            .map(|w| (w[1][4] - w[0][4]) / (w[1][0] - w[0][0]).max(1.0))
            .fold(f64::NEG_INFINITY, f64::max);
        if rise.is_finite() {
            outcome.check(Check::at_most("free energy non-increasing (per step)", rise, 1e-10));
        }
    }
    let uniform = spec.density_amplitude == 0.0 && spec.noise == 0.0 && spec.potential_amplitude == 0.0;
    if uniform {
        outcome.check(Check::at_most("uniform state unchanged", change, 0.0));
    }
    outcome.series.insert("mass_e".into(), me);
    outcome.series.insert("mass_h".into(), mh);
    outcome.series.insert("free_energy".into(), fe);
    outcome.series.insert("time".into(), col(1));
    Ok(outcome)
}

pub fn solve_dd(cfg: &RunConfig, ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.dd;
    let mesh = spec.grid.build()?;
    require(spec.n_ref > 0.0 && spec.t_end >= 0.0 && spec.width > 0.0, || {
        "dd.n_ref and dd.width must be positive and dd.t_end non-negative".into()
    })?;
    let dc = DiffusionConfig {
        regime: spec.regime,
        tau0: ctx.scales.tau0,
        mesh,
        v: sine_profile(&mesh, spec.potential_amplitude),
        sign: spec.sign,
        scales: ctx.scales,
    };
    dc.validate().map_err(CliError::usage)?;
    let n0 = match spec.initial {
        DdInitial::Steady => steady_state(&dc, spec.n_ref)?,
        DdInitial::Gaussian => gaussian_profile(&mesh, spec.n_ref, spec.n_ref * spec.bump, spec.width),
    };
    let n = if spec.t_end > 0.0 {
        run_drift_diffusion(&dc, &n0, spec.t_end, spec.safety)?
    } else {
        n0.clone()
    };
    let residual = stationarity_residual(&dc, &n)?;

    let mut table = Table::new("dd_density", &["x", "y", "v", "n_initial", "n"]);
    for k in 0..mesh.cells() {
        let (x, y) = mesh.center(k);
        table.push(vec![x, y, dc.v[k], n0[k], n[k]]);
    }
    out.write_table(&table)?;

    let mut outcome = Outcome::default();
    outcome.scalar("residual", residual);
    outcome.scalar("diffusivity", dc.diffusivity());
    let mass0: f64 = n0.iter().sum();
    let drift = (n.iter().sum::<f64>() / mass0 - 1.0).abs();
    outcome.scalar("mass_drift", drift);
    outcome.check(Check::at_most("mass conserved", drift, 1e-12));
    if spec.initial == DdInitial::Steady {
        outcome.check(Check::at_most("steady-state residual", residual, 1e-10));
    }
    Ok(outcome)
}

/// Position of the largest value among cells with x > `from`, refined by a parabola.
fn peak_position(mesh: &Mesh, f: &[f64], from: f64) -> Option<f64> {
    let row: Vec<usize> = (0..mesh.nx).map(|i| mesh.idx(i, 0)).collect();
    let best = row
        .iter()
        .enumerate()
        .filter(|(_, &k)| mesh.center(k).0 > from)
        .max_by(|a, b| f[*a.1].total_cmp(&f[*b.1]))?
        .0;
    if best == 0 || best + 1 >= row.len() {
        return Some(mesh.center(row[best]).0);
    }
    let (l, c, r) = (f[row[best - 1]], f[row[best]], f[row[best + 1]]);
    let denom = l - 2.0 * c + r;
    let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    Some(mesh.center(row[best]).0 + shift * mesh.dx)
}

pub fn solve_wave(cfg: &RunConfig, ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.wave;
    let mesh = spec.grid.build()?;
    require(
        spec.cfl > 0.0 && spec.cfl <= 1.0 && spec.width > 0.0 && spec.record_every > 0,
        || "wave.cfl must lie in (0, 1], wave.width and wave.record_every must be positive".into(),
    )?;
    let wc = WaveConfig {
        mesh,
        scales: ctx.scales,
        v: sine_profile(&mesh, spec.potential_amplitude),
        n0: spec.n0,
        sign: spec.sign,
    };
    wc.validate().map_err(CliError::usage)?;
    let dt = spec.cfl * wc.max_dt();
    let cw = wave_speed(&ctx.scales);
    // the equation is linear and Δ kills the background, so integrate δn = n - n0
    let start = gaussian_profile(&mesh, 0.0, spec.pulse, spec.width);
    // at rest: δn¹ = δn⁰ + dt²/2 (c_w² Δδn⁰ + s)
    let src = wc.source()?;
    let lap = mesh.laplacian(&start);
    let first: Vec<f64> = (0..start.len())
        .map(|k| start[k] + 0.5 * dt * dt * (cw * cw * lap[k] + src[k]))
        .collect();

    let mut energy = Table::new("wave_energy", &["step", "t", "energy"]).note("energy of the perturbation n - n0");
    energy.push(vec![1.0, dt, wave_energy(&wc, &start, &first, dt)]);
    let (_, last) = run_wave(
        &wc,
        start.clone(),
        first,
        dt,
        spec.steps.saturating_sub(1),
        |s, prev, curr| {
            let step = s + 1;
            if step % spec.record_every == 0 || step == spec.steps {
                energy.push(vec![step as f64, step as f64 * dt, wave_energy(&wc, prev, curr, dt)]);
            }
        },
    )?;
    let t_final = spec.steps.max(1) as f64 * dt;

    let mut table = Table::new("wave_density", &["x", "y", "n_initial", "n"]);
    for k in 0..mesh.cells() {
        let (x, y) = mesh.center(k);
        table.push(vec![x, y, spec.n0 + start[k], spec.n0 + last[k]]);
    }
    out.write_table(&table)?;
    out.write_table(&energy)?;

    let mut outcome = Outcome::default();
    outcome.scalar("dt", dt);
    outcome.scalar("t_final", t_final);
    outcome.scalar("wave_speed", cw);
    let es: Vec<f64> = energy.rows.iter().map(|r| r[2]).collect();
    if spec.potential_amplitude == 0.0 {
        let e0 = es[0];
        let drift = es.iter().map(|e| (e / e0 - 1.0).abs()).fold(0.0, f64::max);
        outcome.check(Check::at_most("discrete energy conserved", drift, 1e-10));
        let (lx, _) = mesh.lengths();
        let travel = cw * t_final;
        if spec.pulse != 0.0 && travel > 10.0 * mesh.dx && travel + 4.0 * spec.width < 0.5 * lx {
            let excess: Vec<f64> = last.iter().map(|d| d * spec.pulse.signum()).collect();
            if let Some(x) = peak_position(&mesh, &excess, 0.5 * lx + 0.5 * travel) {
                let measured = (x - 0.5 * lx) / t_final;
                outcome.scalar("measured_speed", measured);
                outcome.check(Check::at_most(
                    "pulse speed c/sqrt(2)",
                    (measured / cw - 1.0).abs(),
                    1e-2,
                ));
            }
        }
    }
    outcome.series.insert("energy".into(), es);
    Ok(outcome)
}

pub fn solve_collimation(cfg: &RunConfig, ctx: &Context, out: &mut OutDir) -> CliResult<Outcome> {
    let spec = &cfg.collimation;
    let mesh = spec.grid.build()?;
    require(spec.sign.abs() == 1.0, || "collimation.sign must be 1 or -1".into())?;
    require(
        spec.incident.abs() < PI / 2.0 && spec.t_end >= 0.0 && spec.rays > 0 && spec.ray_step > 0.0,
        || "collimation needs |incident| < pi/2, t_end >= 0, rays > 0 and ray_step > 0".into(),
    )?;
    let (lx, _) = mesh.lengths();
    let step = StepPotential {
        delta_k: spec.delta_k,
        x0: 0.5 * lx,
        width: spec.step_width.max(4.0 * mesh.dx),
    };
    let k: Vec<f64> = (0..mesh.cells()).map(|c| step.value(mesh.center(c).0)).collect();
    let inflow = [spec.incident.cos(), spec.incident.sin()];
    let state = CollimationState::uniform(mesh, spec.incident, k, XBoundary::Inflow(inflow))?;
    let cc = CollimationConfig {
        regime: spec.regime,
        drift_tol: spec.drift_tol,
        ..CollimationConfig::new(ctx.scales.c, spec.sign)
    };
    let (fin, drift) = run_collimation(&state, &cc, spec.t_end, spec.cfl)?;
    let residual = geometric_optics_residual(&fin, spec.sign);

    let mut field = Table::new("collimation_field", &["x", "y", "ux", "uy", "k", "optics_residual"])
        .note("k = V/k_BT; optics_residual: discrete div(exp(-sign k) u_perp)");
    for c in 0..mesh.cells() {
        let (x, y) = mesh.center(c);
        field.push(vec![x, y, fin.ux[c], fin.uy[c], fin.k[c], residual[c]]);
    }
    out.write_table(&field)?;

    let mut outcome = Outcome::default();
    outcome.scalar("norm_drift", drift);
    outcome.check(Check::at_most("unit-norm drift", drift, spec.drift_tol));

    if spec.regime == CollimationRegime::MaxwellBoltzmann && spec.incident != 0.0 {
        let expected = (-spec.sign * spec.delta_k).exp();
        // the field obeys sin θ e^{∓K} = const along x; compare cells well inside each side
        let (left, right) = (mesh.idx(mesh.nx / 8, 0), mesh.idx(mesh.nx - 1 - mesh.nx / 8, 0));
        let sin_at = |c: usize| fin.uy[c] / fin.ux[c].hypot(fin.uy[c]);
        let field_ratio = sin_at(left) / sin_at(right);
        let local = (-spec.sign * (fin.k[right] - fin.k[left])).exp();
        outcome.scalar("field_snell_ratio", field_ratio);
        outcome.scalar("expected_snell_ratio", expected);
        outcome.check(Check::at_most(
            "field Snell invariant",
            (field_ratio / local - 1.0).abs(),
            2e-2,
        ));

        let report = snell_bundle(&step, spec.incident, spec.sign, spec.rays, spec.ray_step)?;
        let worst = report
            .ratios
            .iter()
            .map(|r| (r / expected - 1.0).abs())
            .fold(0.0, f64::max);
        outcome.scalar("ray_snell_error", worst);
        outcome.check(Check::at_most("ray bundle Snell ratio", worst, 1e-2));
        let mut rays = Table::new("rays", &["ray", "x", "y", "theta"]).note("characteristics across the step");
        for (r, path) in report.rays.iter().enumerate() {
            for p in path {
                rays.push(vec![r as f64, p[0], p[1], p[2]]);
            }
        }
        out.write_table(&rays)?;
    }
    Ok(outcome)
}

pub fn selftest(cfg: &RunConfig, ctx: &Context, _out: &mut OutDir) -> CliResult<Outcome> {
    let samples = cfg.selftest.samples;
    require(samples > 0, || "selftest.samples must be positive".into())?;
    let sc = PhysicalScales::reduced(1.0, 1.0);
    let mut rng = ctx.rng();
    let mut outcome = Outcome::default();

    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0..=4u32);
        let s = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let args = KernelArgs::new(n, s, rng.gen_range(-3.0..3.0), rng.gen_range(0.0..2.0))?;
        let q = kernel_quadrature(args, DEFAULT_TOL)?;
        let (series, _) = kernel_series_auto(args)?;
        worst = worst.max((q - series).abs());
    }
    outcome.check(Check::at_most("kernel quadrature matches series", worst, 1e-10));

    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (a, b) = (rng.gen_range(-20.0..20.0), rng.gen_range(0.0..30.0));
        let m = Multipliers::new(a, b, rng.gen_range(-PI..PI))?;
        let back = invert_constraints(
            forward_map(m, &sc)?,
            &sc,
            graphene_hydro::closure::DEFAULT_INVERSION_TOL,
        )?;
        worst = worst.max((back.a - a).abs()).max((back.b - b).abs());
    }
    outcome.check(Check::at_most("inversion round trip", worst, 1e-8));

    let mut bad = 0;
    for _ in 0..samples {
        let nu = 10f64.powf(rng.gen_range(-6.0..6.0));
        let (ua, th) = (rng.gen_range(0.0..0.99), rng.gen_range(-PI..PI));
        let (_, t) = close(
            MomentState::new(nu * sc.n_t(), [ua * th.cos(), ua * th.sin()])?,
            &sc,
            None,
        )?;
        let ok = t.p_par >= 0.5
            && t.p_par < 1.0
            && t.q_par > 0.0
            && t.q_par < 0.5
            && t.q_perp > 0.0
            && t.q_perp < 1.0 - t.q_par;
        bad += usize::from(!ok);
    }
    outcome.check(Check::at_most("closure coefficient bounds violated", bad as f64, 0.0));

    let mut us = linspace(0.0, 0.98, 25);
    us.extend([0.999, 0.9999]);
    outcome
        .checks
        .extend(curve_checks(&regime_curves(&us)?).into_iter().map(Check::from));

    let mesh = GridSpec {
        nx: 16,
        ny: 1,
        dx: 1.0 / 16.0,
    }
    .build()?;
    let mut solver = HydroSolver::new(FieldGrid::uniform(mesh, 0.3, 0.1), SolverConfig::new(sc))?;
    let before = solver.grid.clone();
    solver.run_until(0.2, |_, _| {})?;
    let change = max_abs_diff(&solver.grid.species[0].n, &before.species[0].n)
        .max(max_abs_diff(&solver.grid.species[1].n, &before.species[1].n));
    outcome.check(Check::at_most("uniform hydro state unchanged", change, 0.0));

    let mesh = GridSpec {
        nx: 50,
        ny: 1,
        dx: 0.02,
    }
    .build()?;
    let dc = DiffusionConfig {
        regime: graphene_hydro::reduced::Regime::MaxwellBoltzmann,
        tau0: 0.1,
        mesh,
        v: sine_profile(&mesh, 1.0),
        sign: 1.0,
        scales: PhysicalScales::reduced(0.1, 1.0),
    };
    let residual = stationarity_residual(&dc, &steady_state(&dc, 1e-3)?)?;
    outcome.check(Check::at_most("Boltzmann steady-state residual", residual, 1e-10));

    let step = StepPotential::for_grid(0.5, 0.0, 0.01);
    let report = snell_bundle(&step, 0.5, 1.0, 4, 0.002)?;
    let worst = report
        .ratios
        .iter()
        .map(|r| (r / report.expected - 1.0).abs())
        .fold(0.0, f64::max);
    outcome.check(Check::at_most("Snell ratio across a step", worst, 1e-2));
    Ok(outcome)
}
