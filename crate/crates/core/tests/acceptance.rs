//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use common::momentum_moments;
use graphene_hydro::closure::regimes::regime_yz;
use graphene_hydro::closure::*;
use graphene_hydro::figures::{curve_checks, isolines_parallel, isolines_radial, linspace, regime_curves};
use graphene_hydro::kernels::*;
use graphene_hydro::reduced::*;
use graphene_hydro::solver::{closed_flux, FieldGrid, HydroSolver, Mesh, SolverConfig};
use graphene_hydro::special::bessel_i;
use graphene_hydro::PhysicalScales;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn reduced() -> PhysicalScales {
    PhysicalScales::reduced(1.0, 1.0)
}

fn kargs(n: u32, s: f64, a: f64, b: f64) -> KernelArgs {
    KernelArgs::new(n, s, a, b).unwrap()
}

fn kernel_cross_validation() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(0..=4);
        let s = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let a = rng.gen_range(-3.0..=3.0);
        let b = rng.gen_range(0.0..=2.0);
        let q = kernel_quadrature(kargs(n, s, a, b), DEFAULT_TOL).map_err(|e| e.to_string())?;
        let (v, _) = kernel_series_auto(kargs(n, s, a, b)).map_err(|e| e.to_string())?;
        worst = worst.max((q - v).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 1e-10 && secs < 10.0,
        format!("max |quadrature - series| = {worst:.2e} over 500 samples in {secs:.2} s"),
    )
}

fn kernel_asymptotes() -> Check {
    let mut mb: f64 = 0.0;
    for n in 0..=4 {
        for s in [1.0, 2.0, 3.0] {
            for b in linspace(0.0, 5.0, 11) {
                if n > 0 && b == 0.0 {
                    continue;
                }
                let q = kernel_quadrature(kargs(n, s, -30.0, b), DEFAULT_TOL).map_err(|e| e.to_string())?;
                mb = mb.max((q / ((-30f64).exp() * bessel_i(n, b)) - 1.0).abs());
            }
        }
    }
    let r: f64 = 1e4;
    let mut deg: f64 = 0.0;
    for psi in [0.0, FRAC_PI_4, FRAC_PI_2, 2.0] {
        for (n, s) in [(0u32, 1.0), (0, 2.0), (0, 3.0), (1, 2.0), (1, 3.0)] {
            let f = degenerate_kernel(n, s, psi).map_err(|e| e.to_string())?;
            // odd harmonics vanish identically at ψ = 0
            if f.abs() < 1e-12 {
                continue;
            }
            let q =
                kernel_quadrature(kargs(n, s, r * psi.cos(), r * psi.sin()), DEFAULT_TOL).map_err(|e| e.to_string())?;
            deg = deg.max((q / r.powf(s) / f - 1.0).abs());
        }
    }
    ensure(
        mb <= 1e-6 && deg <= 1e-3,
        format!("MB ratio error {mb:.2e} (A = -30), degenerate ratio error {deg:.2e} (R = 1e4)"),
    )
}

fn global_diffeomorphism() -> Check {
    let start = Instant::now();
    let sc = reduced();
    let (mut worst, mut min_det) = (0.0f64, f64::INFINITY);
    for a in linspace(-20.0, 20.0, 50) {
        for b in linspace(0.0, 30.0, 50) {
            let m = Multipliers::new(a, b, 0.3).map_err(|e| e.to_string())?;
            let s = forward_map(m, &sc).map_err(|e| e.to_string())?;
            let back = invert_constraints(s, &sc, DEFAULT_INVERSION_TOL).map_err(|e| format!("({a},{b}): {e}"))?;
            worst = worst.max((back.a - a).abs()).max((back.b - b).abs());
            let j = forward_jacobian(m).map_err(|e| e.to_string())?;
            min_det = min_det.min(j[0][0] * j[1][1] - j[0][1] * j[1][0]);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 1e-8 && min_det > 0.0 && secs < 30.0,
        format!("max |Δ(A,B)| = {worst:.2e}, min det J = {min_det:.2e}, {secs:.2} s"),
    )
}

fn tensor_inequalities() -> Check {
    let sc = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut bad = 0;
    for _ in 0..1000 {
        let nu = 10f64.powf(rng.gen_range(-6.0..6.0));
        let ua = rng.gen_range(0.0..0.99);
        let th = rng.gen_range(-PI..PI);
        let s = MomentState::new(nu * sc.n_t(), [ua * th.cos(), ua * th.sin()]).map_err(|e| e.to_string())?;
        let (_, t) = close(s, &sc, None).map_err(|e| e.to_string())?;
        let ok = t.p_par >= 0.5
            && t.p_par < 1.0
            && t.q_par > 0.0
            && t.q_par < 0.5
            && t.q_perp > 0.0
            && t.q_perp < 1.0 - t.q_par;
        bad += usize::from(!ok);
    }
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let a = -3.0 + 0.7 * k as f64;
        let b = 0.2 + 0.35 * k as f64;
        let th = 0.6 * k as f64 - 2.0;
        let m = Multipliers::new(a, b, th).map_err(|e| e.to_string())?;
        let s = forward_map(m, &sc).map_err(|e| e.to_string())?;
        let t = closure_tensors(s, m, &sc).map_err(|e| e.to_string())?;
        let o = momentum_moments(a, b, th);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((t.p[i][j] - o.p[i][j]).abs() / s.n);
                worst = worst.max((t.q[i][j] - o.q[i][j]).abs() / s.n);
            }
        }
    }
    ensure(
        bad == 0 && worst <= 1e-8,
        format!(
            "{bad} of 1000 states violate the bounds; max tensor deviation from quadrature {worst:.2e} (relative to n)"
        ),
    )
}

fn fit_u2_slope(f: impl Fn(f64) -> f64) -> f64 {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..10 {
        let u = 1e-3 + k as f64 * 1e-3;
        sxy += u * u * (f(u) - 0.5);
        sxx += u.powi(4);
    }
    sxy / sxx
}

fn regime_coefficients() -> Check {
    let yz = |u: f64| regime_yz(u).unwrap();
    let slopes = [
        fit_u2_slope(|u| yz(u).y),
        fit_u2_slope(|u| yz(u).z),
        fit_u2_slope(|u| yz(u).z_perp),
    ];
    let targets = [0.125, -0.125, -0.125];
    let slope_err = slopes
        .iter()
        .zip(targets)
        .map(|(s, t)| (s / t - 1.0).abs())
        .fold(0.0, f64::max);
    let eps = 1e-4;
    let prefactor = 5f64.sqrt() * 14f64.powf(0.25) / (6.0 * PI).sqrt();
    let pre_err = (yz(1.0 - eps).z_perp / (prefactor * eps.powf(0.25)) - 1.0).abs();
    let gap = |e: f64| yz(1.0 - e).y - (1.0 - 2.0 * e);
    let ratio = gap(2e-3) / gap(1e-3);
    ensure(
        slope_err <= 0.01 && pre_err <= 0.02 && (ratio - 4.0).abs() < 0.2,
        format!(
            "u² slopes ({:.5}, {:.5}, {:.5}), Z_perp prefactor error {pre_err:.2e}, Y gap refinement ratio {ratio:.3}",
            slopes[0], slopes[1], slopes[2]
        ),
    )
}

fn dual_hessian(a: f64, b: [f64; 2], sc: &PhysicalScales) -> Matrix3<f64> {
    let h = 1e-4;
    let f = |x: [f64; 3]| dual_free_energy(x[0], [x[1], x[2]], sc).unwrap();
    let x0 = [a, b[0], b[1]];
    Matrix3::from_fn(|i, j| {
        let shifted = |si: f64, sj: f64| {
            let mut x = x0;
            x[i] += si * h;
            x[j] += sj * h;
            f(x)
        };
        (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0)) / (4.0 * h * h)
    })
}

fn hyperbolic_structure() -> Check {
    let sc = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut min_eig, mut max_im, mut max_speed) = (f64::INFINITY, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let a = rng.gen_range(-5.0..5.0);
        let b = rng.gen_range(0.1..5.0);
        let th: f64 = rng.gen_range(-PI..PI);
        let hess = dual_hessian(a, [b * th.cos(), b * th.sin()], &sc);
        min_eig = min_eig.min(hess.symmetric_eigen().eigenvalues.min());
        let m = Multipliers::new(a, b, th).map_err(|e| e.to_string())?;
        let s = forward_map(m, &sc).map_err(|e| e.to_string())?;
        let q = [s.n, s.n * s.u[0], s.n * s.u[1]];
        for dir in 0..2 {
            let mut jac = Matrix3::zeros();
            for col in 0..3 {
                let h = 1e-6 * s.n;
                let (mut qp, mut qm) = (q, q);
                qp[col] += h;
                qm[col] -= h;
                let fp = closed_flux(qp, &sc).map_err(|e| e.to_string())?[dir];
                let fm = closed_flux(qm, &sc).map_err(|e| e.to_string())?[dir];
                for row in 0..3 {
                    jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
                }
            }
            for ev in jac.complex_eigenvalues().iter() {
                max_im = max_im.max(ev.im.abs());
                max_speed = max_speed.max(ev.re.abs());
            }
        }
    }
    ensure(
        min_eig > 0.0 && max_im < 1e-6 && max_speed <= sc.c + 1e-6,
        format!("min Hessian eigenvalue {min_eig:.3e}, max |Im λ| {max_im:.1e}, max |λ| {max_speed:.6} (c = 1)"),
    )
}

fn conservation_and_dissipation() -> Check {
    let nx = 32;
    let mesh = Mesh::line(nx, 1.0 / nx as f64).map_err(|e| e.to_string())?;
    let mut g = FieldGrid::uniform(mesh, 0.2, 0.2);
    for k in 0..nx {
        let x = mesh.center(k).0;
        g.species[0].n[k] = 0.2 * (1.0 + 0.3 * (2.0 * PI * x).cos());
        g.species[0].ux[k] = 0.3 * (2.0 * PI * x).sin();
        g.species[1].n[k] = 0.2 * (1.0 - 0.15 * (2.0 * PI * x).sin());
        g.species[1].ux[k] = -0.3;
        g.v_ext[k] = 0.8 * (2.0 * PI * x).sin();
    }
    let mut cfg = SolverConfig::new(PhysicalScales::reduced(0.3, 1.0));
    cfg.tau0 = Some(0.3);
    let mut solver = HydroSolver::new(g, cfg).map_err(|e| e.to_string())?;
    let m0 = [solver.grid.mass(0), solver.grid.mass(1)];
    let dt = cfg.max_dt(&mesh);
    let mut e = solver.free_energy_report().map_err(|e| e.to_string())?.total;
    let mut max_increase = f64::NEG_INFINITY;
    for _ in 0..1000 {
        solver.step(dt).map_err(|e| e.to_string())?;
        let now = solver.free_energy_report().map_err(|e| e.to_string())?.total;
        max_increase = max_increase.max(now - e);
        e = now;
    }
    let drift = (0..2)
        .map(|s| ((solver.grid.mass(s) - m0[s]) / m0[s]).abs())
        .fold(0.0, f64::max);
    ensure(
        drift <= 1e-13 && max_increase <= 1e-10,
        format!(
            "relative mass drift {drift:.2e} over 1000 steps; largest per-step free-energy change {max_increase:.2e}"
        ),
    )
}

fn heat_kernel_error(nx: usize) -> f64 {
    let mesh = Mesh::line(nx, 1.0 / nx as f64).unwrap();
    let cfg = DiffusionConfig {
        regime: Regime::General,
        tau0: 0.01,
        mesh,
        v: vec![0.0; nx],
        sign: 1.0,
        scales: PhysicalScales::reduced(0.01, 1.0),
    };
    let d = cfg.diffusivity();
    let exact = |x: f64, t: f64| {
        let var = 0.0025 + 2.0 * d * t;
        0.01 + (-3..=3)
            .map(|m| (-(x - 0.5 + m as f64).powi(2) / (2.0 * var)).exp())
            .sum::<f64>()
            * 0.05
            / var.sqrt()
    };
    let n0: Vec<f64> = (0..nx).map(|k| exact(mesh.center(k).0, 0.0)).collect();
    let n = run_drift_diffusion(&cfg, &n0, 1.0, 0.5).unwrap();
    let (num, den) = (0..nx).fold((0.0, 0.0), |(a, b), k| {
        let e = exact(mesh.center(k).0, 1.0);
        (a + (n[k] - e).powi(2), b + (e - 0.01).powi(2))
    });
    (num / den).sqrt()
}

fn reduced_fixed_points() -> Check {
    let sc = PhysicalScales::reduced(0.01, 1.0);
    let mesh = Mesh::new(40, 5, 0.025).map_err(|e| e.to_string())?;
    let v: Vec<f64> = (0..mesh.cells())
        .map(|k| {
            let (x, y) = mesh.center(k);
            0.8 * (2.0 * PI * x).sin() + 0.3 * (2.0 * PI * y / 0.125).cos()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (regime, n_ref) in [(Regime::MaxwellBoltzmann, 1e-3), (Regime::Degenerate, 50.0)] {
        for sign in [1.0, -1.0] {
            let cfg = DiffusionConfig {
                regime,
                tau0: 0.01,
                mesh,
                v: v.clone(),
                sign,
                scales: sc,
            };
            let n = steady_state(&cfg, n_ref).map_err(|e| e.to_string())?;
            worst = worst.max(stationarity_residual(&cfg, &n).map_err(|e| e.to_string())?);
        }
    }
    let coarse = heat_kernel_error(100);
    let fine = heat_kernel_error(200);
    ensure(
        worst <= 1e-10 && fine <= 1e-3 && fine < coarse,
        format!("steady-state residual {worst:.2e}; heat-kernel L² error {coarse:.2e} -> {fine:.2e}"),
    )
}

fn wave_and_snell() -> Check {
    let nx = 200;
    let mesh = Mesh::line(nx, 1.0 / nx as f64).map_err(|e| e.to_string())?;
    let sc = reduced();
    let cfg = WaveConfig {
        mesh,
        scales: sc,
        v: vec![0.0; nx],
        n0: 0.1,
        sign: 1.0,
    };
    let dt = 0.5 * cfg.max_dt();
    let n0: Vec<f64> = (0..nx).map(|k| (2.0 * PI * mesh.center(k).0).cos()).collect();
    let cw2 = wave_speed(&sc).powi(2);
    let lap = mesh.laplacian(&n0);
    let n1: Vec<f64> = n0.iter().zip(&lap).map(|(n, l)| n + 0.5 * dt * dt * cw2 * l).collect();
    let amp = |n: &[f64]| {
        n.iter()
            .enumerate()
            .map(|(k, v)| v * (2.0 * PI * mesh.center(k).0).cos())
            .sum::<f64>()
    };
    let mut crossings = Vec::new();
    let mut prev = (dt, amp(&n1));
    let steps = (2.2 / wave_speed(&sc) / dt) as usize;
    run_wave(&cfg, n0, n1, dt, steps, |s, _, cur| {
        let a = amp(cur);
        if a.signum() != prev.1.signum() {
            crossings.push(prev.0 + dt * prev.1 / (prev.1 - a));
        }
        prev = ((s + 1) as f64 * dt, a);
    })
    .map_err(|e| e.to_string())?;
    if crossings.len() < 3 {
        return Err("wave did not oscillate".into());
    }
    let speed_err = (1.0 / (crossings[2] - crossings[0]) / wave_speed(&sc) - 1.0).abs();

    let mut snell_err: f64 = 0.0;
    for sign in [1.0, -1.0] {
        for dk in [0.1, 0.5, 1.0] {
            let step = StepPotential::for_grid(dk, 0.0, 0.01);
            let rep = snell_bundle(&step, 0.3, sign, 5, 1e-3).map_err(|e| e.to_string())?;
            for r in &rep.ratios {
                snell_err = snell_err.max((r / rep.expected - 1.0).abs());
            }
        }
    }

    let cm = Mesh::new(128, 128, 1.0 / 128.0).map_err(|e| e.to_string())?;
    let k: Vec<f64> = (0..cm.cells())
        .map(|i| {
            let (x, y) = cm.center(i);
            0.1 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos()
        })
        .collect();
    let state = CollimationState::uniform(cm, 0.4, k, XBoundary::Periodic).map_err(|e| e.to_string())?;
    let (_, drift) =
        run_collimation(&state, &CollimationConfig::new(1.0, 1.0), 0.25, 0.8).map_err(|e| e.to_string())?;
    ensure(
        speed_err <= 0.01 && snell_err <= 0.01 && drift <= 1e-3,
        format!("wave speed error {speed_err:.2e}; Snell ratio error {snell_err:.2e}; unit-norm drift {drift:.2e}"),
    )
}

fn figure_data() -> Check {
    let mut checks = vec![
        isolines_parallel(&linspace(0.0, 20.0, 9), 12.0, 20.0).map_err(|e| e.to_string())?,
        isolines_radial(&linspace(0.0, 2.2, 9), 500.0).map_err(|e| e.to_string())?,
    ];
    let mut us = linspace(0.0, 0.98, 50);
    us.extend([0.99, 0.995, 0.999, 0.9999]);
    checks.extend(curve_checks(&regime_curves(&us).map_err(|e| e.to_string())?));
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({:.2e} > {:.2e})", c.name, c.value, c.threshold))
        .collect();
    ensure(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} structural checks on map and regime curves", checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("kernel cross-validation", kernel_cross_validation),
        ("kernel asymptotes", kernel_asymptotes),
        ("global diffeomorphism", global_diffeomorphism),
        ("closure inequalities and oracle", tensor_inequalities),
        ("regime coefficients", regime_coefficients),
        ("entropy and hyperbolicity", hyperbolic_structure),
        ("conservation and dissipation", conservation_and_dissipation),
        ("reduced-model fixed points", reduced_fixed_points),
        ("wave speed and Snell law", wave_and_snell),
        ("figure data", figure_data),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
