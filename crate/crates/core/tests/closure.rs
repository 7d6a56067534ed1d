mod common;

use common::momentum_moments;
use graphene_hydro::closure::*;
use graphene_hydro::kernels::{kernel_quadrature, KernelArgs, DEFAULT_TOL};
use graphene_hydro::special::{bessel_i, bessel_ratio, fermi_phi, fermi_phi_inverse};
use graphene_hydro::PhysicalScales;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn reduced() -> PhysicalScales {
    PhysicalScales::reduced(1.0, 1.0)
}

fn mult(a: f64, b: f64, th: f64) -> Multipliers {
    Multipliers::new(a, b, th).unwrap()
}

#[test]
fn forward_examples() {
    let sc = reduced();
    let s = forward_map(mult(0.0, 0.0, 0.0), &sc).unwrap();
    assert!((s.n - sc.n_t() * PI * PI / 12.0).abs() < 1e-16);
    assert_eq!(s.u, [0.0, 0.0]);
    let s = forward_map(mult(-30.0, 2.0, 0.0), &sc).unwrap();
    assert!((s.u_abs() - bessel_i(1, 2.0) / bessel_i(0, 2.0)).abs() < 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let m = mult(
            rng.gen_range(-40.0..40.0),
            rng.gen_range(0.0..40.0),
            rng.gen_range(-PI..PI),
        );
        let s = forward_map(m, &sc).unwrap();
        assert!(s.u_abs() < 1.0 && s.n > 0.0);
    }
}

#[test]
fn multipliers_canonicalize_direction() {
    assert_eq!(mult(1.0, 0.0, 2.0).theta_b, 0.0);
    assert!(Multipliers::new(0.0, -1.0, 0.0).is_err());
}

#[test]
fn jacobian_examples() {
    let j = forward_jacobian(mult(0.0, 0.0, 0.0)).unwrap();
    assert_eq!(j[0][1], 0.0);
    assert_eq!(j[1][0], 0.0);
    let phi1 = fermi_phi(1, 0.0).unwrap();
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    assert!((det - phi1 * phi1 / 2.0).abs() < 1e-15);

    let sc = reduced();
    let h = 1e-5;
    let f = |a: f64, b: f64| {
        let s = forward_map(mult(a, b, 0.0), &sc).unwrap();
        let i0 = s.n / sc.n_t();
        [i0, s.u_abs() * i0]
    };
    let j = forward_jacobian(mult(1.0, 1.0, 0.0)).unwrap();
    let (fa1, fa0) = (f(1.0 + h, 1.0), f(1.0 - h, 1.0));
    let (fb1, fb0) = (f(1.0, 1.0 + h), f(1.0, 1.0 - h));
    for r in 0..2 {
        let da = (fa1[r] - fa0[r]) / (2.0 * h);
        let db = (fb1[r] - fb0[r]) / (2.0 * h);
        assert!((da - j[r][0]).abs() < 1e-6 && (db - j[r][1]).abs() < 1e-6);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let j = forward_jacobian(mult(rng.gen_range(-5.0..5.0), rng.gen_range(0.0..5.0), 0.0)).unwrap();
        assert!(j[0][0] * j[1][1] - j[0][1] * j[1][0] > 0.0);
    }
}

#[test]
fn inversion_examples() {
    let sc = reduced();
    let target = MomentState::new(sc.n_t() * PI * PI / 12.0, [0.0, 0.0]).unwrap();
    let m = invert_constraints(target, &sc, DEFAULT_INVERSION_TOL).unwrap();
    assert!(m.a.abs() < 1e-13 && m.b == 0.0);

    let target = MomentState::new(1e-10 * sc.n_t(), [0.3, 0.4]).unwrap();
    let m = invert_constraints(target, &sc, DEFAULT_INVERSION_TOL).unwrap();
    assert!(m.a < -m.b);
    // bisection oracle for I1/I0 = 0.5
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_ratio(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((m.b - lo).abs() < 1e-8);
    assert!((m.theta_b - 0.4f64.atan2(0.3)).abs() < 1e-15);

    assert!(MomentState::new(1.0, [0.8, 0.6]).is_err());
    assert!(MomentState::new(-1.0, [0.0, 0.0]).is_err());
}

#[test]
fn inversion_round_trip_extremes() {
    let sc = reduced();
    for (a, b) in [
        (-200.0, 150.0),
        (-20.0, 30.0),
        (50.0, 0.1),
        (0.0, 300.0),
        (-35.0, 34.0),
        (1e3, 900.0),
        (-2.0, 1e-9),
    ] {
        let m = mult(a, b, 0.7);
        let s = forward_map(m, &sc).unwrap();
        let back = invert_constraints(s, &sc, DEFAULT_INVERSION_TOL).unwrap();
        assert!((back.a - a).abs() < 1e-8 * (1.0 + a.abs()), "({a},{b}) -> {back:?}");
        assert!((back.b - b).abs() < 1e-8 * (1.0 + b), "({a},{b}) -> {back:?}");
    }
}

#[test]
fn warm_start_reuses_seed() {
    let sc = reduced();
    let s = forward_map(mult(1.0, 2.0, 0.0), &sc).unwrap();
    let seed = mult(1.01, 1.98, 0.0);
    let m = invert_constraints_seeded(s, &sc, DEFAULT_INVERSION_TOL, Some(seed)).unwrap();
    assert!((m.a - 1.0).abs() < 1e-9 && (m.b - 2.0).abs() < 1e-9);
}

#[test]
fn isotropic_tensors() {
    let sc = reduced();
    let n = 0.37;
    let s = MomentState::new(n, [0.0, 0.0]).unwrap();
    let m = invert_constraints(s, &sc, DEFAULT_INVERSION_TOL).unwrap();
    let t = closure_tensors(s, m, &sc).unwrap();
    assert_eq!(t.p, [[n / 2.0, 0.0], [0.0, n / 2.0]]);
    let a = fermi_phi_inverse(n / sc.n_t()).unwrap();
    let expect = sc.c / sc.kbt * sc.n_t() / 2.0 * fermi_phi(1, a).unwrap();
    assert!((t.q[0][0] - expect).abs() < 1e-12 && t.q[0][1] == 0.0);
}

#[test]
fn tensors_match_momentum_space_oracle() {
    let sc = reduced();
    for (a, b, th) in [(0.3, 1.1, 0.4), (-2.0, 3.0, -1.0), (4.0, 2.0, 2.5)] {
        let m = mult(a, b, th);
        let s = forward_map(m, &sc).unwrap();
        let t = closure_tensors(s, m, &sc).unwrap();
        let o = momentum_moments(a, b, th);
        assert!((s.n - o.n).abs() < 1e-9 * o.n);
        assert!((t.p[0][0] + t.p[1][1] - s.n).abs() < 1e-14 * s.n);
        for i in 0..2 {
            for j in 0..2 {
                assert!((t.p[i][j] - o.p[i][j]).abs() < 1e-9 * s.n, "P{i}{j}");
                assert!((t.q[i][j] - o.q[i][j]).abs() < 1e-9 * s.n, "Q{i}{j}");
            }
        }
    }
}

#[test]
fn coefficient_inequalities() {
    let sc = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let nu = 10f64.powf(rng.gen_range(-6.0..6.0));
        let ua = rng.gen_range(0.0..0.99);
        let th = rng.gen_range(-PI..PI);
        let s = MomentState::new(nu * sc.n_t(), [ua * th.cos(), ua * th.sin()]).unwrap();
        let m = invert_constraints(s, &sc, DEFAULT_INVERSION_TOL).unwrap();
        let t = closure_tensors(s, m, &sc).unwrap();
        assert!((t.p_par + t.p_perp - 1.0).abs() < 1e-14);
        assert!(t.p_par >= 0.5 && t.p_par < 1.0);
        assert!(t.q_par > 0.0 && t.q_par < 0.5);
        assert!(t.q_perp > 0.0 && t.q_perp < 1.0 - t.q_par);
        assert!((t.p[0][1] - t.p[1][0]).abs() < 1e-15 * s.n);
    }
}

#[test]
fn maxwell_boltzmann_factorization() {
    for b in [0.5, 2.0, 8.0] {
        for a in [-31.0, -60.0] {
            let sc = closure_scalars(a - b, b).unwrap();
            let x = regime_x(bessel_ratio(b)).unwrap();
            assert!((sc.p_par - x).abs() < 1e-6);
            assert!((sc.q_perp - x).abs() < 1e-6);
            assert!((1.0 - sc.q_par - x).abs() < 1e-6);
        }
    }
}

#[test]
fn degenerate_match() {
    let sc = reduced();
    let nu: f64 = 1e8;
    for ua in [0.1, 0.5, 0.9] {
        let s = MomentState::new(nu * sc.n_t(), [ua, 0.0]).unwrap();
        let m = invert_constraints(s, &sc, DEFAULT_INVERSION_TOL).unwrap();
        let t = closure_tensors(s, m, &sc).unwrap();
        let r = regime_yz(ua).unwrap();
        assert!((t.p_par - r.y).abs() < 1e-3);
        assert!((t.q_par * nu.sqrt() / 2f64.sqrt() - r.z).abs() < 1e-3);
        assert!((t.q_perp * nu.sqrt() / 2f64.sqrt() - r.z_perp).abs() < 1e-3);
        // Q prefactor √n/(ħ√π) of the degenerate form
        let q_deg = r.z * s.n.sqrt() / (sc.hbar * PI.sqrt());
        assert!((t.q[0][0] / q_deg - 1.0).abs() < 1e-3);
    }
}

#[test]
fn regime_x_examples() {
    assert_eq!(regime_x(0.0).unwrap(), 0.5);
    let x = regime_x(0.99).unwrap();
    assert!(x > 0.9 && x < 1.0);
    let mut prev = 0.0;
    for k in 0..100 {
        let v = regime_x(k as f64 / 100.0).unwrap();
        assert!(v > prev);
        prev = v;
    }
}

/// Slope of (f(u) - 1/2) against u² by least squares on [1e-3, 1e-2].
fn fit_u2_slope(f: impl Fn(f64) -> f64) -> f64 {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..10 {
        let u = 1e-3 + k as f64 * 1e-3;
        let x = u * u;
        sxy += x * (f(u) - 0.5);
        sxx += x * x;
    }
    sxy / sxx
}

#[test]
fn small_u_expansions() {
    let y = fit_u2_slope(|u| regime_yz(u).unwrap().y);
    let z = fit_u2_slope(|u| regime_yz(u).unwrap().z);
    let zp = fit_u2_slope(|u| regime_yz(u).unwrap().z_perp);
    assert!((y / 0.125 - 1.0).abs() < 0.01, "{y}");
    assert!((z / -0.125 - 1.0).abs() < 0.01, "{z}");
    assert!((zp / -0.125 - 1.0).abs() < 0.01, "{zp}");
}

#[test]
fn near_unit_expansions() {
    let prefactor = 5f64.sqrt() * 14f64.powf(0.25) / (6.0 * PI).sqrt();
    let eps = 1e-4;
    let r = regime_yz(1.0 - eps).unwrap();
    assert!((r.z_perp / (prefactor * eps.powf(0.25)) - 1.0).abs() < 0.02);
    // Y - (2u - 1) = O((1-u)²): halving 1-u quarters the gap
    let gap = |e: f64| regime_yz(1.0 - e).unwrap().y - (1.0 - 2.0 * e);
    let ratio = gap(2e-3) / gap(1e-3);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    assert!(r.z < 1e-2 && r.z > 0.0);
}

#[test]
fn free_energy_reduction() {
    let sc = reduced();
    let m = mult(0.0, 0.0, 0.0);
    let s = forward_map(m, &sc).unwrap();
    let e = free_energy_density(s, m, 0.0, &sc, 1.0).unwrap();
    let phi3 = fermi_phi(3, 0.0).unwrap();
    assert!((e + sc.kbt * sc.n_t() * phi3).abs() < 1e-15);
    let o = momentum_moments(0.0, 0.0, 0.0);
    assert!((e - o.eps).abs() < 1e-10);
    // potential shifts by σ n V
    let ev = free_energy_density(s, m, 0.3, &sc, -1.0).unwrap();
    assert!((ev - (e - 0.3 * s.n)).abs() < 1e-15);
}

#[test]
fn free_energy_matches_oracle_off_equilibrium() {
    let sc = reduced();
    for (a, b, th) in [(1.2, 2.0, 0.3), (-3.0, 1.0, -2.0)] {
        let m = mult(a, b, th);
        let s = forward_map(m, &sc).unwrap();
        let e = free_energy_density(s, m, 0.0, &sc, 1.0).unwrap();
        let flux = entropy_flux(s, m, 0.0, &sc, 1.0).unwrap();
        let o = momentum_moments(a, b, th);
        assert!((e - o.eps).abs() < 1e-9 * o.eps.abs());
        for i in 0..2 {
            assert!((flux[i] - o.eps_flux[i]).abs() < 1e-9 * o.eps.abs(), "flux {i}");
        }
    }
}

#[test]
fn legendre_consistency() {
    let sc = reduced();
    let m = mult(0.8, 1.5, 0.6);
    let s = forward_map(m, &sc).unwrap();
    let v = 0.2;
    let sigma = 1.0;
    let eps = |n: f64, j: [f64; 2]| {
        let st = MomentState::new(n, [j[0] / n, j[1] / n]).unwrap();
        let mm = invert_constraints(st, &sc, 1e-13).unwrap();
        free_energy_density(st, mm, v, &sc, sigma).unwrap()
    };
    let j0 = [s.n * s.u[0], s.n * s.u[1]];
    let h = 1e-5;
    let dn = (eps(s.n + h, j0) - eps(s.n - h, j0)) / (2.0 * h);
    assert!((dn - (sc.kbt * m.a + sigma * v)).abs() < 1e-6, "{dn}");
    let bv = m.b_vec();
    for i in 0..2 {
        let mut jp = j0;
        let mut jm = j0;
        jp[i] += h;
        jm[i] -= h;
        let d = (eps(s.n, jp) - eps(s.n, jm)) / (2.0 * h);
        assert!((d - sc.kbt * bv[i]).abs() < 1e-6, "component {i}: {d}");
    }
}

pub fn dual_hessian(a: f64, b: [f64; 2], sc: &PhysicalScales) -> Matrix3<f64> {
    let h = 1e-4;
    let f = |x: [f64; 3]| dual_free_energy(x[0], [x[1], x[2]], sc).unwrap();
    let x0 = [a, b[0], b[1]];
    let mut hess = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut pp = x0;
            let mut pm = x0;
            let mut mp = x0;
            let mut mm = x0;
            pp[i] += h;
            pp[j] += h;
            pm[i] += h;
            pm[j] -= h;
            mp[i] -= h;
            mp[j] += h;
            mm[i] -= h;
            mm[j] -= h;
            hess[(i, j)] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
        }
    }
    hess
}

#[test]
fn dual_hessian_positive_definite() {
    let sc = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let a = rng.gen_range(-5.0..5.0);
        let b = rng.gen_range(0.2..5.0);
        let th: f64 = rng.gen_range(-PI..PI);
        let hess = dual_hessian(a, [b * th.cos(), b * th.sin()], &sc);
        let eig = hess.symmetric_eigen().eigenvalues;
        assert!(eig.iter().all(|&l| l > 0.0), "{eig}");
        // ∂²/∂A² of the dual equals n_T 𝓘_0^1
        let i01 = kernel_quadrature(KernelArgs::new(0, 1.0, a, b).unwrap(), DEFAULT_TOL).unwrap();
        assert!((hess[(0, 0)] - sc.n_t() * i01).abs() < 1e-5);
    }
}
