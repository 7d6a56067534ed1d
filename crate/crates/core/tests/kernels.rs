use graphene_hydro::kernels::*;
use graphene_hydro::special::{bessel_i, eta_over_factorial_ln, fermi_phi};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Trapezoid rule on the full period; spectrally accurate for this integrand.
fn trapezoid(n: u32, s: f64, a: f64, b: f64, m: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..m {
        let t = 2.0 * PI * i as f64 / m as f64;
        sum += (n as f64 * t).cos() * fermi_phi(s, a + b * t.cos()).unwrap();
    }
    sum / m as f64
}

/// Double power series in A and B, valid for |A| < π.
fn double_series(n: u32, s: f64, a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..30u32 {
        let pb =
            (0.5 * b).powi((n + 2 * j) as i32) / (libm::tgamma(j as f64 + 1.0) * libm::tgamma((n + j) as f64 + 1.0));
        let shift = s - (2 * j + n) as f64;
        let mut inner = 0.0;
        for k in 0..1500u32 {
            if let Some((sign, ln)) = eta_over_factorial_ln(shift, k) {
                let parity = if a < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                inner += sign * parity * (ln + k as f64 * a.abs().ln()).exp();
            }
        }
        total += pb * inner;
    }
    total
}

fn args(n: u32, s: f64, a: f64, b: f64) -> KernelArgs {
    KernelArgs::new(n, s, a, b).unwrap()
}

#[test]
fn quadrature_examples() {
    let v = kernel_quadrature(args(0, 2.0, 0.0, 0.0), DEFAULT_TOL).unwrap();
    assert!((v - PI * PI / 12.0).abs() < 1e-15);
    assert_eq!(kernel_quadrature(args(2, 2.0, 1.3, 0.0), DEFAULT_TOL).unwrap(), 0.0);
    let v = kernel_quadrature(args(1, 2.0, 0.0, 1.0), DEFAULT_TOL).unwrap();
    assert!(v > 0.0);
    assert!((v - trapezoid(1, 2.0, 0.0, 1.0, 256)).abs() < 1e-13);
}

#[test]
fn quadrature_matches_trapezoid_oracle() {
    let cases = [
        (0, 2.0, 5.0, 40.0),
        (1, 1.0, -3.0, 7.0),
        (2, 3.0, 30.0, 29.0),
        (3, 2.0, -60.0, 80.0),
        (1, 2.5, 0.4, 3.0),
        (1, 2.0, 0.0, 300.0),
    ];
    for (n, s, a, b) in cases {
        let q = kernel_quadrature(args(n, s, a, b), 1e-13).unwrap();
        let o = trapezoid(n, s, a, b, 8192);
        let scale = trapezoid(0, s, a, b, 8192).abs();
        assert!((q - o).abs() < 1e-11 * scale, "({n},{s},{a},{b}): {q} vs {o}");
    }
}

#[test]
fn rejects_bad_arguments() {
    assert!(KernelArgs::new(0, 2.0, 0.0, -1.0).is_err());
    assert!(kernel_quadrature(args(0, -1.0, 0.0, 1.0), 1e-12).is_err());
    assert!(kernel_quadrature(args(0, 2.0, 0.0, 1.0), 0.0).is_err());
}

#[test]
fn series_examples() {
    let (v, _) = kernel_series_auto(args(0, 2.0, 0.0, 0.0)).unwrap();
    assert_eq!(v, fermi_phi(2, 0.0).unwrap());
    let (v, _) = kernel_series_auto(args(1, 2.0, 0.0, 0.5)).unwrap();
    let q = kernel_quadrature(args(1, 2.0, 0.0, 0.5), DEFAULT_TOL).unwrap();
    assert!((v - q).abs() < 1e-10);
    // leading order (B/2) φ_{s-1}(A), error O(B^3)
    for b in [1e-2, 1e-3] {
        let (v, _) = kernel_series_auto(args(1, 2.0, 0.3, b)).unwrap();
        let lead = 0.5 * b * fermi_phi(1, 0.3).unwrap();
        assert!(((v - lead) / lead).abs() < b * b);
    }
    // fixed truncation agrees with the adaptive sum
    let fixed = kernel_series(args(2, 3.0, -1.0, 1.5), 80).unwrap();
    let (auto, _) = kernel_series_auto(args(2, 3.0, -1.0, 1.5)).unwrap();
    assert!((fixed - auto).abs() < 1e-15);
}

#[test]
fn double_series_oracle() {
    for (n, s, a, b) in [(0, 2.0, 0.5, 1.0), (1, 3.0, -1.2, 0.7), (2, 1.0, 1.0, 1.5)] {
        let o = double_series(n, s, a, b);
        let q = kernel_quadrature(args(n, s, a, b), 1e-13).unwrap();
        let (v, _) = kernel_series_auto(args(n, s, a, b)).unwrap();
        assert!((q - o).abs() < 1e-11, "quadrature ({n},{s},{a},{b}): {q} {o} {v}");
        assert!((v - o).abs() < 1e-11, "series ({n},{s},{a},{b})");
    }
}

#[test]
fn cross_method_agreement_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(0..=4);
        let s = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let a = rng.gen_range(-3.0..=3.0);
        let b = rng.gen_range(0.0..=2.0);
        let q = kernel_quadrature(args(n, s, a, b), DEFAULT_TOL).unwrap();
        let (v, _) = kernel_series_auto(args(n, s, a, b)).unwrap();
        assert!((q - v).abs() < 1e-10, "({n},{s},{a},{b}): {q} vs {v}");
    }
}

#[test]
fn mb_asymptote_examples() {
    let v = kernel_mb_asymptote(args(0, 2.0, -30.0, 1.0)).unwrap();
    assert!((v / ((-30f64).exp() * bessel_i(0, 1.0)) - 1.0).abs() < 1e-14);
    let q = kernel_quadrature(args(0, 2.0, -30.0, 1.0), DEFAULT_TOL).unwrap();
    assert!((q / v - 1.0).abs() < 1e-6);
    assert_eq!(kernel_mb_asymptote(args(1, 2.0, -10.0, 0.0)).unwrap(), 0.0);
    let v = kernel_mb_asymptote(args(0, 2.0, -10.0, 0.0)).unwrap();
    assert!((v - (-10f64).exp()).abs() < 1e-20);
    assert!(kernel_mb_asymptote(args(0, 2.0, -1.0, 1.0)).is_err());
}

#[test]
fn mb_asymptote_agrees_for_all_orders() {
    for n in 0..4 {
        for s in [1.0, 2.0, 3.0] {
            for b in [0.0, 1.0, 2.5, 5.0] {
                let q = kernel_quadrature(args(n, s, -30.0, b), DEFAULT_TOL).unwrap();
                let m = kernel_mb_asymptote(args(n, s, -30.0, b)).unwrap();
                if m == 0.0 {
                    assert_eq!(q, 0.0);
                } else {
                    assert!((q / m - 1.0).abs() < 1e-6, "({n},{s},{b})");
                }
            }
        }
    }
}

#[test]
fn cutoff_examples() {
    assert!((cutoff_angle(0.0, 1.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    assert_eq!(cutoff_angle(2.0, 1.0).unwrap(), PI);
    assert!(cutoff_angle(-1.0, 1.0).is_err());
}

#[test]
fn degenerate_examples() {
    assert!((degenerate_kernel(0, 2.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(degenerate_kernel(1, 2.0, 0.0).unwrap().abs() < 1e-15);
    assert!(degenerate_kernel(0, 2.0, 3.0 * FRAC_PI_4).is_err());
    let r: f64 = 1e4;
    let q = kernel_quadrature(args(0, 2.0, 0.0, r), DEFAULT_TOL).unwrap() / (r * r);
    let f = degenerate_kernel(0, 2.0, FRAC_PI_2).unwrap();
    assert!((q / f - 1.0).abs() < 1e-3);
}

#[test]
fn degenerate_kernel_closed_forms() {
    // ψ = π/2: C = π/2, F_0^2 = (1/2π)∫₀^{π/2} cos²θ dθ = 1/8
    assert!((degenerate_kernel(0, 2.0, FRAC_PI_2).unwrap() - 0.125).abs() < 1e-14);
    // ψ = π/2, N = 1, s = 1: (1/π)∫₀^{π/2} cos²θ dθ = 1/4
    assert!((degenerate_kernel(1, 1.0, FRAC_PI_2).unwrap() - 0.25).abs() < 1e-14);
}

#[test]
fn degenerate_limit_improves_with_radius() {
    for (n, s, psi) in [(0u32, 2.0, 0.3), (1, 2.0, FRAC_PI_2), (1, 1.0, 2.0), (2, 1.0, 1.0)] {
        let f = degenerate_kernel(n, s, psi).unwrap();
        let mut prev = f64::INFINITY;
        for r in [1e2, 1e3, 1e4] {
            let (a, b) = (r * psi.cos(), r * psi.sin());
            let q = kernel_quadrature(args(n, s, a, b), DEFAULT_TOL).unwrap() / r.powf(s);
            let err = (q / f - 1.0).abs();
            assert!(err < prev, "({n},{s},{psi}) at R={r}");
            prev = err;
        }
        assert!(prev < 1e-3);
    }
}

#[test]
fn chebyshev_examples() {
    let (s, a, b) = (2.0, 0.7, 2.3);
    let i0 = kernel_quadrature(args(0, s, a, b), DEFAULT_TOL).unwrap();
    let i1 = kernel_quadrature(args(1, s, a, b), DEFAULT_TOL).unwrap();
    let i2 = kernel_quadrature(args(2, s, a, b), DEFAULT_TOL).unwrap();
    assert!((chebyshev_moment(&[1.0], s, a, b).unwrap() - i0).abs() < 1e-12);
    assert!((chebyshev_moment(&[0.0, 1.0], s, a, b).unwrap() - i1).abs() < 1e-12);
    let x2 = chebyshev_moment(&[0.5, 0.0, 0.5], s, a, b).unwrap();
    assert!((x2 - 0.5 * (i0 + i2)).abs() < 1e-12);
    let m = 4096;
    let direct: f64 = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            t.cos().powi(2) * fermi_phi(s, a + b * t.cos()).unwrap()
        })
        .sum::<f64>()
        / m as f64;
    assert!((x2 - direct).abs() < 1e-12);
}

#[test]
fn kernel_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let a = rng.gen_range(-40.0..40.0);
        let b = rng.gen_range(0.0..40.0);
        let v = kernel_batch(a, b, &[(0, 2.0), (1, 2.0)], &KernelDispatch::default()).unwrap();
        assert!(v[0] > 0.0);
        assert!(v[1] >= 0.0 && v[1] < v[0], "A={a}, B={b}");
    }
}

#[test]
fn b_zero_collapse_is_exact() {
    for a in [-5.0, 0.0, 2.5] {
        for s in [1.0, 2.0, 3.0] {
            for n in 0..4 {
                let v = kernel(args(n, s, a, 0.0)).unwrap();
                let expect = if n == 0 { fermi_phi(s, a).unwrap() } else { 0.0 };
                assert_eq!(v, expect);
            }
        }
    }
}

#[test]
fn dispatch_is_continuous_across_thresholds() {
    let d = KernelDispatch::default();
    let q = KernelDispatch::quadrature_only();
    let points = [
        (-1.9, 0.99),
        (1.99, 1.0),
        (-28.0, 2.0),
        (-31.0, 5.0),
        (1.2e4, 50.0),
        (-5000.0, 9500.0),
    ];
    for (a, b) in points {
        for n in 0..3 {
            for s in [1.0, 2.0, 3.0] {
                let x = kernel_batch(a, b, &[(n, s), (0, s)], &d).unwrap();
                let y = kernel_batch(a, b, &[(n, s), (0, s)], &q).unwrap();
                assert!(
                    (x[0] - y[0]).abs() < 1e-6 * y[1],
                    "({n},{s},{a},{b}): {} vs {}",
                    x[0],
                    y[0]
                );
            }
        }
    }
}
