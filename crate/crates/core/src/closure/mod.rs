//! The maximum-entropy closure: constraint map (A, B) ↦ (n, u), its inverse,
//! the tensors P and Q, and the free energy.

pub mod regimes;

pub use regimes::{degenerate_u, psi_from_ratio, regime_x, regime_yz, RegimeYZ};

use crate::error::{Error, Result};
use crate::kernels::{degenerate_kernel, kernel_batch, KernelDispatch};
use crate::scales::PhysicalScales;
use crate::special::{bessel_i_scaled, bessel_ratio_inverse, fermi_phi_inverse, softplus};
use serde::{Deserialize, Serialize};

/// Default inversion tolerance.
pub const DEFAULT_INVERSION_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 100;
const ISOTROPIC_U: f64 = 1e-12;

/// Lagrange multipliers (A, B, θ_B) of the equilibrium distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub a: f64,
    pub b: f64,
    pub theta_b: f64,
}

impl Multipliers {
    pub fn new(a: f64, b: f64, theta_b: f64) -> Result<Self> {
        if !a.is_finite() || !(b >= 0.0) || !b.is_finite() || !theta_b.is_finite() {
            return Err(Error::domain("Multipliers", format!("A={a}, B={b}, θ={theta_b}")));
        }
        Ok(Multipliers {
            a,
            b,
            theta_b: if b == 0.0 { 0.0 } else { theta_b },
        })
    }

    /// The vector B (cos θ_B, sin θ_B).
    pub fn b_vec(&self) -> [f64; 2] {
        [self.b * self.theta_b.cos(), self.b * self.theta_b.sin()]
    }
}

/// Density and direction field of one carrier species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub n: f64,
    pub u: [f64; 2],
}

impl MomentState {
    pub fn new(n: f64, u: [f64; 2]) -> Result<Self> {
        let s = MomentState { n, u };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0) || !self.n.is_finite() {
            return Err(Error::domain("MomentState", format!("n = {} must be positive", self.n)));
        }
        let ua = self.u_abs();
        if !(ua < 1.0) {
            return Err(Error::domain("MomentState", format!("|u| = {ua} must be below 1")));
        }
        Ok(())
    }

    pub fn u_abs(&self) -> f64 {
        self.u[0].hypot(self.u[1])
    }
}

/// Closure tensors and their scalar coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureTensors {
    pub p: [[f64; 2]; 2],
    pub q: [[f64; 2]; 2],
    pub p_par: f64,
    pub p_perp: f64,
    pub q_par: f64,
    pub q_perp: f64,
}

/// The kernels 𝓘_N^s(A, B) that enter the closure, named i{N}{s}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub i01: f64,
    pub i11: f64,
    pub i21: f64,
    pub i02: f64,
    pub i12: f64,
    pub i22: f64,
}

impl KernelMoments {
    pub fn evaluate(a: f64, b: f64, dispatch: &KernelDispatch) -> Result<Self> {
        let v = kernel_batch(
            a,
            b,
            &[(0, 1.0), (1, 1.0), (2, 1.0), (0, 2.0), (1, 2.0), (2, 2.0)],
            dispatch,
        )?;
        Ok(KernelMoments {
            i01: v[0],
            i11: v[1],
            i21: v[2],
            i02: v[3],
            i12: v[4],
            i22: v[5],
        })
    }

    /// Jacobian of (A, B) ↦ (𝓘_0^2, 𝓘_1^2).
    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        [[self.i01, self.i11], [self.i11, 0.5 * (self.i01 + self.i21)]]
    }

    pub fn scalars(&self) -> ClosureScalars {
        ClosureScalars {
            p_par: 0.5 * (self.i02 + self.i22) / self.i02,
            p_perp: 0.5 * (self.i02 - self.i22) / self.i02,
            q_par: 0.5 * (self.i01 - self.i21) / self.i02,
            q_perp: 0.5 * (self.i01 + self.i21) / self.i02,
        }
    }
}

/// Dimensionless closure coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureScalars {
    pub p_par: f64,
    pub p_perp: f64,
    pub q_par: f64,
    pub q_perp: f64,
}

/// Closure coefficients at (A, B).
pub fn closure_scalars(a: f64, b: f64) -> Result<ClosureScalars> {
    Ok(KernelMoments::evaluate(a, b, &KernelDispatch::default())?.scalars())
}

/// n = n_T 𝓘_0^2(A, B), u = (𝓘_1^2/𝓘_0^2) (cos θ_B, sin θ_B).
pub fn forward_map(m: Multipliers, scales: &PhysicalScales) -> Result<MomentState> {
    let v = kernel_batch(m.a, m.b, &[(0, 2.0), (1, 2.0)], &KernelDispatch::default())?;
    let ua = v[1] / v[0];
    Ok(MomentState {
        n: scales.n_t() * v[0],
        u: [ua * m.theta_b.cos(), ua * m.theta_b.sin()],
    })
}

/// Jacobian of (A, B) ↦ (𝓘_0^2, 𝓘_1^2).
pub fn forward_jacobian(m: Multipliers) -> Result<[[f64; 2]; 2]> {
    let v = kernel_batch(m.a, m.b, &[(0, 1.0), (1, 1.0), (2, 1.0)], &KernelDispatch::default())?;
    Ok([[v[0], v[1]], [v[1], 0.5 * (v[0] + v[2])]])
}

struct Residual {
    f: [f64; 2],
    mom: KernelMoments,
}

fn residual(a: f64, b: f64, ln_nu: f64, u: f64, dispatch: &KernelDispatch) -> Result<Residual> {
    let mom = KernelMoments::evaluate(a, b, dispatch)?;
    Ok(Residual {
        f: [mom.i02.ln() - ln_nu, mom.i12 / mom.i02 - u],
        mom,
    })
}

fn norm(f: &[f64; 2]) -> f64 {
    f[0].hypot(f[1])
}

/// Damped Newton iteration on (ln 𝓘_0^2 - ln ν, 𝓘_1^2/𝓘_0^2 - u).
fn newton(nu: f64, u: f64, seed: (f64, f64), tol: f64, dispatch: &KernelDispatch) -> Result<(f64, f64)> {
    let ln_nu = nu.ln();
    let (mut a, mut b) = (seed.0, seed.1.max(0.0));
    let mut r = residual(a, b, ln_nu, u, dispatch)?;
    for _ in 0..MAX_NEWTON {
        if r.f[0].abs() <= 1e-14 && r.f[1].abs() <= 1e-15 {
            break;
        }
        let m = &r.mom;
        let i02 = m.i02;
        let j = [
            [m.i01 / i02, m.i11 / i02],
            [
                (m.i11 * i02 - m.i12 * m.i01) / (i02 * i02),
                (0.5 * (m.i01 + m.i21) * i02 - m.i12 * m.i11) / (i02 * i02),
            ],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NoConvergence {
                routine: "invert_constraints",
                iterations: 0,
            });
        }
        let da = -(j[1][1] * r.f[0] - j[0][1] * r.f[1]) / det;
        let db = -(j[0][0] * r.f[1] - j[1][0] * r.f[0]) / det;
        let base = norm(&r.f);
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-12 {
            let ta = a + lambda * da;
            let tb = (b + lambda * db).max(0.0);
            if let Ok(tr) = residual(ta, tb, ln_nu, u, dispatch) {
                if tr.f.iter().all(|v| v.is_finite()) && norm(&tr.f) < base {
                    accepted = Some((ta, tb, tr));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((ta, tb, tr)) = accepted else {
            break;
        };
        let step = (ta - a).abs() + (tb - b).abs();
        a = ta;
        b = tb;
        r = tr;
        if step <= 1e-15 * (1.0 + a.abs() + b) {
            break;
        }
    }
    if r.f[0].abs() <= tol && r.f[1].abs() <= tol {
        Ok((a, b))
    } else {
        Err(Error::NoConvergence {
            routine: "invert_constraints",
            iterations: MAX_NEWTON,
        })
    }
}

/// Regime-aware starting point for the inversion at ν = n/n_T.
pub fn initial_guess(nu: f64, u: f64) -> Result<(f64, f64)> {
    if nu < 0.1 {
        let b = bessel_ratio_inverse(u)?;
        Ok((nu.ln() - b - bessel_i_scaled(0, b).ln(), b))
    } else if nu > 10.0 {
        let psi = psi_from_ratio(u)?;
        let r = (nu / degenerate_kernel(0, 2.0, psi)?).sqrt();
        Ok((r * psi.cos(), r * psi.sin()))
    } else {
        let a = fermi_phi_inverse(nu)?;
        Ok((a, 2.0 * u * nu / softplus(a)))
    }
}

/// Multipliers reproducing `target`, optionally seeded with a nearby solution.
pub fn invert_constraints_seeded(
    target: MomentState,
    scales: &PhysicalScales,
    tol: f64,
    seed: Option<Multipliers>,
) -> Result<Multipliers> {
    target.validate()?;
    let nu = target.n / scales.n_t();
    let u = target.u_abs();
    let theta = if u > 0.0 { target.u[1].atan2(target.u[0]) } else { 0.0 };
    let dispatch = KernelDispatch::default();
    let attempt = |start: (f64, f64)| newton(nu, u, start, tol, &dispatch);
    let mut result = seed.map(|m| attempt((m.a, m.b)));
    if !matches!(result, Some(Ok(_))) {
        result = Some(attempt(initial_guess(nu, u)?));
    }
    let (a, b) = match result {
        Some(Ok(ab)) => ab,
        _ => {
            // Continuation in |u| from the isotropic state.
            let mut ab = attempt(initial_guess(nu, 0.0)?)?;
            const STEPS: usize = 16;
            for k in 1..=STEPS {
                ab = newton(nu, u * k as f64 / STEPS as f64, ab, tol, &dispatch)?;
            }
            ab
        }
    };
    Multipliers::new(a, b, theta)
}

/// Multipliers (A, B, θ_B) reproducing `target` within `tol`.
pub fn invert_constraints(target: MomentState, scales: &PhysicalScales, tol: f64) -> Result<Multipliers> {
    invert_constraints_seeded(target, scales, tol, None)
}

/// Assembles P and Q from the scalar coefficients in the frame of u.
pub fn closure_tensors(target: MomentState, m: Multipliers, scales: &PhysicalScales) -> Result<ClosureTensors> {
    let sc = closure_scalars(m.a, m.b)?;
    Ok(tensors_from_scalars(target, m, &sc, scales))
}

pub(crate) fn tensors_from_scalars(
    target: MomentState,
    m: Multipliers,
    sc: &ClosureScalars,
    scales: &PhysicalScales,
) -> ClosureTensors {
    let n = target.n;
    let qf = scales.c / scales.kbt * n;
    let ua = target.u_abs();
    if ua < ISOTROPIC_U {
        let qs = scales.c / scales.kbt * 0.5 * scales.n_t() * softplus(m.a);
        return ClosureTensors {
            p: [[0.5 * n, 0.0], [0.0, 0.5 * n]],
            q: [[qs, 0.0], [0.0, qs]],
            p_par: 0.5,
            p_perp: 0.5,
            q_par: qs / qf,
            q_perp: qs / qf,
        };
    }
    let e = [target.u[0] / ua, target.u[1] / ua];
    let ep = [-e[1], e[0]];
    let mut p = [[0.0; 2]; 2];
    let mut q = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            p[i][j] = n * (sc.p_par * e[i] * e[j] + sc.p_perp * ep[i] * ep[j]);
            q[i][j] = qf * (sc.q_par * e[i] * e[j] + sc.q_perp * ep[i] * ep[j]);
        }
    }
    ClosureTensors {
        p,
        q,
        p_par: sc.p_par,
        p_perp: sc.p_perp,
        q_par: sc.q_par,
        q_perp: sc.q_perp,
    }
}

/// Inverts the constraints and returns multipliers together with the tensors.
pub fn close(
    target: MomentState,
    scales: &PhysicalScales,
    seed: Option<Multipliers>,
) -> Result<(Multipliers, ClosureTensors)> {
    let m = invert_constraints_seeded(target, scales, DEFAULT_INVERSION_TOL, seed)?;
    let t = closure_tensors(target, m, scales)?;
    Ok((m, t))
}

/// ⟨ε⟩ = k_BT (A n + B n|u| - n_T 𝓘_0^3(A, B)) + σ n V, σ = ±1 per species.
pub fn free_energy_density(
    state: MomentState,
    m: Multipliers,
    v: f64,
    scales: &PhysicalScales,
    species_sign: f64,
) -> Result<f64> {
    let i03 = kernel_batch(m.a, m.b, &[(0, 3.0)], &KernelDispatch::default())?[0];
    Ok(scales.kbt * (m.a * state.n + m.b * state.n * state.u_abs() - scales.n_t() * i03) + species_sign * state.n * v)
}

/// Legendre dual ⟨ε⟩* = k_BT n_T 𝓘_0^3(A, |B|) as a function of (A, B⃗).
pub fn dual_free_energy(a: f64, b_vec: [f64; 2], scales: &PhysicalScales) -> Result<f64> {
    let b = b_vec[0].hypot(b_vec[1]);
    Ok(scales.kbt * scales.n_t() * kernel_batch(a, b, &[(0, 3.0)], &KernelDispatch::default())?[0])
}

/// Free-energy flux ⟨ν_i ε⟩.
pub fn entropy_flux(
    state: MomentState,
    m: Multipliers,
    v: f64,
    scales: &PhysicalScales,
    species_sign: f64,
) -> Result<[f64; 2]> {
    let t = closure_tensors(state, m, scales)?;
    let i13 = kernel_batch(m.a, m.b, &[(1, 3.0)], &KernelDispatch::default())?[0];
    let bv = m.b_vec();
    let e = [m.theta_b.cos(), m.theta_b.sin()];
    let lead = scales.kbt * m.a + species_sign * v;
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = scales.c
            * (lead * state.n * state.u[i] + scales.kbt * (bv[0] * t.p[0][i] + bv[1] * t.p[1][i])
                - scales.kbt * scales.n_t() * i13 * e[i]);
    }
    Ok(out)
}
