//! Angular moments 𝓘_N^s(A, B) = (1/π) ∫₀^π cos(Nθ) φ_s(A + B cos θ) dθ and
//! the degenerate-gas family 𝓕_N^s(ψ).

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_adaptive};
use crate::special::{bessel_i_scaled, fermi_phi, phi_int, FermiOrder};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Default quadrature tolerance, relative to the magnitude of 𝓘_0^s.
pub const DEFAULT_TOL: f64 = 1e-12;

const MIN_LEVEL: usize = 4;
const MAX_LEVEL: usize = 10;

/// Arguments (N, s, A, B) of 𝓘_N^s(A, B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelArgs {
    pub n: u32,
    pub s: f64,
    pub a: f64,
    pub b: f64,
}

impl KernelArgs {
    pub fn new(n: u32, s: f64, a: f64, b: f64) -> Result<Self> {
        let args = KernelArgs { n, s, a, b };
        args.validate()?;
        Ok(args)
    }

    fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0) || !self.b.is_finite() || !self.a.is_finite() || !self.s.is_finite() {
            return Err(Error::domain(
                "kernel",
                format!(
                    "need finite A, s and B >= 0, got A={}, B={}, s={}",
                    self.a, self.b, self.s
                ),
            ));
        }
        Ok(())
    }
}

/// Polar form (ψ, R) of (A, B) = R (cos ψ, sin ψ), used in the degenerate regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateArgs {
    pub psi: f64,
    pub r: f64,
}

impl DegenerateArgs {
    pub fn new(psi: f64, r: f64) -> Result<Self> {
        if !(0.0..3.0 * FRAC_PI_4).contains(&psi) || !(r > 0.0) {
            return Err(Error::domain("DegenerateArgs", format!("ψ={psi}, R={r}")));
        }
        Ok(DegenerateArgs { psi, r })
    }

    pub fn from_ab(a: f64, b: f64) -> Result<Self> {
        Self::new(b.atan2(a), a.hypot(b))
    }
}

/// Angle where A + B cos θ changes sign.
pub fn cutoff_angle(a: f64, b: f64) -> Result<f64> {
    if !(b >= 0.0) || a <= -b {
        return Err(Error::domain("cutoff_angle", format!("need A > -B, got A={a}, B={b}")));
    }
    Ok(if a >= b { PI } else { (-a / b).acos() })
}

/// Panel breakpoints on [0, π] that resolve the Fermi edge and endpoint peaks.
fn panel_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![0.0, PI];
    let graded = |centre: f64, width: f64, pts: &mut Vec<f64>| {
        let mut d = width;
        while d < PI {
            for p in [centre - d, centre + d] {
                if p > 1e-3 * width && p < PI - 1e-3 * width {
                    pts.push(p);
                }
            }
            d *= 4.0;
        }
    };
    if b > 0.0 && a > -b && a < b {
        let tc = (-a / b).acos();
        let width = (1.0 / (b * tc.sin())).min((2.0 / b).sqrt());
        if width < 0.5 {
            if tc > 0.0 && tc < PI {
                pts.push(tc);
            }
            graded(tc, width, &mut pts);
        }
    }
    if b > 50.0 {
        let width = (2.0 / b).sqrt();
        graded(0.0, width, &mut pts);
        graded(PI, width, &mut pts);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    pts
}

fn phi_fn(s: f64) -> Result<Box<dyn Fn(f64) -> Result<f64>>> {
    let order = FermiOrder(s);
    match order.as_integer() {
        Some(k) if (-400..=64).contains(&k) => Ok(Box::new(move |x| Ok(phi_int(k, x)))),
        _ if s > 0.0 => Ok(Box::new(move |x| fermi_phi(s, x))),
        _ => Err(Error::UnsupportedOrder(s)),
    }
}

/// Several 𝓘_N^s(A, B) sharing one set of quadrature nodes.
///
/// Each entry of `specs` is (N, s). Convergence is declared when successive
/// Gauss–Legendre estimates differ by less than `tol` times |𝓘_0^s|.
pub fn kernel_quadrature_batch(a: f64, b: f64, specs: &[(u32, f64)], tol: f64) -> Result<Vec<f64>> {
    KernelArgs::new(0, 1.0, a, b)?;
    if !(tol > 0.0) {
        return Err(Error::domain("kernel_quadrature", format!("tol = {tol}")));
    }
    if let Some(&(_, s)) = specs.iter().find(|(_, s)| !(*s > 0.0)) {
        return Err(Error::UnsupportedOrder(s));
    }
    let mut orders: Vec<f64> = specs.iter().map(|&(_, s)| s).collect();
    orders.sort_by(f64::total_cmp);
    orders.dedup();
    let phis = orders.iter().map(|&s| phi_fn(s)).collect::<Result<Vec<_>>>()?;
    let order_idx: Vec<usize> = specs
        .iter()
        .map(|&(_, s)| orders.iter().position(|&o| o == s).expect("order present"))
        .collect();

    if b == 0.0 {
        return specs
            .iter()
            .zip(&order_idx)
            .map(|(&(n, _), &k)| if n == 0 { phis[k](a) } else { Ok(0.0) })
            .collect();
    }

    let breaks = panel_breaks(a, b);
    let n_max = specs.iter().map(|&(n, _)| n).max().unwrap_or(0) as usize;
    let mut cheb = vec![0.0; n_max + 1];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for level in MIN_LEVEL..=MAX_LEVEL {
        let rule = gauss_legendre(level);
        let mut acc = vec![0.0; specs.len()];
        let mut mag = vec![0.0; orders.len()];
        let mut phi_vals = vec![0.0; orders.len()];
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let theta = mid + half * x;
                let c = theta.cos();
                let arg = a + b * c;
                for (k, f) in phis.iter().enumerate() {
                    phi_vals[k] = f(arg)?;
                    mag[k] += wt * half * phi_vals[k];
                }
                cheb[0] = 1.0;
                if n_max >= 1 {
                    cheb[1] = c;
                }
                for j in 2..=n_max {
                    cheb[j] = 2.0 * c * cheb[j - 1] - cheb[j - 2];
                }
                for (i, &(n, _)) in specs.iter().enumerate() {
                    acc[i] += wt * half * cheb[n as usize] * phi_vals[order_idx[i]];
                }
            }
        }
        acc.iter_mut().for_each(|v| *v /= PI);
        mag.iter_mut().for_each(|v| *v = (*v / PI).abs());
        if let Some((p, _)) = &prev {
            let ok = acc
                .iter()
                .zip(p)
                .zip(&order_idx)
                .all(|((v, pv), &k)| (v - pv).abs() <= tol * mag[k]);
            if ok {
                return Ok(acc);
            }
        }
        prev = Some((acc, mag));
    }
    Err(Error::NoConvergence {
        routine: "kernel_quadrature",
        iterations: MAX_LEVEL,
    })
}

/// 𝓘_N^s(A, B) by panelled Gauss–Legendre quadrature with order doubling.
pub fn kernel_quadrature(args: KernelArgs, tol: f64) -> Result<f64> {
    args.validate()?;
    Ok(kernel_quadrature_batch(args.a, args.b, &[(args.n, args.s)], tol)?[0])
}

/// Partial sum Σ_{n=0}^{n_max} φ_{s-2n-N}(A) (B/2)^{N+2n} / (n! (N+n)!).
///
/// Needs an integer order s. The series converges for B < |A + iπ|.
pub fn kernel_series(args: KernelArgs, n_max: usize) -> Result<f64> {
    args.validate()?;
    let s = FermiOrder(args.s).as_integer().ok_or(Error::UnsupportedOrder(args.s))?;
    let half = 0.5 * args.b;
    let mut coef = half.powi(args.n as i32) / libm::tgamma(args.n as f64 + 1.0);
    let mut sum = 0.0;
    for n in 0..=n_max {
        let order = s - 2 * n as i32 - args.n as i32;
        let term = if coef == 0.0 {
            0.0
        } else {
            phi_int(order, args.a) * coef
        };
        if !term.is_finite() {
            return Err(Error::SeriesDivergence {
                routine: "kernel_series",
                term: n,
            });
        }
        sum += term;
        coef *= half * half / ((n + 1) as f64 * (args.n as f64 + n as f64 + 1.0));
    }
    Ok(sum)
}

/// Series with the number of terms chosen adaptively. Returns (value, terms used).
pub fn kernel_series_auto(args: KernelArgs) -> Result<(f64, usize)> {
    args.validate()?;
    let s = FermiOrder(args.s).as_integer().ok_or(Error::UnsupportedOrder(args.s))?;
    const MAX_TERMS: usize = 400;
    let half = 0.5 * args.b;
    let mut coef = half.powi(args.n as i32) / libm::tgamma(args.n as f64 + 1.0);
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    let mut history: Vec<f64> = Vec::new();
    let mut quiet = 0;
    for n in 0..MAX_TERMS {
        let order = s - 2 * n as i32 - args.n as i32;
        let term = if coef == 0.0 {
            0.0
        } else {
            phi_int(order, args.a) * coef
        };
        if !term.is_finite() {
            return Err(Error::SeriesDivergence {
                routine: "kernel_series",
                term: n,
            });
        }
        sum += term;
        peak = peak.max(term.abs());
        history.push(term.abs());
        if term.abs() <= 1e-17 * sum.abs().max(peak) {
            quiet += 1;
            if quiet >= 3 {
                return Ok((sum, n + 1));
            }
        } else {
            quiet = 0;
        }
        // Growth of the envelope over ten terms signals divergence.
        if n >= 30 {
            let old = history[n - 10..n - 5].iter().cloned().fold(0.0, f64::max);
            let new = history[n - 4..=n].iter().cloned().fold(0.0, f64::max);
            if old > 0.0 && new > old {
                return Err(Error::SeriesDivergence {
                    routine: "kernel_series",
                    term: n,
                });
            }
        }
        coef *= half * half / ((n + 1) as f64 * (args.n as f64 + n as f64 + 1.0));
    }
    Err(Error::SeriesDivergence {
        routine: "kernel_series",
        term: MAX_TERMS,
    })
}

/// Maxwell–Boltzmann asymptote e^A I_N(B), valid for A < -B.
pub fn kernel_mb_asymptote(args: KernelArgs) -> Result<f64> {
    args.validate()?;
    if args.a >= -args.b {
        return Err(Error::domain(
            "kernel_mb_asymptote",
            format!("need A < -B, got A={}, B={}", args.a, args.b),
        ));
    }
    Ok((args.a + args.b).exp() * bessel_i_scaled(args.n, args.b))
}

/// Upper integration limit C(ψ) of the degenerate kernel.
pub fn degenerate_cutoff(psi: f64) -> f64 {
    if psi <= FRAC_PI_4 {
        PI
    } else {
        (-1.0 / psi.tan()).acos()
    }
}

/// 𝓕_N^s(ψ) = (1/(π Γ(s+1))) ∫₀^{C(ψ)} cos(Nθ) (cos ψ + sin ψ cos θ)^s dθ.
pub fn degenerate_kernel(n: u32, s: f64, psi: f64) -> Result<f64> {
    if !(0.0..3.0 * FRAC_PI_4).contains(&psi) {
        return Err(Error::domain(
            "degenerate_kernel",
            format!("ψ = {psi} outside [0, 3π/4)"),
        ));
    }
    if !(s > -1.0) {
        return Err(Error::UnsupportedOrder(s));
    }
    let (sp, cp) = psi.sin_cos();
    let cutoff = degenerate_cutoff(psi);
    let nf = n as f64;
    // Absolute floor from a bound on the integrand; 𝓕_N^s can vanish exactly.
    let abs_tol = 1e-15 * cutoff * (cp + sp).powf(s);
    let value = if psi > FRAC_PI_4 {
        // cos ψ + sin ψ cos θ = 2 sin ψ sin((C+θ)/2) sin((C-θ)/2), exact near θ = C.
        integrate_adaptive(
            |t: f64| {
                let base = 2.0 * sp * (0.5 * (cutoff + t)).sin() * (0.5 * (cutoff - t)).sin();
                (nf * t).cos() * base.max(0.0).powf(s)
            },
            0.0,
            cutoff,
            abs_tol,
            1e-14,
        )?
    } else {
        integrate_adaptive(
            |t: f64| (nf * t).cos() * (cp + sp * t.cos()).max(0.0).powf(s),
            0.0,
            cutoff,
            abs_tol,
            1e-14,
        )?
    };
    Ok(value / (PI * libm::tgamma(s + 1.0)))
}

/// Σ_N α_N 𝓘_N^s(A, B) for Chebyshev coefficients α of a polynomial r.
pub fn chebyshev_moment(coeffs: &[f64], s: f64, a: f64, b: f64) -> Result<f64> {
    if coeffs.is_empty() {
        return Ok(0.0);
    }
    let specs: Vec<(u32, f64)> = (0..coeffs.len() as u32).map(|n| (n, s)).collect();
    let vals = kernel_batch(a, b, &specs, &KernelDispatch::default())?;
    Ok(coeffs.iter().zip(vals).map(|(c, v)| c * v).sum())
}

/// Method selected by [`KernelDispatch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    Collapse,
    Series,
    MaxwellBoltzmann,
    Degenerate,
    Quadrature,
}

/// Switch-over thresholds between evaluation methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDispatch {
    /// Series used when B ≤ series_b_max and |A| ≤ series_a_max.
    pub series_b_max: f64,
    pub series_a_max: f64,
    /// MB asymptote used when A < -B - mb_margin.
    pub mb_margin: f64,
    /// Degenerate scaling used when √(A²+B²) exceeds this and A > -B.
    pub degenerate_radius: f64,
    pub tol: f64,
}

impl Default for KernelDispatch {
    fn default() -> Self {
        KernelDispatch {
            series_b_max: 1.0,
            series_a_max: 2.0,
            mb_margin: 25.0,
            degenerate_radius: 1e4,
            tol: DEFAULT_TOL,
        }
    }
}

impl KernelDispatch {
    /// Quadrature everywhere except the exact B = 0 collapse.
    pub fn quadrature_only() -> Self {
        KernelDispatch {
            series_b_max: -1.0,
            series_a_max: -1.0,
            mb_margin: f64::INFINITY,
            degenerate_radius: f64::INFINITY,
            tol: DEFAULT_TOL,
        }
    }

    pub fn method(&self, a: f64, b: f64, s: f64) -> KernelMethod {
        if b == 0.0 {
            KernelMethod::Collapse
        } else if b <= self.series_b_max && a.abs() <= self.series_a_max && s.fract() == 0.0 {
            KernelMethod::Series
        } else if a < -b - self.mb_margin {
            KernelMethod::MaxwellBoltzmann
        } else if a.hypot(b) > self.degenerate_radius && a > -b {
            KernelMethod::Degenerate
        } else {
            KernelMethod::Quadrature
        }
    }
}

/// 𝓘_N^s for several (N, s) at one (A, B), each by its dispatched method.
pub fn kernel_batch(a: f64, b: f64, specs: &[(u32, f64)], dispatch: &KernelDispatch) -> Result<Vec<f64>> {
    KernelArgs::new(0, 1.0, a, b)?;
    let mut out = vec![f64::NAN; specs.len()];
    let mut pending = Vec::new();
    for (i, &(n, s)) in specs.iter().enumerate() {
        let args = KernelArgs { n, s, a, b };
        out[i] = match dispatch.method(a, b, s) {
            KernelMethod::Collapse => {
                if n == 0 {
                    fermi_phi(s, a)?
                } else {
                    0.0
                }
            }
            KernelMethod::Series => match kernel_series_auto(args) {
                Ok((v, _)) => v,
                Err(_) => {
                    pending.push(i);
                    continue;
                }
            },
            KernelMethod::MaxwellBoltzmann => kernel_mb_asymptote(args)?,
            KernelMethod::Degenerate => {
                let r = a.hypot(b);
                r.powf(s) * degenerate_kernel(n, s, b.atan2(a))?
            }
            KernelMethod::Quadrature => {
                pending.push(i);
                continue;
            }
        };
    }
    if !pending.is_empty() {
        let sub: Vec<(u32, f64)> = pending.iter().map(|&i| specs[i]).collect();
        let vals = kernel_quadrature_batch(a, b, &sub, dispatch.tol)?;
        for (i, v) in pending.into_iter().zip(vals) {
            out[i] = v;
        }
    }
    Ok(out)
}

/// 𝓘_N^s(A, B) with the default method dispatch.
pub fn kernel(args: KernelArgs) -> Result<f64> {
    args.validate()?;
    Ok(kernel_batch(args.a, args.b, &[(args.n, args.s)], &KernelDispatch::default())?[0])
}
