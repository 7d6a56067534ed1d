//! Run configuration read from TOML. Every table rejects unknown keys.

use crate::error::{CliError, CliResult};
use graphene_hydro::reduced::{CollimationRegime, Regime};
use graphene_hydro::solver::Mesh;
use graphene_hydro::PhysicalScales;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub scales: ScalesSpec,
    #[serde(default)]
    pub tabulate: TabulateSpec,
    #[serde(default)]
    pub invert: InvertSpec,
    #[serde(default)]
    pub regimes: RegimesSpec,
    #[serde(default)]
    pub hydro: HydroSpec,
    #[serde(default)]
    pub dd: DdSpec,
    #[serde(default)]
    pub wave: WaveSpec,
    #[serde(default)]
    pub collimation: CollimationSpec,
    #[serde(default)]
    pub selftest: SelftestSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: None,
            out: None,
            scales: ScalesSpec::default(),
            tabulate: TabulateSpec::default(),
            invert: InvertSpec::default(),
            regimes: RegimesSpec::default(),
            hydro: HydroSpec::default(),
            dd: DdSpec::default(),
            wave: WaveSpec::default(),
            collimation: CollimationSpec::default(),
            selftest: SelftestSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::usage(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.scales.build()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Physical constants; the defaults are the reduced units c = k_BT = ħ = 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalesSpec {
    pub c: f64,
    pub kbt: f64,
    pub hbar: f64,
    pub tau0: f64,
    pub gamma: f64,
}

impl Default for ScalesSpec {
    fn default() -> Self {
        ScalesSpec {
            c: 1.0,
            kbt: 1.0,
            hbar: 1.0,
            tau0: 1.0,
            gamma: 1.0,
        }
    }
}

impl ScalesSpec {
    pub fn build(&self) -> CliResult<PhysicalScales> {
        PhysicalScales::new(self.c, self.kbt, self.hbar, self.tau0, self.gamma).map_err(CliError::usage)
    }
}

/// Rectangular grid with square cells; `ny = 1` gives a line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    #[serde(default = "one")]
    pub ny: usize,
    pub dx: f64,
}

fn one() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Mesh> {
        Mesh::new(self.nx, self.ny, self.dx).map_err(CliError::usage)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabulateSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub a_points: usize,
    pub b_max: f64,
    pub b_points: usize,
    /// Evenly spaced |u| samples on [0, u_max], followed by `u_tail`.
    pub u_points: usize,
    pub u_max: f64,
    pub u_tail: Vec<f64>,
}

impl Default for TabulateSpec {
    fn default() -> Self {
        TabulateSpec {
            a_min: -20.0,
            a_max: 20.0,
            a_points: 81,
            b_max: 30.0,
            b_points: 61,
            u_points: 50,
            u_max: 0.98,
            u_tail: vec![0.99, 0.995, 0.999, 0.9999],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertTarget {
    /// Density in units of n_T.
    pub nu: f64,
    #[serde(default)]
    pub ux: f64,
    #[serde(default)]
    pub uy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvertSpec {
    pub states: Vec<InvertTarget>,
    /// Additional seeded random admissible states.
    pub random: usize,
    pub tol: f64,
}

impl Default for InvertSpec {
    fn default() -> Self {
        InvertSpec {
            states: vec![InvertTarget {
                nu: std::f64::consts::PI.powi(2) / 12.0,
                ux: 0.0,
                uy: 0.0,
            }],
            random: 0,
            tol: graphene_hydro::closure::DEFAULT_INVERSION_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimesSpec {
    pub u_points: usize,
    pub u_max: f64,
    pub u_tail: Vec<f64>,
}

impl Default for RegimesSpec {
    fn default() -> Self {
        RegimesSpec {
            u_points: 100,
            u_max: 0.98,
            u_tail: vec![0.99, 0.995, 0.999, 0.9999],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HydroSpec {
    pub grid: GridSpec,
    pub t_end: f64,
    pub cfl: f64,
    /// Switches the relaxation term (time scale `scales.tau0`) on or off.
    pub relaxation: bool,
    pub poisson: bool,
    pub n_electrons: f64,
    pub n_holes: f64,
    /// Relative amplitude of a sin(2πx/L) electron density perturbation.
    pub density_amplitude: f64,
    /// Uniform x direction field of both species.
    pub ux: f64,
    /// Relative amplitude of seeded uniform noise on both densities.
    pub noise: f64,
    /// Amplitude of a static external potential V_ext = a sin(2πx/L).
    pub potential_amplitude: f64,
    /// Accepted steps between diagnostic rows.
    pub report_every: usize,
}

impl Default for HydroSpec {
    fn default() -> Self {
        HydroSpec {
            grid: GridSpec {
                nx: 64,
                ny: 1,
                dx: 1.0 / 64.0,
            },
            t_end: 0.5,
            cfl: 0.4,
            relaxation: true,
            poisson: false,
            n_electrons: 0.2,
            n_holes: 0.2,
            density_amplitude: 0.0,
            ux: 0.0,
            noise: 0.0,
            potential_amplitude: 0.0,
            report_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DdInitial {
    /// The zero-flux profile for the configured potential.
    Steady,
    /// A Gaussian bump on the background density.
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdSpec {
    pub regime: Regime,
    pub grid: GridSpec,
    /// +1 electrons, -1 holes.
    pub sign: f64,
    /// Amplitude of the static potential V = a sin(2πx/L).
    pub potential_amplitude: f64,
    /// Density where V = 0.
    pub n_ref: f64,
    pub initial: DdInitial,
    /// Gaussian bump height relative to `n_ref` and its standard deviation.
    pub bump: f64,
    pub width: f64,
    pub t_end: f64,
    /// Fraction of the explicit stability limit used per step.
    pub safety: f64,
}

impl Default for DdSpec {
    fn default() -> Self {
        DdSpec {
            regime: Regime::MaxwellBoltzmann,
            grid: GridSpec {
                nx: 100,
                ny: 1,
                dx: 0.01,
            },
            sign: 1.0,
            potential_amplitude: 1.0,
            n_ref: 1e-3,
            initial: DdInitial::Steady,
            bump: 1.0,
            width: 0.05,
            t_end: 0.0,
            safety: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSpec {
    pub grid: GridSpec,
    pub n0: f64,
    pub sign: f64,
    /// Height and standard deviation of the initial pulse (at rest).
    pub pulse: f64,
    pub width: f64,
    pub potential_amplitude: f64,
    pub cfl: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl Default for WaveSpec {
    fn default() -> Self {
        WaveSpec {
            grid: GridSpec {
                nx: 400,
                ny: 1,
                dx: 0.025,
            },
            n0: 0.5,
            sign: 1.0,
            pulse: 1e-3,
            width: 0.2,
            potential_amplitude: 0.0,
            cfl: 0.5,
            steps: 200,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollimationSpec {
    pub regime: CollimationRegime,
    pub grid: GridSpec,
    pub sign: f64,
    /// Height δK = δV/k_BT and width of the smoothed potential step.
    pub delta_k: f64,
    pub step_width: f64,
    /// Incident angle from the step normal, radians.
    pub incident: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub drift_tol: f64,
    pub rays: usize,
    pub ray_step: f64,
}

impl Default for CollimationSpec {
    fn default() -> Self {
        CollimationSpec {
            regime: CollimationRegime::MaxwellBoltzmann,
            grid: GridSpec {
                nx: 128,
                ny: 1,
                dx: 1.0 / 128.0,
            },
            sign: 1.0,
            delta_k: 0.5,
            step_width: 0.2,
            incident: 0.5,
            t_end: 2.0,
            cfl: 0.5,
            drift_tol: graphene_hydro::reduced::collimation::DEFAULT_DRIFT_TOL,
            rays: 8,
            ray_step: 0.005,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestSpec {
    /// Random samples per randomized check.
    pub samples: usize,
}

impl Default for SelftestSpec {
    fn default() -> Self {
        SelftestSpec { samples: 100 }
    }
}

/// Fails with a usage error unless `ok`.
pub fn require(ok: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg()))
    }
}
