//! Asymptotic models: drift-diffusion limits, linear-response waves, collimation.

pub mod collimation;
pub mod drift_diffusion;
pub mod wave;

pub use collimation::{
    collimation_step, geometric_optics_residual, run_collimation, snell_bundle, trace_ray, CollimationConfig,
    CollimationRegime, CollimationState, SnellReport, StepPotential, XBoundary,
};
pub use drift_diffusion::{
    chemical_potential, drift_diffusion_rhs, drift_diffusion_step, mobility, run_drift_diffusion,
    stationarity_residual, steady_state, DiffusionConfig, Regime,
};
pub use wave::{run_wave, wave_energy, wave_speed, wave_step, WaveConfig};
