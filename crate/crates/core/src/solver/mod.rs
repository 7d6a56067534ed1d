//! Time integration of the hyperbolic moment system on periodic grids.

pub mod hyperbolic;
pub mod mesh;
pub mod poisson;

pub use hyperbolic::{
    closed_flux, free_energy_report, hyperbolic_step, FieldGrid, FreeEnergyReport, HydroSolver, SolverConfig,
    SpeciesField, StepReport, DENSITY_FLOOR,
};
pub use mesh::Mesh;
pub use poisson::{fractional_laplacian, poisson_solve};
