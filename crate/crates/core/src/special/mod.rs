//! Fermi-Dirac integrals, the eta function and modified Bessel functions.

pub mod bessel;
pub mod eta;
pub mod fermi;

pub use bessel::{
    bessel_i, bessel_i_derivative_at_zero, bessel_i_scaled, bessel_ratio, bessel_ratio_complement, bessel_ratio_inverse,
};
pub use eta::{eta, eta_over_factorial, eta_over_factorial_ln};
pub use fermi::{
    fermi_phi, fermi_phi_integral, fermi_phi_inverse, fermi_phi_series, logistic, phi_int, series_coefficient,
    softplus, FermiOrder,
};
