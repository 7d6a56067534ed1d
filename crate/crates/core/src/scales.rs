//! Physical constants of a run and the reduced unit system c = k_BT = ħ = 1.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Carrier speed, temperature, Planck constant, relaxation time and Poisson
/// constant. The reference density n_T is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalScales {
    pub c: f64,
    pub kbt: f64,
    pub hbar: f64,
    pub tau0: f64,
    pub gamma: f64,
}

impl PhysicalScales {
    pub fn new(c: f64, kbt: f64, hbar: f64, tau0: f64, gamma: f64) -> Result<Self> {
        let s = PhysicalScales {
            c,
            kbt,
            hbar,
            tau0,
            gamma,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c", self.c),
            ("kbt", self.kbt),
            ("hbar", self.hbar),
            ("tau0", self.tau0),
            ("gamma", self.gamma),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(
                    "PhysicalScales",
                    format!("{name} = {v} must be positive"),
                ));
            }
        }
        Ok(())
    }

    /// Reduced units with the given relaxation time and Poisson constant.
    pub fn reduced(tau0: f64, gamma: f64) -> Self {
        PhysicalScales {
            c: 1.0,
            kbt: 1.0,
            hbar: 1.0,
            tau0,
            gamma,
        }
    }

    /// Graphene at temperature `t` kelvin in SI units (Fermi velocity 1e6 m/s,
    /// suspended sheet with relative permittivity `eps_r`).
    pub fn graphene_si(t: f64, tau0: f64, eps_r: f64) -> Result<Self> {
        const KB: f64 = 1.380649e-23;
        const HBAR: f64 = 1.054571817e-34;
        const EPS0: f64 = 8.8541878128e-12;
        const QE: f64 = 1.602176634e-19;
        Self::new(1.0e6, KB * t, HBAR, tau0, 2.0 * EPS0 * eps_r / (QE * QE))
    }

    /// n_T = (k_BT)² / (2π ħ² c²).
    pub fn n_t(&self) -> f64 {
        self.kbt * self.kbt / (2.0 * PI * self.hbar * self.hbar * self.c * self.c)
    }

    /// Length unit ħc/k_BT.
    pub fn length_unit(&self) -> f64 {
        self.hbar * self.c / self.kbt
    }

    /// Time unit ħ/k_BT.
    pub fn time_unit(&self) -> f64 {
        self.hbar / self.kbt
    }

    pub fn density_unit(&self) -> f64 {
        self.length_unit().powi(-2)
    }

    pub fn energy_unit(&self) -> f64 {
        self.kbt
    }

    /// The same physics expressed in reduced units.
    pub fn to_reduced(&self) -> PhysicalScales {
        PhysicalScales::reduced(self.tau0 / self.time_unit(), self.gamma * self.kbt * self.length_unit())
    }
}
