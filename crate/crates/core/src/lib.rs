//! Maximum-entropy isothermal hydrodynamics for electrons and holes in graphene.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closure;
pub mod error;
pub mod figures;
pub mod kernels;
pub mod quadrature;
pub mod reduced;
pub mod scales;
pub mod solver;
pub mod special;

pub use closure::{ClosureTensors, MomentState, Multipliers};
pub use error::{Error, Result};
pub use scales::PhysicalScales;
