//! Configuration, orchestration and output for the `graphene-hydro` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
