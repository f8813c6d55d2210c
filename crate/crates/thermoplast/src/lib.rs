//! Quasi-static thermo-elasto-plasticity on structured grids.
//!
//! The model couples a viscously regularized momentum balance, a
//! Prandtl-Reuss flow rule smoothed by a Yosida-type map with parameter
//! lambda, and a heat equation whose coupling terms are truncated at height
//! 1/lambda. One time step solves the mechanical subproblem and the thermal
//! subproblem inside a damped fixed-point loop; a lambda sweep drives the
//! regularization toward the rate-independent limit while diagnostics track
//! energy bounds, dissipation sign, stress Cauchy distances and the
//! renormalized-solution residuals of the temperature field.

pub mod assemble;
pub mod cli;
pub mod config;
pub mod coupled;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod lift;
pub mod mms;
pub mod model;
pub mod output;
pub mod plastic;
pub mod sparse;
pub mod tensor;
pub mod verify;

pub use error::SimError;
