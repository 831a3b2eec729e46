//! Weighted finite difference solvers for the semiclassical cubic nonlinear
//! Schrödinger equation `i eps u_t + eps^2/2 u_xx = eps lambda |u|^2 u` with
//! highly oscillatory single- and multiphase initial data on a periodic interval.

pub mod cli;
pub mod error;
pub mod grid;
pub mod multiphase;
pub mod reference;
pub mod resonance;
pub mod single_phase;
pub mod spectral;

pub use error::{Error, Result};
