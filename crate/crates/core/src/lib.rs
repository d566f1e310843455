//! Exact recursive listener/speaker inference for the Stick Contest, with
//! belief-adjustment baselines, simulation sweeps and Bayesian model
//! comparison.

pub mod baselines;
pub mod error;
pub mod inference;
pub mod io;
pub mod rsa;
pub mod simulation;
pub mod world;

pub use error::{Error, Result};
