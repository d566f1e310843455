//! Fitting response models to judgment data: likelihoods, MAP search,
//! Metropolis-Hastings sampling and predictive information criteria.

pub mod compare;
pub mod criteria;
pub mod data;
pub mod map;
pub mod mcmc;
pub mod model;

pub use compare::{compare_models, ComparisonRow, FitResult};
pub use criteria::{psis_loo, waic, LogLikMatrix, LooEstimate, WaicEstimate};
pub use data::{classify_speaker_group, normalize_response, ContestantOrder, ExampleSet, RawRecord, ResponseRecord, SpeakerGroup};
pub use map::{map_fit, MapFit, SearchConfig};
pub use mcmc::{mh_sample, McmcConfig, McmcRun};
pub use model::{parse_levels, CompiledModel, Component, Family, Level, ModelSpec, ParamVector, Variant};

/// A log-likelihood over a box of uniform priors.
pub trait Target: Sync {
    fn bounds(&self) -> &[(f64, f64)];

    fn log_likelihood(&self, theta: &[f64]) -> f64;

    fn n_data(&self) -> usize {
        0
    }

    /// Per-datum log-likelihood into `out`; returns the total.
    fn pointwise(&self, theta: &[f64], out: &mut [f64]) -> f64 {
        debug_assert!(out.is_empty());
        self.log_likelihood(theta)
    }
}

/// Adapts a closure over a prior box into a [`Target`].
pub struct FnTarget<F> {
    pub bounds: Vec<(f64, f64)>,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Target for FnTarget<F> {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        (self.f)(theta)
    }
}
