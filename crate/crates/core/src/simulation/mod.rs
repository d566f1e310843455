//! Simulation sweeps, synthetic datasets and the theorem battery.

pub mod svg;
pub mod sweep;
pub mod synthetic;
pub mod theorems;

pub use sweep::{belief_curves, effect_heatmap, BeliefCurves, EffectHeatmap, SweepConfig};
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use theorems::{theorem_suite, PropertyResult, SuiteReport, TheoremSuite};
