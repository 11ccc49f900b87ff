//! Conformal prediction with ambiguous ground truth.
//!
//! Expert annotations are aggregated into plausibility distributions over
//! classes. Calibration then samples pseudo-labels from those distributions
//! (Monte Carlo conformal prediction) instead of trusting a single voted
//! label. The crate also ships a Gaussian-mixture toy generator with exact
//! posteriors, coverage metrics, and a seeded experiment runner used by the
//! `mccp` binary.

pub mod aggregation;
pub mod conformal;
pub mod error;
pub mod experiment;
pub mod extensions;
pub mod io;
pub mod metrics;
pub mod report;
pub mod sampling;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    AnnotationRecord, Annotations, ClassIndex, Plausibilities, PredictionSet, Ranking, ScoreTable,
    SeedSpec, Threshold,
};
