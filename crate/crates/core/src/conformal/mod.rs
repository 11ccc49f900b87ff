//! Calibration and prediction-set construction.
//!
//! Two equivalent views are implemented for each procedure: a score
//! threshold read off an order statistic, and per-class p-values compared
//! strictly against `alpha`. The threshold form is cheaper; the p-value form
//! is what the ECDF correction and the augmentation extension build on.
//!
//! | procedure        | order index                       | p-value denominator |
//! |------------------|-----------------------------------|---------------------|
//! | split            | `floor(alpha (n + 1))`            | `n + 1`             |
//! | Monte Carlo (m)  | `floor(alpha m (n + 1)) - m + 1`  | `m (n + 1)`         |

mod ecdf;
mod ecdf_mc;
mod pvalue;
mod quantile;

use serde::{Deserialize, Serialize};

pub use ecdf::{build_ecdf, dkw_band, dkw_epsilon, BandedCdf, EmpiricalCdf};
pub use ecdf_mc::{ecdf_mc_predict, EcdfMcCalibration, EcdfMcParams};
pub use pvalue::{
    mc_p_value, p_value, predict_set_mc_pvalue, predict_set_pvalue, RankPValue, ReferenceScores,
    ReplicateScores,
};
pub use quantile::{
    calibrate_mc, calibrate_split, empirical_quantile, mc_order_index, predict_set,
    split_order_index,
};

use crate::extensions::{AugmentedBatch, AugmentedCalibration};
use crate::error::{Error, Result};
use crate::types::{PredictionSet, Threshold};

/// The output of calibration, as written by `mccp calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Calibration {
    /// Split or Monte Carlo threshold; sets are `{k : E(x, k) >= tau}`.
    Threshold { alpha: f64, threshold: Threshold },
    /// Monte Carlo reference scores; sets carry averaged p-values.
    MonteCarlo {
        alpha: f64,
        reference: ReferenceScores,
    },
    /// Reference scores plus the DKW-banded CDF of held-out averaged p-values.
    EcdfCorrected {
        alpha: f64,
        calibration: EcdfMcCalibration,
    },
    /// Per-replicate reference scores over augmented inputs.
    Augmented {
        alpha: f64,
        calibration: AugmentedCalibration,
    },
}

impl Calibration {
    pub fn alpha(&self) -> f64 {
        match *self {
            Calibration::Threshold { alpha, .. }
            | Calibration::MonteCarlo { alpha, .. }
            | Calibration::EcdfCorrected { alpha, .. }
            | Calibration::Augmented { alpha, .. } => alpha,
        }
    }

    /// Prediction set for one score row. Augmented calibrations need
    /// [`Calibration::predict_augmented`] instead.
    pub fn predict(&self, id: impl Into<String>, row: &[f64]) -> Result<PredictionSet> {
        match self {
            Calibration::Threshold { threshold, .. } => Ok(predict_set(id, row, *threshold)),
            Calibration::MonteCarlo { alpha, reference } => Ok(reference.predict(id, row, *alpha)),
            Calibration::EcdfCorrected { alpha, calibration } => {
                Ok(calibration.predict(id, row, *alpha))
            }
            Calibration::Augmented { .. } => Err(Error::invalid(
                "calibration",
                "augmented calibration needs replicate score rows",
            )),
        }
    }

    pub fn predict_augmented(&self, batch: &AugmentedBatch) -> Result<PredictionSet> {
        match self {
            Calibration::Augmented { alpha, calibration } => calibration.predict(batch, *alpha),
            _ => Err(Error::invalid(
                "calibration",
                "replicate score rows need an augmented calibration",
            )),
        }
    }
}
