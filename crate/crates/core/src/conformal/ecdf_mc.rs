//! ECDF-corrected Monte Carlo calibration.
//!
//! The calibration rows are split at `l`. Rows `0..l` get `m` pseudo-labels
//! each and become the reference scores. Rows `l..n` get one pseudo-label
//! each; their averaged p-values against the reference build an empirical
//! CDF whose DKW upper band maps test p-values to corrected ones. The
//! resulting sets cover with probability at least `(1 - alpha)(1 - delta)`.

use serde::{Deserialize, Serialize};

use crate::conformal::ecdf::{build_ecdf, dkw_band, BandedCdf};
use crate::conformal::ReferenceScores;
use crate::error::{Error, Result};
use crate::sampling::{expand_calibration, sample_label, ReplicatedLabels, PSEUDO_LABEL_STREAM};
use crate::types::{ClassIndex, Plausibilities, PredictionSet, ScoreTable, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfMcParams {
    /// Pseudo-labels per reference row.
    pub m: usize,
    /// Number of reference rows `l`; the remaining `n - l` rows estimate the CDF.
    pub split: usize,
    pub delta: f64,
}

impl EcdfMcParams {
    /// `l = floor(l_fraction * n)`.
    pub fn with_fraction(n: usize, l_fraction: f64, m: usize, delta: f64) -> Self {
        EcdfMcParams {
            m,
            split: (l_fraction * n as f64).floor() as usize,
            delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfMcCalibration {
    reference: ReferenceScores,
    band: BandedCdf,
}

impl EcdfMcCalibration {
    /// Samples pseudo-labels from `plausibilities` and calibrates.
    ///
    /// Row `i` draws from the substream `(seeds, "pseudo-labels", i)`.
    pub fn calibrate(
        scores: &ScoreTable,
        plausibilities: &[Plausibilities],
        params: EcdfMcParams,
        seeds: &SeedSpec,
    ) -> Result<Self> {
        let n = scores.len();
        check_split(n, params.split)?;
        if plausibilities.len() != n {
            return Err(Error::IdMismatch(format!(
                "{} plausibility rows for {n} score rows",
                plausibilities.len()
            )));
        }
        if params.m == 0 {
            return Err(Error::invalid("m", "must be at least 1"));
        }
        let l = params.split;
        let reference_labels = expand_calibration(&plausibilities[..l], params.m, seeds);
        let holdout_labels: Vec<ClassIndex> = (l..n)
            .map(|i| {
                let mut rng = seeds.stream(PSEUDO_LABEL_STREAM, i as u64);
                sample_label(&plausibilities[i], &mut rng)
            })
            .collect();
        Self::from_labels(scores, &reference_labels, &holdout_labels, params.delta)
    }

    /// Calibrates from already drawn labels: `reference_labels` covers the
    /// first `l` rows of `scores` and `holdout_labels` the remaining ones.
    pub fn from_labels(
        scores: &ScoreTable,
        reference_labels: &ReplicatedLabels,
        holdout_labels: &[ClassIndex],
        delta: f64,
    ) -> Result<Self> {
        let n = scores.len();
        let l = reference_labels.n();
        check_split(n, l)?;
        if holdout_labels.len() != n - l {
            return Err(Error::IdMismatch(format!(
                "{} holdout labels for {} holdout rows",
                holdout_labels.len(),
                n - l
            )));
        }
        let head: Vec<usize> = (0..l).collect();
        let reference = ReferenceScores::from_replicates(
            &reference_labels.gather_scores(&scores.select(&head))?,
        );
        let averaged: Vec<f64> = holdout_labels
            .iter()
            .enumerate()
            .map(|(offset, &label)| reference.p_value(scores.score(l + offset, label)))
            .collect();
        let band = dkw_band(build_ecdf(&averaged)?, delta)?;
        Ok(EcdfMcCalibration { reference, band })
    }

    pub fn reference(&self) -> &ReferenceScores {
        &self.reference
    }

    pub fn band(&self) -> &BandedCdf {
        &self.band
    }

    /// Averaged p-value of `score` against the reference, before correction.
    pub fn averaged_p_value(&self, score: f64) -> f64 {
        self.reference.p_value(score)
    }

    /// `F_+(averaged p-value)`.
    pub fn corrected_p_value(&self, score: f64) -> f64 {
        self.band.upper(self.averaged_p_value(score))
    }

    /// `{k : F_+(rho_k) > alpha}` with corrected p-values attached.
    pub fn predict(&self, id: impl Into<String>, test_row: &[f64], alpha: f64) -> PredictionSet {
        let p_values: Vec<f64> = test_row.iter().map(|&s| self.corrected_p_value(s)).collect();
        PredictionSet {
            id: id.into(),
            classes: (0..p_values.len()).filter(|&k| p_values[k] > alpha).collect(),
            p_values: Some(p_values),
        }
    }
}

fn check_split(n: usize, l: usize) -> Result<()> {
    if l < 1 || l > n || n - l < 2 {
        return Err(Error::SplitTooSmall { n, l });
    }
    Ok(())
}

/// Calibrates on `calib` and predicts every row of `test`.
#[allow(clippy::too_many_arguments)]
pub fn ecdf_mc_predict(
    calib: &ScoreTable,
    plausibilities: &[Plausibilities],
    test: &ScoreTable,
    alpha: f64,
    delta: f64,
    split: usize,
    m: usize,
    seeds: &SeedSpec,
) -> Result<Vec<PredictionSet>> {
    let calibration =
        EcdfMcCalibration::calibrate(calib, plausibilities, EcdfMcParams { m, split, delta }, seeds)?;
    Ok(test
        .ids()
        .iter()
        .zip(test.rows())
        .map(|(id, row)| calibration.predict(id.clone(), row, alpha))
        .collect())
}
