//! Multi-label classification and calibration over augmented inputs.

use serde::{Deserialize, Serialize};

use crate::conformal::{RankPValue, ReferenceScores};
use crate::error::{Error, Result};
use crate::types::{ClassIndex, Plausibilities, PredictionSet};

/// Uniform plausibilities over a ground-truth label set.
///
/// Feeding these to Monte Carlo calibration gives multi-label conformal
/// prediction; duplicate labels in `label_set` count once.
pub fn multilabel_plausibilities(label_set: &[ClassIndex], classes: usize) -> Result<Plausibilities> {
    if label_set.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    let mut weights = vec![0.0; classes];
    for &k in label_set {
        if k >= classes {
            return Err(Error::LabelOutOfRange {
                label: k as i64 + 1,
                classes,
            });
        }
        weights[k] = 1.0;
    }
    Plausibilities::from_weights(weights)
}

/// Score rows for one example and its augmentations.
///
/// Row 0 always holds the scores of the unaugmented input.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedBatch {
    id: String,
    classes: usize,
    scores: Vec<f64>,
}

impl AugmentedBatch {
    pub fn new(id: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if classes == 0 {
            return Err(Error::invalid("augmented batch", "needs at least one non-empty row"));
        }
        let mut scores = Vec::with_capacity(rows.len() * classes);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != classes {
                return Err(Error::RowLength {
                    row,
                    expected: classes,
                    found: values.len(),
                });
            }
            if values.iter().any(|s| s.is_nan()) {
                return Err(Error::NonFiniteScore { row });
            }
            scores.extend(values);
        }
        Ok(AugmentedBatch {
            id: id.into(),
            classes,
            scores,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn replicates(&self) -> usize {
        self.scores.len() / self.classes
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.scores[j * self.classes..(j + 1) * self.classes]
    }

    pub fn original(&self) -> &[f64] {
        self.row(0)
    }
}

/// Calibration over `m` input replicates with fixed true labels.
///
/// Replicate `j` of the test batch is only ever compared against replicate
/// `j` of the calibration batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedCalibration {
    classes: usize,
    per_replicate: Vec<ReferenceScores>,
}

impl AugmentedCalibration {
    pub fn new(batches: &[AugmentedBatch], labels: &[ClassIndex]) -> Result<Self> {
        let first = batches
            .first()
            .ok_or_else(|| Error::invalid("calibration", "no augmented batches"))?;
        if labels.len() != batches.len() {
            return Err(Error::IdMismatch(format!(
                "{} labels for {} augmented batches",
                labels.len(),
                batches.len()
            )));
        }
        let m = first.replicates();
        let classes = first.num_classes();
        for batch in batches {
            if batch.replicates() != m {
                return Err(Error::ReplicateMismatch {
                    expected: m,
                    found: batch.replicates(),
                });
            }
            if batch.num_classes() != classes {
                return Err(Error::RowLength {
                    row: 0,
                    expected: classes,
                    found: batch.num_classes(),
                });
            }
        }
        if let Some(&bad) = labels.iter().find(|&&k| k >= classes) {
            return Err(Error::LabelOutOfRange {
                label: bad as i64 + 1,
                classes,
            });
        }
        let per_replicate = (0..m)
            .map(|j| {
                let column: Vec<f64> = batches
                    .iter()
                    .zip(labels)
                    .map(|(batch, &y)| batch.row(j)[y])
                    .collect();
                ReferenceScores::from_scores(&column)
            })
            .collect::<Result<_>>()?;
        Ok(AugmentedCalibration {
            classes,
            per_replicate,
        })
    }

    pub fn replicates(&self) -> usize {
        self.per_replicate.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    fn check(&self, test: &AugmentedBatch) -> Result<()> {
        if test.replicates() != self.replicates() {
            return Err(Error::ReplicateMismatch {
                expected: self.replicates(),
                found: test.replicates(),
            });
        }
        if test.num_classes() != self.classes {
            return Err(Error::RowLength {
                row: 0,
                expected: self.classes,
                found: test.num_classes(),
            });
        }
        Ok(())
    }

    /// Sum of the per-replicate ranks over `m (n + 1)`.
    pub fn rank_p_value(&self, test: &AugmentedBatch, candidate: ClassIndex) -> Result<RankPValue> {
        self.check(test)?;
        let mut rank = 0;
        let mut denominator = 0;
        for (j, reference) in self.per_replicate.iter().enumerate() {
            let r = reference.rank_p_value(test.row(j)[candidate]);
            rank += r.rank;
            denominator += r.denominator;
        }
        Ok(RankPValue { rank, denominator })
    }

    pub fn p_value(&self, test: &AugmentedBatch, candidate: ClassIndex) -> Result<f64> {
        Ok(self.rank_p_value(test, candidate)?.value())
    }

    /// `{k : averaged p-value > alpha}`.
    pub fn predict(&self, test: &AugmentedBatch, alpha: f64) -> Result<PredictionSet> {
        let ranks = (0..self.classes)
            .map(|k| self.rank_p_value(test, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(PredictionSet {
            id: test.id().to_string(),
            classes: (0..self.classes).filter(|&k| ranks[k].exceeds(alpha)).collect(),
            p_values: Some(ranks.iter().map(RankPValue::value).collect()),
        })
    }

    /// Set for a single input, original or augmented, scored against every
    /// replicate reference. Same as thresholding at the pooled `n * m`
    /// calibration quantile.
    pub fn predict_single(&self, id: impl Into<String>, row: &[f64], alpha: f64) -> Result<PredictionSet> {
        let batch = AugmentedBatch::new(id, vec![row.to_vec(); self.replicates()])?;
        self.predict(&batch, alpha)
    }
}

/// Averaged p-value of `candidate` for `test_batch` against augmented calibration.
pub fn augmented_mc_p_value(
    calib_batches: &[AugmentedBatch],
    labels: &[ClassIndex],
    test_batch: &AugmentedBatch,
    candidate: ClassIndex,
) -> Result<f64> {
    AugmentedCalibration::new(calib_batches, labels)?.p_value(test_batch, candidate)
}
