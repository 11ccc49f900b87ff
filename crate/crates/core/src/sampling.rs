//! Pseudo-label sampling for Monte Carlo calibration.
//!
//! Each calibration row owns its own random substream, derived from
//! `(master_seed, "pseudo-labels", row)`. Labels for a row are drawn
//! sequentially from that stream, so raising `m` only appends columns.

use rand::Rng;

use crate::aggregation::{bootstrap_aggregate, AggregationProcedure};
use crate::conformal::ReplicateScores;
use crate::error::{Error, Result};
use crate::types::{AnnotationRecord, ClassIndex, Plausibilities, ScoreTable, SeedSpec};

/// Stream label used for per-row pseudo-label substreams.
pub const PSEUDO_LABEL_STREAM: &str = "pseudo-labels";

/// Draws one class from the categorical distribution `lambda`.
///
/// Classes with zero plausibility are never returned.
pub fn sample_label<R: Rng + ?Sized>(lambda: &Plausibilities, rng: &mut R) -> ClassIndex {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (k, &p) in lambda.as_slice().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = k;
        if u < cumulative {
            return k;
        }
    }
    // u landed in the rounding gap between the cumulative sum and 1.
    last_positive
}

pub fn sample_pseudo_labels<R: Rng + ?Sized>(
    lambda: &Plausibilities,
    m: usize,
    rng: &mut R,
) -> Vec<ClassIndex> {
    (0..m).map(|_| sample_label(lambda, rng)).collect()
}

/// The `n x m` matrix of pseudo-labels `labels[i][j]`.
///
/// Column `j` on its own is one pseudo-labelled calibration set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicatedLabels {
    n: usize,
    m: usize,
    labels: Vec<ClassIndex>,
}

impl ReplicatedLabels {
    pub fn from_rows(rows: Vec<Vec<ClassIndex>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || m == 0 {
            return Err(Error::invalid("labels", "need at least one row and column"));
        }
        let n = rows.len();
        let mut labels = Vec::with_capacity(n * m);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != m {
                return Err(Error::RowLength {
                    row,
                    expected: m,
                    found: values.len(),
                });
            }
            labels.extend(values);
        }
        Ok(ReplicatedLabels { n, m, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[ClassIndex] {
        &self.labels[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, j: usize) -> ClassIndex {
        self.labels[i * self.m + j]
    }

    pub fn column(&self, j: usize) -> Vec<ClassIndex> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Scores `E(X_i, Y_i^j)` looked up in `scores`, whose rows align with ours.
    pub fn gather_scores(&self, scores: &ScoreTable) -> Result<ReplicateScores> {
        if scores.len() != self.n {
            return Err(Error::IdMismatch(format!(
                "{} score rows for {} labelled rows",
                scores.len(),
                self.n
            )));
        }
        let values = (0..self.n)
            .flat_map(|i| self.row(i).iter().map(move |&k| scores.score(i, k)))
            .collect();
        ReplicateScores::new(self.n, self.m, values)
    }
}

/// Fills the `n x m` pseudo-label matrix from per-row seeded substreams.
pub fn expand_calibration(calib: &[Plausibilities], m: usize, seeds: &SeedSpec) -> ReplicatedLabels {
    expand_calibration_with(calib, m, |i| seeds.stream(PSEUDO_LABEL_STREAM, i as u64))
}

/// As [`expand_calibration`], with caller-chosen streams: row `i` draws from `stream_for(i)`.
pub fn expand_calibration_with<R, F>(
    calib: &[Plausibilities],
    m: usize,
    mut stream_for: F,
) -> ReplicatedLabels
where
    R: Rng,
    F: FnMut(usize) -> R,
{
    assert!(!calib.is_empty() && m >= 1, "need a non-empty calibration set and m >= 1");
    let mut labels = Vec::with_capacity(calib.len() * m);
    for (i, lambda) in calib.iter().enumerate() {
        let mut rng = stream_for(i);
        labels.extend((0..m).map(|_| sample_label(lambda, &mut rng)));
    }
    ReplicatedLabels {
        n: calib.len(),
        m,
        labels,
    }
}

/// Bootstrap-plausibility variant: each draw first resamples the row's
/// annotations into fresh plausibilities, then samples a label from them.
pub fn expand_calibration_bootstrap(
    records: &[AnnotationRecord],
    classes: usize,
    m: usize,
    seeds: &SeedSpec,
) -> Result<ReplicatedLabels> {
    if records.is_empty() || m == 0 {
        return Err(Error::invalid("calibration", "need a non-empty calibration set and m >= 1"));
    }
    let mut labels = Vec::with_capacity(records.len() * m);
    for (i, record) in records.iter().enumerate() {
        let procedure = AggregationProcedure::for_record(record);
        let mut rng = seeds.stream(PSEUDO_LABEL_STREAM, i as u64);
        for _ in 0..m {
            let lambda = bootstrap_aggregate(record, classes, procedure, &mut rng)?;
            labels.push(sample_label(&lambda, &mut rng));
        }
    }
    Ok(ReplicatedLabels {
        n: records.len(),
        m,
        labels,
    })
}
