//! Turning expert annotations into plausibilities.
//!
//! Two deterministic procedures are provided: label frequencies for
//! single-label annotations, and inverse rank normalization for partial
//! rankings. Either can be wrapped in a bootstrap over the annotation entries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{AnnotationRecord, Annotations, ClassIndex, Plausibilities, Ranking};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationProcedure {
    SingleLabelFrequency,
    InverseRankNormalization,
}

impl AggregationProcedure {
    /// The procedure matching a record's payload.
    pub fn for_record(record: &AnnotationRecord) -> Self {
        match record.payload {
            Annotations::SingleLabels(_) => AggregationProcedure::SingleLabelFrequency,
            Annotations::PartialRankings(_) => AggregationProcedure::InverseRankNormalization,
        }
    }

    fn name(self) -> &'static str {
        match self {
            AggregationProcedure::SingleLabelFrequency => "single-label-frequency",
            AggregationProcedure::InverseRankNormalization => "inverse-rank-normalization",
        }
    }
}

/// `lambda_k = (number of experts choosing k) / p`.
pub fn aggregate_single_labels(record: &AnnotationRecord, classes: usize) -> Result<Plausibilities> {
    let Annotations::SingleLabels(labels) = &record.payload else {
        return Err(mismatch(AggregationProcedure::SingleLabelFrequency, record));
    };
    record.validate(classes)?;
    Ok(label_frequencies(labels, classes))
}

fn label_frequencies(labels: &[ClassIndex], classes: usize) -> Plausibilities {
    let mut counts = vec![0.0; classes];
    for &k in labels {
        counts[k] += 1.0;
    }
    let total = labels.len() as f64;
    counts.iter_mut().for_each(|c| *c /= total);
    Plausibilities::from_weights(counts).expect("non-empty label list")
}

/// Inverse rank normalization.
///
/// A class in the `i`-th stored block (1-based) of a ranking receives weight
/// `1 / (i * |block|)`; weights are summed over rankings and normalized.
/// Excluded classes are simply not stored and receive nothing.
pub fn aggregate_partial_rankings(
    record: &AnnotationRecord,
    classes: usize,
) -> Result<Plausibilities> {
    let Annotations::PartialRankings(rankings) = &record.payload else {
        return Err(mismatch(AggregationProcedure::InverseRankNormalization, record));
    };
    record.validate(classes)?;
    inverse_rank_weights(rankings, classes)
}

fn inverse_rank_weights(rankings: &[Ranking], classes: usize) -> Result<Plausibilities> {
    let mut weights = vec![0.0; classes];
    for ranking in rankings {
        for (position, block) in ranking.iter().enumerate() {
            let w = 1.0 / ((position + 1) as f64 * block.len() as f64);
            for &k in block {
                weights[k] += w;
            }
        }
    }
    Plausibilities::from_weights(weights)
}

/// Aggregates with `procedure`, which must match the record's payload.
pub fn aggregate(
    record: &AnnotationRecord,
    classes: usize,
    procedure: AggregationProcedure,
) -> Result<Plausibilities> {
    match procedure {
        AggregationProcedure::SingleLabelFrequency => aggregate_single_labels(record, classes),
        AggregationProcedure::InverseRankNormalization => {
            aggregate_partial_rankings(record, classes)
        }
    }
}

/// Resamples the `p` annotation entries with replacement, then aggregates.
pub fn bootstrap_aggregate<R: Rng + ?Sized>(
    record: &AnnotationRecord,
    classes: usize,
    procedure: AggregationProcedure,
    rng: &mut R,
) -> Result<Plausibilities> {
    if AggregationProcedure::for_record(record) != procedure {
        return Err(mismatch(procedure, record));
    }
    record.validate(classes)?;
    let p = record.payload.len();
    match &record.payload {
        Annotations::SingleLabels(labels) => {
            let resampled: Vec<ClassIndex> =
                (0..p).map(|_| labels[rng.random_range(0..p)]).collect();
            Ok(label_frequencies(&resampled, classes))
        }
        Annotations::PartialRankings(rankings) => {
            let resampled: Vec<Ranking> = (0..p)
                .map(|_| rankings[rng.random_range(0..p)].clone())
                .collect();
            inverse_rank_weights(&resampled, classes)
        }
    }
}

fn mismatch(procedure: AggregationProcedure, record: &AnnotationRecord) -> Error {
    Error::ProcedureMismatch {
        procedure: procedure.name(),
        payload: record.payload.kind(),
    }
}

/// How `vote` resolves several classes sharing the maximum plausibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    Random,
}

impl TieBreak {
    pub fn pick<R: Rng + ?Sized>(self, lambda: &Plausibilities, rng: &mut R) -> ClassIndex {
        match self {
            TieBreak::LowestIndex => vote(lambda),
            TieBreak::Random => vote_random(lambda, rng),
        }
    }
}

/// Argmax of `lambda`, ties going to the lowest index.
pub fn vote(lambda: &Plausibilities) -> ClassIndex {
    let probs = lambda.as_slice();
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = k;
        }
    }
    best
}

/// Argmax of `lambda`, ties broken uniformly at random.
pub fn vote_random<R: Rng + ?Sized>(lambda: &Plausibilities, rng: &mut R) -> ClassIndex {
    let winners = lambda.argmax_set();
    if winners.len() == 1 {
        winners[0]
    } else {
        winners[rng.random_range(0..winners.len())]
    }
}
