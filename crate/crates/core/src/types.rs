//! Domain types shared by every stage of the pipeline.
//!
//! Class indices are zero-based everywhere in this crate. The file formats in
//! [`crate::io`] are 1-based and convert at the boundary.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Zero-based class index.
pub type ClassIndex = usize;

/// Tolerance on `|sum - 1|` for a vector to count as a point on the simplex.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Entries above `-NEGATIVE_SLACK` are treated as rounding noise and clamped to 0.
pub const NEGATIVE_SLACK: f64 = 1e-12;

/// A distribution over `K` classes summarizing how plausible each class is
/// as the ground truth of one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Plausibilities(Vec<f64>);

impl Plausibilities {
    /// Validates `probs` as a point on the simplex. See [`validate_plausibilities`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyPlausibilities);
        }
        let mut probs = probs;
        for (class, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -NEGATIVE_SLACK {
                return Err(Error::NegativeMass { class, value: *p });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Plausibilities(probs))
    }

    /// Normalizes nonnegative weights into plausibilities.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights", "must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::AllMassExcluded);
        }
        Ok(Plausibilities(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn one_hot(classes: usize, class: ClassIndex) -> Self {
        assert!(class < classes, "class {class} out of range for {classes}");
        let mut probs = vec![0.0; classes];
        probs[class] = 1.0;
        Plausibilities(probs)
    }

    pub fn uniform(classes: usize) -> Self {
        assert!(classes > 0);
        Plausibilities(vec![1.0 / classes as f64; classes])
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, class: ClassIndex) -> f64 {
        self.0[class]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Classes attaining the maximum plausibility, ascending.
    pub fn argmax_set(&self) -> Vec<ClassIndex> {
        let max = self.max();
        (0..self.0.len()).filter(|&k| self.0[k] == max).collect()
    }

    pub fn is_one_hot(&self) -> bool {
        self.0.iter().filter(|&&p| p > 0.0).count() == 1
    }

    /// Plausibility mass carried by `classes`.
    pub fn mass_of(&self, classes: &[ClassIndex]) -> f64 {
        classes.iter().map(|&k| self.0[k]).sum()
    }
}

impl TryFrom<Vec<f64>> for Plausibilities {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Plausibilities::new(value)
    }
}

impl From<Plausibilities> for Vec<f64> {
    fn from(value: Plausibilities) -> Self {
        value.0
    }
}

/// Checks that `probs` lies on the simplex.
///
/// Entries in `[-1e-12, 0)` are clamped to zero and a vector whose sum is
/// within `1e-9` of one is rescaled to sum to one exactly.
pub fn validate_plausibilities(probs: &[f64]) -> Result<Plausibilities> {
    Plausibilities::new(probs.to_vec())
}

/// An `n x K` matrix of conformity scores, higher meaning more conforming.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    ids: Vec<String>,
    scores: Vec<f64>,
    classes: usize,
}

impl ScoreTable {
    pub fn new(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::IdMismatch(format!(
                "{} ids for {} score rows",
                ids.len(),
                rows.len()
            )));
        }
        let classes = rows.first().map_or(0, Vec::len);
        let mut scores = Vec::with_capacity(rows.len() * classes);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != classes || classes == 0 {
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
        check_unique(&ids)?;
        Ok(ScoreTable {
            ids,
            scores,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.classes..(i + 1) * self.classes]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.scores.chunks_exact(self.classes.max(1))
    }

    pub fn score(&self, i: usize, class: ClassIndex) -> f64 {
        self.scores[i * self.classes + class]
    }

    /// New table holding rows `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> ScoreTable {
        let mut scores = Vec::with_capacity(indices.len() * self.classes);
        let mut ids = Vec::with_capacity(indices.len());
        for &i in indices {
            ids.push(self.ids[i].clone());
            scores.extend_from_slice(self.row(i));
        }
        ScoreTable {
            ids,
            scores,
            classes: self.classes,
        }
    }
}

pub(crate) fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// One expert partial ranking: blocks of classes from most to least
/// plausible. Classes not listed are excluded.
pub type Ranking = Vec<Vec<ClassIndex>>;

#[derive(Debug, Clone, PartialEq)]
pub enum Annotations {
    /// One class per expert.
    SingleLabels(Vec<ClassIndex>),
    /// One partial ranking per expert.
    PartialRankings(Vec<Ranking>),
}

impl Annotations {
    pub fn len(&self) -> usize {
        match self {
            Annotations::SingleLabels(labels) => labels.len(),
            Annotations::PartialRankings(rankings) => rankings.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn kind(&self) -> &'static str {
        match self {
            Annotations::SingleLabels(_) => "single-label",
            Annotations::PartialRankings(_) => "partial-ranking",
        }
    }
}

/// Expert annotations attached to one example.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub id: String,
    pub payload: Annotations,
}

impl AnnotationRecord {
    pub fn single(id: impl Into<String>, labels: Vec<ClassIndex>) -> Self {
        AnnotationRecord {
            id: id.into(),
            payload: Annotations::SingleLabels(labels),
        }
    }

    pub fn rankings(id: impl Into<String>, rankings: Vec<Ranking>) -> Self {
        AnnotationRecord {
            id: id.into(),
            payload: Annotations::PartialRankings(rankings),
        }
    }

    /// Checks labels against `classes`, and blocks for emptiness and overlap.
    pub fn validate(&self, classes: usize) -> Result<()> {
        let in_range = |k: ClassIndex| {
            if k >= classes {
                Err(Error::LabelOutOfRange {
                    label: k as i64 + 1,
                    classes,
                })
            } else {
                Ok(())
            }
        };
        match &self.payload {
            Annotations::SingleLabels(labels) => {
                if labels.is_empty() {
                    return Err(Error::EmptyAnnotations);
                }
                labels.iter().try_for_each(|&k| in_range(k))
            }
            Annotations::PartialRankings(rankings) => {
                if rankings.is_empty() {
                    return Err(Error::EmptyAnnotations);
                }
                for ranking in rankings {
                    let mut seen = vec![false; classes];
                    for (position, block) in ranking.iter().enumerate() {
                        if block.is_empty() {
                            return Err(Error::EmptyBlock {
                                position: position + 1,
                            });
                        }
                        for &k in block {
                            in_range(k)?;
                            if std::mem::replace(&mut seen[k], true) {
                                return Err(Error::OverlappingBlocks { class: k + 1 });
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// A conformal prediction set for one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub id: String,
    /// Included classes, ascending.
    pub classes: Vec<ClassIndex>,
    /// Per-class p-values when the set was built by p-value thresholding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
}

impl PredictionSet {
    pub fn contains(&self, class: ClassIndex) -> bool {
        self.classes.binary_search(&class).is_ok()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Calibrated score threshold `tau`; a class is kept when its score is `>= tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    /// Every class is admitted.
    NegInf,
    Finite(f64),
    /// No class is admitted.
    PosInf,
}

impl Threshold {
    pub fn admits(&self, score: f64) -> bool {
        match *self {
            Threshold::NegInf => true,
            Threshold::Finite(tau) => score >= tau,
            Threshold::PosInf => false,
        }
    }
}

/// Deterministic random stream type handed to every stochastic operation.
pub type Stream = ChaCha8Rng;

/// Root of the deterministic seeding tree.
///
/// A stream is identified by `(master_seed, label, index)`; the same triple
/// always yields the same sequence on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed }
    }

    fn digest(&self, label: &str, index: u64) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update(index.to_le_bytes());
        hasher.finalize().into()
    }

    pub fn stream(&self, label: &str, index: u64) -> Stream {
        Stream::from_seed(self.digest(label, index))
    }

    /// A child seed tree, e.g. one per trial.
    pub fn derive(&self, label: &str, index: u64) -> SeedSpec {
        let digest = self.digest(label, index);
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        SeedSpec::new(u64::from_le_bytes(head))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn accepts_points_on_the_simplex() {
        let p = validate_plausibilities(&[0.5, 0.3, 0.2]).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.3, 0.2]);
        let p = validate_plausibilities(&[1.0, 0.0, 0.0]).unwrap();
        assert!(p.is_one_hot());
    }

    #[test]
    fn rejects_off_simplex_vectors() {
        assert!(matches!(
            validate_plausibilities(&[0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            validate_plausibilities(&[1.1, -0.1]),
            Err(Error::NegativeMass { class: 1, .. })
        ));
        assert!(matches!(
            validate_plausibilities(&[]),
            Err(Error::EmptyPlausibilities)
        ));
        assert!(validate_plausibilities(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn clamps_rounding_noise() {
        let p = validate_plausibilities(&[1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(p.get(1), 0.0);
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn score_table_checks_shape_and_ids() {
        let ok = ScoreTable::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.1, 0.9], vec![0.4, 0.6]],
        )
        .unwrap();
        assert_eq!(ok.row(1), &[0.4, 0.6]);
        assert_eq!(ok.select(&[1, 0]).ids(), &["b".to_string(), "a".to_string()]);
        assert!(matches!(
            ScoreTable::new(vec!["a".into(), "b".into()], vec![vec![0.1, 0.9], vec![0.4]]),
            Err(Error::RowLength { row: 1, .. })
        ));
        assert!(matches!(
            ScoreTable::new(vec!["a".into(), "a".into()], vec![vec![0.1], vec![0.4]]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn annotation_validation() {
        assert!(AnnotationRecord::single("x", vec![0, 2]).validate(3).is_ok());
        assert!(matches!(
            AnnotationRecord::single("x", vec![3]).validate(3),
            Err(Error::LabelOutOfRange { label: 4, classes: 3 })
        ));
        assert!(matches!(
            AnnotationRecord::single("x", vec![]).validate(3),
            Err(Error::EmptyAnnotations)
        ));
        assert!(matches!(
            AnnotationRecord::rankings("x", vec![vec![vec![1], vec![1, 2]]]).validate(3),
            Err(Error::OverlappingBlocks { class: 2 })
        ));
        assert!(matches!(
            AnnotationRecord::rankings("x", vec![vec![vec![1], vec![]]]).validate(3),
            Err(Error::EmptyBlock { position: 2 })
        ));
    }

    #[test]
    fn threshold_sentinels() {
        assert!(Threshold::NegInf.admits(f64::NEG_INFINITY));
        assert!(!Threshold::PosInf.admits(f64::INFINITY));
        assert!(Threshold::Finite(0.2).admits(0.2));
        assert!(!Threshold::Finite(0.2).admits(0.19));
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let seeds = SeedSpec::new(42);
        let a: Vec<u64> = seeds.stream("split", 3).random_iter().take(8).collect();
        let b: Vec<u64> = seeds.stream("split", 3).random_iter().take(8).collect();
        let c: Vec<u64> = seeds.stream("split", 4).random_iter().take(8).collect();
        let d: Vec<u64> = seeds.stream("augment", 3).random_iter().take(8).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_eq!(seeds.derive("trial", 1), SeedSpec::new(42).derive("trial", 1));
        assert_ne!(seeds.derive("trial", 1), seeds.derive("trial", 2));
    }
}
