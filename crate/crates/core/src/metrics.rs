//! Coverage and inefficiency of prediction sets.
//!
//! All functions take index-aligned slices; callers matching files by id
//! should align first (see [`crate::io::align_by_id`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClassIndex, Plausibilities, PredictionSet};

fn check_aligned(sets: usize, other: usize, what: &str) -> Result<()> {
    if sets != other {
        return Err(Error::IdMismatch(format!("{sets} prediction sets for {other} {what}")));
    }
    Ok(())
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    values.sum::<f64>() / n as f64
}

/// Fraction of examples whose label lies in the set. Used for voted and
/// true labels alike.
pub fn voted_coverage(sets: &[PredictionSet], labels: &[ClassIndex]) -> Result<f64> {
    check_aligned(sets.len(), labels.len(), "labels")?;
    Ok(mean(sets.iter().zip(labels).map(|(s, &y)| s.contains(y) as u8 as f64)))
}

/// Plausibility mass inside one set.
pub fn covered_mass(set: &PredictionSet, lambda: &Plausibilities) -> f64 {
    lambda.mass_of(&set.classes)
}

/// Mean over examples of `sum_y lambda_y 1[y in C]`.
pub fn aggregated_coverage(sets: &[PredictionSet], plausibilities: &[Plausibilities]) -> Result<f64> {
    check_aligned(sets.len(), plausibilities.len(), "plausibility rows")?;
    Ok(mean(sets.iter().zip(plausibilities).map(|(s, p)| covered_mass(s, p))))
}

/// Voted coverage that splits credit evenly over tied top classes.
pub fn tie_aware_voted_coverage(sets: &[PredictionSet], plausibilities: &[Plausibilities]) -> Result<f64> {
    check_aligned(sets.len(), plausibilities.len(), "plausibility rows")?;
    Ok(mean(sets.iter().zip(plausibilities).map(|(s, p)| {
        let top = p.argmax_set();
        top.iter().filter(|&&k| s.contains(k)).count() as f64 / top.len() as f64
    })))
}

/// Mean set size.
pub fn inefficiency(sets: &[PredictionSet]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(mean(sets.iter().map(|s| s.len() as f64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileOrder {
    /// Each curve sorted ascending on its own.
    #[default]
    Coverage,
    /// Examples ordered by top plausibility, most ambiguous first.
    Ambiguity,
}

/// Per-example realized coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageProfile {
    pub voted: Vec<f64>,
    pub aggregated: Vec<f64>,
    pub max_plausibility: Vec<f64>,
}

pub fn coverage_profile(
    sets: &[PredictionSet],
    plausibilities: &[Plausibilities],
    voted_labels: &[ClassIndex],
    order: ProfileOrder,
) -> Result<CoverageProfile> {
    check_aligned(sets.len(), plausibilities.len(), "plausibility rows")?;
    check_aligned(sets.len(), voted_labels.len(), "labels")?;
    let mut rows: Vec<(f64, f64, f64)> = sets
        .iter()
        .zip(plausibilities)
        .zip(voted_labels)
        .map(|((s, p), &y)| (s.contains(y) as u8 as f64, covered_mass(s, p), p.max()))
        .collect();
    if order == ProfileOrder::Ambiguity {
        rows.sort_by(|a, b| a.2.total_cmp(&b.2));
    }
    let mut profile = CoverageProfile {
        voted: rows.iter().map(|r| r.0).collect(),
        aggregated: rows.iter().map(|r| r.1).collect(),
        max_plausibility: rows.iter().map(|r| r.2).collect(),
    };
    if order == ProfileOrder::Coverage {
        profile.voted.sort_by(f64::total_cmp);
        profile.aggregated.sort_by(f64::total_cmp);
        profile.max_plausibility.sort_by(f64::total_cmp);
    }
    Ok(profile)
}

/// Metrics of one calibration/test trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub voted_coverage: f64,
    pub aggregated_coverage: f64,
    pub true_coverage: Option<f64>,
    pub inefficiency: f64,
}

impl TrialReport {
    pub fn evaluate(
        trial: usize,
        sets: &[PredictionSet],
        voted_labels: &[ClassIndex],
        plausibilities: &[Plausibilities],
        true_labels: Option<&[ClassIndex]>,
    ) -> Result<Self> {
        Ok(TrialReport {
            trial,
            voted_coverage: voted_coverage(sets, voted_labels)?,
            aggregated_coverage: aggregated_coverage(sets, plausibilities)?,
            true_coverage: true_labels.map(|y| voted_coverage(sets, y)).transpose()?,
            inefficiency: inefficiency(sets)?,
        })
    }
}
