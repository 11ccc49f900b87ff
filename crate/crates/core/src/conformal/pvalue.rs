use serde::{Deserialize, Serialize};

use crate::conformal::quantile::{mc_order_index, scaled_level};
use crate::error::{Error, Result};
use crate::types::{ClassIndex, PredictionSet, Threshold};

/// Row-major `n x m` matrix of calibration scores `E(X_i, Y_i^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateScores {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl ReplicateScores {
    pub fn new(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid("replicate scores", "need n >= 1 and m >= 1"));
        }
        if values.len() != n * m {
            return Err(Error::invalid(
                "replicate scores",
                format!("{} values for a {n} x {m} matrix", values.len()),
            ));
        }
        if let Some(pos) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFiniteScore { row: pos / m });
        }
        Ok(ReplicateScores { n, m, values })
    }

    /// A single column (`m = 1`).
    pub fn single(scores: Vec<f64>) -> Result<Self> {
        let n = scores.len();
        ReplicateScores::new(n, 1, scores)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.m + j]).collect()
    }
}

/// A conformal p-value kept as the integer ratio `rank / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankPValue {
    pub rank: u64,
    pub denominator: u64,
}

impl RankPValue {
    pub fn value(&self) -> f64 {
        self.rank as f64 / self.denominator as f64
    }

    /// `value() > alpha`, decided as `rank > alpha * denominator`.
    ///
    /// This is the same floating-point product the order index uses, so the
    /// p-value and threshold constructions agree bit for bit.
    pub fn exceeds(&self, alpha: f64) -> bool {
        self.rank as f64 > scaled_level(alpha, self.denominator as usize)
    }
}

/// Calibration scores sorted once for repeated p-value queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScores {
    n: usize,
    m: usize,
    sorted: Vec<f64>,
}

impl ReferenceScores {
    pub fn from_replicates(scores: &ReplicateScores) -> Self {
        let mut sorted = scores.values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        ReferenceScores {
            n: scores.n,
            m: scores.m,
            sorted,
        }
    }

    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        Ok(Self::from_replicates(&ReplicateScores::single(scores.to_vec())?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of reference scores `<= score`.
    pub fn count_at_most(&self, score: f64) -> usize {
        self.sorted.partition_point(|&s| s <= score)
    }

    /// `sum_j (#{i : s_ij <= score} + 1)` over `m (n + 1)`.
    pub fn rank_p_value(&self, score: f64) -> RankPValue {
        RankPValue {
            rank: (self.count_at_most(score) + self.m) as u64,
            denominator: (self.m * (self.n + 1)) as u64,
        }
    }

    pub fn p_value(&self, score: f64) -> f64 {
        self.rank_p_value(score).value()
    }

    /// The equivalent score threshold, read straight off the sorted scores.
    pub fn threshold(&self, alpha: f64) -> Threshold {
        let k = mc_order_index(self.n, self.m, alpha);
        if k < 1 {
            Threshold::NegInf
        } else if k as usize > self.sorted.len() {
            Threshold::PosInf
        } else {
            Threshold::Finite(self.sorted[k as usize - 1])
        }
    }

    /// `{k : p_k > alpha}` with the per-class p-values attached.
    pub fn predict(&self, id: impl Into<String>, test_row: &[f64], alpha: f64) -> PredictionSet {
        let ranks: Vec<RankPValue> = test_row.iter().map(|&s| self.rank_p_value(s)).collect();
        let classes: Vec<ClassIndex> = (0..ranks.len()).filter(|&k| ranks[k].exceeds(alpha)).collect();
        PredictionSet {
            id: id.into(),
            classes,
            p_values: Some(ranks.iter().map(RankPValue::value).collect()),
        }
    }
}

/// Split conformal p-value `(#{i : s_i <= test} + 1) / (n + 1)`.
pub fn p_value(calib_scores: &[f64], test_score: f64) -> f64 {
    assert!(!calib_scores.is_empty());
    let below = calib_scores.iter().filter(|&&s| s <= test_score).count();
    (below + 1) as f64 / (calib_scores.len() + 1) as f64
}

/// Average over replicates of the per-column split p-values.
pub fn mc_p_value(scores: &ReplicateScores, test_score: f64) -> f64 {
    let below = scores.values.iter().filter(|&&s| s <= test_score).count();
    (below + scores.m) as f64 / (scores.m * (scores.n + 1)) as f64
}

/// Split conformal set built from p-values thresholded strictly at `alpha`.
pub fn predict_set_pvalue(
    id: impl Into<String>,
    test_row: &[f64],
    calib_scores: &[f64],
    alpha: f64,
) -> Result<PredictionSet> {
    Ok(ReferenceScores::from_scores(calib_scores)?.predict(id, test_row, alpha))
}

/// Monte Carlo set built from averaged p-values thresholded strictly at `alpha`.
pub fn predict_set_mc_pvalue(
    id: impl Into<String>,
    test_row: &[f64],
    scores: &ReplicateScores,
    alpha: f64,
) -> PredictionSet {
    ReferenceScores::from_replicates(scores).predict(id, test_row, alpha)
}
