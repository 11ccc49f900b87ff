use crate::conformal::ReplicateScores;
use crate::types::{ClassIndex, PredictionSet, Threshold};

/// `alpha * denominator`, computed once so that the order-statistic index and
/// the p-value comparison in [`super::RankPValue::exceeds`] see the same value.
pub(crate) fn scaled_level(alpha: f64, denominator: usize) -> f64 {
    alpha * denominator as f64
}

/// Order index `floor(alpha (n + 1))` of split calibration.
pub fn split_order_index(n: usize, alpha: f64) -> i64 {
    mc_order_index(n, 1, alpha)
}

/// Order index `floor(alpha m (n + 1)) - m + 1` of Monte Carlo calibration.
pub fn mc_order_index(n: usize, m: usize, alpha: f64) -> i64 {
    debug_assert!(!alpha.is_nan());
    scaled_level(alpha, m * (n + 1)).floor() as i64 - m as i64 + 1
}

/// The `k`-th smallest score (1-based, ties kept).
///
/// `k < 1` maps to [`Threshold::NegInf`] and `k > len` to [`Threshold::PosInf`].
pub fn empirical_quantile(scores: &[f64], k: i64) -> Threshold {
    assert!(!scores.is_empty(), "empirical_quantile needs at least one score");
    if k < 1 {
        return Threshold::NegInf;
    }
    if k as usize > scores.len() {
        return Threshold::PosInf;
    }
    let mut work = scores.to_vec();
    let (_, kth, _) = work.select_nth_unstable_by(k as usize - 1, f64::total_cmp);
    Threshold::Finite(*kth)
}

/// Split conformal threshold from the calibration scores of the labelled class.
pub fn calibrate_split(true_label_scores: &[f64], alpha: f64) -> Threshold {
    empirical_quantile(
        true_label_scores,
        split_order_index(true_label_scores.len(), alpha),
    )
}

/// Monte Carlo threshold over all `m n` pseudo-labelled scores.
pub fn calibrate_mc(scores: &ReplicateScores, alpha: f64) -> Threshold {
    empirical_quantile(scores.values(), mc_order_index(scores.n(), scores.m(), alpha))
}

/// Classes whose score is at least `threshold`.
pub fn predict_set(id: impl Into<String>, test_row: &[f64], threshold: Threshold) -> PredictionSet {
    let classes: Vec<ClassIndex> = (0..test_row.len())
        .filter(|&k| threshold.admits(test_row[k]))
        .collect();
    PredictionSet {
        id: id.into(),
        classes,
        p_values: None,
    }
}
