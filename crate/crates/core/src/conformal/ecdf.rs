use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-continuous empirical CDF of values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn count(&self) -> usize {
        self.sorted.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of sample values `<= f`.
    pub fn evaluate(&self, f: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= f) as f64 / self.sorted.len() as f64
    }
}

pub fn build_ecdf(values: &[f64]) -> Result<EmpiricalCdf> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid("ecdf sample", format!("value {bad} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

/// Half-width of the DKW band holding with probability `1 - delta`.
pub fn dkw_epsilon(count: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * count as f64)).sqrt()
}

/// An empirical CDF with its uniform DKW confidence band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandedCdf {
    base: EmpiricalCdf,
    epsilon: f64,
    delta: f64,
}

impl BandedCdf {
    pub fn base(&self) -> &EmpiricalCdf {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn upper(&self, f: f64) -> f64 {
        (self.base.evaluate(f) + self.epsilon).min(1.0)
    }

    pub fn lower(&self, f: f64) -> f64 {
        (self.base.evaluate(f) - self.epsilon).max(0.0)
    }
}

pub fn dkw_band(ecdf: EmpiricalCdf, delta: f64) -> Result<BandedCdf> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("{delta} not in (0, 1)")));
    }
    let epsilon = dkw_epsilon(ecdf.count(), delta);
    Ok(BandedCdf {
        base: ecdf,
        epsilon,
        delta,
    })
}
