//! Gaussian-mixture toy data with exact Bayes posteriors.
//!
//! Labels are drawn from the mixture weights and inputs from the
//! class-conditional diagonal Gaussians. The posteriors double as
//! plausibilities and as conformity scores.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::aggregation::TieBreak;
use crate::error::{Error, Result};
use crate::sampling::sample_label;
use crate::types::{AnnotationRecord, ClassIndex, Plausibilities, ScoreTable};

/// Circumradius of the ambiguous preset.
pub const AMBIGUOUS_RADIUS: f64 = 1.0;
/// Circumradius of the separated preset.
pub const SEPARATED_RADIUS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub means: Vec<Vec<f64>>,
    /// Per-class diagonal standard deviations.
    pub sigmas: Vec<Vec<f64>>,
    pub weights: Plausibilities,
    pub n: usize,
}

impl ToyConfig {
    /// `classes` means evenly spaced on a circle of the given radius in the
    /// plane, unit sigmas and equal weights.
    pub fn regular_polygon(classes: usize, radius: f64, n: usize) -> Self {
        let means = (0..classes)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / classes as f64;
                vec![radius * angle.cos(), radius * angle.sin()]
            })
            .collect();
        ToyConfig {
            means,
            sigmas: vec![vec![1.0; 2]; classes],
            weights: Plausibilities::uniform(classes),
            n,
        }
    }

    pub fn triangle(radius: f64, n: usize) -> Self {
        Self::regular_polygon(3, radius, n)
    }

    pub fn ambiguous(n: usize) -> Self {
        Self::triangle(AMBIGUOUS_RADIUS, n)
    }

    pub fn separated(n: usize) -> Self {
        Self::triangle(SEPARATED_RADIUS, n)
    }

    pub fn num_classes(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let classes = self.num_classes();
        if classes == 0 {
            return Err(Error::config("means", "at least one class is required"));
        }
        let d = self.dim();
        if d == 0 {
            return Err(Error::config("means", "dimension must be at least 1"));
        }
        if self.means.iter().any(|mu| mu.len() != d || mu.iter().any(|v| !v.is_finite())) {
            return Err(Error::config("means", "every mean needs d finite entries"));
        }
        if self.sigmas.len() != classes
            || self
                .sigmas
                .iter()
                .any(|s| s.len() != d || s.iter().any(|&v| !(v > 0.0 && v.is_finite())))
        {
            return Err(Error::config("sigmas", "need K vectors of d positive entries"));
        }
        if self.weights.num_classes() != classes {
            return Err(Error::config("weights", "length must equal the class count"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyDataset {
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub true_labels: Vec<ClassIndex>,
    pub posteriors: Vec<Plausibilities>,
    pub voted_labels: Vec<ClassIndex>,
}

impl ToyDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.posteriors.first().map_or(0, Plausibilities::num_classes)
    }

    /// Posteriors as a score table.
    pub fn scores(&self) -> ScoreTable {
        let rows = self.posteriors.iter().map(|p| p.as_slice().to_vec()).collect();
        ScoreTable::new(self.ids.clone(), rows).expect("posteriors form a valid score table")
    }

    pub fn select(&self, indices: &[usize]) -> ToyDataset {
        ToyDataset {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            true_labels: indices.iter().map(|&i| self.true_labels[i]).collect(),
            posteriors: indices.iter().map(|&i| self.posteriors[i].clone()).collect(),
            voted_labels: indices.iter().map(|&i| self.voted_labels[i]).collect(),
        }
    }
}

/// Draws `config.n` examples by ancestral sampling.
pub fn gen_toy<R: Rng + ?Sized>(config: &ToyConfig, tie: TieBreak, rng: &mut R) -> Result<ToyDataset> {
    config.validate()?;
    let mut data = ToyDataset {
        ids: Vec::with_capacity(config.n),
        features: Vec::with_capacity(config.n),
        true_labels: Vec::with_capacity(config.n),
        posteriors: Vec::with_capacity(config.n),
        voted_labels: Vec::with_capacity(config.n),
    };
    for i in 0..config.n {
        let y = sample_label(&config.weights, rng);
        let x: Vec<f64> = config.means[y]
            .iter()
            .zip(&config.sigmas[y])
            .map(|(&mu, &sigma)| mu + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let posterior = bayes_posterior(&x, config);
        data.voted_labels.push(tie.pick(&posterior, rng));
        data.ids.push(format!("toy-{i}"));
        data.features.push(x);
        data.true_labels.push(y);
        data.posteriors.push(posterior);
    }
    Ok(data)
}

/// `P(Y = y | X = x)` under the mixture, evaluated in log space.
pub fn bayes_posterior(x: &[f64], config: &ToyConfig) -> Plausibilities {
    let log_joint: Vec<f64> = (0..config.num_classes())
        .map(|y| {
            let w = config.weights.get(y);
            let log_lik: f64 = x
                .iter()
                .zip(&config.means[y])
                .zip(&config.sigmas[y])
                .map(|((&xt, &mu), &sigma)| {
                    let z = (xt - mu) / sigma;
                    -sigma.ln() - 0.5 * z * z
                })
                .sum();
            w.ln() + log_lik
        })
        .collect();
    let top = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = log_joint.iter().map(|&l| (l - top).exp()).collect();
    Plausibilities::from_weights(weights).expect("the largest term contributes exp(0)")
}

/// `x` plus isotropic Gaussian noise. Panics unless `sigma_aug > 0`.
pub fn augment_input<R: Rng + ?Sized>(x: &[f64], sigma_aug: f64, rng: &mut R) -> Vec<f64> {
    assert!(sigma_aug > 0.0, "sigma_aug must be positive");
    let noise = Normal::new(0.0, sigma_aug).expect("positive finite scale");
    x.iter().map(|&v| v + noise.sample(rng)).collect()
}

/// Posterior scores of `x` and `m - 1` augmentations; row 0 is `x` itself.
pub fn augmented_scores<R: Rng + ?Sized>(
    x: &[f64],
    config: &ToyConfig,
    sigma_aug: f64,
    m: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(m);
    rows.push(bayes_posterior(x, config).into());
    for _ in 1..m {
        rows.push(bayes_posterior(&augment_input(x, sigma_aug, rng), config).into());
    }
    rows
}

/// Attaches a label set to each example: the true label, plus with
/// probability `second_label` one more class drawn from the posterior
/// restricted to the other classes.
pub fn gen_label_sets<R: Rng + ?Sized>(
    data: &ToyDataset,
    second_label: f64,
    rng: &mut R,
) -> Vec<Vec<ClassIndex>> {
    data.true_labels
        .iter()
        .zip(&data.posteriors)
        .map(|(&y, posterior)| {
            let mut set = vec![y];
            if posterior.num_classes() > 1 && rng.random::<f64>() < second_label {
                let mut rest: Vec<f64> = posterior.as_slice().to_vec();
                rest[y] = 0.0;
                let other = match Plausibilities::from_weights(rest) {
                    Ok(p) => sample_label(&p, rng),
                    // All remaining mass underflowed; pick any other class.
                    Err(_) => (y + 1) % posterior.num_classes(),
                };
                set.push(other);
                set.sort_unstable();
            }
            set
        })
        .collect()
}

/// Independent single-label annotations, each drawn from the example's posterior.
pub fn simulate_annotations<R: Rng + ?Sized>(
    data: &ToyDataset,
    annotators: usize,
    rng: &mut R,
) -> Vec<AnnotationRecord> {
    data.ids
        .iter()
        .zip(&data.posteriors)
        .map(|(id, posterior)| {
            let labels = (0..annotators).map(|_| sample_label(posterior, rng)).collect();
            AnnotationRecord::single(id.clone(), labels)
        })
        .collect()
}
