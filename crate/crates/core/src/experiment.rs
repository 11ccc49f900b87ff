//! Seeded multi-trial coverage experiments.
//!
//! Every trial derives its own seed tree from the master seed, so results
//! do not depend on scheduling and trials run in parallel.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, AggregationProcedure, TieBreak};
use crate::conformal::{calibrate_split, Calibration, EcdfMcCalibration, EcdfMcParams, ReferenceScores};
use crate::error::{Error, Result};
use crate::extensions::{multilabel_plausibilities, AugmentedBatch, AugmentedCalibration};
use crate::io;
use crate::metrics::TrialReport;
use crate::report::{summarize, Histogram, Summary, DEFAULT_BINS};
use crate::sampling::{expand_calibration, expand_calibration_bootstrap, ReplicatedLabels};
use crate::synthetic::{augmented_scores, gen_label_sets, gen_toy, simulate_annotations, ToyConfig};
use crate::types::{AnnotationRecord, Annotations, ClassIndex, Plausibilities, PredictionSet, ScoreTable, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Split CP against voted labels.
    SplitVoted,
    /// Split CP against true labels (synthetic data or a labels file).
    SplitTrue,
    /// Monte Carlo CP with `m` pseudo-labels per example.
    Mc,
    /// Monte Carlo CP with the ECDF correction.
    EcdfMc,
    /// Monte Carlo CP on uniform plausibilities over label sets.
    MultilabelMc,
    /// Averaged p-values over augmented inputs.
    AugmentedMc,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SplitVoted,
        Method::SplitTrue,
        Method::Mc,
        Method::EcdfMc,
        Method::MultilabelMc,
        Method::AugmentedMc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SplitVoted => "split-voted",
            Method::SplitTrue => "split-true",
            Method::Mc => "mc",
            Method::EcdfMc => "ecdf-mc",
            Method::MultilabelMc => "multilabel-mc",
            Method::AugmentedMc => "augmented-mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// What changes from one trial to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variation {
    /// A fresh synthetic dataset per trial (toy data only).
    Data,
    /// A fixed pool, re-split at random per trial.
    #[default]
    Split,
    /// A fixed split; only the pseudo-labels are redrawn.
    PseudoLabels,
}

impl FromStr for Variation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "data" => Ok(Variation::Data),
            "split" => Ok(Variation::Split),
            "pseudo-labels" => Ok(Variation::PseudoLabels),
            _ => Err(format!("unknown variation {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    /// Gaussian-mixture toy data; `config.n` is the pool size per trial.
    Toy {
        config: ToyConfig,
        /// Annotators simulated per example when bootstrapping.
        annotators: usize,
        /// Probability of a second label for `multilabel-mc`.
        second_label: f64,
        /// Augmentation noise scale for `augmented-mc`.
        sigma_aug: f64,
    },
    /// Precomputed files. Plausibilities come from `plausibilities`, else
    /// from aggregating `annotations`, else one-hot on `labels`.
    Files {
        scores: Option<PathBuf>,
        plausibilities: Option<PathBuf>,
        annotations: Option<PathBuf>,
        labels: Option<PathBuf>,
        augmented: Option<PathBuf>,
    },
}

impl DataSource {
    pub fn toy(config: ToyConfig) -> Self {
        DataSource::Toy {
            config,
            annotators: 5,
            second_label: 0.5,
            sigma_aug: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub alpha: f64,
    pub delta: f64,
    pub m: usize,
    pub l_fraction: f64,
    pub calib_fraction: f64,
    pub trials: usize,
    pub seed: u64,
    pub source: DataSource,
    pub tie_break: TieBreak,
    /// Draw pseudo-labels from bootstrap-resampled annotations.
    pub bootstrap: bool,
    pub variation: Variation,
    /// Bins of the summary histograms.
    pub bins: usize,
}

impl ExperimentConfig {
    pub fn new(method: Method, source: DataSource) -> Self {
        ExperimentConfig {
            method,
            alpha: 0.05,
            delta: 1e-4,
            m: 10,
            l_fraction: 0.5,
            calib_fraction: 0.5,
            trials: 100,
            seed: 0,
            source,
            tie_break: TieBreak::LowestIndex,
            bootstrap: false,
            variation: Variation::Split,
            bins: DEFAULT_BINS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.alpha) {
            return Err(Error::config("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !open_unit(self.calib_fraction) {
            return Err(Error::config("calib_fraction", format!("{} not in (0, 1)", self.calib_fraction)));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        if self.bins == 0 {
            return Err(Error::config("bins", "must be at least 1"));
        }
        if self.method == Method::EcdfMc {
            if !open_unit(self.delta) {
                return Err(Error::config("delta", format!("{} not in (0, 1)", self.delta)));
            }
            if !open_unit(self.l_fraction) {
                return Err(Error::config("l_fraction", format!("{} not in (0, 1)", self.l_fraction)));
            }
        }
        match &self.source {
            DataSource::Toy { config, second_label, sigma_aug, annotators } => {
                config.validate()?;
                if config.n < 2 {
                    return Err(Error::config("n", "need at least two examples"));
                }
                if !(0.0..=1.0).contains(second_label) {
                    return Err(Error::config("second_label", "must be a probability"));
                }
                if !(*sigma_aug > 0.0) {
                    return Err(Error::config("sigma_aug", "must be positive"));
                }
                if self.bootstrap && *annotators == 0 {
                    return Err(Error::config("annotators", "bootstrap needs at least one annotator"));
                }
            }
            DataSource::Files { scores, annotations, augmented, labels, .. } => {
                if self.variation == Variation::Data {
                    return Err(Error::config("variation", "fresh data per trial needs the toy source"));
                }
                if self.method == Method::AugmentedMc {
                    if augmented.is_none() || labels.is_none() {
                        return Err(Error::config("augmented", "augmented-mc needs augmented scores and labels"));
                    }
                } else if scores.is_none() {
                    return Err(Error::config("scores", "a score file is required"));
                }
                if (self.bootstrap || self.method == Method::MultilabelMc) && annotations.is_none() {
                    return Err(Error::config("annotations", "bootstrap and multilabel-mc need annotations"));
                }
                if self.method == Method::SplitTrue && labels.is_none() {
                    return Err(Error::config("labels", "split-true needs a labels file"));
                }
            }
        }
        Ok(())
    }
}

/// Everything a trial needs, aligned by row.
#[derive(Debug, Clone)]
struct Pool {
    scores: ScoreTable,
    plausibilities: Vec<Plausibilities>,
    voted: Vec<ClassIndex>,
    true_labels: Option<Vec<ClassIndex>>,
    annotations: Option<Vec<AnnotationRecord>>,
    augmented: Option<Vec<AugmentedBatch>>,
}

impl Pool {
    fn len(&self) -> usize {
        self.scores.len()
    }

    fn select(&self, idx: &[usize]) -> Pool {
        let pick = |v: &Vec<ClassIndex>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Pool {
            scores: self.scores.select(idx),
            plausibilities: idx.iter().map(|&i| self.plausibilities[i].clone()).collect(),
            voted: pick(&self.voted),
            true_labels: self.true_labels.as_ref().map(pick),
            annotations: self.annotations.as_ref().map(|a| idx.iter().map(|&i| a[i].clone()).collect()),
            augmented: self.augmented.as_ref().map(|a| idx.iter().map(|&i| a[i].clone()).collect()),
        }
    }
}

fn toy_pool(cfg: &ExperimentConfig, seeds: &SeedSpec) -> Result<Pool> {
    let DataSource::Toy { config, annotators, second_label, sigma_aug } = &cfg.source else {
        unreachable!("toy_pool needs a toy source")
    };
    let data = gen_toy(config, cfg.tie_break, &mut seeds.stream("data", 0))?;
    let mut pool = Pool {
        scores: data.scores(),
        plausibilities: data.posteriors.clone(),
        voted: data.voted_labels.clone(),
        true_labels: Some(data.true_labels.clone()),
        annotations: None,
        augmented: None,
    };
    match cfg.method {
        Method::MultilabelMc => {
            let sets = gen_label_sets(&data, *second_label, &mut seeds.stream("label-sets", 0));
            pool.plausibilities = sets
                .iter()
                .map(|s| multilabel_plausibilities(s, config.num_classes()))
                .collect::<Result<_>>()?;
            pool.voted = sets.iter().map(|s| s[0]).collect();
        }
        Method::AugmentedMc => {
            let mut rng = seeds.stream("augment", 0);
            pool.augmented = Some(
                data.features
                    .iter()
                    .zip(&data.ids)
                    .map(|(x, id)| AugmentedBatch::new(id.clone(), augmented_scores(x, config, *sigma_aug, cfg.m, &mut rng)))
                    .collect::<Result<_>>()?,
            );
        }
        _ => {}
    }
    if cfg.bootstrap {
        pool.annotations = Some(simulate_annotations(&data, *annotators, &mut seeds.stream("annotations", 0)));
    }
    Ok(pool)
}

fn file_pool(cfg: &ExperimentConfig) -> Result<Pool> {
    let DataSource::Files { scores, plausibilities, annotations, labels, augmented } = &cfg.source else {
        unreachable!("file_pool needs a file source")
    };
    let augmented = augmented.as_deref().map(io::read_augmented).transpose()?;
    let scores = match (scores, &augmented) {
        (Some(path), _) => io::read_score_table(path)?,
        // Augmented-only input: originals stand in for the plain scores.
        (None, Some(batches)) => ScoreTable::new(
            batches.iter().map(|b| b.id().to_string()).collect(),
            batches.iter().map(|b| b.original().to_vec()).collect(),
        )?,
        (None, None) => return Err(Error::config("scores", "a score file is required")),
    };
    let ids = scores.ids().to_vec();
    let classes = scores.num_classes();
    let true_labels = labels
        .as_deref()
        .map(|path| {
            let (keys, values) = io::read_labels(path)?;
            io::align_by_id(&ids, &keys, &values)
        })
        .transpose()?;
    let annotations = annotations
        .as_deref()
        .map(|path| {
            let records = io::read_annotations(path, classes)?;
            let keys: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
            io::align_by_id(&ids, &keys, &records)
        })
        .transpose()?;
    let mut lambdas = match (plausibilities, &annotations, &true_labels) {
        (Some(path), _, _) => {
            let (keys, values) = io::read_plausibilities(path)?;
            io::align_by_id(&ids, &keys, &values)?
        }
        (None, Some(records), _) => records
            .iter()
            .map(|r| aggregate(r, classes, AggregationProcedure::for_record(r)))
            .collect::<Result<_>>()?,
        (None, None, Some(labels)) => labels.iter().map(|&y| Plausibilities::one_hot(classes, y)).collect(),
        (None, None, None) => {
            return Err(Error::config("plausibilities", "need plausibilities, annotations or labels"))
        }
    };
    if cfg.method == Method::MultilabelMc {
        let records = annotations.as_ref().expect("checked by validate");
        lambdas = records
            .iter()
            .map(|r| match &r.payload {
                Annotations::SingleLabels(set) => multilabel_plausibilities(set, classes),
                Annotations::PartialRankings(_) => {
                    Err(Error::config("annotations", "multilabel-mc needs single-label records"))
                }
            })
            .collect::<Result<_>>()?;
    }
    if lambdas.iter().any(|l| l.num_classes() != classes) {
        return Err(Error::config("plausibilities", "class count differs from the score file"));
    }
    let augmented = augmented
        .map(|batches| {
            let keys: Vec<String> = batches.iter().map(|b| b.id().to_string()).collect();
            io::align_by_id(&ids, &keys, &batches)
        })
        .transpose()?;
    let mut rng = SeedSpec::new(cfg.seed).stream("vote", 0);
    let voted = lambdas.iter().map(|l| cfg.tie_break.pick(l, &mut rng)).collect();
    Ok(Pool {
        scores,
        plausibilities: lambdas,
        voted,
        true_labels,
        annotations,
        augmented,
    })
}

/// The pool reused by every trial; `None` when each trial draws fresh data.
fn shared_pool(config: &ExperimentConfig, master: &SeedSpec) -> Result<Option<Pool>> {
    Ok(match (&config.source, config.variation) {
        (DataSource::Toy { .. }, Variation::Data) => None,
        (DataSource::Toy { .. }, _) => Some(toy_pool(config, &master.derive("pool", 0))?),
        (DataSource::Files { .. }, _) => Some(file_pool(config)?),
    })
}

/// Per-trial output: the metrics plus p-values of the evaluation label.
#[derive(Debug, Clone, PartialEq)]
struct TrialOutcome {
    report: TrialReport,
    p_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub reports: Vec<TrialReport>,
    pub summary: Summary,
    /// Histogram over `[0, 1]` of each test example's p-value for its true
    /// (or, failing that, voted) label. Empty for threshold-only methods.
    pub p_value_histogram: Histogram,
}

/// Runs `config.trials` trials in parallel; reports come back in trial order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let master = SeedSpec::new(config.seed);
    let shared = shared_pool(config, &master)?;
    let classes = shared.as_ref().map_or_else(
        || match &config.source {
            DataSource::Toy { config, .. } => config.num_classes(),
            DataSource::Files { .. } => 0,
        },
        |p| p.scores.num_classes(),
    );
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, shared.as_ref(), &master, t))
        .collect::<Result<Vec<_>>>()?;
    let mut p_value_histogram = Histogram::new(0.0, 1.0, config.bins);
    for o in &outcomes {
        o.p_values.iter().for_each(|&p| p_value_histogram.add(p));
    }
    let reports: Vec<TrialReport> = outcomes.into_iter().map(|o| o.report).collect();
    let summary = summarize(&reports, classes, config.bins)?;
    Ok(ExperimentResult {
        reports,
        summary,
        p_value_histogram,
    })
}

fn run_trial(config: &ExperimentConfig, shared: Option<&Pool>, master: &SeedSpec, trial: usize) -> Result<TrialOutcome> {
    let seeds = master.derive("trial", trial as u64);
    let fresh;
    let pool = match shared {
        Some(p) => p,
        None => {
            fresh = toy_pool(config, &seeds.derive("data", 0))?;
            &fresh
        }
    };
    let n = pool.len();
    let n_cal = (config.calib_fraction * n as f64).floor() as usize;
    if n_cal == 0 || n_cal == n {
        return Err(Error::config("calib_fraction", format!("splits {n} examples into {n_cal} calibration rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let split_seeds = if config.variation == Variation::PseudoLabels { master } else { &seeds };
    order.shuffle(&mut split_seeds.stream("split", 0));
    let calib = pool.select(&order[..n_cal]);
    let test = pool.select(&order[n_cal..]);
    let label_seeds = seeds.derive("labels", 0);
    let calibration = build_calibration(config, &calib, &label_seeds)?;
    let sets = predict(&calibration, &test)?;
    let eval_labels = test.true_labels.as_ref().unwrap_or(&test.voted);
    let p_values = sets
        .iter()
        .zip(eval_labels)
        .filter_map(|(s, &y)| s.p_values.as_ref().map(|p| p[y]))
        .collect();
    Ok(TrialOutcome {
        report: TrialReport::evaluate(trial, &sets, &test.voted, &test.plausibilities, test.true_labels.as_deref())?,
        p_values,
    })
}

fn pseudo_labels(config: &ExperimentConfig, calib: &Pool, m: usize, seeds: &SeedSpec) -> Result<ReplicatedLabels> {
    match (&calib.annotations, config.bootstrap) {
        (Some(records), true) => expand_calibration_bootstrap(records, calib.scores.num_classes(), m, seeds),
        _ => Ok(expand_calibration(&calib.plausibilities, m, seeds)),
    }
}

/// Calibrates `config.method` on every row of `calib`.
fn build_calibration(config: &ExperimentConfig, calib: &Pool, seeds: &SeedSpec) -> Result<Calibration> {
    let alpha = config.alpha;
    let split = |labels: &[ClassIndex]| {
        let scores: Vec<f64> = labels.iter().enumerate().map(|(i, &y)| calib.scores.score(i, y)).collect();
        Calibration::Threshold {
            alpha,
            threshold: calibrate_split(&scores, alpha),
        }
    };
    Ok(match config.method {
        Method::SplitVoted => split(&calib.voted),
        Method::SplitTrue => split(
            calib
                .true_labels
                .as_ref()
                .ok_or_else(|| Error::config("labels", "split-true needs true labels"))?,
        ),
        Method::Mc | Method::MultilabelMc => {
            let labels = pseudo_labels(config, calib, config.m, seeds)?;
            Calibration::MonteCarlo {
                alpha,
                reference: ReferenceScores::from_replicates(&labels.gather_scores(&calib.scores)?),
            }
        }
        Method::EcdfMc => {
            let n = calib.len();
            let l = EcdfMcParams::with_fraction(n, config.l_fraction, config.m, config.delta).split;
            if l < 1 || l + 2 > n {
                return Err(Error::SplitTooSmall { n, l });
            }
            let head: Vec<usize> = (0..l).collect();
            let tail: Vec<usize> = (l..n).collect();
            let reference = pseudo_labels(config, &calib.select(&head), config.m, seeds)?;
            let holdout = pseudo_labels(config, &calib.select(&tail), 1, &seeds.derive("holdout", 0))?;
            Calibration::EcdfCorrected {
                alpha,
                calibration: EcdfMcCalibration::from_labels(
                    &calib.scores,
                    &reference,
                    &holdout.column(0),
                    config.delta,
                )?,
            }
        }
        Method::AugmentedMc => {
            let batches = calib
                .augmented
                .as_ref()
                .ok_or_else(|| Error::config("augmented", "augmented-mc needs augmented scores"))?;
            let labels = calib
                .true_labels
                .as_ref()
                .ok_or_else(|| Error::config("labels", "augmented-mc needs true labels"))?;
            Calibration::Augmented {
                alpha,
                calibration: AugmentedCalibration::new(batches, labels)?,
            }
        }
    })
}

fn predict(calibration: &Calibration, test: &Pool) -> Result<Vec<PredictionSet>> {
    match (&test.augmented, calibration) {
        (Some(batches), Calibration::Augmented { .. }) => {
            batches.iter().map(|b| calibration.predict_augmented(b)).collect()
        }
        _ => test
            .scores
            .ids()
            .iter()
            .zip(test.scores.rows())
            .map(|(id, row)| calibration.predict(id.clone(), row))
            .collect(),
    }
}

/// Calibrates on every row of a file source, for `mccp calibrate`.
pub fn calibrate_files(config: &ExperimentConfig) -> Result<Calibration> {
    if !matches!(config.source, DataSource::Files { .. }) {
        return Err(Error::config("source", "calibration from files needs a file source"));
    }
    config.validate()?;
    let pool = file_pool(config)?;
    build_calibration(config, &pool, &SeedSpec::new(config.seed).derive("labels", 0))
}
