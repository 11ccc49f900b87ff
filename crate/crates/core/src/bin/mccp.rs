use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mccp::aggregation::{aggregate, bootstrap_aggregate, AggregationProcedure, TieBreak};
use mccp::conformal::Calibration;
use mccp::experiment::{calibrate_files, run_experiment, DataSource, ExperimentConfig, Method, Variation};
use mccp::extensions::AugmentedBatch;
use mccp::io;
use mccp::metrics::{aggregated_coverage, inefficiency, tie_aware_voted_coverage, voted_coverage};
use mccp::report::{emit_report, ReportFormat};
use mccp::synthetic::{augmented_scores, gen_toy, simulate_annotations, ToyConfig};
use mccp::{Error, Result, SeedSpec};

#[derive(Parser)]
#[command(name = "mccp", version, about = "Conformal prediction with ambiguous ground truth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian-mixture toy dataset.
    GenToy(GenToyArgs),
    /// Aggregate annotations into plausibilities.
    Aggregate(AggregateArgs),
    /// Calibrate on score files and write the calibration as JSON.
    Calibrate(CalibrateArgs),
    /// Build prediction sets for test scores.
    Predict(PredictArgs),
    /// Coverage and inefficiency of prediction sets.
    Evaluate(EvaluateArgs),
    /// Run a seeded multi-trial coverage experiment.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Ambiguous,
    Separated,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    LowestIndex,
    Random,
}

impl From<Tie> for TieBreak {
    fn from(t: Tie) -> Self {
        match t {
            Tie::LowestIndex => TieBreak::LowestIndex,
            Tie::Random => TieBreak::Random,
        }
    }
}

#[derive(Args)]
struct ToyArgs {
    #[arg(long, value_enum, default_value = "ambiguous")]
    preset: Preset,
    /// Circumradius of the class means; overrides the preset.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
}

impl ToyArgs {
    fn config(&self) -> ToyConfig {
        let radius = self.radius.unwrap_or(match self.preset {
            Preset::Ambiguous => mccp::synthetic::AMBIGUOUS_RADIUS,
            Preset::Separated => mccp::synthetic::SEPARATED_RADIUS,
        });
        ToyConfig::triangle(radius, self.n)
    }
}

#[derive(Args)]
struct GenToyArgs {
    #[command(flatten)]
    toy: ToyArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "lowest-index")]
    tie_break: Tie,
    /// Simulated annotators per example.
    #[arg(long, default_value_t = 5)]
    annotators: usize,
    /// Also write `augmented.csv` with this many replicates per example.
    #[arg(long)]
    augment: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    sigma_aug: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    classes: usize,
    /// Aggregate one bootstrap resample of each record.
    #[arg(long)]
    bootstrap: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FileArgs {
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    plausibilities: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// True labels, `id,label`.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Augmented scores with a `replicate` column.
    #[arg(long)]
    augmented: Option<PathBuf>,
}

impl FileArgs {
    fn any(&self) -> bool {
        self.scores.is_some() || self.augmented.is_some()
    }

    fn source(&self) -> DataSource {
        DataSource::Files {
            scores: self.scores.clone(),
            plausibilities: self.plausibilities.clone(),
            annotations: self.annotations.clone(),
            labels: self.labels.clone(),
            augmented: self.augmented.clone(),
        }
    }
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value = "mc")]
    method: Method,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    l_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "lowest-index")]
    tie_break: Tie,
    #[arg(long)]
    bootstrap: bool,
}

impl MethodArgs {
    fn config(&self, source: DataSource) -> ExperimentConfig {
        let mut config = ExperimentConfig::new(self.method, source);
        config.alpha = self.alpha;
        config.delta = self.delta;
        config.m = self.m;
        config.l_fraction = self.l_fraction;
        config.seed = self.seed;
        config.tie_break = self.tie_break.into();
        config.bootstrap = self.bootstrap;
        config
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    files: FileArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    calibration: PathBuf,
    #[arg(long, required_unless_present = "augmented")]
    scores: Option<PathBuf>,
    #[arg(long, conflicts_with = "scores")]
    augmented: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    sets: PathBuf,
    #[arg(long, required_unless_present = "annotations")]
    plausibilities: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lowest-index")]
    tie_break: Tie,
    /// Split voted coverage evenly over tied top classes.
    #[arg(long)]
    tie_aware: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    toy: ToyArgs,
    #[command(flatten)]
    files: FileArgs,
    #[arg(long, default_value_t = 0.5)]
    calib_fraction: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value = "split")]
    variation: Variation,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, default_value_t = 5)]
    annotators: usize,
    #[arg(long, default_value_t = 0.5)]
    second_label: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_aug: f64,
    /// Also write SVG histograms.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

fn gen_toy_cmd(args: &GenToyArgs) -> Result<()> {
    let config = args.toy.config();
    let seeds = SeedSpec::new(args.seed);
    let data = gen_toy(&config, args.tie_break.into(), &mut seeds.stream("data", 0))?;
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;
    let all = data.ids.clone();
    io::write_score_table(&dir.join("scores.csv"), &data.scores())?;
    io::write_plausibilities(&dir.join("plausibilities.csv"), &all, &data.posteriors)?;
    io::write_labels(&dir.join("labels.csv"), &all, &data.true_labels)?;
    io::write_labels(&dir.join("voted.csv"), &all, &data.voted_labels)?;
    if args.annotators > 0 {
        let records = simulate_annotations(&data, args.annotators, &mut seeds.stream("annotations", 0));
        io::write_annotations(&dir.join("annotations.jsonl"), &records)?;
    }
    if let Some(m) = args.augment {
        if m == 0 || !(args.sigma_aug > 0.0) {
            return Err(Error::Config {
                field: "augment",
                reason: "need m >= 1 and a positive sigma".into(),
            });
        }
        let mut rng = seeds.stream("augment", 0);
        let batches = data
            .features
            .iter()
            .zip(&all)
            .map(|(x, id)| AugmentedBatch::new(id.clone(), augmented_scores(x, &config, args.sigma_aug, m, &mut rng)))
            .collect::<Result<Vec<_>>>()?;
        io::write_augmented(&dir.join("augmented.csv"), &batches)?;
    }
    Ok(())
}

fn aggregate_cmd(args: &AggregateArgs) -> Result<()> {
    let records = io::read_annotations(&args.annotations, args.classes)?;
    let seeds = SeedSpec::new(args.seed);
    let lambdas = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let procedure = AggregationProcedure::for_record(r);
            if args.bootstrap {
                bootstrap_aggregate(r, args.classes, procedure, &mut seeds.stream("bootstrap", i as u64))
            } else {
                aggregate(r, args.classes, procedure)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    io::write_plausibilities(&args.out, &ids, &lambdas)
}

fn calibrate_cmd(args: &CalibrateArgs) -> Result<()> {
    let calibration = calibrate_files(&args.method.config(args.files.source()))?;
    io::write_json(&args.out, &calibration)
}

fn predict_cmd(args: &PredictArgs) -> Result<()> {
    let calibration: Calibration = io::read_json(&args.calibration)?;
    let sets = match (&args.scores, &args.augmented) {
        (_, Some(path)) => io::read_augmented(path)?
            .iter()
            .map(|b| calibration.predict_augmented(b))
            .collect::<Result<Vec<_>>>()?,
        (Some(path), None) => {
            let table = io::read_score_table(path)?;
            table
                .ids()
                .iter()
                .zip(table.rows())
                .map(|(id, row)| calibration.predict(id.clone(), row))
                .collect::<Result<Vec<_>>>()?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    io::write_prediction_sets(&args.out, &sets)
}

fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let sets = io::read_prediction_sets(&args.sets)?;
    let set_ids: Vec<String> = sets.iter().map(|s| s.id.clone()).collect();
    let lambdas = match (&args.plausibilities, &args.annotations) {
        (Some(path), _) => {
            let (keys, values) = io::read_plausibilities(path)?;
            io::align_by_id(&set_ids, &keys, &values)?
        }
        (None, Some(path)) => {
            let classes = sets
                .iter()
                .find_map(|s| s.p_values.as_ref().map(Vec::len))
                .ok_or_else(|| Error::Config {
                    field: "annotations",
                    reason: "class count unknown; pass --plausibilities".into(),
                })?;
            let records = io::read_annotations(path, classes)?;
            let keys: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
            let values = records
                .iter()
                .map(|r| aggregate(r, classes, AggregationProcedure::for_record(r)))
                .collect::<Result<Vec<_>>>()?;
            io::align_by_id(&set_ids, &keys, &values)?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let tie: TieBreak = args.tie_break.into();
    let mut rng = SeedSpec::new(args.seed).stream("vote", 0);
    let voted: Vec<_> = lambdas.iter().map(|l| tie.pick(l, &mut rng)).collect();
    let voted_cov = if args.tie_aware {
        tie_aware_voted_coverage(&sets, &lambdas)?
    } else {
        voted_coverage(&sets, &voted)?
    };
    let mut out = serde_json::json!({
        "examples": sets.len(),
        "voted_coverage": voted_cov,
        "aggregated_coverage": aggregated_coverage(&sets, &lambdas)?,
        "inefficiency": inefficiency(&sets)?,
    });
    if let Some(path) = &args.labels {
        let (keys, values) = io::read_labels(path)?;
        let labels = io::align_by_id(&set_ids, &keys, &values)?;
        out["true_coverage"] = voted_coverage(&sets, &labels)?.into();
    }
    println!("{out}");
    Ok(())
}

fn experiment_cmd(args: &ExperimentArgs) -> Result<()> {
    let source = if args.files.any() {
        args.files.source()
    } else {
        DataSource::Toy {
            config: args.toy.config(),
            annotators: args.annotators,
            second_label: args.second_label,
            sigma_aug: args.sigma_aug,
        }
    };
    let mut config = args.method.config(source);
    config.calib_fraction = args.calib_fraction;
    config.trials = args.trials;
    config.variation = args.variation;
    config.bins = args.bins;
    let result = run_experiment(&config)?;
    let p_values = (result.p_value_histogram.total() > 0).then_some(&result.p_value_histogram);
    emit_report(&args.out_dir, &result.reports, &result.summary, p_values, ReportFormat { svg: args.svg })?;
    io::write_json(&args.out_dir.join("config.json"), &config)?;
    print!("{}", mccp::report::summary_text(&result.summary));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenToy(a) => gen_toy_cmd(a),
        Command::Aggregate(a) => aggregate_cmd(a),
        Command::Calibrate(a) => calibrate_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
    }
}

fn error_line(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_line(&err));
            ExitCode::FAILURE
        }
    }
}
