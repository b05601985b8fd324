use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use memclass::bounds::{bound_report, BoundParams};
use memclass::harness::{
    evaluate, evaluation_cells, featurize_training, learn_stage, map_labels, open_sources, run_experiment,
    train_baseline, train_stage, with_threads, write_dataset, write_json, write_outputs, ColorSource, EvalReport,
    EvalSetup, ExperimentConfig, ExpertSimilarity, Featurizer, ImageSource, LeafSource, ManifestSource,
    MemoryPredictor, ModelPredictor, Predictor, ReportMetadata, BASELINE_FILE, BASELINE_MODEL, MODEL_FILE,
    REPORT_FILE,
};
use memclass::learners::Model;
use memclass::synth::{corrupt_with, ColorDatasetSpec, CorruptionKind, CorruptionSpec, LeafDatasetSpec, SeverityTable, Split};
use memclass::MemoryClassifier;
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "memclass", version, about = "Memory classifiers: data generation, training, evaluation and bounds")]
struct Cli {
    /// Worker threads (default: $MEMCLASS_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic color dataset as PPM files plus manifests.
    GenColor(GenColorArgs),
    /// Write a synthetic leaf dataset as PPM files plus manifests.
    GenLeaf(GenLeafArgs),
    /// Corrupt every image of a manifest directory.
    Corrupt(CorruptArgs),
    /// Learn memories for an experiment config and write them as JSON.
    LearnMemories(ExperimentArgs),
    /// Learn memories, then train the memory classifier and its global baseline.
    Train(ExperimentArgs),
    /// Evaluate saved models on the clean and corrupted test split.
    Eval(EvalArgs),
    /// Evaluate the generalization bound.
    Bound(BoundArgs),
    /// Full pipeline: data, memories, training, evaluation and reports.
    Run(ExperimentArgs),
}

#[derive(Args)]
struct GenColorArgs {
    /// JSON dataset spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; `train/` and `test/` are created inside.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    patch: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenLeafArgs {
    /// JSON dataset spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; `train/` and `test/` are created inside.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CorruptArgs {
    /// JSON severity table; defaults to the built-in one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding a manifest.json.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// One of gaussian_noise, shot_noise, impulse_noise, gaussian_blur,
    /// contrast, brightness, saturate, pixelate.
    #[arg(long)]
    kind: CorruptionKind,
    #[arg(long)]
    severity: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output file or directory; defaults to the config's output dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Experiment config JSON naming the dataset and corruption grid.
    #[arg(long)]
    config: PathBuf,
    /// Memory classifier JSON written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Global baseline JSON written by `train`.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Report directory; defaults to the config's output dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// JSON bound parameters; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training set size.
    #[arg(long)]
    n: Option<usize>,
    /// Number of memories.
    #[arg(long)]
    q: Option<usize>,
    /// Failure probability, at most 1/q.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Per-memory Rademacher complexities, comma separated; one value is
    /// repeated q times.
    #[arg(long, value_delimiter = ',')]
    rademacher: Option<Vec<f64>>,
    /// Empirical risk.
    #[arg(long)]
    risk: Option<f64>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn output_dir(out: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    match out.or_else(|| cfg.output.dir.clone()) {
        Some(dir) => Ok(dir),
        None => bail!("no output location: pass --out or set output.dir in the config"),
    }
}

fn write_splits(out: &Path, train: &dyn ImageSource, test: &dyn ImageSource) -> Result<()> {
    for (name, source) in [("train", train), ("test", test)] {
        let dir = out.join(name);
        let manifest = write_dataset(&dir, source, |_, img| Ok(img))?;
        println!("{}: {} images", dir.display(), manifest.items.len());
    }
    Ok(())
}

fn gen_color(args: GenColorArgs) -> Result<()> {
    let mut spec: ColorDatasetSpec = match &args.config {
        Some(p) => read_json(p)?,
        None => ColorDatasetSpec::default(),
    };
    spec.side = args.side.unwrap_or(spec.side);
    spec.patch = args.patch.unwrap_or(spec.patch);
    spec.n_train = args.n_train.unwrap_or(spec.n_train);
    spec.n_test = args.n_test.unwrap_or(spec.n_test);
    spec.seed = args.seed.unwrap_or(spec.seed);
    spec.validate()?;
    let train = ColorSource { spec: spec.clone(), split: Split::Train };
    let test = ColorSource { spec, split: Split::Test };
    write_splits(&args.out, &train, &test)
}

fn gen_leaf(args: GenLeafArgs) -> Result<()> {
    let mut spec: LeafDatasetSpec = match &args.config {
        Some(p) => read_json(p)?,
        None => LeafDatasetSpec::default(),
    };
    spec.side = args.side.unwrap_or(spec.side);
    spec.n_train = args.n_train.unwrap_or(spec.n_train);
    spec.n_test = args.n_test.unwrap_or(spec.n_test);
    spec.seed = args.seed.unwrap_or(spec.seed);
    spec.validate()?;
    let train = LeafSource::new(spec.clone(), Split::Train)?;
    let test = LeafSource::new(spec, Split::Test)?;
    write_splits(&args.out, &train, &test)
}

fn corrupt_dir(args: CorruptArgs) -> Result<()> {
    let table: SeverityTable = match &args.config {
        Some(p) => read_json(p)?,
        None => SeverityTable::default(),
    };
    table.parameter(args.kind, args.severity)?;
    let source = ManifestSource::open(&args.input)?;
    let manifest = write_dataset(&args.out, &source, |i, img| {
        corrupt_with(&img, &CorruptionSpec::for_item(args.kind, args.severity, args.seed, i), &table)
    })?;
    println!("{}: {} images", args.out.display(), manifest.items.len());
    Ok(())
}

fn learn_memories_cmd(args: ExperimentArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let sources = open_sources(&cfg.dataset)?;
    let train = featurize_training(sources.train.as_ref(), &cfg.similarity, cfg.input)?;
    let (memories, trace) = learn_stage(&train, &cfg.search)?;
    let out = serde_json::json!({
        "memories": memories.indices(),
        "thresholds": memories.thresholds(),
        "search_trace": trace,
    });
    match args.out.or_else(|| cfg.output.dir.map(|d| d.join("memories.json"))) {
        Some(path) => write_json(&path, &out)?,
        None => println!("{}", serde_json::to_string_pretty(&out)?),
    }
    Ok(())
}

fn train_cmd(args: ExperimentArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let dir = output_dir(args.out, &cfg)?;
    let sources = open_sources(&cfg.dataset).context("load data")?;
    let train = featurize_training(sources.train.as_ref(), &cfg.similarity, cfg.input).context("featurize")?;
    let (memories, _) = learn_stage(&train, &cfg.search).context("learn memories")?;
    let trained = train_stage(&train, memories, &cfg.model).context("train")?;
    let baseline = train_baseline(&train, &cfg.baseline_kind()).context("train baseline")?;
    write_json(&dir.join(MODEL_FILE), &trained.classifier)?;
    write_json(&dir.join(BASELINE_FILE), &baseline)?;
    println!(
        "memories {:?}, {} training points out of boundary",
        trained.classifier.memory_set().indices(),
        trained.out_of_boundary.len()
    );
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let dir = output_dir(args.out, &cfg)?;
    let classifier = MemoryClassifier::<f64>::from_json(
        &std::fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?,
    )?;
    let sources = open_sources(&cfg.dataset).context("load data")?;
    let featurizer = Featurizer {
        similarity: ExpertSimilarity::new(classifier.similarity().clone())?,
        input: cfg.input,
    };
    classifier.memory_set().check_against(sources.train.len())?;
    let memory_points = classifier
        .memory_set()
        .indices()
        .iter()
        .map(|&i| featurizer.similarity.point(&sources.train.image(i)?))
        .collect::<memclass::Result<Vec<_>>>()?;
    let classes = classifier.classes().to_vec();
    let memclass = MemoryPredictor::new(classifier, memory_points)?;
    let baseline = match &args.baseline {
        Some(p) => Some(ModelPredictor {
            name: BASELINE_MODEL.to_string(),
            model: read_json::<Model<f64>>(p)?,
        }),
        None => None,
    };
    let mut predictors: Vec<&dyn Predictor> = vec![&memclass];
    if let Some(b) = &baseline {
        predictors.push(b);
    }
    let test = sources.test.as_ref();
    let labels = map_labels(&test.labels(), test.classes(), &classes);
    let setup = EvalSetup {
        featurizer: &featurizer,
        severity_table: &cfg.severity_table,
        seed: cfg.seed,
        unknown: classes.len(),
    };
    let rows = evaluate(&predictors, test, &labels, &evaluation_cells(&cfg.corruptions, &cfg.severities), &setup)
        .context("evaluate")?;
    let report = EvalReport {
        rows,
        metadata: ReportMetadata::now(cfg.hash(), cfg.seed),
    };
    memclass::harness::emit_report(&report, &dir.join(REPORT_FILE), serde_json::json!({}))?;
    print!("{}", memclass::harness::render_csv(&report.rows)?);
    Ok(())
}

fn bound_cmd(args: BoundArgs) -> Result<()> {
    let mut p: BoundParams<f64> = match &args.config {
        Some(path) => read_json(path)?,
        None => {
            let (Some(n), Some(q)) = (args.n, args.q) else {
                bail!("--n and --q are required without --config");
            };
            BoundParams::new(n, q, 0.0)
        }
    };
    p.n = args.n.unwrap_or(p.n);
    p.q = args.q.unwrap_or(p.q);
    if let Some(d) = args.delta {
        p.delta = d;
    } else if args.config.is_none() {
        p.delta = 0.05f64.min(1.0 / p.q.max(1) as f64);
    }
    p.rho = args.rho.unwrap_or(p.rho);
    p.kappa = args.kappa.unwrap_or(p.kappa);
    p.empirical_risk = args.risk.unwrap_or(p.empirical_risk);
    match args.rademacher {
        Some(r) if r.len() == 1 => p.rademacher_h = vec![r[0]; p.q],
        Some(r) => p.rademacher_h = r,
        None if p.rademacher_h.len() != p.q => p.rademacher_h = vec![0.0; p.q],
        None => {}
    }
    println!("{}", serde_json::to_string_pretty(&bound_report(&p)?)?);
    Ok(())
}

fn run_cmd(args: ExperimentArgs, threads: Option<usize>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    let dir = output_dir(args.out, &cfg)?;
    if threads.is_some() {
        cfg.threads = threads;
    }
    let out = run_experiment(&cfg)?;
    write_outputs(&dir, &out)?;
    print!("{}", memclass::harness::render_csv(&out.report.rows)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Bound(a) => bound_cmd(a),
        Command::Run(a) => run_cmd(a, threads),
        other => with_threads(threads, move || match other {
            Command::GenColor(a) => gen_color(a),
            Command::GenLeaf(a) => gen_leaf(a),
            Command::Corrupt(a) => corrupt_dir(a),
            Command::LearnMemories(a) => learn_memories_cmd(a),
            Command::Train(a) => train_cmd(a),
            Command::Eval(a) => eval_cmd(a),
            Command::Bound(_) | Command::Run(_) => unreachable!(),
        })?,
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
