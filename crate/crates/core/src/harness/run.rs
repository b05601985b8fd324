use std::path::Path;

use serde::Serialize;

use super::config::{DatasetConfig, ExperimentConfig};
use super::data::{ColorSource, ImageSource, LeafSource, ManifestSource};
use super::eval::{evaluate, evaluation_cells, map_labels, EvalSetup, MemoryPredictor, ModelPredictor, Predictor, BASELINE_MODEL};
use super::featurize::{featurize_training, TrainingSet};
use super::report::{emit_report, EvalReport, ReportMetadata};
use crate::core::{MemoryClassifier, MemorySet};
use crate::error::{Error, Result};
use crate::learners::{fit_model, train_memory_classifier, MemoryTraining, Model, ModelKind, Samples, TrainedCluster};
use crate::memsel::{learn_memories, SearchParams, SearchTrace};
use crate::synth::Split;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "MEMCLASS_THREADS";

pub fn resolve_threads(explicit: Option<usize>) -> Result<usize> {
    if let Some(n) = explicit {
        return if n == 0 { Err(Error::Config("thread count must be at least 1".into())) } else { Ok(n) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Runs `f` inside a dedicated pool of the resolved size.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let n = resolve_threads(threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    Ok(pool.install(f))
}

pub struct Sources {
    pub train: Box<dyn ImageSource>,
    pub test: Box<dyn ImageSource>,
}

pub fn open_sources(dataset: &DatasetConfig) -> Result<Sources> {
    Ok(match dataset {
        DatasetConfig::Color(spec) => {
            spec.validate()?;
            Sources {
                train: Box::new(ColorSource { spec: spec.clone(), split: Split::Train }),
                test: Box::new(ColorSource { spec: spec.clone(), split: Split::Test }),
            }
        }
        DatasetConfig::Leaf(spec) => Sources {
            train: Box::new(LeafSource::new(spec.clone(), Split::Train)?),
            test: Box::new(LeafSource::new(spec.clone(), Split::Test)?),
        },
        DatasetConfig::Manifest { train, test } => {
            for dir in [train, test] {
                if !dir.is_dir() {
                    return Err(Error::Config(format!("dataset directory {} does not exist", dir.display())));
                }
            }
            Sources {
                train: Box::new(ManifestSource::open(train)?),
                test: Box::new(ManifestSource::open(test)?),
            }
        }
    })
}

pub fn learn_stage(train: &TrainingSet, search: &SearchParams) -> Result<(MemorySet<f64>, SearchTrace<f64>)> {
    learn_memories(&train.points, &train.featurizer.similarity, search)
}

fn samples(train: &TrainingSet) -> Result<Samples<'_, f64>> {
    Samples::new(
        &train.schema,
        train.inputs.iter().map(|v| v.as_slice()).collect(),
        train.labels.clone(),
    )
}

pub fn train_stage(train: &TrainingSet, memories: MemorySet<f64>, kind: &ModelKind) -> Result<MemoryTraining<f64>> {
    train_memory_classifier(
        &train.points,
        &samples(train)?,
        train.classes.clone(),
        &train.featurizer.similarity,
        train.featurizer.similarity.spec().clone(),
        memories,
        kind,
    )
}

pub fn train_baseline(train: &TrainingSet, kind: &ModelKind) -> Result<Model<f64>> {
    fit_model(kind, &samples(train)?, train.classes.len(), None)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterSummary {
    pub memory: usize,
    pub size: usize,
    pub training_accuracy: f64,
    pub fallback: bool,
}

impl From<&TrainedCluster> for ClusterSummary {
    fn from(c: &TrainedCluster) -> Self {
        Self {
            memory: c.memory,
            size: c.members.len(),
            training_accuracy: c.training_accuracy,
            fallback: c.fallback,
        }
    }
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub report: EvalReport,
    pub classifier: MemoryClassifier<f64>,
    pub baseline: Model<f64>,
    pub trace: SearchTrace<f64>,
    pub clusters: Vec<ClusterSummary>,
    pub training_out_of_boundary: usize,
}

impl ExperimentOutput {
    pub fn sidecar_extra(&self) -> serde_json::Value {
        serde_json::json!({
            "search_trace": self.trace,
            "clusters": self.clusters,
            "training_out_of_boundary": self.training_out_of_boundary,
        })
    }
}

/// Data, features, memories, per-cluster and baseline training, then
/// evaluation on the clean and corrupted test sets. Uses the configured
/// thread pool; results do not depend on its size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    with_threads(cfg.threads, || run_in_pool(cfg))?
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sources = open_sources(&cfg.dataset).map_err(Error::stage("load data"))?;
    let train = featurize_training(sources.train.as_ref(), &cfg.similarity, cfg.input).map_err(Error::stage("featurize"))?;
    let (memories, trace) = learn_stage(&train, &cfg.search).map_err(Error::stage("learn memories"))?;
    let trained = train_stage(&train, memories, &cfg.model).map_err(Error::stage("train"))?;
    let baseline = train_baseline(&train, &cfg.baseline_kind()).map_err(Error::stage("train baseline"))?;

    let memclass = MemoryPredictor::from_training(trained.classifier.clone(), &train.points)?;
    let base = ModelPredictor {
        name: BASELINE_MODEL.to_string(),
        model: baseline.clone(),
    };
    let predictors: [&dyn Predictor; 2] = [&memclass, &base];
    let test = sources.test.as_ref();
    let labels = map_labels(&test.labels(), test.classes(), &train.classes);
    let setup = EvalSetup {
        featurizer: &train.featurizer,
        severity_table: &cfg.severity_table,
        seed: cfg.seed,
        unknown: train.classes.len(),
    };
    let cells = evaluation_cells(&cfg.corruptions, &cfg.severities);
    let rows = evaluate(&predictors, test, &labels, &cells, &setup).map_err(Error::stage("evaluate"))?;

    Ok(ExperimentOutput {
        report: EvalReport {
            rows,
            metadata: ReportMetadata::now(cfg.hash(), cfg.seed),
        },
        clusters: trained.clusters.iter().map(ClusterSummary::from).collect(),
        training_out_of_boundary: trained.out_of_boundary.len(),
        classifier: trained.classifier,
        baseline,
        trace,
    })
}

pub const REPORT_FILE: &str = "report.csv";
pub const MODEL_FILE: &str = "model.json";
pub const BASELINE_FILE: &str = "baseline.json";

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(|e| Error::io(path, e))
}

/// `report.csv`, its `report.json` sidecar, `model.json` and
/// `baseline.json` under `dir`.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    emit_report(&out.report, &dir.join(REPORT_FILE), out.sidecar_extra())?;
    write_json(&dir.join(MODEL_FILE), &out.classifier)?;
    write_json(&dir.join(BASELINE_FILE), &out.baseline)
}
