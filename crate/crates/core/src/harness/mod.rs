//! Experiment plumbing: JSON configuration, dataset IO, featurization,
//! evaluation over corruption grids and CSV/JSON reports.

mod config;
mod data;
mod eval;
mod featurize;
mod report;
mod run;

pub use self::config::{DatasetConfig, ExperimentConfig, InputConfig, OutputConfig, SimilarityConfig};
pub use self::data::{
    item_file_name, load_manifest, save_manifest, write_dataset, ColorSource, ImageSource, LeafSource, Manifest,
    ManifestItem, ManifestSource, MANIFEST_FILE,
};
pub use self::eval::{
    evaluate, evaluation_cells, map_labels, score, Cell, EvalRow, EvalSetup, MemoryPredictor, ModelPredictor,
    Predictor, BASELINE_MODEL, MEMCLASS_MODEL,
};
pub use self::featurize::{
    featurize_training, pixel_features, pixel_schema, ExpertPoint, ExpertSimilarity, Featurizer, TrainingSet,
};
pub use self::report::{emit_report, render_csv, EvalReport, ReportMetadata, CSV_HEADER};
pub use self::run::{
    learn_stage, open_sources, resolve_threads, run_experiment, train_baseline, train_stage, with_threads,
    write_json, write_outputs, ClusterSummary, ExperimentOutput, Sources, BASELINE_FILE, MODEL_FILE, REPORT_FILE,
    THREADS_ENV,
};
