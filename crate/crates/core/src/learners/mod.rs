//! Within-cluster learners and the per-memory training driver.

mod cluster;
mod logistic;
mod model;
mod samples;
mod tree;

pub use self::cluster::{train_memory_classifier, MemoryTraining, TrainedCluster};
pub use self::logistic::{
    fit_logistic, loss_and_gradient, sample_weights, train_logistic, LogisticFit, LogisticModel, LogisticParams,
};
pub use self::model::{fit_model, Model, ModelKind};
pub use self::samples::{majority_class, Samples};
pub use self::tree::{best_split, fit_tree, train_tree, DecisionTree, SplitChoice, TreeNode, TreeParams};
