//! Memory classifiers.
//!
//! A memory classifier routes each input to its most similar training
//! prototype (a *memory*) under an expert-designed similarity score and then
//! applies a classifier trained only on that memory's cluster. Inputs that no
//! memory accepts are labelled with a reserved unknown class.
//!
//! The crate is organised bottom-up:
//!
//! - [`core`]: domain types, memory selection and the composed classifier.
//! - [`features`]: segmentation, color/leaf/lesion features, HSV, convex hulls
//!   and the similarity functions they induce.
//! - [`memsel`]: the clustering objective, initial-memory generation and the
//!   randomized swap search over memory sets, plus an exhaustive oracle.
//! - [`learners`]: CART trees, multinomial logistic regression, majority
//!   models, and the per-cluster training driver.
//! - [`bounds`]: the generalization-bound calculator.
//! - [`synth`]: synthetic datasets and the seeded corruption suite.
//! - [`harness`]: configuration, dataset IO, evaluation and reports.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the type aliases
//! below fix the common `f64` instantiation.

pub mod bounds;
pub mod core;
pub mod error;
pub mod features;
pub mod harness;
pub mod learners;
pub mod memsel;
pub mod rng;
pub mod scalar;
pub mod synth;

pub use crate::core::{
    classify, select_memory, Image, LabeledDataset, MemoryClassifier, MemorySet, Selection,
    SelectionResult, Similarity,
};
pub use crate::error::{Error, Result};
pub use crate::scalar::Scalar;

pub type MemorySetF64 = core::MemorySet<f64>;
pub type MemorySetF32 = core::MemorySet<f32>;
pub type MemoryClassifierF64 = core::MemoryClassifier<f64>;
pub type MemoryClassifierF32 = core::MemoryClassifier<f32>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type DecisionTreeF64 = learners::DecisionTree<f64>;
pub type LogisticModelF64 = learners::LogisticModel<f64>;
pub type ModelF64 = learners::Model<f64>;
pub type BoundParamsF64 = bounds::BoundParams<f64>;
