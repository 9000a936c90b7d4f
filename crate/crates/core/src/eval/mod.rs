//! Stratified cross-validation, weighted metrics and the experiment runner.

pub mod experiment;
pub mod folds;
pub mod metrics;

use crate::channels::ChannelError;
use crate::dataset::DatasetError;
use crate::learn::LearnError;
use crate::oversample::OversampleError;
use thiserror::Error;

pub use experiment::{
    aggregate, prepare_fold, run_experiment, run_holdout, AggregateRow, ExperimentConfig, ExperimentResult,
    ExperimentRow, FoldArtifacts, NoiseCell, OversampleSpace, Phase, Summary,
};
pub use folds::{stratified_holdout, stratified_kfold, FoldPlan};
pub use metrics::{compute_metrics, confusion_matrix, MetricsReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("class {label} has {count} samples, fewer than the {k} folds")]
    ClassTooSmall { label: usize, count: usize, k: usize },
    #[error("need at least 2 folds, got {0}")]
    InvalidFoldCount(usize),
    #[error("holdout fraction must lie in (0, 1), got {0}")]
    InvalidHoldout(f64),
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {label} is outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("no models selected")]
    NoModels,
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Oversample(#[from] OversampleError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
