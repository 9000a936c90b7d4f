//! Preprocessing (scaler, PCA) and the five classifiers.

pub mod bayes;
pub mod forest;
pub mod logistic;
pub mod pca;
pub mod scaler;
pub mod svm;
pub mod tree;

use ndarray::ArrayView2;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use bayes::GaussianNb;
pub use forest::{ForestParams, RandomForest};
pub use logistic::{LogisticModel, LogisticParams};
pub use pca::{fit_pca, PcaModel};
pub use scaler::{fit_scaler, ScalerParams};
pub use svm::{SvmModel, SvmParams};
pub use tree::{DecisionTree, MaxFeatures, TreeParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("empty input")]
    EmptyInput,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rank {rank} exceeds the maximum {max}")]
    RankTooHigh { rank: usize, max: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("{rows} rows but {labels} labels")]
    LabelCountMismatch { rows: usize, labels: usize },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
}

pub type Result<T> = std::result::Result<T, LearnError>;

/// Column index of each row's maximum; ties go to the lowest index.
pub fn argmax_rows(m: ArrayView2<'_, f64>) -> Vec<usize> {
    m.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    LR,
    RF,
    SVM,
    NB,
    DT,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::LR,
        ModelKind::RF,
        ModelKind::SVM,
        ModelKind::NB,
        ModelKind::DT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LR => "LR",
            ModelKind::RF => "RF",
            ModelKind::SVM => "SVM",
            ModelKind::NB => "NB",
            ModelKind::DT => "DT",
        }
    }

    /// Tree models see unscaled features; the rest are fit on standardized inputs.
    pub fn uses_scaled_features(self) -> bool {
        !matches!(self, ModelKind::RF | ModelKind::DT)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LearnError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelParams {
    pub logistic: LogisticParams,
    pub forest: ForestParams,
    pub tree: TreeParams,
    pub svm: SvmParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelState {
    Logistic(LogisticModel),
    Forest(RandomForest),
    Svm(SvmModel),
    Bayes(GaussianNb),
    Tree(DecisionTree),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub state: ModelState,
    /// Sorted training labels; internal class `i` is `classes[i]`.
    pub classes: Vec<usize>,
    pub n_features: usize,
    pub seed: u64,
}

pub fn train(kind: ModelKind, x: ArrayView2<'_, f64>, y: &[usize], seed: u64) -> Result<TrainedModel> {
    train_with(kind, x, y, seed, &ModelParams::default())
}

pub fn train_with(
    kind: ModelKind,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    seed: u64,
    params: &ModelParams,
) -> Result<TrainedModel> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return Err(LearnError::EmptyInput);
    }
    if y.len() != n {
        return Err(LearnError::LabelCountMismatch { rows: n, labels: y.len() });
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(LearnError::SingleClass);
    }
    let k = classes.len();
    let yi: Vec<usize> = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label collected above"))
        .collect();
    let state = match kind {
        ModelKind::LR => ModelState::Logistic(logistic::fit_logistic(x, &yi, k, &params.logistic)),
        ModelKind::RF => ModelState::Forest(RandomForest::fit(x, &yi, k, &params.forest, seed)),
        ModelKind::SVM => ModelState::Svm(svm::fit_svm(x, &yi, k, &params.svm)),
        ModelKind::NB => ModelState::Bayes(bayes::fit_nb(x, &yi, k)),
        ModelKind::DT => ModelState::Tree(DecisionTree::fit(x, &yi, k, &params.tree, seed)),
    };
    Ok(TrainedModel {
        kind,
        state,
        classes,
        n_features: d,
        seed,
    })
}

impl TrainedModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        if x.ncols() != self.n_features {
            return Err(LearnError::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        if x.nrows() == 0 {
            return Ok(Vec::new());
        }
        let internal = match &self.state {
            ModelState::Logistic(m) => m.predict(x),
            ModelState::Forest(m) => m.predict(x),
            ModelState::Svm(m) => m.predict(x),
            ModelState::Bayes(m) => m.predict(x),
            ModelState::Tree(m) => m.predict(x),
        };
        Ok(internal.into_iter().map(|c| self.classes[c]).collect())
    }
}
