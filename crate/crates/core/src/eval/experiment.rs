//! Cross-validated before/after oversampling comparison over a grid of
//! noise channels and probabilities.

use super::folds::{stratified_holdout, stratified_kfold};
use super::metrics::{compute_metrics, MetricsReport};
use super::{EvalError, Result};
use crate::channels::{corrupt_features, ChannelKind, FeatureBounds, NoiseChannel};
use crate::dataset::LabeledDataset;
use crate::learn::{fit_pca, fit_scaler, train_with, ModelKind, ModelParams, PcaModel, ScalerParams};
use crate::oversample::{oversample_traced, OversampleConfig, Oversampled};
use crate::seeding::derive_seed;
use ndarray::{concatenate, Array2, Axis};
use rayon::prelude::*;
use std::fmt;

const OVERSAMPLE_TAG: u64 = 0x05a3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Before,
    After,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::Before, Phase::After];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Before => "before",
            Phase::After => "after",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Feature space in which synthetic rows are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OversampleSpace {
    /// Standardized features; tree models get the rows mapped back.
    Scaled,
    /// Unscaled (optionally PCA-reduced) features.
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCell {
    pub kind: ChannelKind,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k_folds: usize,
    pub seed: u64,
    /// 0 disables PCA.
    pub pca_components: usize,
    pub oversample: OversampleConfig,
    pub oversample_space: OversampleSpace,
    /// Oversample each training split (true) or the whole dataset before splitting.
    pub fold_internal: bool,
    pub models: Vec<ModelKind>,
    pub noise_grid: Vec<NoiseCell>,
    /// Also corrupt the training split (and retrain) for every noise cell.
    pub corrupt_train: bool,
    pub model_params: ModelParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_folds: 5,
            seed: 42,
            pca_components: 0,
            oversample: OversampleConfig::default(),
            oversample_space: OversampleSpace::Scaled,
            fold_internal: true,
            models: ModelKind::ALL.to_vec(),
            noise_grid: Vec::new(),
            corrupt_train: false,
            model_params: ModelParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn grid(kinds: &[ChannelKind], probabilities: &[f64]) -> Vec<NoiseCell> {
        kinds
            .iter()
            .flat_map(|&kind| {
                probabilities.iter().map(move |&probability| NoiseCell { kind, probability })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub model: ModelKind,
    pub phase: Phase,
    /// `None` for clean evaluation.
    pub channel: Option<ChannelKind>,
    pub probability: f64,
    pub fold: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Summary {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub model: ModelKind,
    pub phase: Phase,
    pub channel: Option<ChannelKind>,
    pub probability: f64,
    pub n_folds: usize,
    pub accuracy: Summary,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Ordered by fold, model, phase, then clean before the grid cells.
    pub rows: Vec<ExperimentRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn aggregate(&self, model: ModelKind, phase: Phase, cell: Option<NoiseCell>) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| {
            a.model == model
                && a.phase == phase
                && match cell {
                    None => a.channel.is_none(),
                    Some(c) => a.channel == Some(c.kind) && a.probability == c.probability,
                }
        })
    }
}

/// Means and standard deviations per (model, phase, channel, probability),
/// in first-appearance order.
pub fn aggregate(rows: &[ExperimentRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(ModelKind, Phase, Option<ChannelKind>, f64)> = Vec::new();
    for r in rows {
        let key = (r.model, r.phase, r.channel, r.probability);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(model, phase, channel, probability)| {
            let group: Vec<[f64; 4]> = rows
                .iter()
                .filter(|r| {
                    r.model == model
                        && r.phase == phase
                        && r.channel == channel
                        && r.probability == probability
                })
                .map(|r| r.metrics.values())
                .collect();
            let col = |i: usize| Summary::of(&group.iter().map(|v| v[i]).collect::<Vec<_>>());
            AggregateRow {
                model,
                phase,
                channel,
                probability,
                n_folds: group.len(),
                accuracy: col(0),
                precision: col(1),
                recall: col(2),
                f1: col(3),
            }
        })
        .collect()
}

/// Everything fitted on one training split.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldArtifacts {
    pub pca: Option<PcaModel>,
    pub scaler: ScalerParams,
    /// Min/max of the unscaled training split; used to corrupt features.
    pub bounds: FeatureBounds,
    /// Synthetic data for the `after` phase (`None` when oversampling ran
    /// before splitting).
    pub oversampled: Option<Oversampled>,
    pub train_base: Array2<f64>,
    pub train_y: Vec<usize>,
    pub test_base: Array2<f64>,
    pub test_y: Vec<usize>,
    /// `after`-phase training rows in both spaces.
    pub after_base: Array2<f64>,
    pub after_scaled: Array2<f64>,
    pub after_y: Vec<usize>,
}

fn base_features(pca: Option<&PcaModel>, x: &Array2<f64>) -> Result<Array2<f64>> {
    match pca {
        Some(p) => Ok(p.project(x.view())?),
        None => Ok(x.clone()),
    }
}

/// Rows of `data` to train on and to test on, with the PCA, scaler, bounds
/// and oversampling all fitted on the training rows only.
pub fn prepare_fold(
    data: &LabeledDataset,
    train_idx: &[usize],
    test_idx: &[usize],
    fold: usize,
    config: &ExperimentConfig,
) -> Result<FoldArtifacts> {
    let train = data.subset(train_idx);
    let test = data.subset(test_idx);
    let pca = if config.pca_components > 0 {
        Some(fit_pca(train.x.view(), config.pca_components)?)
    } else {
        None
    };
    let train_base = base_features(pca.as_ref(), &train.x)?;
    let test_base = base_features(pca.as_ref(), &test.x)?;
    let scaler = fit_scaler(train_base.view())?;
    let bounds = FeatureBounds::from_rows(train_base.view());

    let (oversampled, after_base, after_scaled, after_y) = if config.fold_internal {
        let mut os_config = config.oversample.clone();
        os_config.seed = derive_seed(config.seed, &[OVERSAMPLE_TAG, fold as u64]);
        let train_scaled = scaler.transform(train_base.view())?;
        let space = match config.oversample_space {
            OversampleSpace::Scaled => train_scaled.clone(),
            OversampleSpace::Base => train_base.clone(),
        };
        let input = LabeledDataset::new_unchecked_support(space, train.y.clone(), data.n_classes)?;
        let os = oversample_traced(&input, &os_config)?;
        let synthetic = os.data.x.slice(ndarray::s![train.len().., ..]);
        let (syn_base, syn_scaled) = match config.oversample_space {
            OversampleSpace::Scaled => (scaler.inverse_transform(synthetic)?, synthetic.to_owned()),
            OversampleSpace::Base => (synthetic.to_owned(), scaler.transform(synthetic)?),
        };
        let after_base = concatenate(Axis(0), &[train_base.view(), syn_base.view()]).expect("same width");
        let after_scaled =
            concatenate(Axis(0), &[train_scaled.view(), syn_scaled.view()]).expect("same width");
        let after_y = os.data.y.clone();
        (Some(os), after_base, after_scaled, after_y)
    } else {
        let scaled = scaler.transform(train_base.view())?;
        (None, train_base.clone(), scaled, train.y.clone())
    };

    Ok(FoldArtifacts {
        pca,
        scaler,
        bounds,
        oversampled,
        train_base,
        train_y: train.y,
        test_base,
        test_y: test.y,
        after_base,
        after_scaled,
        after_y,
    })
}

struct TrainingSet<'a> {
    base: &'a Array2<f64>,
    scaled: Array2<f64>,
    y: &'a [usize],
}

fn evaluate_fold(
    art: &FoldArtifacts,
    phases: &[(Phase, Option<&FoldArtifacts>)],
    fold: usize,
    n_classes: usize,
    config: &ExperimentConfig,
) -> Result<Vec<ExperimentRow>> {
    let scaler = &art.scaler;
    let test_scaled = scaler.transform(art.test_base.view())?;
    // corrupted test matrices per cell, in both spaces
    let mut corrupted = Vec::with_capacity(config.noise_grid.len());
    for cell in &config.noise_grid {
        let channel = NoiseChannel::new(cell.kind, cell.probability)?;
        let base = corrupt_features(art.test_base.view(), &channel, &art.bounds)?;
        let scaled = scaler.transform(base.view())?;
        corrupted.push((channel, base, scaled));
    }

    let mut rows = Vec::new();
    for &model in &config.models {
        for &(phase, source) in phases {
            let set = match (phase, source) {
                (Phase::Before, _) => TrainingSet {
                    base: &art.train_base,
                    scaled: scaler.transform(art.train_base.view())?,
                    y: &art.train_y,
                },
                (Phase::After, Some(other)) => TrainingSet {
                    base: &other.after_base,
                    scaled: other.after_scaled.clone(),
                    y: &other.after_y,
                },
                (Phase::After, None) => TrainingSet {
                    base: &art.after_base,
                    scaled: art.after_scaled.clone(),
                    y: &art.after_y,
                },
            };
            let (phase_scaler, test_base, test_y) = match source {
                Some(other) => (&other.scaler, &other.test_base, &other.test_y),
                None => (scaler, &art.test_base, &art.test_y),
            };
            let pick = |base: &Array2<f64>, scaled: &Array2<f64>| -> Array2<f64> {
                if model.uses_scaled_features() {
                    scaled.clone()
                } else {
                    base.clone()
                }
            };
            let fit = |x: Array2<f64>| train_with(model, x.view(), set.y, config.seed, &config.model_params);
            let clean_model = fit(pick(set.base, &set.scaled))?;

            let own_test_scaled;
            let clean_test = if source.is_some() {
                own_test_scaled = phase_scaler.transform(test_base.view())?;
                pick(test_base, &own_test_scaled)
            } else {
                pick(test_base, &test_scaled)
            };
            let pred = clean_model.predict(clean_test.view())?;
            rows.push(ExperimentRow {
                model,
                phase,
                channel: None,
                probability: 0.0,
                fold,
                metrics: compute_metrics(test_y, &pred, n_classes)?,
            });

            for (cell, (channel, c_base, c_scaled)) in config.noise_grid.iter().zip(&corrupted) {
                let (c_base, c_scaled) = match source {
                    Some(other) => {
                        let b = corrupt_features(other.test_base.view(), channel, &other.bounds)?;
                        let s = other.scaler.transform(b.view())?;
                        (b, s)
                    }
                    None => (c_base.clone(), c_scaled.clone()),
                };
                let trained = if config.corrupt_train {
                    let bounds = source.map_or(&art.bounds, |o| &o.bounds);
                    let b = corrupt_features(set.base.view(), channel, bounds)?;
                    let s = phase_scaler.transform(b.view())?;
                    Some(fit(pick(&b, &s))?)
                } else {
                    None
                };
                let m = trained.as_ref().unwrap_or(&clean_model);
                let pred = m.predict(pick(&c_base, &c_scaled).view())?;
                rows.push(ExperimentRow {
                    model,
                    phase,
                    channel: Some(cell.kind),
                    probability: cell.probability,
                    fold,
                    metrics: compute_metrics(test_y, &pred, n_classes)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Oversamples the whole dataset up front, in the configured space of a
/// scaler fitted on all rows, and returns it in raw features.
pub fn oversample_full(data: &LabeledDataset, config: &ExperimentConfig) -> Result<LabeledDataset> {
    let mut os_config = config.oversample.clone();
    os_config.seed = derive_seed(config.seed, &[OVERSAMPLE_TAG, u64::MAX]);
    match config.oversample_space {
        OversampleSpace::Base => Ok(oversample_traced(data, &os_config)?.data),
        OversampleSpace::Scaled => {
            let scaler = fit_scaler(data.x.view())?;
            let input = LabeledDataset::new_unchecked_support(
                scaler.transform(data.x.view())?,
                data.y.clone(),
                data.n_classes,
            )?;
            let os = oversample_traced(&input, &os_config)?.data;
            let synthetic = scaler.inverse_transform(os.x.slice(ndarray::s![data.len().., ..]))?;
            let x = concatenate(Axis(0), &[data.x.view(), synthetic.view()]).expect("same width");
            Ok(LabeledDataset::new_unchecked_support(x, os.y, data.n_classes)?)
        }
    }
}

fn validate(data: &LabeledDataset, config: &ExperimentConfig) -> Result<()> {
    if data.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if config.models.is_empty() {
        return Err(EvalError::NoModels);
    }
    for cell in &config.noise_grid {
        NoiseChannel::new(cell.kind, cell.probability)?;
    }
    Ok(())
}

pub fn run_experiment(data: &LabeledDataset, config: &ExperimentConfig) -> Result<ExperimentResult> {
    validate(data, config)?;
    let plan = stratified_kfold(&data.y, config.k_folds, config.seed)?;
    let augmented = if config.fold_internal {
        None
    } else {
        let full = oversample_full(data, config)?;
        let plan = stratified_kfold(&full.y, config.k_folds, config.seed)?;
        Some((full, plan))
    };

    let per_fold: Vec<Vec<ExperimentRow>> = (0..config.k_folds)
        .into_par_iter()
        .map(|fold| {
            let art = prepare_fold(data, &plan.train_indices(fold), &plan.test_indices(fold), fold, config)?;
            match &augmented {
                None => evaluate_fold(
                    &art,
                    &[(Phase::Before, None), (Phase::After, None)],
                    fold,
                    data.n_classes,
                    config,
                ),
                Some((full, full_plan)) => {
                    let other = prepare_fold(
                        full,
                        &full_plan.train_indices(fold),
                        &full_plan.test_indices(fold),
                        fold,
                        config,
                    )?;
                    evaluate_fold(
                        &art,
                        &[(Phase::Before, None), (Phase::After, Some(&other))],
                        fold,
                        data.n_classes,
                        config,
                    )
                }
            }
        })
        .collect::<Result<_>>()?;

    let rows: Vec<ExperimentRow> = per_fold.into_iter().flatten().collect();
    let aggregates = aggregate(&rows);
    Ok(ExperimentResult { rows, aggregates })
}

/// A single stratified train/test split evaluated like one fold (fold index 0).
pub fn run_holdout(data: &LabeledDataset, config: &ExperimentConfig, fraction: f64) -> Result<ExperimentResult> {
    validate(data, config)?;
    let (train, test) = stratified_holdout(&data.y, fraction, config.seed)?;
    let mut cfg = config.clone();
    cfg.fold_internal = true;
    let art = prepare_fold(data, &train, &test, 0, &cfg)?;
    let rows = evaluate_fold(
        &art,
        &[(Phase::Before, None), (Phase::After, None)],
        0,
        data.n_classes,
        &cfg,
    )?;
    let aggregates = aggregate(&rows);
    Ok(ExperimentResult { rows, aggregates })
}
