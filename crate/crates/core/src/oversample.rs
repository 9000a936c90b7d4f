//! Quantum-inspired minority oversampling.
//!
//! K-means is fitted once on the full feature matrix. Every synthetic row
//! starts from a minority seed `x` drawn with replacement, looks up its
//! nearest centroid `c`, estimates the angle `α` between `x` and `c` with
//! the compact swap test, draws a step `r ~ U(0, α/κ)` and moves `x` by `r`
//! along the unit direction towards `c`.
//!
//! Each synthesis draws from its own stream keyed by
//! `(seed, label, synthesis index)`, so the output does not depend on how
//! the work is scheduled.

use crate::cluster::{self, ClusterError, KMeansModel};
use crate::dataset::{ClassCounts, LabeledDataset};
use crate::seeding::substream;
use crate::swaptest::{self, SwapTestError};
use ndarray::{Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

pub const DEFAULT_SPLIT_FACTOR: f64 = 5.0;

/// Seeds closer than this to their centroid are treated as sitting on it.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OversampleError {
    #[error("minority label {0} is not a known class")]
    UnknownLabel(usize),
    #[error("minority label {0} has no samples")]
    MinorityLabelEmpty(usize),
    #[error("split factor must be positive and finite, got {0}")]
    InvalidSplitFactor(f64),
    #[error("vectors differ in dimension: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    SwapTest(#[from] SwapTestError),
}

pub type Result<T> = std::result::Result<T, OversampleError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinoritySelection {
    /// Every class smaller than the majority class.
    Auto,
    Labels(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OversampleConfig {
    pub minority_labels: MinoritySelection,
    pub clusters: usize,
    /// κ: the step is drawn from `U(0, angle / split_factor)`.
    pub split_factor: f64,
    /// Swap-test shots per angle; `0` uses the exact overlap.
    pub shots: u64,
    pub seed: u64,
    /// Cap the step at the distance to the centroid.
    pub clamp_to_centroid: bool,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        Self {
            minority_labels: MinoritySelection::Auto,
            clusters: cluster::DEFAULT_CLUSTERS,
            split_factor: DEFAULT_SPLIT_FACTOR,
            shots: swaptest::DEFAULT_SHOTS,
            seed: 42,
            clamp_to_centroid: false,
            kmeans_max_iter: cluster::DEFAULT_MAX_ITER,
            kmeans_tol: cluster::DEFAULT_TOL,
        }
    }
}

/// One generated row and how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisRecord {
    pub label: usize,
    /// Row index in the oversampled output.
    pub output_row: usize,
    /// Row index of the seed sample in the input.
    pub seed_row: usize,
    pub cluster: usize,
    pub angle: f64,
    /// Step actually taken (after the optional clamp).
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oversampled {
    pub data: LabeledDataset,
    pub trace: Vec<SynthesisRecord>,
    /// `None` when no class needed synthetic rows.
    pub kmeans: Option<KMeansModel>,
}

/// Synthetic rows needed per minority label to reach the majority count.
/// Labels that need nothing are left out.
pub fn compute_needs(
    counts: &ClassCounts,
    minority_labels: &[usize],
) -> Result<BTreeMap<usize, usize>> {
    let mut needs = BTreeMap::new();
    for &label in minority_labels {
        let n = counts
            .get(label)
            .ok_or(OversampleError::UnknownLabel(label))?;
        let need = counts.majority_count - n;
        if need > 0 {
            needs.insert(label, need);
        }
    }
    Ok(needs)
}

fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Moves `x` by `step` towards `centroid`.
///
/// When `x` sits on the centroid a uniformly random unit direction is used.
/// With `clamp`, the step is first capped at `|centroid - x|`.
/// Returns the new point and the step actually taken.
pub fn step_toward<R: Rng + ?Sized>(
    x: &[f64],
    centroid: &[f64],
    step: f64,
    clamp: bool,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    if x.len() != centroid.len() {
        return Err(OversampleError::DimensionMismatch(x.len(), centroid.len()));
    }
    let diff: Vec<f64> = centroid.iter().zip(x).map(|(c, v)| c - v).collect();
    let dist = diff.iter().map(|a| a * a).sum::<f64>().sqrt();
    let direction = if dist < DEGENERATE_DISTANCE {
        random_unit(x.len(), rng)
    } else {
        diff.iter().map(|a| a / dist).collect()
    };
    let step = if clamp { step.min(dist) } else { step };
    let out = x
        .iter()
        .zip(&direction)
        .map(|(v, d)| v + step * d)
        .collect();
    Ok((out, step))
}

/// One synthetic sample: `r ~ U(0, angle / split_factor)`, then
/// [`step_toward`]. Returns the sample and `r` after clamping.
pub fn synthesize_one<R: Rng + ?Sized>(
    x: &[f64],
    centroid: &[f64],
    angle: f64,
    split_factor: f64,
    rng: &mut R,
    clamp: bool,
) -> Result<(Vec<f64>, f64)> {
    if !(split_factor > 0.0 && split_factor.is_finite()) {
        return Err(OversampleError::InvalidSplitFactor(split_factor));
    }
    let r = rng.random::<f64>() * (angle / split_factor);
    step_toward(x, centroid, r, clamp, rng)
}

/// Angle between a seed and its centroid, with the degenerate cases
/// resolved: a seed on its centroid gets `0`, and a zero vector on either
/// side (where the overlap is undefined) gets `π/2`.
pub fn seed_angle<R: Rng + ?Sized>(
    x: ArrayView1<'_, f64>,
    centroid: ArrayView1<'_, f64>,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    let dist = x
        .iter()
        .zip(centroid.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if dist < DEGENERATE_DISTANCE {
        return Ok(0.0);
    }
    let xs = x.to_vec();
    let cs = centroid.to_vec();
    match swaptest::estimate(&xs, &cs, shots, rng) {
        Ok(est) => Ok(est.angle),
        Err(SwapTestError::ZeroNormVector) => Ok(FRAC_PI_2),
        Err(e) => Err(e.into()),
    }
}

fn resolve_minorities(config: &OversampleConfig, counts: &ClassCounts) -> Result<Vec<usize>> {
    let labels = match &config.minority_labels {
        MinoritySelection::Auto => counts.minority_labels(),
        MinoritySelection::Labels(ls) => {
            let mut ls = ls.clone();
            ls.sort_unstable();
            ls.dedup();
            ls
        }
    };
    for &l in &labels {
        match counts.get(l) {
            None => return Err(OversampleError::UnknownLabel(l)),
            Some(0) => return Err(OversampleError::MinorityLabelEmpty(l)),
            Some(_) => {}
        }
    }
    Ok(labels)
}

/// Balances `data` and keeps a record of every synthesis.
pub fn oversample_traced(data: &LabeledDataset, config: &OversampleConfig) -> Result<Oversampled> {
    if !(config.split_factor > 0.0 && config.split_factor.is_finite()) {
        return Err(OversampleError::InvalidSplitFactor(config.split_factor));
    }
    let counts = data.class_counts();
    let minorities = resolve_minorities(config, &counts)?;
    let needs = compute_needs(&counts, &minorities)?;
    if needs.is_empty() {
        return Ok(Oversampled {
            data: data.clone(),
            trace: Vec::new(),
            kmeans: None,
        });
    }

    let kmeans = cluster::fit_kmeans(
        data.x.view(),
        config.clusters,
        config.seed,
        config.kmeans_max_iter,
        config.kmeans_tol,
    )?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut trace = Vec::new();
    for (&label, &need) in &needs {
        let members = data.rows_of(label);
        let generated: Vec<(Vec<f64>, SynthesisRecord)> = (0..need)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(config.seed, &[label as u64, i as u64]);
                let seed_row = members[rng.random_range(0..members.len())];
                let x = data.x.row(seed_row);
                let cluster = kmeans.predict(x)?;
                let centroid = kmeans.centroid(cluster);
                let angle = seed_angle(x, centroid, config.shots, &mut rng)?;
                let (row, step) = synthesize_one(
                    &x.to_vec(),
                    &centroid.to_vec(),
                    angle,
                    config.split_factor,
                    &mut rng,
                    config.clamp_to_centroid,
                )?;
                Ok((
                    row,
                    SynthesisRecord {
                        label,
                        output_row: 0,
                        seed_row,
                        cluster,
                        angle,
                        step,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        for (row, mut record) in generated {
            record.output_row = data.len() + rows.len();
            rows.push(row);
            labels.push(label);
            trace.push(record);
        }
    }

    let d = data.n_features();
    let mut x = Array2::zeros((data.len() + rows.len(), d));
    x.slice_mut(ndarray::s![..data.len(), ..]).assign(&data.x);
    for (i, row) in rows.iter().enumerate() {
        x.row_mut(data.len() + i)
            .assign(&ArrayView1::from(row.as_slice()));
    }
    let mut y = data.y.clone();
    y.extend(labels);
    debug_assert_eq!(x.len_of(Axis(0)), y.len());
    Ok(Oversampled {
        data: LabeledDataset {
            x,
            y,
            n_classes: data.n_classes,
        },
        trace,
        kmeans: Some(kmeans),
    })
}

/// Balances `data`: originals first in input order, synthetic rows appended.
pub fn oversample(data: &LabeledDataset, config: &OversampleConfig) -> Result<LabeledDataset> {
    oversample_traced(data, config).map(|o| o.data)
}
