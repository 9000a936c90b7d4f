//! Labeled feature matrices and class bookkeeping.

use ndarray::{Array2, ArrayView2, Axis};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("feature matrix has {rows} rows but there are {labels} labels")]
    RowCountMismatch { rows: usize, labels: usize },
    #[error("label {label} is outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("class {0} has no samples")]
    MissingClass(usize),
}

/// Feature matrix `x` (one row per sample) with labels in `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl LabeledDataset {
    /// Builds a dataset; every label in `0..n_classes` must appear.
    pub fn new(x: Array2<f64>, y: Vec<usize>, n_classes: usize) -> Result<Self, DatasetError> {
        let ds = Self::new_unchecked_support(x, y, n_classes)?;
        let counts = ds.class_counts();
        if let Some((&label, _)) = counts.per_label.iter().find(|(_, &c)| c == 0) {
            return Err(DatasetError::MissingClass(label));
        }
        Ok(ds)
    }

    /// Like [`LabeledDataset::new`] but tolerates classes with no rows
    /// (training folds may miss rare classes).
    pub fn new_unchecked_support(
        x: Array2<f64>,
        y: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self, DatasetError> {
        if x.nrows() != y.len() {
            return Err(DatasetError::RowCountMismatch {
                rows: x.nrows(),
                labels: y.len(),
            });
        }
        if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
            return Err(DatasetError::LabelOutOfRange { label, n_classes });
        }
        Ok(Self { x, y, n_classes })
    }

    /// Labels are taken as `0..=max(y)`.
    pub fn from_labels(x: Array2<f64>, y: Vec<usize>) -> Result<Self, DatasetError> {
        let n_classes = y.iter().max().map_or(0, |m| m + 1);
        Self::new(x, y, n_classes)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::from_labels(&self.y, self.n_classes)
    }

    /// Rows `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select(Axis(0), idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    pub fn rows_of(&self, label: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.y[i] == label).collect()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }
}

/// Per-label sample counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCounts {
    pub per_label: BTreeMap<usize, usize>,
    pub majority_count: usize,
}

impl ClassCounts {
    pub fn from_labels(y: &[usize], n_classes: usize) -> ClassCounts {
        let mut per_label: BTreeMap<usize, usize> = (0..n_classes).map(|l| (l, 0)).collect();
        for &l in y {
            *per_label.entry(l).or_insert(0) += 1;
        }
        ClassCounts::from_map(per_label)
    }

    pub fn from_map(per_label: BTreeMap<usize, usize>) -> ClassCounts {
        let majority_count = per_label.values().copied().max().unwrap_or(0);
        ClassCounts {
            per_label,
            majority_count,
        }
    }

    pub fn get(&self, label: usize) -> Option<usize> {
        self.per_label.get(&label).copied()
    }

    /// Labels with strictly fewer rows than the majority class.
    pub fn minority_labels(&self) -> Vec<usize> {
        self.per_label
            .iter()
            .filter(|(_, &c)| c < self.majority_count)
            .map(|(&l, _)| l)
            .collect()
    }
}
