use super::{EvalError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

/// Shuffles each class with the seed, then deals its members to folds in
/// turn. The dealing position carries over from one class to the next so
/// fold sizes stay balanced overall.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(EvalError::InvalidFoldCount(k));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in y.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((&label, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(EvalError::ClassTooSmall {
            label,
            count: members.len(),
            k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; y.len()];
    let mut deal = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = deal % k;
            deal += 1;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    /// `counts[fold][label]`.
    pub fn class_fold_counts(&self, y: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; n_classes]; self.k];
        for (&f, &l) in self.assignments.iter().zip(y) {
            counts[f][l] += 1;
        }
        counts
    }
}

/// Stratified single split: about `fraction` of every class goes to the
/// test side, at least one sample per class on each side.
pub fn stratified_holdout(y: &[usize], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::InvalidHoldout(fraction));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in y.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (&label, members) in by_class.iter_mut() {
        if members.len() < 2 {
            return Err(EvalError::ClassTooSmall {
                label,
                count: members.len(),
                k: 2,
            });
        }
        members.shuffle(&mut rng);
        let n_test = ((members.len() as f64 * fraction).round() as usize).clamp(1, members.len() - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
