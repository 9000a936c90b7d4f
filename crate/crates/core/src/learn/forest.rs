//! Random forest: bootstrap-sampled CART trees with per-split feature
//! subsampling and a majority vote.

use super::tree::{tree_rng, DecisionTree, MaxFeatures, TreeParams};
use crate::seeding::substream;
use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;

const BOOTSTRAP_TAG: u64 = 0xb007;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
}

impl RandomForest {
    pub fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        k: usize,
        params: &ForestParams,
        seed: u64,
    ) -> RandomForest {
        let n = x.nrows();
        let tree_params = TreeParams {
            max_features: params.max_features,
            min_samples_split: params.min_samples_split,
            max_depth: params.max_depth,
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let rows: Vec<usize> = if params.bootstrap {
                    let mut rng = substream(seed, &[BOOTSTRAP_TAG, t as u64]);
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut rng = tree_rng(seed, t as u64);
                DecisionTree::fit_rows(x, y, k, rows, &tree_params, &mut rng)
            })
            .collect();
        RandomForest { trees, n_classes: k }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|row| {
                let mut votes = vec![0usize; self.n_classes];
                for t in &self.trees {
                    votes[t.predict_row(row)] += 1;
                }
                let mut best = 0;
                for c in 1..votes.len() {
                    if votes[c] > votes[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn data() -> (Array2<f64>, Vec<usize>) {
        let x = Array2::from_shape_fn((60, 4), |(i, j)| {
            (((i * 31 + j * 17) % 23) as f64) * 0.1 + if i % 3 == 0 { 2.0 } else { 0.0 }
        });
        let y = (0..60).map(|i| usize::from(i % 3 == 0)).collect();
        (x, y)
    }

    #[test]
    fn single_full_tree_equals_decision_tree() {
        let (x, y) = data();
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: MaxFeatures::All,
            ..Default::default()
        };
        for seed in [0, 7, 42] {
            let f = RandomForest::fit(x.view(), &y, 2, &params, seed);
            let t = DecisionTree::fit(x.view(), &y, 2, &TreeParams::default(), seed);
            assert_eq!(f.trees[0], t);
            assert_eq!(f.predict(x.view()), t.predict(x.view()));
        }
    }

    #[test]
    fn deterministic_under_parallelism() {
        let (x, y) = data();
        let params = ForestParams {
            n_trees: 25,
            ..Default::default()
        };
        let a = RandomForest::fit(x.view(), &y, 2, &params, 3);
        let b = RandomForest::fit(x.view(), &y, 2, &params, 3);
        assert_eq!(a, b);
        assert_eq!(a.predict(x.view()), y);
    }
}
