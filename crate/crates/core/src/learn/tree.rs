//! CART classification tree (Gini impurity, grown to purity by default).

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().floor() as usize,
            MaxFeatures::Count(c) => c,
        };
        m.clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_features: MaxFeatures::All,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_classes: usize,
}

/// Split-selection stream for a tree: stream `index` of the seed.
pub fn tree_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Best split of `rows` on one feature. The score is
/// `Σ_c l_c²/n_l + Σ_c r_c²/n_r`, which is maximal where the weighted
/// child Gini impurity is minimal. `None` if the feature is constant.
fn best_split_on(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    rows: &[usize],
    feature: usize,
    k: usize,
    parent: &[usize],
) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, usize)> = rows.iter().map(|&i| (x[[i, feature]], y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pairs[0].0 == pairs[pairs.len() - 1].0 {
        return None;
    }
    let n = pairs.len();
    let mut left = vec![0usize; k];
    let mut right = parent.to_vec();
    let (mut sq_left, mut sq_right) = (0.0f64, right.iter().map(|&c| (c * c) as f64).sum::<f64>());
    let mut best: Option<(f64, f64)> = None;
    for i in 1..n {
        let c = pairs[i - 1].1;
        sq_left += (2 * left[c] + 1) as f64;
        sq_right -= (2 * right[c] - 1) as f64;
        left[c] += 1;
        right[c] -= 1;
        let (lo, hi) = (pairs[i - 1].0, pairs[i].0);
        if lo == hi {
            continue;
        }
        let score = sq_left / i as f64 + sq_right / (n - i) as f64;
        if best.is_none_or(|(s, _)| score > s) {
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            best = Some((score, threshold));
        }
    }
    best
}

impl DecisionTree {
    /// Grows a tree on `rows` (which may repeat, for bootstrap samples).
    pub fn fit_rows(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        k: usize,
        rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut ChaCha8Rng,
    ) -> DecisionTree {
        let d = x.ncols();
        let max_features = params.max_features.resolve(d);
        let mut nodes: Vec<Node> = Vec::new();
        // (node slot, rows, depth)
        let mut stack = vec![(0usize, rows, 0usize)];
        nodes.push(Node::Leaf { class: 0 });
        let mut order: Vec<usize> = (0..d).collect();

        while let Some((slot, rows, depth)) = stack.pop() {
            let mut counts = vec![0usize; k];
            for &i in &rows {
                counts[y[i]] += 1;
            }
            let leaf = majority(&counts);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
            if pure || rows.len() < params.min_samples_split || depth_capped {
                nodes[slot] = Node::Leaf { class: leaf };
                continue;
            }

            order.shuffle(rng);
            let mut best: Option<SplitChoice> = None;
            let mut visited = 0;
            for &f in &order {
                if visited >= max_features {
                    break;
                }
                if let Some((score, threshold)) = best_split_on(x, y, &rows, f, k, &counts) {
                    visited += 1;
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        best = Some(SplitChoice {
                            feature: f,
                            threshold,
                            score,
                        });
                    }
                }
            }
            let Some(split) = best else {
                nodes[slot] = Node::Leaf { class: leaf };
                continue;
            };
            let (l_rows, r_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| x[[i, split.feature]] <= split.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { class: leaf });
            let right = nodes.len();
            nodes.push(Node::Leaf { class: leaf });
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            // right first so the left subtree is expanded first
            stack.push((right, r_rows, depth + 1));
            stack.push((left, l_rows, depth + 1));
        }
        DecisionTree { nodes, n_classes: k }
    }

    pub fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        k: usize,
        params: &TreeParams,
        seed: u64,
    ) -> DecisionTree {
        let mut rng = tree_rng(seed, 0);
        Self::fit_rows(x, y, k, (0..x.nrows()).collect(), params, &mut rng)
    }

    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        x.rows().into_iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn xor_is_learned() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = vec![0, 1, 1, 0];
        for seed in 0..5 {
            let t = DecisionTree::fit(x.view(), &y, 2, &TreeParams::default(), seed);
            assert_eq!(t.predict(x.view()), y);
            assert_eq!(t.depth(), 2);
        }
    }

    #[test]
    fn duplicate_points_with_conflicting_labels() {
        let x = array![[1.0], [1.0], [1.0], [2.0]];
        let y = vec![1, 0, 1, 0];
        let t = DecisionTree::fit(x.view(), &y, 2, &TreeParams::default(), 0);
        assert_eq!(t.predict(array![[1.0], [2.0]].view()), vec![1, 0]);
    }

    #[test]
    fn majority_ties_go_low() {
        assert_eq!(majority(&[2, 2, 1]), 0);
        assert_eq!(majority(&[0, 3, 3]), 1);
    }

    #[test]
    fn threshold_midpoint() {
        let x = array![[0.0], [1.0]];
        let t = DecisionTree::fit(x.view(), &[0, 1], 2, &TreeParams::default(), 0);
        match &t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 0.5),
            n => panic!("{n:?}"),
        }
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(32), 5);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
        assert_eq!(MaxFeatures::Count(50).resolve(7), 7);
    }

    #[test]
    fn training_rows_are_recovered() {
        let x = Array2::from_shape_fn((30, 3), |(i, j)| ((i * 7 + j * 13) % 31) as f64);
        let y: Vec<usize> = (0..30).map(|i| (i * 5) % 3).collect();
        let t = DecisionTree::fit(x.view(), &y, 3, &TreeParams::default(), 42);
        assert_eq!(t.predict(x.view()), y);
    }
}
