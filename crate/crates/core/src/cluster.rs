//! K-means (Lloyd iterations, k-means++ seeding).

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_CLUSTERS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("empty input matrix")]
    EmptyInput,
    #[error("{n} samples cannot form {k} clusters")]
    TooFewSamples { n: usize, k: usize },
    #[error("k must be positive")]
    ZeroClusters,
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ClusterError>;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub k: usize,
    pub centroids: Array2<f64>,
    pub seed: u64,
    pub n_iter_run: usize,
    /// Sum of squared distances to the assigned centroid at the final assignment.
    pub inertia: f64,
    /// Inertia after every assignment step, in order.
    pub inertia_trace: Vec<f64>,
    /// Final assignment of every training row.
    pub labels: Vec<usize>,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid by squared distance; ties go to the lowest index.
fn nearest(centroids: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.axis_iter(Axis(0)).enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(x: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = x
        .axis_iter(Axis(0))
        .map(|row| sq_dist(row, x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just past the final partial sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // every remaining point coincides with a chosen centroid
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, row) in x.axis_iter(Axis(0)).enumerate() {
            d2[i] = d2[i].min(sq_dist(row, x.row(next)));
        }
    }
    let mut centroids = Array2::zeros((k, x.ncols()));
    for (j, &i) in chosen.iter().enumerate() {
        centroids.row_mut(j).assign(&x.row(i));
    }
    centroids
}

pub fn fit_kmeans(
    x: ArrayView2<'_, f64>,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansModel> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return Err(ClusterError::EmptyInput);
    }
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if n < k {
        return Err(ClusterError::TooFewSamples { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0f64; n];
    let mut trace = Vec::new();
    let mut n_iter_run = 0;

    loop {
        for (i, row) in x.axis_iter(Axis(0)).enumerate() {
            let (j, dd) = nearest(centroids.view(), row);
            labels[i] = j;
            dists[i] = dd;
        }
        trace.push(dists.iter().sum());
        if n_iter_run >= max_iter {
            break;
        }
        n_iter_run += 1;

        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for (i, row) in x.axis_iter(Axis(0)).enumerate() {
            let mut s = sums.row_mut(labels[i]);
            s += &row;
            counts[labels[i]] += 1;
        }
        let mut next = centroids.clone();
        let mut taken: Vec<usize> = Vec::new();
        for j in 0..k {
            if counts[j] > 0 {
                let mean = &sums.row(j) / counts[j] as f64;
                next.row_mut(j).assign(&mean);
            } else {
                // empty cluster: move it onto the point farthest from its centroid
                let far = (0..n)
                    .filter(|i| !taken.contains(i))
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("n >= k");
                taken.push(far);
                next.row_mut(j).assign(&x.row(far));
            }
        }
        let shift = next
            .axis_iter(Axis(0))
            .zip(centroids.axis_iter(Axis(0)))
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < tol {
            // one more assignment against the converged centroids
            for (i, row) in x.axis_iter(Axis(0)).enumerate() {
                let (j, dd) = nearest(centroids.view(), row);
                labels[i] = j;
                dists[i] = dd;
            }
            trace.push(dists.iter().sum());
            break;
        }
    }

    Ok(KMeansModel {
        k,
        centroids,
        seed,
        n_iter_run,
        inertia: *trace.last().expect("at least one assignment"),
        inertia_trace: trace,
        labels,
    })
}

impl KMeansModel {
    pub fn dim(&self) -> usize {
        self.centroids.ncols()
    }

    pub fn centroid(&self, j: usize) -> ArrayView1<'_, f64> {
        self.centroids.row(j)
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(ClusterError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(nearest(self.centroids.view(), x).0)
    }
}

pub fn predict_cluster(model: &KMeansModel, x: ArrayView1<'_, f64>) -> Result<usize> {
    model.predict(x)
}
