//! Principal component analysis through a dense symmetric eigensolve of
//! the sample covariance matrix (divisor `n - 1`).

use super::{LearnError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// `r x d`, orthonormal rows sorted by explained variance.
    pub components: Array2<f64>,
    pub explained_variance: Array1<f64>,
    pub mean: Array1<f64>,
    /// Trace of the covariance matrix.
    pub total_variance: f64,
}

/// Sample covariance of the column-centered data.
pub fn covariance(x: ArrayView2<'_, f64>) -> (Array1<f64>, Array2<f64>) {
    let n = x.nrows();
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let centered = &x - &mean;
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    (mean, centered.t().dot(&centered) / denom)
}

pub fn fit_pca(x: ArrayView2<'_, f64>, r: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return Err(LearnError::EmptyInput);
    }
    if r == 0 || r > n.min(d) {
        return Err(LearnError::RankTooHigh { rank: r, max: n.min(d) });
    }
    let (mean, cov) = covariance(x);
    let eig = SymmetricEigen::new(DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Array2::zeros((r, d));
    let mut explained_variance = Array1::zeros(r);
    for (k, &idx) in order.iter().take(r).enumerate() {
        let v = eig.eigenvectors.column(idx);
        // sign convention: the largest-magnitude loading is positive
        let pivot = (0..d)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .expect("d > 0");
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[[k, j]] = sign * v[j];
        }
        explained_variance[k] = eig.eigenvalues[idx].max(0.0);
    }
    Ok(PcaModel {
        components,
        explained_variance,
        mean,
        total_variance: cov.diag().sum(),
    })
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn project(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.ncols(),
            });
        }
        Ok((&x - &self.mean).dot(&self.components.t()))
    }

    pub fn reconstruct(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if z.ncols() != self.n_components() {
            return Err(LearnError::DimensionMismatch {
                expected: self.n_components(),
                got: z.ncols(),
            });
        }
        Ok(z.dot(&self.components) + &self.mean)
    }

    pub fn explained_variance_ratio(&self) -> Array1<f64> {
        if self.total_variance > 0.0 {
            &self.explained_variance / self.total_variance
        } else {
            Array1::zeros(self.n_components())
        }
    }
}
