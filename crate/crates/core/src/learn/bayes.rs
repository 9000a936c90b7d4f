//! Gaussian naive Bayes.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use std::f64::consts::PI;

pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// `k x d`.
    pub means: Array2<f64>,
    /// `k x d`, already smoothed.
    pub variances: Array2<f64>,
    pub log_priors: Array1<f64>,
    pub epsilon: f64,
}

pub fn fit_nb(x: ArrayView2<'_, f64>, y: &[usize], k: usize) -> GaussianNb {
    let (n, d) = x.dim();
    let max_var = x
        .var_axis(Axis(0), 0.0)
        .iter()
        .fold(0.0f64, |m, &v| m.max(v));
    let epsilon = if max_var > 0.0 {
        VAR_SMOOTHING * max_var
    } else {
        VAR_SMOOTHING
    };
    let mut means = Array2::zeros((k, d));
    let mut variances = Array2::zeros((k, d));
    let mut log_priors = Array1::from_elem(k, f64::NEG_INFINITY);
    for c in 0..k {
        let rows: Vec<usize> = (0..n).filter(|&i| y[i] == c).collect();
        if rows.is_empty() {
            variances.row_mut(c).fill(epsilon);
            continue;
        }
        let sub = x.select(Axis(0), &rows);
        means.row_mut(c).assign(&sub.mean_axis(Axis(0)).expect("non-empty"));
        variances
            .row_mut(c)
            .assign(&(sub.var_axis(Axis(0), 0.0) + epsilon));
        log_priors[c] = (rows.len() as f64 / n as f64).ln();
    }
    GaussianNb {
        means,
        variances,
        log_priors,
        epsilon,
    }
}

impl GaussianNb {
    /// Joint log-likelihood `log P(c) + log P(x | c)`, `n x k`.
    pub fn joint_log_likelihood(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let k = self.means.nrows();
        let mut out = Array2::zeros((x.nrows(), k));
        for c in 0..k {
            let mu = self.means.row(c);
            let var = self.variances.row(c);
            let norm: f64 = var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>() * 0.5;
            for (i, row) in x.rows().into_iter().enumerate() {
                let quad: f64 = row
                    .iter()
                    .zip(mu)
                    .zip(var)
                    .map(|((xv, m), v)| (xv - m) * (xv - m) / v)
                    .sum();
                out[[i, c]] = self.log_priors[c] - norm - 0.5 * quad;
            }
        }
        out
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        super::argmax_rows(self.joint_log_likelihood(x).view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn nearer_mean_wins() {
        let x = array![[-0.1], [0.0], [0.1], [9.9], [10.0], [10.1]];
        let m = fit_nb(x.view(), &[0, 0, 0, 1, 1, 1], 2);
        assert_eq!(m.predict(array![[5.1], [4.9]].view()), vec![1, 0]);
    }

    #[test]
    fn constant_data_stays_finite() {
        let x = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        let m = fit_nb(x.view(), &[0, 1, 1], 2);
        assert_eq!(m.epsilon, VAR_SMOOTHING);
        let ll = m.joint_log_likelihood(array![[1.0, 1.0], [3.0, -2.0]].view());
        assert!(ll.iter().all(|v| !v.is_nan()));
    }
}
