//! RBF-kernel C-SVM trained in the dual by SMO with second-order working
//! set selection. Multiclass problems use one-vs-rest machines that share
//! one precomputed kernel matrix.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// `None` selects `1 / (d * Var(X))` over all entries of the training matrix.
    pub gamma: Option<f64>,
    /// Stopping tolerance on the maximal KKT violation.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            eps: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

pub fn scale_gamma(x: ArrayView2<'_, f64>) -> f64 {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0
    }
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

pub fn rbf_matrix(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, gamma: f64) -> Array2<f64> {
    let rows: Vec<Vec<f64>> = (0..a.nrows())
        .into_par_iter()
        .map(|i| {
            b.rows()
                .into_iter()
                .map(|bj| (-gamma * sq_dist(a.row(i), bj)).exp())
                .collect()
        })
        .collect();
    Array2::from_shape_vec((a.nrows(), b.nrows()), rows.concat()).expect("shape")
}

/// Solution of one binary dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Signs of the training targets, `+1.0` or `-1.0`.
    pub y: Vec<f64>,
    pub rho: f64,
    pub n_iter: usize,
    /// Dual objective `e'a - a'Qa/2` after every update, starting at 0.
    pub dual_trace: Vec<f64>,
}

impl BinarySolution {
    pub fn dual_objective(&self) -> f64 {
        *self.dual_trace.last().expect("trace starts non-empty")
    }

    /// Decision values from a precomputed `test x train` kernel block.
    pub fn decision(&self, k: ArrayView2<'_, f64>) -> Vec<f64> {
        k.rows()
            .into_iter()
            .map(|row| {
                let mut s = 0.0;
                for (i, kv) in row.iter().enumerate() {
                    if self.alpha[i] != 0.0 {
                        s += self.alpha[i] * self.y[i] * kv;
                    }
                }
                s - self.rho
            })
            .collect()
    }
}

/// Solves `min a'Qa/2 - e'a` subject to `0 <= a <= C`, `y'a = 0`, where
/// `Q_ij = y_i y_j K_ij`.
pub fn solve_binary(kernel: ArrayView2<'_, f64>, y: &[f64], params: &SvmParams) -> BinarySolution {
    let n = y.len();
    let c = params.c;
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[[i, j]];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let objective = |alpha: &[f64], grad: &[f64]| -> f64 {
        // f = a'(G - e)/2, reported as the maximization form -f
        -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
    };
    let mut trace = vec![0.0];
    let mut n_iter = 0;

    while n_iter < params.max_iter {
        let is_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
        let is_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if is_up(t, &alpha) {
                let v = -y[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else { break };

        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            if !is_low(t, &alpha) {
                continue;
            }
            let v = y[t] * grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let diff = gmax + v;
            if diff > 0.0 {
                let mut quad = kernel[[i, i]] + kernel[[t, t]] - 2.0 * kernel[[i, t]];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(diff * diff) / quad;
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else { break };
        if gmax + gmax2 < params.eps {
            break;
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = kernel[[i, i]] + kernel[[j, j]] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kernel[[i, i]] + kernel[[j, j]] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        n_iter += 1;
        trace.push(objective(&alpha, &grad));
    }

    // offset from free vectors, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };

    BinarySolution {
        alpha,
        y: y.to_vec(),
        rho,
        n_iter,
        dual_trace: trace,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support: Array2<f64>,
    pub gamma: f64,
    /// One machine for two classes (positive = class 1), else one per class.
    pub machines: Vec<BinarySolution>,
    pub n_classes: usize,
}

pub fn fit_svm(x: ArrayView2<'_, f64>, y: &[usize], k: usize, params: &SvmParams) -> SvmModel {
    let gamma = params.gamma.unwrap_or_else(|| scale_gamma(x));
    let kernel = rbf_matrix(x, x, gamma);
    let targets = |positive: usize| -> Vec<f64> {
        y.iter()
            .map(|&l| if l == positive { 1.0 } else { -1.0 })
            .collect()
    };
    let machines = if k == 2 {
        vec![solve_binary(kernel.view(), &targets(1), params)]
    } else {
        (0..k)
            .into_par_iter()
            .map(|c| solve_binary(kernel.view(), &targets(c), params))
            .collect()
    };
    SvmModel {
        support: x.to_owned(),
        gamma,
        machines,
        n_classes: k,
    }
}

impl SvmModel {
    /// `n x machines` decision values.
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let kx = rbf_matrix(x, self.support.view(), self.gamma);
        let mut out = Array2::zeros((x.nrows(), self.machines.len()));
        for (m, machine) in self.machines.iter().enumerate() {
            for (i, v) in machine.decision(kx.view()).into_iter().enumerate() {
                out[[i, m]] = v;
            }
        }
        out
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        let d = self.decision_function(x);
        if self.machines.len() == 1 {
            d.column(0).iter().map(|&v| usize::from(v > 0.0)).collect()
        } else {
            super::argmax_rows(d.view())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ten_points() -> (Array2<f64>, Vec<usize>) {
        let x = array![
            [0.0, 0.1],
            [0.3, -0.2],
            [-0.4, 0.2],
            [0.2, 0.5],
            [-0.1, -0.3],
            [2.0, 2.1],
            [1.7, 2.4],
            [2.3, 1.8],
            [1.9, 1.6],
            [0.9, 1.1]
        ];
        (x, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    }

    #[test]
    fn separates_ten_points() {
        let (x, y) = ten_points();
        let m = fit_svm(x.view(), &y, 2, &SvmParams::default());
        assert_eq!(m.predict(x.view()), y);
    }

    #[test]
    fn box_constraints_and_equality() {
        let (x, y) = ten_points();
        let params = SvmParams::default();
        let m = fit_svm(x.view(), &y, 2, &params);
        let s = &m.machines[0];
        for &a in &s.alpha {
            assert!(a >= -1e-9 && a <= params.c + 1e-9);
        }
        let balance: f64 = s.alpha.iter().zip(&s.y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-9);
    }

    #[test]
    fn gamma_scale_rule() {
        let x = array![[0.0, 2.0], [2.0, 0.0]];
        // entries {0,2,2,0}: variance 1, d = 2
        assert_eq!(scale_gamma(x.view()), 0.5);
        assert_eq!(scale_gamma(array![[1.0, 1.0]].view()), 1.0);
    }
}
