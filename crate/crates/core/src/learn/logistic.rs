//! Multinomial (softmax) logistic regression with an L2 penalty,
//! optimized by L-BFGS with a backtracking Armijo line search.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    /// Inverse regularization strength; the penalty is `||W||^2 / (2 C n)`.
    pub c: f64,
    pub max_iter: usize,
    /// Stop once the max-norm of the gradient falls below this.
    pub grad_tol: f64,
    pub memory: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 500,
            grad_tol: 1e-6,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// `k x d`.
    pub weights: Array2<f64>,
    pub intercept: Array1<f64>,
    pub n_iter: usize,
    /// Objective value at every accepted iterate, starting from zero weights.
    pub loss_trace: Vec<f64>,
}

/// Parameter layout: `W` row-major (`k x d`) followed by the `k` intercepts.
pub fn unpack(theta: &[f64], k: usize, d: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
    let w = ArrayView2::from_shape((k, d), &theta[..k * d]).expect("layout");
    let b = ArrayView1::from(&theta[k * d..k * d + k]);
    (w, b)
}

/// Mean cross-entropy plus `l2/2 ||W||^2`, and its gradient.
pub fn loss_and_gradient(
    theta: &[f64],
    x: ArrayView2<'_, f64>,
    y: &[usize],
    k: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let (n, d) = x.dim();
    let (w, b) = unpack(theta, k, d);
    let mut scores = x.dot(&w.t()) + b;
    let mut loss = 0.0;
    for (i, mut row) in scores.axis_iter_mut(Axis(0)).enumerate() {
        let max = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[y[i]];
        row.mapv_inplace(|v| (v - lse).exp());
        row[y[i]] -= 1.0;
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();

    // scores now holds p - onehot
    let gw = scores.t().dot(&x) * inv_n + &(&w * l2);
    let gb = scores.sum_axis(Axis(0)) * inv_n;
    let mut grad = Vec::with_capacity(theta.len());
    grad.extend(gw.iter().copied());
    grad.extend(gb.iter().copied());
    (loss, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn fit_logistic(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    k: usize,
    params: &LogisticParams,
) -> LogisticModel {
    let (n, d) = x.dim();
    let l2 = 1.0 / (params.c * n as f64);
    let dim = k * (d + 1);
    let mut theta = vec![0.0; dim];
    let (mut loss, mut grad) = loss_and_gradient(&theta, x, y, k, l2);
    let mut trace = vec![loss];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut n_iter = 0;

    while n_iter < params.max_iter {
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < params.grad_tol {
            break;
        }
        // two-loop recursion
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let bta = rho * dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - bta) * si);
        }
        let mut direction: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &direction);
        if !(slope < 0.0) {
            history.clear();
            direction = grad.iter().map(|v| -v).collect();
            slope = dot(&grad, &direction);
        }

        let mut step = if history.is_empty() {
            1.0 / grad.iter().map(|g| g.abs()).fold(1.0, f64::max)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(&direction)
                .map(|(t, p)| t + step * p)
                .collect();
            let (cl, cg) = loss_and_gradient(&cand, x, y, k, l2);
            if cl <= loss + 1e-4 * step * slope && cl < loss {
                accepted = Some((cand, cl, cg));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cl, cg)) = accepted else {
            break;
        };
        let s: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = cg.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 {
            if history.len() == params.memory {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        theta = cand;
        loss = cl;
        grad = cg;
        trace.push(loss);
        n_iter += 1;
    }

    let (w, b) = unpack(&theta, k, d);
    LogisticModel {
        weights: w.to_owned(),
        intercept: b.to_owned(),
        n_iter,
        loss_trace: trace,
    }
}

impl LogisticModel {
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + &self.intercept
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        super::argmax_rows(self.decision_function(x).view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs() -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let nd = Normal::new(0.0, 0.5).unwrap();
        let mut x = Array2::zeros((40, 2));
        let mut y = Vec::new();
        for i in 0..40 {
            let c = i % 2;
            let center = if c == 0 { -2.0 } else { 2.0 };
            x[[i, 0]] = center + nd.sample(&mut rng);
            x[[i, 1]] = center + nd.sample(&mut rng);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_fit_perfectly() {
        let (x, y) = blobs();
        let m = fit_logistic(x.view(), &y, 2, &LogisticParams::default());
        assert_eq!(m.predict(x.view()), y);
        for w in m.loss_trace.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nd = Normal::new(0.0, 1.0).unwrap();
        let x = Array2::from_shape_fn((20, 3), |_| nd.sample(&mut rng));
        let y: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let theta: Vec<f64> = (0..12).map(|_| 0.3 * nd.sample(&mut rng)).collect();
        let l2 = 0.05;
        let (_, g) = loss_and_gradient(&theta, x.view(), &y, 3, l2);
        let h = 1e-6;
        for i in 0..theta.len() {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[i] += h;
            tm[i] -= h;
            let fd = (loss_and_gradient(&tp, x.view(), &y, 3, l2).0
                - loss_and_gradient(&tm, x.view(), &y, 3, l2).0)
                / (2.0 * h);
            let rel = (fd - g[i]).abs() / g[i].abs().max(1e-8);
            assert!(rel < 1e-4, "component {i}: fd {fd} analytic {}", g[i]);
        }
    }

    #[test]
    fn iteration_cap_is_respected() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = vec![0, 0, 1, 1];
        let params = LogisticParams {
            max_iter: 3,
            ..Default::default()
        };
        let m = fit_logistic(x.view(), &y, 2, &params);
        assert!(m.n_iter <= 3);
    }
}
