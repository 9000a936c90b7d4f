use super::{EvalError, Result};

/// Accuracy and support-weighted precision, recall and F1. A ratio with a
/// zero denominator counts as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    /// True-label count per class.
    pub support: Vec<usize>,
}

impl MetricsReport {
    /// `[accuracy, precision, recall, f1]`.
    pub fn values(&self) -> [f64; 4] {
        [
            self.accuracy,
            self.precision_weighted,
            self.recall_weighted,
            self.f1_weighted,
        ]
    }
}

/// `m[true][predicted]`.
pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for l in [t, p] {
            if l >= n_classes {
                return Err(EvalError::LabelOutOfRange { label: l, n_classes });
            }
        }
        m[t][p] += 1;
    }
    Ok(m)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<MetricsReport> {
    let m = confusion_matrix(y_true, y_pred, n_classes)?;
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = y_true.len();
    let support: Vec<usize> = m.iter().map(|row| row.iter().sum()).collect();
    let predicted: Vec<usize> = (0..n_classes).map(|c| m.iter().map(|row| row[c]).sum()).collect();
    let correct: usize = (0..n_classes).map(|c| m[c][c]).sum();

    let (mut p_w, mut r_w, mut f_w) = (0.0, 0.0, 0.0);
    for c in 0..n_classes {
        let tp = m[c][c];
        let p = ratio(tp, predicted[c]);
        let r = ratio(tp, support[c]);
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = support[c] as f64 / n as f64;
        p_w += w * p;
        r_w += w * r;
        f_w += w * f;
    }
    Ok(MetricsReport {
        accuracy: correct as f64 / n as f64,
        precision_weighted: p_w,
        recall_weighted: r_w,
        f1_weighted: f_w,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_case() {
        let r = compute_metrics(&[0, 0, 1, 1, 1], &[0, 1, 1, 1, 0], 2).unwrap();
        for v in r.values() {
            assert!((v - 0.6).abs() < 1e-15, "{v}");
        }
        assert_eq!(r.support, vec![2, 3]);
    }

    #[test]
    fn zero_division_is_zero() {
        let r = compute_metrics(&[0, 1, 2], &[0, 0, 0], 3).unwrap();
        assert!(r.values().iter().all(|v| v.is_finite()));
        assert!((r.precision_weighted - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(compute_metrics(&[0], &[0, 1], 2), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(compute_metrics(&[0], &[2], 2), Err(EvalError::LabelOutOfRange { .. })));
        assert_eq!(compute_metrics(&[], &[], 2), Err(EvalError::EmptyInput));
    }
}
