use super::{LearnError, Result};
use ndarray::{Array1, Array2, ArrayView2, Axis};

/// Per-column standardization with population variance.
/// Zero-variance columns keep a unit divisor and are only centered.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub means: Array1<f64>,
    pub stds: Array1<f64>,
}

pub fn fit_scaler(x: ArrayView2<'_, f64>) -> Result<ScalerParams> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(LearnError::EmptyInput);
    }
    let means = x.mean_axis(Axis(0)).expect("non-empty");
    let stds = x.var_axis(Axis(0), 0.0).mapv(|v| {
        let s = v.sqrt();
        if s > 0.0 && s.is_finite() {
            s
        } else {
            1.0
        }
    });
    Ok(ScalerParams { means, stds })
}

impl ScalerParams {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(LearnError::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        Ok((&x - &self.means) / &self.stds)
    }

    pub fn inverse_transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(LearnError::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        Ok(&x * &self.stds + &self.means)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn population_convention() {
        let x = array![[1.0], [2.0], [3.0]];
        let s = fit_scaler(x.view()).unwrap();
        assert_eq!(s.means[0], 2.0);
        assert!((s.stds[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let t = s.transform(x.view()).unwrap();
        for (got, want) in t.iter().zip([-1.2247, 0.0, 1.2247]) {
            assert!((got - want).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_column_becomes_zero() {
        let x = array![[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]];
        let s = fit_scaler(x.view()).unwrap();
        let t = s.transform(x.view()).unwrap();
        assert!(t.column(0).iter().all(|&v| v == 0.0));
        for m in t.mean_axis(Axis(0)).unwrap() {
            assert!(m.abs() < 1e-9);
        }
        let back = s.inverse_transform(t.view()).unwrap();
        assert!((&back - &x).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn errors() {
        let empty = Array2::<f64>::zeros((0, 3));
        assert_eq!(fit_scaler(empty.view()), Err(LearnError::EmptyInput));
        let s = fit_scaler(array![[1.0, 2.0]].view()).unwrap();
        assert!(s.transform(array![[1.0]].view()).is_err());
    }
}
