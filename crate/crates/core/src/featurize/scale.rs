use serde::{Deserialize, Serialize};

use crate::herd_data::FeatureMatrix;
use crate::{Error, Result};

/// Per-column minimum and maximum fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxParams {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("min-max fit on an empty training matrix"));
        }
        let c = train.n_cols();
        let mut min = vec![f64::INFINITY; c];
        let mut max = vec![f64::NEG_INFINITY; c];
        for row in train.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(MinMaxParams { min, max })
    }

    /// `(x - min) / (max - min)`; constant columns map to 0. Values outside
    /// the fitted range are not clipped.
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        if matrix.n_cols() != self.min.len() {
            return Err(Error::DimensionMismatch(format!(
                "scaler fitted on {} columns, got {}",
                self.min.len(),
                matrix.n_cols()
            )));
        }
        let values = matrix.rows().flat_map(|r| self.apply_row(r)).collect();
        Ok(matrix.with_features(matrix.feature_names().to_vec(), values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(
            vec!["x".into()],
            values.to_vec(),
            vec![0; values.len()],
            (0..values.len()).map(|i| format!("c{i}").as_str().into()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn endpoints_map_to_unit_interval() {
        let m = col(&[0.0, 5.0, 10.0]);
        let p = MinMaxParams::fit(&m).unwrap();
        assert_eq!(p.apply(&m).unwrap().column(0), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let m = col(&[3.0, 3.0, 3.0]);
        let p = MinMaxParams::fit(&m).unwrap();
        assert_eq!(p.apply(&m).unwrap().column(0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_is_not_clipped() {
        let p = MinMaxParams::fit(&col(&[0.0, 10.0])).unwrap();
        assert_eq!(p.apply(&col(&[12.0, -5.0])).unwrap().column(0), vec![1.2, -0.5]);
    }

    #[test]
    fn empty_fit_fails() {
        let m = FeatureMatrix::new(vec!["x".into()], vec![], vec![], vec![]).unwrap();
        assert_eq!(MinMaxParams::fit(&m).unwrap_err().code(), "empty_input");
    }

    #[test]
    fn fit_ignores_everything_but_train() {
        let train = col(&[1.0, 4.0]);
        let p = MinMaxParams::fit(&train).unwrap();
        let a = p.apply(&col(&[2.0, 3.0])).unwrap();
        let b = p.apply(&col(&[2.0, 3.0])).unwrap();
        assert_eq!(a, b);
        assert_eq!(p, MinMaxParams::fit(&train).unwrap());
    }
}
