use serde::{Deserialize, Serialize};

use crate::herd_data::FeatureMatrix;
use crate::{Error, Result};

/// Square Pearson correlation matrix, row-major, ordered as `names`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    /// Square table: header `feature,<names>`, then one row per feature
    /// starting with its name.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(std::iter::once("feature").chain(self.names.iter().map(String::as_str)))?;
        for (name, row) in self.names.iter().zip(self.values.chunks(self.size().max(1))) {
            w.write_record(std::iter::once(name.clone()).chain(row.iter().map(|v| format!("{v:.6}"))))?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))
    }
}

/// Pairwise Pearson coefficients between columns.
///
/// A zero-variance column correlates 0 with every other column and 1 with
/// itself.
pub fn pearson_matrix(matrix: &FeatureMatrix) -> Result<CorrelationMatrix> {
    let r = matrix.n_rows();
    if r < 2 {
        return Err(Error::InsufficientSamples(format!(
            "correlation needs at least 2 rows, got {r}"
        )));
    }
    let c = matrix.n_cols();
    let centered: Vec<Vec<f64>> = (0..c)
        .map(|j| {
            let col = matrix.column(j);
            let mean = col.iter().sum::<f64>() / r as f64;
            col.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut values = vec![0.0; c * c];
    for i in 0..c {
        values[i * c + i] = 1.0;
        for j in i + 1..c {
            let v = if norms[i] > 0.0 && norms[j] > 0.0 {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            values[i * c + j] = v;
            values[j * c + i] = v;
        }
    }
    Ok(CorrelationMatrix {
        names: matrix.feature_names().to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: &[f64], b: &[f64]) -> FeatureMatrix {
        let rows = a.iter().zip(b).map(|(x, y)| vec![*x, *y]).collect();
        FeatureMatrix::from_rows(
            vec!["a".into(), "b".into()],
            rows,
            vec![0; a.len()],
            (0..a.len()).map(|i| format!("c{i}").as_str().into()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_dependence() {
        let m = pearson_matrix(&two(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0])).unwrap();
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);
        let m = pearson_matrix(&two(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0])).unwrap();
        assert!((m.get(0, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_correlation() {
        let m = pearson_matrix(&two(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0])).unwrap();
        assert!((m.get(0, 1) - 0.5).abs() < 1e-12);
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn zero_variance_column() {
        let m = pearson_matrix(&two(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 1), 1.0);
    }

    #[test]
    fn too_few_rows() {
        assert!(pearson_matrix(&two(&[1.0], &[1.0])).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = pearson_matrix(&two(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0])).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "feature,a,b\na,1.000000,-1.000000\nb,-1.000000,1.000000\n");
    }
}
