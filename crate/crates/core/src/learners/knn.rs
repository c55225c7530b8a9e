use serde::{Deserialize, Serialize};

use super::{check_xy, squared_distance, Classify};
use crate::herd_data::FeatureMatrix;
use crate::{Error, Result};

/// k-nearest neighbors under Euclidean distance. Equal distances resolve to
/// the lower training-row index; `k` is clamped to the training size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_features: usize,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
}

impl KnnModel {
    pub fn fit(x: &FeatureMatrix, k: usize) -> Result<KnnModel> {
        check_xy(x.n_rows(), x.labels())?;
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(KnnModel {
            k,
            n_features: x.n_cols(),
            values: x.values().to_vec(),
            labels: x.labels().to_vec(),
        })
    }

    pub fn effective_k(&self) -> usize {
        self.k.min(self.labels.len())
    }

    /// Training-row indices of the neighbors, nearest first.
    pub fn neighbors(&self, row: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .values
            .chunks_exact(self.n_features.max(1))
            .take(self.labels.len())
            .enumerate()
            .map(|(i, r)| (squared_distance(r, row), i))
            .collect();
        let k = self.effective_k();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }
}

impl Classify for KnnModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba(&self, row: &[f64]) -> f64 {
        let nb = self.neighbors(row);
        nb.iter().filter(|&&i| self.labels[i] == 1).count() as f64 / nb.len() as f64
    }
}
