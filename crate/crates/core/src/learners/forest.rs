use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{grow, MaxFeatures, TreeNode, TreeParams};
use super::{check_xy, Classify};
use crate::herd_data::FeatureMatrix;
use crate::par::{map_range, Execution};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

/// Bagged CART trees. The probability is the mean of the trees' leaf
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub n_features: usize,
}

impl ForestModel {
    /// Tree `t` uses its own rng seeded from `(seed, t)`, so the fitted
    /// forest does not depend on `exec`.
    pub fn fit(x: &FeatureMatrix, params: ForestParams, seed: u64, exec: Execution) -> Result<ForestModel> {
        check_xy(x.n_rows(), x.labels())?;
        if params.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            max_features: params.max_features,
        };
        let n = x.n_rows();
        let trees = map_range(exec, params.n_trees, |t| {
            let mut rng = seed::rng_for(seed, &[t as u64]);
            let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow(x.values(), x.n_cols(), x.labels(), &mut rows, tree_params, Some(&mut rng))
        });
        Ok(ForestModel {
            trees,
            n_features: x.n_cols(),
        })
    }
}

impl Classify for ForestModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.proba(row)).sum::<f64>() / self.trees.len() as f64
    }
}
