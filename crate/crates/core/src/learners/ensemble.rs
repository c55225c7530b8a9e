use serde::{Deserialize, Serialize};

use super::{Classifier, Classify};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub weight: f64,
    pub model: Classifier,
}

/// Soft voting: the weighted mean of member probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub members: Vec<EnsembleMember>,
}

impl EnsembleModel {
    /// Weights must be non-negative and sum to 1; members must agree on the
    /// feature dimension.
    pub fn new(members: Vec<EnsembleMember>) -> Result<EnsembleModel> {
        if members.is_empty() {
            return Err(Error::EmptyInput("ensemble has no members"));
        }
        if members.iter().any(|m| m.weight.is_nan() || m.weight < 0.0 || !m.weight.is_finite()) {
            return Err(Error::InvalidArgument("ensemble weights must be non-negative".into()));
        }
        let total: f64 = members.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("ensemble weights sum to {total}, not 1")));
        }
        let dim = members[0].model.n_features();
        if members.iter().any(|m| m.model.n_features() != dim) {
            return Err(Error::DimensionMismatch("ensemble members disagree on feature count".into()));
        }
        Ok(EnsembleModel { members })
    }
}

impl Classify for EnsembleModel {
    fn n_features(&self) -> usize {
        self.members[0].model.n_features()
    }

    fn proba(&self, row: &[f64]) -> f64 {
        self.members.iter().map(|m| m.weight * m.model.proba(row)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herd_data::{CowId, FeatureMatrix};
    use crate::learners::{ForestModel, ForestParams, KnnModel};
    use crate::Execution;

    fn data(c: usize) -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64; c]).collect();
        FeatureMatrix::from_rows(
            (0..c).map(|j| format!("f{j}")).collect(),
            rows,
            (0..10).map(|i| u8::from(i > 4)).collect(),
            (0..10).map(|i| CowId::new(format!("c{i}"))).collect(),
        )
        .unwrap()
    }

    fn members(c_knn: usize, w: f64) -> Vec<EnsembleMember> {
        let rf = ForestModel::fit(&data(2), ForestParams { n_trees: 5, ..Default::default() }, 0, Execution::Sequential).unwrap();
        let knn = KnnModel::fit(&data(c_knn), 3).unwrap();
        vec![
            EnsembleMember { weight: w, model: Classifier::Forest(rf) },
            EnsembleMember { weight: 1.0 - w, model: Classifier::Knn(knn) },
        ]
    }

    #[test]
    fn weighted_mean() {
        let e = EnsembleModel::new(members(2, 0.3)).unwrap();
        let row = [7.0, 7.0];
        let expect = 0.3 * e.members[0].model.proba(&row) + 0.7 * e.members[1].model.proba(&row);
        assert!((e.proba(&row) - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_members() {
        assert_eq!(EnsembleModel::new(members(3, 0.5)).unwrap_err().code(), "dimension_mismatch");
        let mut m = members(2, 0.5);
        m[0].weight = 0.6;
        assert!(EnsembleModel::new(m).is_err());
        let mut m = members(2, 0.5);
        m[0].weight = -0.5;
        m[1].weight = 1.5;
        assert!(EnsembleModel::new(m).is_err());
    }

    #[test]
    fn json_round_trip() {
        let e = Classifier::Ensemble(EnsembleModel::new(members(2, 0.5)).unwrap());
        let text = e.to_json().unwrap();
        let back = Classifier::from_json(&text).unwrap();
        assert_eq!(back, e);
        let bumped = text.replacen("\"schema_version\":1", "\"schema_version\":7", 1);
        assert_eq!(Classifier::from_json(&bumped).unwrap_err().code(), "schema_version");
    }
}
