//! Deterministic from-scratch learners: CART, random forest, k-nearest
//! neighbors, k-means and a weighted soft-voting ensemble.
//!
//! Every classifier reports a probability for class 1 and predicts class 1
//! when that probability is at least 0.5.

mod ensemble;
mod forest;
mod kmeans;
mod knn;
mod tree;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ensemble::{EnsembleMember, EnsembleModel};
pub use forest::{ForestModel, ForestParams};
pub use kmeans::{kmeans, KMeansFit, KMeansParams};
pub use knn::KnnModel;
pub use tree::{gini_gain, train_tree, DecisionTree, MaxFeatures, SplitChoice, TreeNode, TreeParams};

/// Probability at or above which class 1 is predicted.
pub const DECISION_THRESHOLD: f64 = 0.5;

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub trait Classify {
    fn n_features(&self) -> usize;

    /// Probability of class 1.
    fn proba(&self, row: &[f64]) -> f64;

    fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.proba(row) >= DECISION_THRESHOLD)
    }
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Forest(ForestModel),
    Knn(KnnModel),
    Ensemble(EnsembleModel),
}

impl Classify for Classifier {
    fn n_features(&self) -> usize {
        match self {
            Classifier::Forest(m) => m.n_features(),
            Classifier::Knn(m) => m.n_features(),
            Classifier::Ensemble(m) => m.n_features(),
        }
    }

    fn proba(&self, row: &[f64]) -> f64 {
        match self {
            Classifier::Forest(m) => m.proba(row),
            Classifier::Knn(m) => m.proba(row),
            Classifier::Ensemble(m) => m.proba(row),
        }
    }
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelDocument {
    schema_version: u32,
    model: Classifier,
}

impl Classifier {
    /// Versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelDocument {
            schema_version: MODEL_SCHEMA_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Classifier> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(doc.schema_version));
        }
        Ok(doc.model)
    }
}

pub(crate) fn check_xy(n_rows: usize, labels: &[u8]) -> Result<()> {
    if n_rows == 0 {
        return Err(Error::EmptyInput("training set has no rows"));
    }
    if labels.len() != n_rows {
        return Err(Error::DimensionMismatch(format!(
            "{n_rows} rows but {} labels",
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    Ok(())
}
