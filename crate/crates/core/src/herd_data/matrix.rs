use serde::{Deserialize, Serialize};

use super::CowId;
use crate::{Error, Result};

/// Row-major numeric matrix with named columns, binary labels and the cow
/// each row came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<u8>,
    group_ids: Vec<CowId>,
}

impl FeatureMatrix {
    pub fn new(
        feature_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<u8>,
        group_ids: Vec<CowId>,
    ) -> Result<Self> {
        let cols = feature_names.len();
        let rows = labels.len();
        if group_ids.len() != rows {
            return Err(Error::DimensionMismatch(format!(
                "{} labels but {} group ids",
                rows,
                group_ids.len()
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows} x {cols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {l} is not binary")));
        }
        Ok(FeatureMatrix {
            feature_names,
            values,
            labels,
            group_ids,
        })
    }

    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        group_ids: Vec<CowId>,
    ) -> Result<Self> {
        let cols = feature_names.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} for {cols} features",
                bad.len()
            )));
        }
        Self::new(feature_names, rows.concat(), labels, group_ids)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn group_ids(&self) -> &[CowId] {
        &self.group_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Distinct group ids, sorted.
    pub fn distinct_groups(&self) -> Vec<CowId> {
        let mut g = self.group_ids.clone();
        g.sort();
        g.dedup();
        g
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            group_ids: indices.iter().map(|&i| self.group_ids[i].clone()).collect(),
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(self.n_rows() * columns.len());
        for r in self.rows() {
            values.extend(columns.iter().map(|&j| r[j]));
        }
        FeatureMatrix {
            feature_names: columns.iter().map(|&j| self.feature_names[j].clone()).collect(),
            values,
            labels: self.labels.clone(),
            group_ids: self.group_ids.clone(),
        }
    }

    /// Same labels and groups, new feature values. Used by transforms.
    pub(crate) fn with_features(&self, feature_names: Vec<String>, values: Vec<f64>) -> FeatureMatrix {
        debug_assert_eq!(values.len(), feature_names.len() * self.n_rows());
        FeatureMatrix {
            feature_names,
            values,
            labels: self.labels.clone(),
            group_ids: self.group_ids.clone(),
        }
    }

    /// Stacks `other` below `self`; column names must agree.
    pub fn concat(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.feature_names != other.feature_names {
            return Err(Error::DimensionMismatch("feature names differ".into()));
        }
        let mut out = self.clone();
        out.values.extend_from_slice(&other.values);
        out.labels.extend_from_slice(&other.labels);
        out.group_ids.extend(other.group_ids.iter().cloned());
        Ok(out)
    }

    /// CSV with header `feature_names..., label, cow_id`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.extend(["label", "cow_id"]);
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.labels[i].to_string());
            rec.push(self.group_ids[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}
