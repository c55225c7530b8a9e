use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::automl::{evaluate_pipeline, CvScore, PipelineSpec};
use crate::herd_data::{Channel, FeatureMatrix};
use crate::par::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelImportance {
    pub channel: Channel,
    /// Normalized accuracy drop; all six sum to 1.
    pub importance: f64,
    /// Std over folds of the per-fold drop, on the same normalized scale.
    pub fold_std: f64,
    /// Unnormalized mean accuracy drop (may be negative).
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub baseline: CvScore,
    pub channels: Vec<ChannelImportance>,
}

impl ImportanceReport {
    pub fn get(&self, channel: Channel) -> &ChannelImportance {
        &self.channels[channel.index()]
    }

    /// `channel,importance,fold_std`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["channel", "importance", "fold_std"])?;
        for c in &self.channels {
            w.write_record([
                c.channel.name().to_string(),
                format!("{:.6}", c.importance),
                format!("{:.6}", c.fold_std),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))
    }
}

/// Leave-one-channel-out importance.
///
/// For each channel every feature column derived from it is dropped and the
/// grouped CV is re-run on the same folds. Drops below zero count as zero;
/// the rest are normalized to sum to 1 (uniform when no channel matters).
pub fn channel_importance(
    spec: &PipelineSpec,
    matrix: &FeatureMatrix,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<ImportanceReport> {
    let baseline = evaluate_pipeline(spec, matrix, k, seed, exec)?;
    let mut deltas = Vec::with_capacity(Channel::ALL.len());
    for ch in Channel::ALL {
        let keep: Vec<usize> = matrix
            .feature_names()
            .iter()
            .enumerate()
            .filter(|(_, n)| Channel::of_feature(n) != Some(ch))
            .map(|(j, _)| j)
            .collect();
        if keep.is_empty() {
            return Err(Error::InvalidArgument(format!("dropping {ch} leaves no features")));
        }
        let per_fold: Vec<f64> = if keep.len() == matrix.n_cols() {
            vec![0.0; baseline.folds.len()]
        } else {
            let reduced = evaluate_pipeline(spec, &matrix.select_columns(&keep), k, seed, exec)?;
            baseline.folds.iter().zip(&reduced.folds).map(|(b, r)| b - r).collect()
        };
        deltas.push(CvScore::from_folds(per_fold));
    }
    let clipped: Vec<f64> = deltas.iter().map(|d| d.mean.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let channels = Channel::ALL
        .iter()
        .zip(&deltas)
        .zip(&clipped)
        .map(|((&channel, d), &c)| {
            let (importance, fold_std) = if total > 0.0 {
                (c / total, d.std / total)
            } else {
                (1.0 / Channel::ALL.len() as f64, d.std)
            };
            ChannelImportance {
                channel,
                importance,
                fold_std,
                mean_delta: d.mean,
            }
        })
        .collect();
    Ok(ImportanceReport { baseline, channels })
}
