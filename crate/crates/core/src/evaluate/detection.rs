use serde::{Deserialize, Serialize};

use super::{config_digest, lower_bound_95, REPORT_SCHEMA_VERSION};
use crate::automl::{
    ga_search, grid_refine, GaConfig, GrammarBounds, HyperGrid, PipelineSpec, SearchLogEntry,
    TrainedPipeline,
};
use crate::featurize::{detection_matrix, DetectionOptions};
use crate::herd_data::{
    derive_episodes, grouped_split_indices, match_controls, CowId, FeatureMatrix, HerdDataset,
    MatchOptions,
};
use crate::par::Execution;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub test_fraction: f64,
    pub folds: usize,
    /// Fewest matched cases the study will run with.
    pub min_episodes: usize,
    /// `ga.seed` is replaced by a seed derived from `seed`.
    pub ga: GaConfig,
    pub bounds: GrammarBounds,
    pub grid: HyperGrid,
    pub features: DetectionOptions,
    pub matching: MatchOptions,
    pub seed: u64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            test_fraction: 0.2,
            folds: 5,
            min_episodes: 4,
            ga: GaConfig::default(),
            bounds: GrammarBounds::default(),
            grid: HyperGrid {
                n_trees: vec![50, 100, 200],
                max_depth: vec![None, Some(6)],
                knn_k: vec![3, 5, 7],
                rf_weight: vec![0.3, 0.5, 0.7],
            },
            features: DetectionOptions::default(),
            matching: MatchOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionSeeds {
    pub split: u64,
    /// Fold assignment and GA stream for both search stages.
    pub search: u64,
    pub final_fit: u64,
}

impl DetectionSeeds {
    pub fn from_master(seed: u64) -> DetectionSeeds {
        DetectionSeeds {
            split: seed::derive(seed, &[1]),
            search: seed::derive(seed, &[2]),
            final_fit: seed::derive(seed, &[3]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub pipeline: PipelineSpec,
    pub pipeline_canonical: String,
    pub cv_mean: f64,
    pub cv_std: f64,
    pub cv_folds: Vec<f64>,
    pub test_accuracy: f64,
    /// `test_accuracy - 1.645 * cv_std`.
    pub lower_bound_95: f64,
    pub n_enrolled: usize,
    pub n_rejected: usize,
    pub n_matched: usize,
    pub n_train_rows: usize,
    pub n_test_rows: usize,
    pub train_cows: Vec<CowId>,
    pub test_cows: Vec<CowId>,
    pub ga_trace: Vec<f64>,
    pub grid_evaluations: usize,
    pub seed: u64,
    pub seeds: DetectionSeeds,
    pub config_digest: String,
}

/// A detection study's report plus the artifacts behind it.
#[derive(Debug, Clone)]
pub struct DetectionRun {
    pub report: DetectionReport,
    pub model: TrainedPipeline,
    pub search_log: Vec<SearchLogEntry>,
    pub matrix: FeatureMatrix,
}

/// Day-0 detection study.
///
/// Builds the case/control matrix, holds out `test_fraction` of the cows,
/// searches pipelines with the GA and grid refinement on the training cows,
/// refits the winner on all training rows and scores it on held-out cows.
pub fn run_detection(dataset: &HerdDataset, config: &DetectionConfig, exec: Execution) -> Result<DetectionRun> {
    let index = dataset.behavior_index();
    let derivation = derive_episodes(&dataset.lesions, &index);
    let episodes = match_controls(&derivation.enrolled, &dataset.profiles, &dataset.lesions, &index, config.matching);
    let n_matched = episodes.iter().filter(|e| e.control_cow_id.is_some()).count();
    if n_matched < config.min_episodes {
        return Err(Error::InsufficientEpisodes {
            needed: config.min_episodes,
            found: n_matched,
        });
    }
    let matrix = detection_matrix(&episodes, &index, config.features)?;

    let seeds = DetectionSeeds::from_master(config.seed);
    let (train_idx, test_idx) = grouped_split_indices(matrix.group_ids(), config.test_fraction, seeds.split)?;
    let train = matrix.select_rows(&train_idx);
    let test = matrix.select_rows(&test_idx);

    let ga_config = GaConfig {
        seed: seeds.search,
        folds: config.folds,
        ..config.ga.clone()
    };
    let ga = ga_search(&train, &config.bounds, &ga_config, exec)?;
    let (spec, cv, grid_evaluations) = match grid_refine(&ga.best, &config.grid, &train, config.folds, seeds.search, exec) {
        Ok(g) => {
            // keep the GA winner unless the grid strictly improves on it
            if g.best_score.mean > ga.best_score.mean {
                (g.best, g.best_score, g.evaluations.len())
            } else {
                (ga.best, ga.best_score.clone(), g.evaluations.len())
            }
        }
        Err(Error::EmptyInput(_)) => (ga.best, ga.best_score.clone(), 0),
        Err(e) => return Err(e),
    };

    let model = TrainedPipeline::fit(&spec, &train, seeds.final_fit, exec)?;
    let test_accuracy = model.accuracy(&test)?;

    let report = DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        pipeline: spec,
        pipeline_canonical: spec.canonical(),
        cv_mean: cv.mean,
        cv_std: cv.std,
        cv_folds: cv.folds.clone(),
        test_accuracy,
        lower_bound_95: lower_bound_95(test_accuracy, cv.std),
        n_enrolled: derivation.enrolled.len(),
        n_rejected: derivation.rejected.len(),
        n_matched,
        n_train_rows: train.n_rows(),
        n_test_rows: test.n_rows(),
        train_cows: train.distinct_groups(),
        test_cows: test.distinct_groups(),
        ga_trace: ga.trace,
        grid_evaluations,
        seed: config.seed,
        seeds,
        config_digest: config_digest(config),
    };
    Ok(DetectionRun {
        report,
        model,
        search_log: ga.log,
        matrix,
    })
}
