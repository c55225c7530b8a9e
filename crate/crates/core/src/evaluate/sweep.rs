use std::collections::BTreeSet;
use std::io::Write;

use chrono::{Days, NaiveDate};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::config_digest;
use crate::automl::{PipelineSpec, TrainedPipeline};
use crate::featurize::{
    kmeans_undersample_indices, lagwindow_feature_names, lagwindow_features, Aggregate,
    LagWindowConfig, MinMaxParams,
};
use crate::herd_data::{
    derive_episodes, grouped_split_indices, match_controls, BehaviorIndex, CowId, Episode,
    FeatureMatrix, HerdDataset, MatchOptions,
};
use crate::par::{map_range, Execution};
use crate::seed;
use crate::{Error, Result};

/// Which reference days supply negative samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeUniverse {
    /// Matched controls plus case-cow days well before onset.
    ControlsAndCasePrior,
    ControlsOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lags: Vec<u32>,
    pub windows: Vec<u32>,
    pub train_n: usize,
    pub test_n: usize,
    /// Positives are case-cow reference days `day0 .. day0 + positive_days - 1`
    /// on which a lesion is recorded.
    pub positive_days: u32,
    pub negatives: NegativeUniverse,
    /// A case-cow day is a negative only if its window ends at least this
    /// many days before day 0.
    pub case_gap_days: u32,
    pub aggregates: Vec<Aggregate>,
    pub pipeline: PipelineSpec,
    pub matching: MatchOptions,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lags: vec![1, 2, 3, 4],
            windows: vec![1, 2, 3, 4, 5],
            train_n: 98,
            test_n: 28,
            positive_days: 4,
            negatives: NegativeUniverse::ControlsAndCasePrior,
            case_gap_days: 7,
            aggregates: Aggregate::ALL.to_vec(),
            pipeline: PipelineSpec::default(),
            matching: MatchOptions::default(),
            seed: 0,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.lags.is_empty() || self.windows.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one lag and one window".into()));
        }
        if self.train_n < 2 || self.test_n < 2 {
            return Err(Error::InvalidArgument("train_n and test_n must be at least 2".into()));
        }
        if self.positive_days == 0 {
            return Err(Error::InvalidArgument("positive_days must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub lag: u32,
    pub window: u32,
    /// `None` when the cell could not be filled.
    pub accuracy: Option<f64>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_cows: Vec<CowId>,
    pub test_cows: Vec<CowId>,
    pub null_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub lags: Vec<u32>,
    pub windows: Vec<u32>,
    pub train_n: usize,
    pub test_n: usize,
    /// Lag-major: `cells[i * windows.len() + j]` is `(lags[i], windows[j])`.
    pub cells: Vec<SweepCell>,
    pub seed: u64,
    pub config_digest: String,
}

impl SweepGrid {
    pub fn cell(&self, lag: u32, window: u32) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.lag == lag && c.window == window)
    }

    /// First column is the lag, header row holds the window sizes, cells are
    /// accuracies to four decimals and empty when null.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["lag".to_string()];
        header.extend(self.windows.iter().map(u32::to_string));
        w.write_record(&header)?;
        for (i, lag) in self.lags.iter().enumerate() {
            let mut rec = vec![lag.to_string()];
            for j in 0..self.windows.len() {
                let cell = &self.cells[i * self.windows.len() + j];
                rec.push(cell.accuracy.map(|a| format!("{a:.4}")).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))
    }
}

struct Cohorts<'a> {
    index: &'a BehaviorIndex,
    lesion_present: BTreeSet<(&'a CowId, NaiveDate)>,
    cases: Vec<(&'a CowId, NaiveDate)>,
    controls: Vec<&'a CowId>,
}

/// Lag x window sensitivity sweep of the prediction task.
///
/// Every cell draws exactly `train_n` training and `test_n` test rows (half
/// positives, rounded down, and the rest k-means-selected negatives) so
/// cells are comparable. Case and control cows are split separately so both
/// sides get case cows; the split is the same in every cell. A cell that
/// cannot be filled is recorded as null.
pub fn run_sweep(dataset: &HerdDataset, config: &SweepConfig, exec: Execution) -> Result<SweepGrid> {
    config.validate()?;
    let index = dataset.behavior_index();
    let derivation = derive_episodes(&dataset.lesions, &index);
    let episodes: Vec<Episode> =
        match_controls(&derivation.enrolled, &dataset.profiles, &dataset.lesions, &index, config.matching)
            .into_iter()
            .filter(|e| e.control_cow_id.is_some())
            .collect();
    let cohorts = Cohorts {
        index: &index,
        lesion_present: dataset
            .lesions
            .iter()
            .filter(|o| o.status.is_present())
            .map(|o| (&o.cow_id, o.date))
            .collect(),
        cases: episodes.iter().map(|e| (&e.case_cow_id, e.day0)).collect(),
        controls: episodes.iter().filter_map(|e| e.control_cow_id.as_ref()).collect(),
    };

    let n_w = config.windows.len();
    let cells = map_range(exec, config.lags.len() * n_w, |i| {
        let (lag, window) = (config.lags[i / n_w], config.windows[i % n_w]);
        let cell_seed = seed::derive(config.seed, &[u64::from(lag), u64::from(window)]);
        match run_cell(&cohorts, config, lag, window, cell_seed, exec) {
            Ok(cell) => cell,
            Err(e) => SweepCell {
                lag,
                window,
                accuracy: None,
                train_rows: 0,
                test_rows: 0,
                train_cows: vec![],
                test_cows: vec![],
                null_reason: Some(format!("{}: {e}", e.code())),
            },
        }
    });
    Ok(SweepGrid {
        lags: config.lags.clone(),
        windows: config.windows.clone(),
        train_n: config.train_n,
        test_n: config.test_n,
        cells,
        seed: config.seed,
        config_digest: config_digest(config),
    })
}

fn run_cell(
    cohorts: &Cohorts<'_>,
    config: &SweepConfig,
    lag: u32,
    window: u32,
    cell_seed: u64,
    exec: Execution,
) -> Result<SweepCell> {
    let lw = LagWindowConfig::new(lag, window, config.aggregates.clone())?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let mut push = |cow: &CowId, reference: NaiveDate, label: u8| -> Result<()> {
        let days = cohorts.index.days_of(cow).expect("episode cows have sensor data");
        match lagwindow_features(days, cow, reference, &lw) {
            Ok(r) => {
                rows.push(r);
                labels.push(label);
                groups.push(cow.clone());
                Ok(())
            }
            Err(Error::IncompleteWindow { .. }) => Ok(()),
            Err(e) => Err(e),
        }
    };

    for &(cow, day0) in &cohorts.cases {
        for j in 0..config.positive_days {
            let reference = day0 + Days::new(u64::from(j));
            if cohorts.lesion_present.contains(&(cow, reference)) {
                push(cow, reference, 1)?;
            }
        }
        if config.negatives == NegativeUniverse::ControlsAndCasePrior {
            let latest_end = day0 - Days::new(u64::from(config.case_gap_days));
            let days = cohorts.index.days_of(cow).expect("case has sensor data");
            for &reference in days.keys() {
                if reference - Days::new(u64::from(lag)) <= latest_end {
                    push(cow, reference, 0)?;
                }
            }
        }
    }
    for &cow in &cohorts.controls {
        let days = cohorts.index.days_of(cow).expect("control has sensor data");
        for &reference in days.keys() {
            push(cow, reference, 0)?;
        }
    }
    let all = FeatureMatrix::from_rows(lagwindow_feature_names(&lw), rows, labels, groups)?;

    // split case cows and control cows separately so positives reach both sides
    let fraction = config.test_n as f64 / (config.train_n + config.test_n) as f64;
    let case_ids: Vec<CowId> = cohorts.cases.iter().map(|(c, _)| (*c).clone()).collect();
    let control_ids: Vec<CowId> = cohorts.controls.iter().map(|c| (*c).clone()).collect();
    let (case_train, case_test) = grouped_split_indices(&case_ids, fraction, seed::derive(config.seed, &[1]))?;
    let (ctrl_train, ctrl_test) = grouped_split_indices(&control_ids, fraction, seed::derive(config.seed, &[2]))?;
    let test_cows: BTreeSet<&CowId> = case_test
        .iter()
        .map(|&i| &case_ids[i])
        .chain(ctrl_test.iter().map(|&i| &control_ids[i]))
        .collect();
    debug_assert!(case_train.iter().all(|&i| !test_cows.contains(&case_ids[i])));
    debug_assert!(ctrl_train.iter().all(|&i| !test_cows.contains(&control_ids[i])));

    let (test_rows, train_rows): (Vec<usize>, Vec<usize>) =
        (0..all.n_rows()).partition(|&i| test_cows.contains(&all.group_ids()[i]));
    let draw = |side: u64| (seed::derive(config.seed, &[3, side]), seed::derive(cell_seed, &[3, side]));
    let train = balance(&all, &train_rows, config.train_n, draw(0), "train")?;
    let test = balance(&all, &test_rows, config.test_n, draw(1), "test")?;

    let model = TrainedPipeline::fit(&config.pipeline, &train, seed::derive(cell_seed, &[5]), exec)?;
    Ok(SweepCell {
        lag,
        window,
        accuracy: Some(model.accuracy(&test)?),
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        train_cows: train.distinct_groups(),
        test_cows: test.distinct_groups(),
        null_reason: None,
    })
}

/// Exactly `n` rows from `cohort`: `n / 2` positives drawn uniformly and the
/// remainder chosen among negatives by k-means under-sampling (clustered on
/// min-max scaled features so no channel dominates the distance).
///
/// The positive draw uses `seeds.0`, shared by all cells, so every cell
/// sees the same positive reference days; k-means uses the cell's `seeds.1`.
fn balance(
    all: &FeatureMatrix,
    cohort: &[usize],
    n: usize,
    seeds: (u64, u64),
    side: &str,
) -> Result<FeatureMatrix> {
    let (pos, neg): (Vec<usize>, Vec<usize>) = cohort.iter().partition(|&&i| all.labels()[i] == 1);
    let n_pos = n / 2;
    let n_neg = n - n_pos;
    if pos.len() < n_pos || neg.len() < n_neg {
        return Err(Error::InsufficientSamples(format!(
            "{side} cohort has {} positives and {} negatives, need {n_pos} and {n_neg}",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = seed::rng(seeds.0);
    let mut chosen: Vec<usize> = sample(&mut rng, pos.len(), n_pos).into_iter().map(|k| pos[k]).collect();
    let negatives = all.select_rows(&neg);
    let scaled = MinMaxParams::fit(&negatives)?.apply(&negatives)?;
    chosen.extend(kmeans_undersample_indices(&scaled, n_neg, seeds.1)?.into_iter().map(|k| neg[k]));
    chosen.sort_unstable();
    Ok(all.select_rows(&chosen))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let cell = |lag, window, accuracy| SweepCell {
            lag,
            window,
            accuracy,
            train_rows: 0,
            test_rows: 0,
            train_cows: vec![],
            test_cows: vec![],
            null_reason: None,
        };
        let grid = SweepGrid {
            lags: vec![1, 2],
            windows: vec![1, 3],
            train_n: 4,
            test_n: 2,
            cells: vec![cell(1, 1, Some(0.71428)), cell(1, 3, None), cell(2, 1, Some(0.5)), cell(2, 3, Some(1.0))],
            seed: 0,
            config_digest: String::new(),
        };
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "lag,1,3\n1,0.7143,\n2,0.5000,1.0000\n");
        assert_eq!(grid.cell(2, 3).unwrap().accuracy, Some(1.0));
    }
}
