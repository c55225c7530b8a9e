use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::herd_data::{BehaviorDay, Channel, CowId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Mean,
    Sum,
    Std,
}

impl Aggregate {
    pub const ALL: [Aggregate; 3] = [Aggregate::Mean, Aggregate::Sum, Aggregate::Std];

    pub fn name(self) -> &'static str {
        match self {
            Aggregate::Mean => "mean",
            Aggregate::Sum => "sum",
            Aggregate::Std => "std",
        }
    }

    pub fn from_name(s: &str) -> Option<Aggregate> {
        Aggregate::ALL.into_iter().find(|a| a.name() == s)
    }
}

/// Rolling-window features over days `[ref - (lag + window - 1), ref - lag]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagWindowConfig {
    lag: u32,
    window: u32,
    aggregates: Vec<Aggregate>,
}

impl LagWindowConfig {
    pub fn new(lag: u32, window: u32, aggregates: Vec<Aggregate>) -> Result<Self> {
        if lag < 1 || window < 1 {
            return Err(Error::InvalidArgument(format!(
                "lag {lag} and window {window} must both be >= 1"
            )));
        }
        if aggregates.is_empty() {
            return Err(Error::InvalidArgument("no aggregates requested".into()));
        }
        Ok(LagWindowConfig {
            lag,
            window,
            aggregates,
        })
    }

    /// Mean, sum and standard deviation.
    pub fn all(lag: u32, window: u32) -> Result<Self> {
        Self::new(lag, window, Aggregate::ALL.to_vec())
    }

    pub fn lag(&self) -> u32 {
        self.lag
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn aggregates(&self) -> &[Aggregate] {
        &self.aggregates
    }

    /// First and last day of the window for `reference_day`.
    pub fn span(&self, reference_day: NaiveDate) -> (NaiveDate, NaiveDate) {
        let last = reference_day - Days::new(self.lag as u64);
        let first = last - Days::new(self.window as u64 - 1);
        (first, last)
    }
}

/// Channel-major, aggregate-minor names, e.g. `non_active:mean`.
pub fn lagwindow_feature_names(config: &LagWindowConfig) -> Vec<String> {
    Channel::ALL
        .iter()
        .flat_map(|c| config.aggregates.iter().map(move |a| format!("{}:{}", c.name(), a.name())))
        .collect()
}

/// Mean, sum and population standard deviation of `values`, in the
/// requested order.
pub fn window_aggregates(values: &[f64], aggregates: &[Aggregate]) -> Vec<f64> {
    let n = values.len() as f64;
    let sum: f64 = values.iter().sum();
    let mean = sum / n;
    aggregates
        .iter()
        .map(|a| match a {
            Aggregate::Mean => mean,
            Aggregate::Sum => sum,
            Aggregate::Std => (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt(),
        })
        .collect()
}

/// Window features for one cow at `reference_day`.
pub fn lagwindow_features(
    days: &BTreeMap<NaiveDate, BehaviorDay>,
    cow: &CowId,
    reference_day: NaiveDate,
    config: &LagWindowConfig,
) -> Result<Vec<f64>> {
    let (first, last) = config.span(reference_day);
    let window: Vec<&BehaviorDay> = days.range(first..=last).map(|(_, d)| d).collect();
    if window.len() != config.window as usize {
        let missing = first
            .iter_days()
            .take_while(|d| *d <= last)
            .find(|d| !days.contains_key(d))
            .map(|d| d.to_string())
            .unwrap_or_default();
        return Err(Error::IncompleteWindow {
            cow_id: cow.to_string(),
            missing,
        });
    }
    let mut out = Vec::with_capacity(Channel::ALL.len() * config.aggregates.len());
    let mut values = Vec::with_capacity(window.len());
    for ch in Channel::ALL {
        values.clear();
        values.extend(window.iter().map(|d| d.channel(ch)));
        out.extend(window_aggregates(&values, &config.aggregates));
    }
    Ok(out)
}
