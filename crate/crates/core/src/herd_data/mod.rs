//! Herd records: sensor days, lesion observations and cow profiles, plus the
//! episode enrollment, control matching and cow-grouped splitting built on
//! top of them.

mod episodes;
mod matrix;
mod parse;
mod split;

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use episodes::{
    derive_episodes, lactation_period, match_controls, EnrollmentChecks, Episode,
    EpisodeDerivation, LactationPeriod, MatchOptions, Rejection, RejectionReason,
    LOOKBACK_DAYS,
};
pub use matrix::FeatureMatrix;
pub use parse::{
    parse_behavior, parse_lesions, parse_profiles, write_behavior, write_lesions, write_profiles,
    TempBounds, BEHAVIOR_HEADER, LESIONS_HEADER, PROFILES_HEADER,
};
pub use split::{grouped_kfold, grouped_kfold_indices, grouped_split, grouped_split_indices, Fold};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CowId(pub String);

impl CowId {
    pub fn new(id: impl Into<String>) -> Self {
        CowId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CowId {
    fn from(s: &str) -> Self {
        CowId(s.to_owned())
    }
}

/// The six daily sensor channels, in canonical feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    NonActive,
    Active,
    HighlyActive,
    Eating,
    Ruminating,
    EarTemp,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::NonActive,
        Channel::Active,
        Channel::HighlyActive,
        Channel::Eating,
        Channel::Ruminating,
        Channel::EarTemp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::NonActive => "non_active",
            Channel::Active => "active",
            Channel::HighlyActive => "highly_active",
            Channel::Eating => "eating",
            Channel::Ruminating => "ruminating",
            Channel::EarTemp => "ear_temp",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_proportion(self) -> bool {
        self != Channel::EarTemp
    }

    pub fn from_name(name: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Channel a feature column was derived from. Feature names are
    /// `:`-separated and carry the channel name as one whole segment, e.g.
    /// `d-3:active` or `ruminating:std`.
    pub fn of_feature(feature_name: &str) -> Option<Channel> {
        feature_name.split(':').find_map(Channel::from_name)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One cow-day of sensor output. Activity, eating and ruminating values are
/// proportions of the 24 h day; `ear_temp` is in degrees Celsius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDay {
    pub cow_id: CowId,
    pub date: NaiveDate,
    pub non_active: f64,
    pub active: f64,
    pub highly_active: f64,
    pub eating: f64,
    pub ruminating: f64,
    pub ear_temp: f64,
}

impl BehaviorDay {
    pub fn channel(&self, channel: Channel) -> f64 {
        match channel {
            Channel::NonActive => self.non_active,
            Channel::Active => self.active,
            Channel::HighlyActive => self.highly_active,
            Channel::Eating => self.eating,
            Channel::Ruminating => self.ruminating,
            Channel::EarTemp => self.ear_temp,
        }
    }

    pub fn channels(&self) -> [f64; 6] {
        Channel::ALL.map(|c| self.channel(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReproStatus {
    Open,
    Pregnant,
}

impl ReproStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReproStatus::Open => "open",
            ReproStatus::Pregnant => "pregnant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CowProfile {
    pub cow_id: CowId,
    pub parity: u32,
    pub repro_status: ReproStatus,
    pub calving_date: NaiveDate,
}

impl CowProfile {
    /// Days in milk on `date`; negative when `date` precedes calving.
    pub fn dim_on(&self, date: NaiveDate) -> i64 {
        (date - self.calving_date).num_days()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LesionStatus {
    None,
    Active,
    Digressing,
}

impl LesionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LesionStatus::None => "none",
            LesionStatus::Active => "active",
            LesionStatus::Digressing => "digressing",
        }
    }

    pub fn is_present(self) -> bool {
        self != LesionStatus::None
    }
}

/// Lesion diameter class: small < 0.635 cm, medium 0.635-3.81 cm, large > 3.81 cm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LesionSize {
    None,
    Small,
    Medium,
    Large,
}

impl LesionSize {
    pub fn as_str(self) -> &'static str {
        match self {
            LesionSize::None => "none",
            LesionSize::Small => "small",
            LesionSize::Medium => "medium",
            LesionSize::Large => "large",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LesionObservation {
    pub cow_id: CowId,
    pub date: NaiveDate,
    pub status: LesionStatus,
    pub size: LesionSize,
}

/// Behavior records indexed by cow, then date.
#[derive(Debug, Clone, Default)]
pub struct BehaviorIndex {
    by_cow: BTreeMap<CowId, BTreeMap<NaiveDate, BehaviorDay>>,
}

impl BehaviorIndex {
    pub fn new(days: &[BehaviorDay]) -> Self {
        let mut by_cow: BTreeMap<CowId, BTreeMap<NaiveDate, BehaviorDay>> = BTreeMap::new();
        for d in days {
            by_cow
                .entry(d.cow_id.clone())
                .or_default()
                .insert(d.date, d.clone());
        }
        BehaviorIndex { by_cow }
    }

    pub fn get(&self, cow: &CowId, date: NaiveDate) -> Option<&BehaviorDay> {
        self.by_cow.get(cow).and_then(|m| m.get(&date))
    }

    pub fn days_of(&self, cow: &CowId) -> Option<&BTreeMap<NaiveDate, BehaviorDay>> {
        self.by_cow.get(cow)
    }

    pub fn cows(&self) -> impl Iterator<Item = &CowId> {
        self.by_cow.keys()
    }

    /// True when `cow` has a record on every date in `[first, last]`.
    pub fn covers(&self, cow: &CowId, first: NaiveDate, last: NaiveDate) -> bool {
        let Some(days) = self.by_cow.get(cow) else {
            return false;
        };
        if last < first {
            return true;
        }
        let span = (last - first).num_days() as usize + 1;
        days.range(first..=last).count() == span
    }
}

/// All three input tables of one herd.
#[derive(Debug, Clone, Default)]
pub struct HerdDataset {
    pub behavior: Vec<BehaviorDay>,
    pub lesions: Vec<LesionObservation>,
    pub profiles: Vec<CowProfile>,
}

impl HerdDataset {
    pub fn from_readers(
        behavior: impl std::io::Read,
        lesions: impl std::io::Read,
        profiles: impl std::io::Read,
    ) -> crate::Result<Self> {
        Ok(HerdDataset {
            behavior: parse_behavior(behavior, TempBounds::default())?,
            lesions: parse_lesions(lesions)?,
            profiles: parse_profiles(profiles)?,
        })
    }

    pub fn behavior_index(&self) -> BehaviorIndex {
        BehaviorIndex::new(&self.behavior)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_of_feature_names() {
        assert_eq!(Channel::of_feature("d-3:active"), Some(Channel::Active));
        assert_eq!(Channel::of_feature("d-7:non_active"), Some(Channel::NonActive));
        assert_eq!(Channel::of_feature("highly_active:std"), Some(Channel::HighlyActive));
        assert_eq!(Channel::of_feature("inactive"), None);
    }

    #[test]
    fn coverage_checks_every_day() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        let mk = |date| BehaviorDay {
            cow_id: "c1".into(),
            date,
            non_active: 0.4,
            active: 0.2,
            highly_active: 0.05,
            eating: 0.2,
            ruminating: 0.15,
            ear_temp: 38.0,
        };
        let idx = BehaviorIndex::new(&[mk(d("2023-01-01")), mk(d("2023-01-02")), mk(d("2023-01-04"))]);
        let c1 = CowId::from("c1");
        assert!(idx.covers(&c1, d("2023-01-01"), d("2023-01-02")));
        assert!(!idx.covers(&c1, d("2023-01-01"), d("2023-01-04")));
        assert!(!idx.covers(&CowId::from("c2"), d("2023-01-01"), d("2023-01-01")));
    }
}
