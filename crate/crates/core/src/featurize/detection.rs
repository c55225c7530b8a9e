use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::herd_data::{BehaviorIndex, Channel, CowId, Episode, FeatureMatrix, LOOKBACK_DAYS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionOptions {
    /// Append day 0 itself after days -7..-1.
    pub include_day0: bool,
}

impl DetectionOptions {
    fn offsets(self) -> impl Iterator<Item = i64> {
        let last = if self.include_day0 { 0 } else { -1 };
        -(LOOKBACK_DAYS as i64)..=last
    }
}

/// `d-7:non_active, d-7:active, ..., d-1:ear_temp` (day-major, channel-minor).
pub fn detection_feature_names(opts: DetectionOptions) -> Vec<String> {
    opts.offsets()
        .flat_map(|d| Channel::ALL.iter().map(move |c| format!("d{d}:{}", c.name())))
        .collect()
}

/// The raw sensor values of the seven days before `day0`, in the order of
/// [`detection_feature_names`]. No imputation: any missing day is an error.
pub fn detection_features(
    behavior: &BehaviorIndex,
    cow: &CowId,
    day0: NaiveDate,
    opts: DetectionOptions,
) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(detection_feature_names(opts).len());
    for offset in opts.offsets() {
        let date = day0 - Days::new(offset.unsigned_abs());
        let rec = behavior
            .get(cow, date)
            .ok_or_else(|| Error::IncompleteSensorHistory {
                cow_id: cow.to_string(),
                missing: date.to_string(),
            })?;
        row.extend(rec.channels());
    }
    Ok(row)
}

/// One positive row per matched case at its day 0 and one negative row per
/// control anchored at the same calendar day. Unmatched episodes are skipped.
pub fn detection_matrix(
    episodes: &[Episode],
    behavior: &BehaviorIndex,
    opts: DetectionOptions,
) -> Result<FeatureMatrix> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    for ep in episodes {
        let Some(control) = &ep.control_cow_id else {
            continue;
        };
        rows.push(detection_features(behavior, &ep.case_cow_id, ep.day0, opts)?);
        labels.push(1);
        groups.push(ep.case_cow_id.clone());
        rows.push(detection_features(behavior, control, ep.day0, opts)?);
        labels.push(0);
        groups.push(control.clone());
    }
    FeatureMatrix::from_rows(detection_feature_names(opts), rows, labels, groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herd_data::BehaviorDay;

    fn day(n: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2023, 3, 1).unwrap() + Days::new(n)
    }

    fn record(d: u64, base: f64) -> BehaviorDay {
        BehaviorDay {
            cow_id: "c1".into(),
            date: day(d),
            non_active: base,
            active: base + 0.01,
            highly_active: base + 0.02,
            eating: base + 0.03,
            ruminating: base + 0.04,
            ear_temp: 38.0 + base,
        }
    }

    #[test]
    fn names_and_order() {
        let names = detection_feature_names(DetectionOptions::default());
        assert_eq!(names.len(), 42);
        assert_eq!(names[0], "d-7:non_active");
        assert_eq!(names[1], "d-7:active");
        assert_eq!(names[6], "d-6:non_active");
        assert_eq!(names[41], "d-1:ear_temp");
        let with0 = detection_feature_names(DetectionOptions { include_day0: true });
        assert_eq!(with0.len(), 48);
        assert_eq!(with0[47], "d0:ear_temp");
    }

    #[test]
    fn day_major_values() {
        let days: Vec<_> = (0..10).map(|d| record(d, d as f64 / 100.0)).collect();
        let idx = BehaviorIndex::new(&days);
        let row = detection_features(&idx, &"c1".into(), day(9), DetectionOptions::default()).unwrap();
        assert_eq!(row.len(), 42);
        assert_eq!(&row[..6], &record(2, 0.02).channels());
        assert_eq!(&row[36..], &record(8, 0.08).channels());
    }

    #[test]
    fn constant_channels_give_identical_blocks() {
        let days: Vec<_> = (0..10).map(|d| record(d, 0.3)).collect();
        let idx = BehaviorIndex::new(&days);
        let row = detection_features(&idx, &"c1".into(), day(9), DetectionOptions::default()).unwrap();
        for block in row.chunks(6) {
            assert_eq!(block, &row[..6]);
        }
    }

    #[test]
    fn missing_day_is_error() {
        let days: Vec<_> = (0..10).filter(|&d| d != 5).map(|d| record(d, 0.3)).collect();
        let idx = BehaviorIndex::new(&days);
        let err = detection_features(&idx, &"c1".into(), day(9), DetectionOptions::default()).unwrap_err();
        assert_eq!(err.code(), "incomplete_sensor_history");
    }
}
