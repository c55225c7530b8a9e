use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{BehaviorIndex, CowId, CowProfile, LesionObservation, LesionStatus};
use crate::{Error, Result};

/// Clean, fully recorded days required before the first active lesion.
pub const LOOKBACK_DAYS: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LactationPeriod {
    Early,
    Mid,
    Late,
}

/// Early up to and including 100 DIM, mid 101-199, late from 200.
pub fn lactation_period(dim: i64) -> Result<LactationPeriod> {
    match dim {
        d if d < 0 => Err(Error::InvalidArgument(format!("negative days in milk: {d}"))),
        0..=100 => Ok(LactationPeriod::Early),
        101..=199 => Ok(LactationPeriod::Mid),
        _ => Ok(LactationPeriod::Late),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrollmentChecks {
    /// Every day in the lookback has a sensor record.
    pub complete_sensor_history: bool,
    /// No lesion observed in the lookback.
    pub lesion_free_lookback: bool,
    /// A lesion is observed on day 0 and on day 0 + 1.
    pub persistent_lesion: bool,
}

impl EnrollmentChecks {
    pub fn all_passed(&self) -> bool {
        self.complete_sensor_history && self.lesion_free_lookback && self.persistent_lesion
    }

    fn first_failure(&self) -> Option<RejectionReason> {
        if !self.complete_sensor_history {
            Some(RejectionReason::IncompleteSensorHistory)
        } else if !self.lesion_free_lookback {
            Some(RejectionReason::LesionInLookback)
        } else if !self.persistent_lesion {
            Some(RejectionReason::LesionNotPersistent)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub case_cow_id: CowId,
    /// First day with an active lesion.
    pub day0: NaiveDate,
    pub control_cow_id: Option<CowId>,
    pub lactation_period: Option<LactationPeriod>,
    pub enrollment_checks: EnrollmentChecks,
    /// Why no control was assigned, when matching left the case unmatched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unmatched_reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    IncompleteSensorHistory,
    LesionInLookback,
    LesionNotPersistent,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::IncompleteSensorHistory => "incomplete_sensor_history",
            RejectionReason::LesionInLookback => "lesion_in_lookback",
            RejectionReason::LesionNotPersistent => "lesion_not_persistent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub cow_id: CowId,
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeDerivation {
    pub enrolled: Vec<Episode>,
    pub rejected: Vec<Rejection>,
}

fn lesions_by_cow(lesions: &[LesionObservation]) -> BTreeMap<&CowId, BTreeMap<NaiveDate, LesionStatus>> {
    let mut by_cow: BTreeMap<&CowId, BTreeMap<NaiveDate, LesionStatus>> = BTreeMap::new();
    for o in lesions {
        by_cow.entry(&o.cow_id).or_default().insert(o.date, o.status);
    }
    by_cow
}

/// Anchors one candidate episode per cow at its earliest active lesion and
/// checks the enrollment rules. Cows are visited in id order.
pub fn derive_episodes(lesions: &[LesionObservation], behavior: &BehaviorIndex) -> EpisodeDerivation {
    let mut out = EpisodeDerivation::default();
    for (cow, obs) in lesions_by_cow(lesions) {
        let Some(day0) = obs
            .iter()
            .find(|(_, s)| **s == LesionStatus::Active)
            .map(|(d, _)| *d)
        else {
            continue;
        };
        let first = day0 - Days::new(LOOKBACK_DAYS);
        let last = day0 - Days::new(1);
        let checks = EnrollmentChecks {
            complete_sensor_history: behavior.covers(cow, first, last),
            lesion_free_lookback: obs.range(first..=last).all(|(_, s)| !s.is_present()),
            persistent_lesion: obs
                .get(&(day0 + Days::new(1)))
                .is_some_and(|s| s.is_present()),
        };
        match checks.first_failure() {
            Some(reason) => out.rejected.push(Rejection {
                cow_id: cow.clone(),
                reason,
            }),
            None => out.enrolled.push(Episode {
                case_cow_id: cow.clone(),
                day0,
                control_cow_id: None,
                lactation_period: None,
                enrollment_checks: checks,
                unmatched_reason: None,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOptions {
    /// Days before day 0 a control must have sensor records for.
    pub horizon_days: u64,
    /// Also require a record on day 0 itself.
    pub include_day0: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            horizon_days: LOOKBACK_DAYS,
            include_day0: false,
        }
    }
}

/// Assigns each case at most one healthy control with identical parity,
/// reproduction status and lactation period (on the case's day 0).
///
/// Cases are processed in ascending `(day0, case_cow_id)` order; each takes
/// the eligible candidate nearest in DIM, then smallest cow id. A control is
/// used at most once. Unmatched cases come back with `control_cow_id = None`
/// and an `unmatched_reason`.
pub fn match_controls(
    cases: &[Episode],
    profiles: &[CowProfile],
    lesions: &[LesionObservation],
    behavior: &BehaviorIndex,
    opts: MatchOptions,
) -> Vec<Episode> {
    let profile_of: HashMap<&CowId, &CowProfile> = profiles.iter().map(|p| (&p.cow_id, p)).collect();
    let with_lesion: BTreeSet<&CowId> = lesions
        .iter()
        .filter(|o| o.status.is_present())
        .map(|o| &o.cow_id)
        .collect();
    let case_ids: BTreeSet<&CowId> = cases.iter().map(|e| &e.case_cow_id).collect();
    let mut pool: Vec<&CowProfile> = profiles
        .iter()
        .filter(|p| !with_lesion.contains(&p.cow_id) && !case_ids.contains(&p.cow_id))
        .collect();
    pool.sort_by(|a, b| a.cow_id.cmp(&b.cow_id));
    let mut used: BTreeSet<&CowId> = BTreeSet::new();

    let mut order: Vec<&Episode> = cases.iter().collect();
    order.sort_by(|a, b| (a.day0, &a.case_cow_id).cmp(&(b.day0, &b.case_cow_id)));

    order
        .into_iter()
        .map(|case| {
            let mut ep = case.clone();
            ep.control_cow_id = None;
            ep.unmatched_reason = None;
            let Some(profile) = profile_of.get(&case.case_cow_id) else {
                ep.unmatched_reason = Some("no_profile".into());
                return ep;
            };
            let dim = profile.dim_on(case.day0);
            let Ok(period) = lactation_period(dim) else {
                ep.unmatched_reason = Some("negative_dim".into());
                return ep;
            };
            ep.lactation_period = Some(period);

            let first = case.day0 - Days::new(opts.horizon_days);
            let last = if opts.include_day0 {
                case.day0
            } else {
                case.day0 - Days::new(1)
            };
            let best = pool
                .iter()
                .filter(|c| !used.contains(&c.cow_id))
                .filter(|c| c.parity == profile.parity && c.repro_status == profile.repro_status)
                .filter_map(|c| {
                    let cdim = c.dim_on(case.day0);
                    (lactation_period(cdim).ok() == Some(period)).then_some((c, cdim))
                })
                .filter(|(c, _)| behavior.covers(&c.cow_id, first, last))
                .min_by(|(a, adim), (b, bdim)| {
                    ((adim - dim).abs(), &a.cow_id).cmp(&((bdim - dim).abs(), &b.cow_id))
                });
            match best {
                Some((c, _)) => {
                    used.insert(&c.cow_id);
                    ep.control_cow_id = Some(c.cow_id.clone());
                }
                None => ep.unmatched_reason = Some("no_eligible_control".into()),
            }
            ep
        })
        .collect()
}
