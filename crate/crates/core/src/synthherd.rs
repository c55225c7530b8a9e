//! Seeded generator of synthetic herds with a planted disease signature.
//!
//! Every cow gets a per-channel baseline drawn from a configured range plus
//! i.i.d. Gaussian daily noise. Each case cow has a day 0 somewhere after
//! `min_day0_offset`, an active lesion for `lesion_days` days followed by a
//! digressing one, and channel shifts that ramp in over `lead_days` before
//! day 0 and stay at full strength from day 0 on. Each case has a healthy
//! twin with the same parity, reproduction status and lactation period, so
//! case/control matching always succeeds.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::herd_data::{
    BehaviorDay, Channel, CowId, CowProfile, HerdDataset, LactationPeriod, LesionObservation,
    LesionSize, LesionStatus, ReproStatus, LOOKBACK_DAYS,
};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelBaseline {
    /// Per-cow means are drawn uniformly from `[mean_lo, mean_hi]`.
    pub mean_lo: f64,
    pub mean_hi: f64,
    /// Daily noise standard deviation; shifts are expressed in this unit.
    pub noise_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// `shift * (1 - d / lead_days)` at `d` days before day 0.
    Linear,
    /// Full shift for `d < lead_days`.
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub lead_days: u32,
    /// Shift per channel in units of that channel's noise std, indexed by
    /// [`Channel::index`].
    pub shifts: [f64; 6],
    pub ramp: Ramp,
}

impl Signal {
    pub fn none() -> Signal {
        Signal {
            lead_days: 0,
            shifts: [0.0; 6],
            ramp: Ramp::Linear,
        }
    }

    /// Fraction of the full shift applied `days_before` days ahead of day 0
    /// (zero or negative means on or after day 0).
    pub fn strength(&self, days_before: i64) -> f64 {
        if days_before <= 0 {
            return 1.0;
        }
        let lead = i64::from(self.lead_days);
        if days_before >= lead {
            return 0.0;
        }
        match self.ramp {
            Ramp::Linear => 1.0 - days_before as f64 / lead as f64,
            Ramp::Step => 1.0,
        }
    }
}

impl Default for Signal {
    /// Activity drops and inactivity rises ahead of a lesion.
    fn default() -> Self {
        let mut shifts = [0.0; 6];
        shifts[Channel::Active.index()] = -3.0;
        shifts[Channel::NonActive.index()] = 2.0;
        Signal {
            lead_days: 4,
            shifts,
            ramp: Ramp::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_cases: usize,
    /// Healthy cows beyond the one twin control per case.
    pub n_extra_healthy: usize,
    pub trial_days: u32,
    pub start_date: NaiveDate,
    /// Indexed by [`Channel::index`].
    pub baselines: [ChannelBaseline; 6],
    pub signal: Signal,
    /// Days a lesion stays active before it digresses.
    pub lesion_days: u32,
    /// Earliest trial day (0-based) a case's day 0 may fall on.
    pub min_day0_offset: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let b = |mean_lo, mean_hi, noise_std| ChannelBaseline {
            mean_lo,
            mean_hi,
            noise_std,
        };
        SynthConfig {
            n_cases: 21,
            n_extra_healthy: 0,
            trial_days: 60,
            start_date: NaiveDate::from_ymd_opt(2023, 3, 1).expect("valid date"),
            baselines: [
                b(0.40, 0.55, 0.04),
                b(0.20, 0.30, 0.03),
                b(0.03, 0.08, 0.01),
                b(0.15, 0.25, 0.03),
                b(0.25, 0.35, 0.03),
                b(37.5, 38.5, 0.3),
            ],
            signal: Signal::default(),
            lesion_days: 5,
            min_day0_offset: 14,
            seed: 0,
        }
    }
}

/// Longest trial for which a cow can stay in one lactation period (the mid
/// period spans DIM 101..=199).
pub const MAX_TRIAL_DAYS: u32 = 99;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let infeasible = |m: String| Err(Error::InfeasibleConfig(m));
        if self.n_cases == 0 {
            return infeasible("n_cases must be at least 1".into());
        }
        if self.trial_days > MAX_TRIAL_DAYS {
            return infeasible(format!(
                "trial_days {} > {MAX_TRIAL_DAYS}: cows could not stay in one lactation period",
                self.trial_days
            ));
        }
        if self.lesion_days < 2 {
            return infeasible("lesion_days must be at least 2 for a persistent lesion".into());
        }
        if u64::from(self.min_day0_offset) < LOOKBACK_DAYS {
            return infeasible(format!("min_day0_offset must be at least {LOOKBACK_DAYS}"));
        }
        if self.min_day0_offset + self.lesion_days > self.trial_days {
            return infeasible(format!(
                "no room for day 0: min_day0_offset {} + lesion_days {} > trial_days {}",
                self.min_day0_offset, self.lesion_days, self.trial_days
            ));
        }
        for c in Channel::ALL {
            let b = self.baselines[c.index()];
            let ok = b.mean_lo.is_finite() && b.mean_hi.is_finite() && b.noise_std.is_finite();
            if !ok || b.mean_lo > b.mean_hi || b.noise_std < 0.0 {
                return Err(Error::InvalidArgument(format!("bad baseline for {c}")));
            }
            if c.is_proportion() && (b.mean_lo < 0.0 || b.mean_hi > 1.0) {
                return Err(Error::InvalidArgument(format!("{c} baseline must lie in [0, 1]")));
            }
        }
        if self.signal.shifts.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("signal shifts must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthHerd {
    pub dataset: HerdDataset,
    /// Planted day 0 of every case cow.
    pub day0: BTreeMap<CowId, NaiveDate>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// DIM at trial start keeping the cow inside `period` for the whole trial.
fn start_dim(period: LactationPeriod, trial_days: u32, rng: &mut seed::Rng) -> i64 {
    let span = i64::from(trial_days) - 1;
    let (lo, hi) = match period {
        LactationPeriod::Early => (0, 100 - span),
        LactationPeriod::Mid => (101, 199 - span),
        LactationPeriod::Late => (200, 300),
    };
    rng.random_range(lo..=hi)
}

fn random_key(rng: &mut seed::Rng) -> (u32, ReproStatus, LactationPeriod) {
    let parity = rng.random_range(1..=5);
    let repro = if rng.random_bool(0.5) {
        ReproStatus::Pregnant
    } else {
        ReproStatus::Open
    };
    let period = [LactationPeriod::Early, LactationPeriod::Mid, LactationPeriod::Late][rng.random_range(0..3)];
    (parity, repro, period)
}

pub fn generate(config: &SynthConfig) -> Result<SynthHerd> {
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let n_cows = 2 * config.n_cases + config.n_extra_healthy;
    let width = n_cows.to_string().len().max(3);
    // neutral ids so file order reveals nothing about roles
    let mut ids: Vec<CowId> = (1..=n_cows).map(|i| CowId::new(format!("cow{i:0width$}"))).collect();
    ids.shuffle(&mut rng);

    let day = |offset: i64| config.start_date + Days::new(offset as u64);
    let last_offset = i64::from(config.trial_days) - 1;

    let mut profiles = Vec::with_capacity(n_cows);
    let mut behavior = Vec::with_capacity(n_cows * config.trial_days as usize);
    let mut lesions = Vec::with_capacity(n_cows * config.trial_days as usize);
    let mut day0s = BTreeMap::new();

    for (i, cow) in ids.iter().enumerate() {
        let case_index = (i < 2 * config.n_cases && i % 2 == 0).then_some(i / 2);
        // twins share the key of the case just before them
        let key = if i < 2 * config.n_cases && i % 2 == 1 {
            let prev: &CowProfile = profiles.last().expect("case precedes twin");
            let dim = prev.dim_on(config.start_date);
            let period = crate::herd_data::lactation_period(dim)?;
            (prev.parity, prev.repro_status, period)
        } else {
            random_key(&mut rng)
        };
        let dim = start_dim(key.2, config.trial_days, &mut rng);
        profiles.push(CowProfile {
            cow_id: cow.clone(),
            parity: key.0,
            repro_status: key.1,
            calving_date: config.start_date - Days::new(dim as u64),
        });

        let means: Vec<f64> = config
            .baselines
            .iter()
            .map(|b| rng.random_range(b.mean_lo..=b.mean_hi))
            .collect();
        let day0_offset = case_index.map(|_| {
            i64::from(rng.random_range(config.min_day0_offset..=config.trial_days - config.lesion_days))
        });
        if let Some(off) = day0_offset {
            day0s.insert(cow.clone(), day(off));
        }

        for t in 0..=last_offset {
            let strength = day0_offset.map_or(0.0, |d0| config.signal.strength(d0 - t));
            let mut v = [0.0; 6];
            for c in Channel::ALL {
                let b = config.baselines[c.index()];
                let z: f64 = StandardNormal.sample(&mut rng);
                let shift = strength * config.signal.shifts[c.index()] * b.noise_std;
                let mut x = means[c.index()] + b.noise_std * z + shift;
                if c.is_proportion() {
                    x = x.clamp(0.0, 1.0);
                }
                v[c.index()] = round4(x);
            }
            behavior.push(BehaviorDay {
                cow_id: cow.clone(),
                date: day(t),
                non_active: v[0],
                active: v[1],
                highly_active: v[2],
                eating: v[3],
                ruminating: v[4],
                ear_temp: v[5],
            });

            let (status, size) = match day0_offset {
                Some(d0) if t >= d0 && t < d0 + i64::from(config.lesion_days) => {
                    let size = [LesionSize::Small, LesionSize::Medium, LesionSize::Large][rng.random_range(0..3)];
                    (LesionStatus::Active, size)
                }
                Some(d0) if t >= d0 => (LesionStatus::Digressing, LesionSize::Small),
                _ => (LesionStatus::None, LesionSize::None),
            };
            lesions.push(LesionObservation {
                cow_id: cow.clone(),
                date: day(t),
                status,
                size,
            });
        }
    }

    profiles.sort_by(|a, b| a.cow_id.cmp(&b.cow_id));
    behavior.sort_by(|a, b| (&a.cow_id, a.date).cmp(&(&b.cow_id, b.date)));
    lesions.sort_by(|a, b| (&a.cow_id, a.date).cmp(&(&b.cow_id, b.date)));
    Ok(SynthHerd {
        dataset: HerdDataset {
            behavior,
            lesions,
            profiles,
        },
        day0: day0s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herd_data::{derive_episodes, match_controls, MatchOptions};

    #[test]
    fn strength_profiles() {
        let s = Signal { lead_days: 4, shifts: [0.0; 6], ramp: Ramp::Linear };
        let got: Vec<f64> = (0..=5).map(|d| s.strength(d)).collect();
        assert_eq!(got, vec![1.0, 0.75, 0.5, 0.25, 0.0, 0.0]);
        let step = Signal { ramp: Ramp::Step, ..s };
        assert_eq!((0..=5).map(|d| step.strength(d)).collect::<Vec<_>>(), vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        let zero = Signal { lead_days: 0, ..s };
        assert_eq!(zero.strength(1), 0.0);
        assert_eq!(zero.strength(0), 1.0);
    }

    #[test]
    fn enrolls_and_matches_every_case() {
        let cfg = SynthConfig { n_cases: 12, n_extra_healthy: 5, seed: 4, ..SynthConfig::default() };
        let herd = generate(&cfg).unwrap();
        let ds = &herd.dataset;
        assert_eq!(ds.profiles.len(), 29);
        let idx = ds.behavior_index();
        let der = derive_episodes(&ds.lesions, &idx);
        assert_eq!(der.enrolled.len(), 12);
        assert!(der.rejected.is_empty());
        let matched = match_controls(&der.enrolled, &ds.profiles, &ds.lesions, &idx, MatchOptions::default());
        assert!(matched.iter().all(|e| e.control_cow_id.is_some()), "{matched:?}");
        for e in &matched {
            assert_eq!(herd.day0[&e.case_cow_id], e.day0);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig { n_cases: 3, seed: 9, ..SynthConfig::default() };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.dataset.behavior, b.dataset.behavior);
        assert_eq!(a.dataset.lesions, b.dataset.lesions);
        assert_eq!(a.dataset.profiles, b.dataset.profiles);
    }

    #[test]
    fn infeasible_configs() {
        for cfg in [
            SynthConfig { trial_days: 120, ..SynthConfig::default() },
            SynthConfig { trial_days: 18, ..SynthConfig::default() },
            SynthConfig { min_day0_offset: 3, ..SynthConfig::default() },
            SynthConfig { lesion_days: 1, ..SynthConfig::default() },
        ] {
            assert_eq!(generate(&cfg).unwrap_err().code(), "infeasible_config");
        }
    }
}
