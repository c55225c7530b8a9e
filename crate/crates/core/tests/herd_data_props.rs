mod common;

use std::collections::BTreeSet;

use chrono::Days;
use ddwarn_core::herd_data::{
    derive_episodes, grouped_kfold_indices, grouped_split_indices, lactation_period, match_controls, parse_behavior,
    parse_lesions, parse_profiles, write_behavior, write_lesions, write_profiles, MatchOptions, TempBounds,
    LOOKBACK_DAYS,
};
use ddwarn_core::CowId;
use proptest::prelude::*;

fn groups_strategy() -> impl Strategy<Value = Vec<CowId>> {
    proptest::collection::vec(0usize..30, 4..120)
        .prop_map(|g| g.into_iter().map(|i| CowId::new(format!("g{i:02}"))).collect())
}

fn cows(groups: &[CowId], idx: &[usize]) -> BTreeSet<CowId> {
    idx.iter().map(|&i| groups[i].clone()).collect()
}

proptest! {
    #[test]
    fn split_never_shares_a_cow(groups in groups_strategy(), frac in 0.1..0.6f64, seed: u64) {
        let distinct = cows(&groups, &(0..groups.len()).collect::<Vec<_>>()).len();
        prop_assume!(distinct >= 2);
        let (train, test) = grouped_split_indices(&groups, frac, seed).unwrap();
        prop_assert!(cows(&groups, &train).is_disjoint(&cows(&groups, &test)));
        prop_assert_eq!(train.len() + test.len(), groups.len());
        prop_assert!(!train.is_empty() && !test.is_empty());
    }

    #[test]
    fn kfold_never_shares_a_cow(groups in groups_strategy(), k in 2usize..8, seed: u64) {
        let distinct = cows(&groups, &(0..groups.len()).collect::<Vec<_>>()).len();
        prop_assume!(distinct >= k);
        let folds = grouped_kfold_indices(&groups, k, seed).unwrap();
        let mut seen = vec![0; groups.len()];
        for f in &folds {
            prop_assert!(cows(&groups, &f.train).is_disjoint(&cows(&groups, &f.validation)));
            f.validation.iter().for_each(|&i| seen[i] += 1);
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn synthetic_files_round_trip(seed in 0u64..1000) {
        let herd = common::planted(seed, -3.0);
        let ds = &herd.dataset;
        let mut b = Vec::new();
        write_behavior(&mut b, &ds.behavior).unwrap();
        prop_assert_eq!(&parse_behavior(&b[..], TempBounds::default()).unwrap(), &ds.behavior);
        let mut again = Vec::new();
        write_behavior(&mut again, &parse_behavior(&b[..], TempBounds::default()).unwrap()).unwrap();
        prop_assert_eq!(&again, &b);

        let mut l = Vec::new();
        write_lesions(&mut l, &ds.lesions).unwrap();
        prop_assert_eq!(&parse_lesions(&l[..]).unwrap(), &ds.lesions);
        let mut p = Vec::new();
        write_profiles(&mut p, &ds.profiles).unwrap();
        prop_assert_eq!(&parse_profiles(&p[..]).unwrap(), &ds.profiles);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn episodes_and_matches_reverify_against_raw_inputs(seed in 0u64..1000, extra in 0usize..10) {
        let herd = ddwarn_core::synthherd::generate(&ddwarn_core::synthherd::SynthConfig {
            n_extra_healthy: extra,
            seed,
            ..Default::default()
        }).unwrap();
        let ds = &herd.dataset;
        let index = ds.behavior_index();
        let der = derive_episodes(&ds.lesions, &index);
        for ep in &der.enrolled {
            let first = ep.day0 - Days::new(LOOKBACK_DAYS);
            let last = ep.day0 - Days::new(1);
            prop_assert!(index.covers(&ep.case_cow_id, first, last));
            let obs = |d| ds.lesions.iter().find(|o| o.cow_id == ep.case_cow_id && o.date == d);
            prop_assert!(first.iter_days().take_while(|d| *d <= last).all(|d| obs(d).is_none_or(|o| !o.status.is_present())));
            prop_assert!(obs(ep.day0).is_some_and(|o| o.status.is_present()));
            prop_assert!(obs(ep.day0 + Days::new(1)).is_some_and(|o| o.status.is_present()));
        }
        let matched = match_controls(&der.enrolled, &ds.profiles, &ds.lesions, &index, MatchOptions::default());
        let mut controls = BTreeSet::new();
        for ep in &matched {
            let Some(ctrl) = &ep.control_cow_id else { continue };
            prop_assert!(controls.insert(ctrl.clone()), "control reused");
            let p = |id: &CowId| ds.profiles.iter().find(|p| &p.cow_id == id).unwrap();
            let (case, control) = (p(&ep.case_cow_id), p(ctrl));
            prop_assert_eq!(case.parity, control.parity);
            prop_assert_eq!(case.repro_status, control.repro_status);
            prop_assert_eq!(
                lactation_period(case.dim_on(ep.day0)).unwrap(),
                lactation_period(control.dim_on(ep.day0)).unwrap()
            );
        }
    }
}
