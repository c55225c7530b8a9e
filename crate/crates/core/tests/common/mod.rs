#![allow(dead_code)]

use ddwarn_core::synthherd::{generate, Ramp, Signal, SynthConfig, SynthHerd};
use ddwarn_core::{Channel, CowId, FeatureMatrix};
use proptest::prelude::*;

pub fn ids(n: usize) -> Vec<CowId> {
    (0..n).map(|i| CowId::new(format!("c{i:03}"))).collect()
}

/// Random matrix with `rows` rows spread over at most `groups` cows and both
/// labels present.
pub fn matrix_strategy(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = FeatureMatrix> {
    (rows, cols).prop_flat_map(|(r, c)| {
        (
            proptest::collection::vec(-10.0..10.0f64, r * c),
            proptest::collection::vec(0u8..2, r),
            proptest::collection::vec(0usize..(r / 2).max(2), r),
            Just(c),
        )
            .prop_map(|(values, mut labels, groups, c)| {
                labels[0] = 0;
                let last = labels.len() - 1;
                labels[last] = 1;
                let names = (0..c).map(|j| format!("f{j}")).collect();
                let groups = groups.into_iter().map(|g| CowId::new(format!("g{g:02}"))).collect();
                FeatureMatrix::new(names, values, labels, groups).unwrap()
            })
    })
}

pub fn planted(seed: u64, shift: f64) -> SynthHerd {
    let mut shifts = [0.0; 6];
    shifts[Channel::Active.index()] = shift;
    generate(&SynthConfig {
        signal: Signal { lead_days: 4, shifts, ramp: Ramp::Step },
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}
