use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::{CowId, FeatureMatrix};
use crate::{seed, Error, Result};

/// Distinct groups in a seeded uniform random order.
fn shuffled_groups(group_ids: &[CowId], seed: u64) -> Vec<CowId> {
    let mut groups = group_ids.to_vec();
    groups.sort();
    groups.dedup();
    groups.shuffle(&mut seed::rng(seed));
    groups
}

/// Row indices of a cow-grouped train/test partition.
///
/// `round(test_fraction * groups)` groups (at least one, at most all but
/// one) go to the test side.
pub fn grouped_split_indices(
    group_ids: &[CowId],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} not in (0, 1)"
        )));
    }
    let groups = shuffled_groups(group_ids, seed);
    if groups.len() < 2 {
        return Err(Error::InsufficientGroups {
            needed: 2,
            found: groups.len(),
        });
    }
    let n_test = ((test_fraction * groups.len() as f64).round() as usize).clamp(1, groups.len() - 1);
    let test: HashMap<&CowId, ()> = groups[..n_test].iter().map(|g| (g, ())).collect();
    let (test_rows, train_rows): (Vec<usize>, Vec<usize>) =
        (0..group_ids.len()).partition(|&i| test.contains_key(&group_ids[i]));
    Ok((train_rows, test_rows))
}

pub fn grouped_split(
    matrix: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let (train, test) = grouped_split_indices(matrix.group_ids(), test_fraction, seed)?;
    Ok((matrix.select_rows(&train), matrix.select_rows(&test)))
}

/// One cross-validation fold: row indices of both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Cow-grouped k-fold assignment. Shuffled groups are dealt into `k`
/// contiguous folds; the first `groups % k` folds get one extra group.
pub fn grouped_kfold_indices(group_ids: &[CowId], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k}, need k >= 2")));
    }
    let groups = shuffled_groups(group_ids, seed);
    if groups.len() < k {
        return Err(Error::InsufficientGroups {
            needed: k,
            found: groups.len(),
        });
    }
    let base = groups.len() / k;
    let extra = groups.len() % k;
    let mut fold_of: HashMap<&CowId, usize> = HashMap::with_capacity(groups.len());
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for g in &groups[start..start + size] {
            fold_of.insert(g, f);
        }
        start += size;
    }
    Ok((0..k)
        .map(|f| {
            let (validation, train) = (0..group_ids.len()).partition(|&i| fold_of[&group_ids[i]] == f);
            Fold { train, validation }
        })
        .collect())
}

/// Materialized `(train, validation)` pairs.
pub fn grouped_kfold(
    matrix: &FeatureMatrix,
    k: usize,
    seed: u64,
) -> Result<Vec<(FeatureMatrix, FeatureMatrix)>> {
    Ok(grouped_kfold_indices(matrix.group_ids(), k, seed)?
        .into_iter()
        .map(|f| (matrix.select_rows(&f.train), matrix.select_rows(&f.validation)))
        .collect())
}
