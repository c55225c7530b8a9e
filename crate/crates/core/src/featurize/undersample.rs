use crate::herd_data::FeatureMatrix;
use crate::learners::{kmeans, squared_distance, KMeansParams};
use crate::{Error, Result};

/// Row indices (ascending) of the k-means representatives of `negatives`.
///
/// Runs k-means with `k = n_positives` and keeps, for each cluster, the
/// member row closest to the final centroid (lowest index on ties). Every
/// kept row is a real input row and no row is kept twice.
pub fn kmeans_undersample_indices(
    negatives: &FeatureMatrix,
    n_positives: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if n_positives == 0 {
        return Err(Error::InvalidArgument("n_positives must be at least 1".into()));
    }
    if n_positives > negatives.n_rows() {
        return Err(Error::InsufficientSamples(format!(
            "{n_positives} positives but only {} negatives",
            negatives.n_rows()
        )));
    }
    let points: Vec<&[f64]> = negatives.rows().collect();
    // one restart: representatives need a good partition, not the optimum,
    // and this runs once per sweep cell and side
    let params = KMeansParams {
        n_init: 1,
        ..KMeansParams::default()
    };
    let fit = kmeans(&points, n_positives, seed, params)?;
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n_positives];
    for (i, (&cluster, p)) in fit.assignments.iter().zip(&points).enumerate() {
        let d = squared_distance(p, &fit.centroids[cluster]);
        if best[cluster].is_none_or(|(bd, _)| d < bd) {
            best[cluster] = Some((d, i));
        }
    }
    let mut taken = vec![false; points.len()];
    let mut out = Vec::with_capacity(n_positives);
    for (cluster, pick) in best.iter().enumerate() {
        let idx = match pick {
            Some((_, i)) => *i,
            // k-means re-seeds emptied clusters, so this is only a fallback
            None => (0..points.len())
                .filter(|&i| !taken[i])
                .min_by(|&a, &b| {
                    squared_distance(points[a], &fit.centroids[cluster])
                        .total_cmp(&squared_distance(points[b], &fit.centroids[cluster]))
                })
                .expect("k <= n leaves a free row"),
        };
        taken[idx] = true;
        out.push(idx);
    }
    out.sort_unstable();
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

/// Under-samples `negatives` to exactly `n_positives` rows.
pub fn kmeans_undersample(
    negatives: &FeatureMatrix,
    n_positives: usize,
    seed: u64,
) -> Result<FeatureMatrix> {
    let idx = kmeans_undersample_indices(negatives, n_positives, seed)?;
    Ok(negatives.select_rows(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herd_data::CowId;

    fn blobs() -> FeatureMatrix {
        let pts = [
            [0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1], [0.05, 0.05],
            [10.0, 10.0], [10.2, 10.0], [10.0, 10.2], [10.1, 10.1],
        ];
        FeatureMatrix::from_rows(
            vec!["x".into(), "y".into()],
            pts.iter().map(|p| p.to_vec()).collect(),
            vec![0; pts.len()],
            (0..pts.len()).map(|i| CowId::new(format!("c{i}"))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_when_counts_match() {
        let m = blobs();
        assert_eq!(kmeans_undersample_indices(&m, m.n_rows(), 3).unwrap(), (0..m.n_rows()).collect::<Vec<_>>());
    }

    #[test]
    fn one_representative_per_blob() {
        let m = blobs();
        let idx = kmeans_undersample_indices(&m, 2, 11).unwrap();
        assert_eq!(idx.len(), 2);
        assert!(idx[0] < 5 && idx[1] >= 5, "{idx:?}");
        // brute force: each pick is the member nearest its blob mean
        let mean = |r: std::ops::Range<usize>| {
            let n = r.len() as f64;
            let (sx, sy) = r.clone().fold((0.0, 0.0), |(a, b), i| (a + m.get(i, 0), b + m.get(i, 1)));
            (r, [sx / n, sy / n])
        };
        for (pick, (range, c)) in idx.iter().zip([mean(0..5), mean(5..9)]) {
            let nearest = range
                .min_by(|&a, &b| squared_distance(m.row(a), &c).total_cmp(&squared_distance(m.row(b), &c)))
                .unwrap();
            assert_eq!(*pick, nearest);
        }
    }

    #[test]
    fn deterministic_and_errors() {
        let m = blobs();
        assert_eq!(kmeans_undersample(&m, 4, 5).unwrap(), kmeans_undersample(&m, 4, 5).unwrap());
        assert!(kmeans_undersample(&m, 10, 5).is_err());
        assert!(kmeans_undersample(&m, 0, 5).is_err());
    }
}
