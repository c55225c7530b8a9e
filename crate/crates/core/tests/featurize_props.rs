mod common;

use ddwarn_core::featurize::{kmeans_undersample_indices, pearson_matrix, poly2_expand, MinMaxParams};
use ddwarn_core::FeatureMatrix;
use proptest::prelude::*;

proptest! {
    #[test]
    fn minmax_maps_train_extremes_to_unit_interval(m in common::matrix_strategy(2..40, 1..6)) {
        let p = MinMaxParams::fit(&m).unwrap();
        let scaled = p.apply(&m).unwrap();
        for j in 0..m.n_cols() {
            let col = m.column(j);
            let s = scaled.column(j);
            let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &x| (a.0.min(x), a.1.max(x)));
            if hi > lo {
                let imin = col.iter().position(|&x| x == lo).unwrap();
                let imax = col.iter().position(|&x| x == hi).unwrap();
                prop_assert!(s[imin].abs() < 1e-12);
                prop_assert!((s[imax] - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(s.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn scaler_fit_ignores_held_out_rows(
        m in common::matrix_strategy(4..30, 1..5),
        noise in proptest::collection::vec(-1e3..1e3f64, 200),
    ) {
        let half = m.n_rows() / 2;
        let train = m.select_rows(&(0..half).collect::<Vec<_>>());
        let held: Vec<usize> = (half..m.n_rows()).collect();
        let before = MinMaxParams::fit(&train).unwrap();
        let mut values = m.values().to_vec();
        for (k, i) in held.iter().enumerate() {
            for j in 0..m.n_cols() {
                values[i * m.n_cols() + j] = noise[(k * m.n_cols() + j) % noise.len()];
            }
        }
        let mutated = FeatureMatrix::new(m.feature_names().to_vec(), values, m.labels().to_vec(), m.group_ids().to_vec()).unwrap();
        let after = MinMaxParams::fit(&mutated.select_rows(&(0..half).collect::<Vec<_>>())).unwrap();
        prop_assert_eq!(&before, &after);
        prop_assert_eq!(before.apply(&train).unwrap(), after.apply(&train).unwrap());
    }

    #[test]
    fn pearson_is_symmetric_with_unit_diagonal(m in common::matrix_strategy(2..40, 1..8)) {
        let c = pearson_matrix(&m).unwrap();
        for i in 0..m.n_cols() {
            prop_assert_eq!(c.get(i, i), 1.0);
            for j in 0..m.n_cols() {
                prop_assert!((c.get(i, j) - c.get(j, i)).abs() <= 1e-12);
                prop_assert!((-1.0..=1.0).contains(&c.get(i, j)));
            }
        }
    }

    #[test]
    fn poly2_width_identity(row in proptest::collection::vec(-5.0..5.0f64, 1..65)) {
        let c = row.len();
        let out = poly2_expand(&row);
        prop_assert_eq!(out.len(), c + c * (c + 1) / 2);
        prop_assert_eq!(&out[..c], &row[..]);
    }

    #[test]
    fn undersampling_keeps_distinct_real_rows(m in common::matrix_strategy(1..50, 1..4), frac in 0.01..1.0f64, seed: u64) {
        let n = ((m.n_rows() as f64 * frac).ceil() as usize).clamp(1, m.n_rows());
        let idx = kmeans_undersample_indices(&m, n, seed).unwrap();
        prop_assert_eq!(idx.len(), n);
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(idx.iter().all(|&i| i < m.n_rows()));
        prop_assert_eq!(idx, kmeans_undersample_indices(&m, n, seed).unwrap());
    }
}
