use crate::herd_data::FeatureMatrix;

/// `c + c(c+1)/2`.
pub fn poly2_width(c: usize) -> usize {
    c + c * (c + 1) / 2
}

/// Originals followed by every product `x_i * x_j`, `i <= j`, in
/// lexicographic `(i, j)` order. No bias term.
pub fn poly2_expand(row: &[f64]) -> Vec<f64> {
    let c = row.len();
    let mut out = Vec::with_capacity(poly2_width(c));
    out.extend_from_slice(row);
    for i in 0..c {
        for j in i..c {
            out.push(row[i] * row[j]);
        }
    }
    out
}

pub fn poly2_names(names: &[String]) -> Vec<String> {
    let mut out = names.to_vec();
    for i in 0..names.len() {
        for j in i..names.len() {
            out.push(format!("{}*{}", names[i], names[j]));
        }
    }
    out
}

pub fn poly2_matrix(matrix: &FeatureMatrix) -> FeatureMatrix {
    let values = matrix.rows().flat_map(poly2_expand).collect();
    matrix.with_features(poly2_names(matrix.feature_names()), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_features() {
        assert_eq!(poly2_expand(&[2.0, 3.0]), vec![2.0, 3.0, 4.0, 6.0, 9.0]);
        let names = poly2_names(&["a".into(), "b".into()]);
        assert_eq!(names, vec!["a", "b", "a*a", "a*b", "b*b"]);
    }

    #[test]
    fn detection_width() {
        assert_eq!(poly2_expand(&[1.0; 42]).len(), 945);
        assert_eq!(poly2_width(42), 945);
    }

    #[test]
    fn zero_vector() {
        assert_eq!(poly2_expand(&[0.0; 5]), vec![0.0; 20]);
    }

    #[test]
    fn width_identity() {
        for c in 1..=64 {
            let row: Vec<f64> = (0..c).map(|i| i as f64).collect();
            assert_eq!(poly2_expand(&row).len(), c + c * (c + 1) / 2);
        }
    }
}
