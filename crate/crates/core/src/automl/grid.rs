use serde::{Deserialize, Serialize};

use super::pipeline::{evaluate_pipeline, ClassifierSpec, CvScore, GrammarBounds, KnnSpec, PipelineSpec, RfSpec};
use crate::herd_data::FeatureMatrix;
use crate::par::{map_slice, Execution};
use crate::{Error, Result};

/// Candidate values per hyperparameter. An empty list keeps the incumbent's
/// value; lists for hyperparameters the classifier does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub knn_k: Vec<usize>,
    pub rf_weight: Vec<f64>,
}

impl HyperGrid {
    /// All grid points around `spec`, in lexicographic
    /// `(n_trees, max_depth, knn_k, rf_weight)` order with the last varying
    /// fastest. Scaler, expander and classifier family stay fixed.
    pub fn points(&self, spec: &PipelineSpec) -> Result<Vec<PipelineSpec>> {
        let (rf, knn, w) = match spec.classifier {
            ClassifierSpec::Rf(rf) => (Some(rf), None, None),
            ClassifierSpec::Knn(knn) => (None, Some(knn), None),
            ClassifierSpec::Ensemble { rf, knn, rf_weight } => (Some(rf), Some(knn), Some(rf_weight)),
        };
        fn axis<T: Copy>(values: &[T], incumbent: T, used: bool, any: &mut bool) -> Vec<T> {
            if used && !values.is_empty() {
                *any = true;
                values.to_vec()
            } else {
                vec![incumbent]
            }
        }
        let mut any = false;
        let rf0 = rf.unwrap_or_default();
        let trees = axis(&self.n_trees, rf0.n_trees, rf.is_some(), &mut any);
        let depths = axis(&self.max_depth, rf0.max_depth, rf.is_some(), &mut any);
        let ks = axis(&self.knn_k, knn.unwrap_or_default().k, knn.is_some(), &mut any);
        let ws = axis(&self.rf_weight, w.unwrap_or(0.5), w.is_some(), &mut any);
        if !any {
            return Err(Error::EmptyInput("grid has no values for this pipeline's hyperparameters"));
        }
        let mut out = Vec::with_capacity(trees.len() * depths.len() * ks.len() * ws.len());
        for &n_trees in &trees {
            for &max_depth in &depths {
                for &k in &ks {
                    for &rf_weight in &ws {
                        let rf = RfSpec { n_trees, max_depth };
                        let knn = KnnSpec { k };
                        let classifier = match spec.classifier {
                            ClassifierSpec::Rf(_) => ClassifierSpec::Rf(rf),
                            ClassifierSpec::Knn(_) => ClassifierSpec::Knn(knn),
                            ClassifierSpec::Ensemble { .. } => ClassifierSpec::Ensemble { rf, knn, rf_weight },
                        };
                        out.push(PipelineSpec { classifier, ..*spec });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: PipelineSpec,
    pub best_score: CvScore,
    /// Every grid point with its score, in enumeration order.
    pub evaluations: Vec<(PipelineSpec, CvScore)>,
}

/// Exhaustive search over the grid; ties go to the first point enumerated.
pub fn grid_refine(
    spec: &PipelineSpec,
    grid: &HyperGrid,
    matrix: &FeatureMatrix,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<GridResult> {
    let points = grid.points(spec)?;
    let outer = GrammarBounds::default();
    for p in &points {
        p.validate(&outer)?;
    }
    let evaluations = map_slice(exec, &points, |p| evaluate_pipeline(p, matrix, k, seed, exec))
        .into_iter()
        .zip(&points)
        .map(|(score, p)| score.map(|s| (*p, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, score)) in evaluations.iter().enumerate() {
        if score.mean > evaluations[best].1.mean {
            best = i;
        }
    }
    Ok(GridResult {
        best: evaluations[best].0,
        best_score: evaluations[best].1.clone(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automl::{Expander, Scaler};

    fn knn_spec(k: usize) -> PipelineSpec {
        PipelineSpec {
            scaler: Scaler::None,
            expander: Expander::None,
            classifier: ClassifierSpec::Knn(KnnSpec { k }),
        }
    }

    #[test]
    fn enumeration_order_and_count() {
        let grid = HyperGrid {
            n_trees: vec![10, 20],
            max_depth: vec![None, Some(3), Some(4)],
            knn_k: vec![],
            rf_weight: vec![0.2, 0.8],
        };
        let pts = grid.points(&PipelineSpec::default()).unwrap();
        assert_eq!(pts.len(), 12);
        let first: Vec<String> = pts[..3].iter().map(|p| p.canonical()).collect();
        assert!(first[0].contains("n_trees=10,max_depth=none,k=5,rf_weight=0.2"));
        assert!(first[1].contains("n_trees=10,max_depth=none,k=5,rf_weight=0.8"));
        assert!(first[2].contains("n_trees=10,max_depth=3,k=5,rf_weight=0.2"));
        // forest lists are irrelevant to kNN
        assert_eq!(grid.points(&knn_spec(3)).unwrap_err().code(), "empty_input");
        let g2 = HyperGrid { knn_k: vec![1, 3, 5], ..grid };
        assert_eq!(g2.points(&knn_spec(3)).unwrap().len(), 3);
    }

    #[test]
    fn empty_grid() {
        assert!(HyperGrid::default().points(&PipelineSpec::default()).is_err());
    }
}
