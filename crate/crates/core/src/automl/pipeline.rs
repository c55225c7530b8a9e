use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::featurize::{poly2_expand, poly2_matrix, MinMaxParams};
use crate::herd_data::{grouped_kfold_indices, FeatureMatrix, Fold};
use crate::learners::{
    Classifier, Classify, EnsembleMember, EnsembleModel, ForestModel, ForestParams, KnnModel,
};
use crate::par::{try_map_range, Execution};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaler {
    None,
    Minmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expander {
    None,
    Poly2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Rf,
    Knn,
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfSpec {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
}

impl Default for RfSpec {
    fn default() -> Self {
        RfSpec {
            n_trees: 100,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnSpec {
    pub k: usize,
}

impl Default for KnnSpec {
    fn default() -> Self {
        KnnSpec { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Rf(RfSpec),
    Knn(KnnSpec),
    /// Soft vote with weight `rf_weight` on the forest and the rest on kNN.
    Ensemble {
        rf: RfSpec,
        knn: KnnSpec,
        rf_weight: f64,
    },
}

impl ClassifierSpec {
    pub fn family(&self) -> Family {
        match self {
            ClassifierSpec::Rf(_) => Family::Rf,
            ClassifierSpec::Knn(_) => Family::Knn,
            ClassifierSpec::Ensemble { .. } => Family::Ensemble,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub scaler: Scaler,
    pub expander: Expander,
    pub classifier: ClassifierSpec,
}

impl Default for PipelineSpec {
    /// minmax, poly2, then an equal-weight forest + kNN ensemble.
    fn default() -> Self {
        PipelineSpec {
            scaler: Scaler::Minmax,
            expander: Expander::Poly2,
            classifier: ClassifierSpec::Ensemble {
                rf: RfSpec::default(),
                knn: KnnSpec::default(),
                rf_weight: 0.5,
            },
        }
    }
}

fn depth_str(d: Option<usize>) -> String {
    d.map_or_else(|| "none".to_string(), |d| d.to_string())
}

impl fmt::Display for PipelineSpec {
    /// Canonical form: only genes that affect the pipeline appear.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scaler = match self.scaler {
            Scaler::None => "none",
            Scaler::Minmax => "minmax",
        };
        let expander = match self.expander {
            Expander::None => "none",
            Expander::Poly2 => "poly2",
        };
        write!(f, "scaler={scaler};expander={expander};")?;
        match self.classifier {
            ClassifierSpec::Rf(rf) => write!(f, "rf(n_trees={},max_depth={})", rf.n_trees, depth_str(rf.max_depth)),
            ClassifierSpec::Knn(knn) => write!(f, "knn(k={})", knn.k),
            ClassifierSpec::Ensemble { rf, knn, rf_weight } => write!(
                f,
                "ensemble(n_trees={},max_depth={},k={},rf_weight={})",
                rf.n_trees,
                depth_str(rf.max_depth),
                knn.k,
                rf_weight
            ),
        }
    }
}

impl PipelineSpec {
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// Seed-mixing key for this pipeline.
    pub fn genome_hash(&self) -> u64 {
        seed::stable_hash(&self.canonical())
    }

    /// Transforms plus classifiers; an ensemble counts as two.
    pub fn stages(&self) -> usize {
        usize::from(self.scaler != Scaler::None)
            + usize::from(self.expander != Expander::None)
            + if self.classifier.family() == Family::Ensemble { 2 } else { 1 }
    }

    pub fn validate(&self, bounds: &GrammarBounds) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(format!("{what} outside grammar bounds")));
        if !bounds.scalers.contains(&self.scaler) {
            return bad(format!("scaler {:?}", self.scaler));
        }
        if !bounds.expanders.contains(&self.expander) {
            return bad(format!("expander {:?}", self.expander));
        }
        if !bounds.families.contains(&self.classifier.family()) {
            return bad(format!("classifier {:?}", self.classifier.family()));
        }
        let check_rf = |rf: &RfSpec| {
            if !(bounds.n_trees.0..=bounds.n_trees.1).contains(&rf.n_trees) {
                return bad(format!("n_trees {}", rf.n_trees));
            }
            if !bounds.max_depth.contains(&rf.max_depth) {
                return bad(format!("max_depth {}", depth_str(rf.max_depth)));
            }
            Ok(())
        };
        let check_knn = |knn: &KnnSpec| {
            if !(bounds.knn_k.0..=bounds.knn_k.1).contains(&knn.k) {
                return bad(format!("k {}", knn.k));
            }
            Ok(())
        };
        match &self.classifier {
            ClassifierSpec::Rf(rf) => check_rf(rf),
            ClassifierSpec::Knn(knn) => check_knn(knn),
            ClassifierSpec::Ensemble { rf, knn, rf_weight } => {
                check_rf(rf)?;
                check_knn(knn)?;
                if !bounds.rf_weights.iter().any(|w| (w - rf_weight).abs() < 1e-12) {
                    return bad(format!("rf_weight {rf_weight}"));
                }
                Ok(())
            }
        }
    }
}

/// The admissible search space. The defaults are also the outer limits:
/// custom bounds may only narrow them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarBounds {
    pub scalers: Vec<Scaler>,
    pub expanders: Vec<Expander>,
    pub families: Vec<Family>,
    /// Inclusive range.
    pub n_trees: (usize, usize),
    pub max_depth: Vec<Option<usize>>,
    /// Inclusive range.
    pub knn_k: (usize, usize),
    pub rf_weights: Vec<f64>,
}

impl Default for GrammarBounds {
    fn default() -> Self {
        GrammarBounds {
            scalers: vec![Scaler::None, Scaler::Minmax],
            expanders: vec![Expander::None, Expander::Poly2],
            families: vec![Family::Rf, Family::Knn, Family::Ensemble],
            n_trees: (10, 300),
            max_depth: std::iter::once(None).chain((2..=16).map(Some)).collect(),
            knn_k: (1, 25),
            rf_weights: (0..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

impl GrammarBounds {
    /// A grammar with exactly one admissible pipeline.
    pub fn singleton(spec: &PipelineSpec) -> GrammarBounds {
        let (rf, knn, w) = match spec.classifier {
            ClassifierSpec::Rf(rf) => (rf, KnnSpec::default(), 0.5),
            ClassifierSpec::Knn(knn) => (RfSpec::default(), knn, 0.5),
            ClassifierSpec::Ensemble { rf, knn, rf_weight } => (rf, knn, rf_weight),
        };
        GrammarBounds {
            scalers: vec![spec.scaler],
            expanders: vec![spec.expander],
            families: vec![spec.classifier.family()],
            n_trees: (rf.n_trees, rf.n_trees),
            max_depth: vec![rf.max_depth],
            knn_k: (knn.k, knn.k),
            rf_weights: vec![w],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let outer = GrammarBounds::default();
        let err = |m: &str| Err(Error::InvalidArgument(format!("grammar bounds: {m}")));
        if self.scalers.is_empty() || self.expanders.is_empty() || self.families.is_empty() {
            return err("empty choice list");
        }
        if self.max_depth.is_empty() || self.rf_weights.is_empty() {
            return err("empty choice list");
        }
        if self.n_trees.0 > self.n_trees.1 || self.n_trees.0 < outer.n_trees.0 || self.n_trees.1 > outer.n_trees.1 {
            return err("n_trees range");
        }
        if self.knn_k.0 > self.knn_k.1 || self.knn_k.0 < outer.knn_k.0 || self.knn_k.1 > outer.knn_k.1 {
            return err("knn_k range");
        }
        if self.max_depth.iter().any(|d| !outer.max_depth.contains(d)) {
            return err("max_depth must be none or 2..=16");
        }
        if self.rf_weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return err("rf_weight must be in [0, 1]");
        }
        Ok(())
    }
}

/// Fixed-length genome. Inactive genes (e.g. `knn_k` for a forest) are
/// carried along so crossover and mutation stay positional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genome {
    pub scaler: Scaler,
    pub expander: Expander,
    pub family: Family,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub knn_k: usize,
    pub rf_weight: f64,
}

impl Genome {
    pub const LEN: usize = 7;

    pub fn random(bounds: &GrammarBounds, rng: &mut seed::Rng) -> Genome {
        let mut g = Genome {
            scaler: bounds.scalers[0],
            expander: bounds.expanders[0],
            family: bounds.families[0],
            n_trees: bounds.n_trees.0,
            max_depth: bounds.max_depth[0],
            knn_k: bounds.knn_k.0,
            rf_weight: bounds.rf_weights[0],
        };
        for gene in 0..Self::LEN {
            g.resample(gene, bounds, rng);
        }
        g
    }

    /// Redraws one gene uniformly within bounds.
    pub fn resample(&mut self, gene: usize, bounds: &GrammarBounds, rng: &mut seed::Rng) {
        fn pick<T: Copy>(xs: &[T], rng: &mut seed::Rng) -> T {
            xs[rng.random_range(0..xs.len())]
        }
        match gene {
            0 => self.scaler = pick(&bounds.scalers, rng),
            1 => self.expander = pick(&bounds.expanders, rng),
            2 => self.family = pick(&bounds.families, rng),
            3 => self.n_trees = rng.random_range(bounds.n_trees.0..=bounds.n_trees.1),
            4 => self.max_depth = pick(&bounds.max_depth, rng),
            5 => self.knn_k = rng.random_range(bounds.knn_k.0..=bounds.knn_k.1),
            6 => self.rf_weight = pick(&bounds.rf_weights, rng),
            _ => unreachable!("gene index {gene}"),
        }
    }

    /// Genes `0..point` from `self`, the rest from `other`.
    pub fn crossover(&self, other: &Genome, point: usize) -> Genome {
        let mut child = *self;
        for gene in point..Self::LEN {
            match gene {
                0 => child.scaler = other.scaler,
                1 => child.expander = other.expander,
                2 => child.family = other.family,
                3 => child.n_trees = other.n_trees,
                4 => child.max_depth = other.max_depth,
                5 => child.knn_k = other.knn_k,
                6 => child.rf_weight = other.rf_weight,
                _ => unreachable!(),
            }
        }
        child
    }

    pub fn spec(&self) -> PipelineSpec {
        let rf = RfSpec {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
        };
        let knn = KnnSpec { k: self.knn_k };
        PipelineSpec {
            scaler: self.scaler,
            expander: self.expander,
            classifier: match self.family {
                Family::Rf => ClassifierSpec::Rf(rf),
                Family::Knn => ClassifierSpec::Knn(knn),
                Family::Ensemble => ClassifierSpec::Ensemble {
                    rf,
                    knn,
                    rf_weight: self.rf_weight,
                },
            },
        }
    }
}

/// A fitted pipeline: transforms learned on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub spec: PipelineSpec,
    pub scaler: Option<MinMaxParams>,
    pub model: Classifier,
}

impl TrainedPipeline {
    pub fn fit(spec: &PipelineSpec, train: &FeatureMatrix, seed: u64, exec: Execution) -> Result<TrainedPipeline> {
        let scaler = match spec.scaler {
            Scaler::None => None,
            Scaler::Minmax => Some(MinMaxParams::fit(train)?),
        };
        let mut x = match &scaler {
            Some(s) => s.apply(train)?,
            None => train.clone(),
        };
        if spec.expander == Expander::Poly2 {
            x = poly2_matrix(&x);
        }
        let forest = |rf: &RfSpec| {
            let params = ForestParams {
                n_trees: rf.n_trees,
                max_depth: rf.max_depth,
                ..ForestParams::default()
            };
            ForestModel::fit(&x, params, seed, exec).map(Classifier::Forest)
        };
        let knn = |k: &KnnSpec| KnnModel::fit(&x, k.k).map(Classifier::Knn);
        let model = match &spec.classifier {
            ClassifierSpec::Rf(rf) => forest(rf)?,
            ClassifierSpec::Knn(k) => knn(k)?,
            ClassifierSpec::Ensemble { rf, knn: k, rf_weight } => Classifier::Ensemble(EnsembleModel::new(vec![
                EnsembleMember {
                    weight: *rf_weight,
                    model: forest(rf)?,
                },
                EnsembleMember {
                    weight: 1.0 - rf_weight,
                    model: knn(k)?,
                },
            ])?),
        };
        Ok(TrainedPipeline {
            spec: *spec,
            scaler,
            model,
        })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        let scaled = match &self.scaler {
            Some(s) => s.apply_row(row),
            None => row.to_vec(),
        };
        match self.spec.expander {
            Expander::None => scaled,
            Expander::Poly2 => poly2_expand(&scaled),
        }
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        self.model.proba(&self.transform_row(row))
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        self.model.predict(&self.transform_row(row))
    }

    /// Fraction of rows predicted correctly.
    pub fn accuracy(&self, matrix: &FeatureMatrix) -> Result<f64> {
        if matrix.is_empty() {
            return Err(Error::EmptyInput("accuracy on an empty matrix"));
        }
        let correct = matrix
            .rows()
            .zip(matrix.labels())
            .filter(|(r, &y)| self.predict(r) == y)
            .count();
        Ok(correct as f64 / matrix.n_rows() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub mean: f64,
    pub folds: Vec<f64>,
    /// Population standard deviation of `folds`.
    pub std: f64,
}

impl CvScore {
    pub fn from_folds(folds: Vec<f64>) -> CvScore {
        let n = folds.len() as f64;
        let mean = folds.iter().sum::<f64>() / n;
        let std = (folds.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        CvScore { mean, folds, std }
    }
}

/// The fold partition and the pipeline fitted on each fold's training rows.
/// Fold assignment depends on `seed` alone; model seeds also mix in the
/// pipeline's genome hash and the fold index.
pub fn fold_pipelines(
    spec: &PipelineSpec,
    matrix: &FeatureMatrix,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<(Fold, TrainedPipeline)>> {
    let folds = grouped_kfold_indices(matrix.group_ids(), k, seed)?;
    let hash = spec.genome_hash();
    let fitted = try_map_range(exec, folds.len(), |f| {
        let train = matrix.select_rows(&folds[f].train);
        TrainedPipeline::fit(spec, &train, seed::derive(seed, &[hash, f as u64]), exec)
    })?;
    Ok(folds.into_iter().zip(fitted).collect())
}

pub fn evaluate_pipeline(
    spec: &PipelineSpec,
    matrix: &FeatureMatrix,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<CvScore> {
    let accs = fold_pipelines(spec, matrix, k, seed, exec)?
        .iter()
        .map(|(fold, p)| p.accuracy(&matrix.select_rows(&fold.validation)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CvScore::from_folds(accs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herd_data::CowId;

    fn separable(n_cows: usize) -> FeatureMatrix {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for c in 0..n_cows {
            for y in 0..2u8 {
                rows.push(vec![f64::from(y) * 10.0 + (c % 3) as f64 * 0.1, (c * 7 % 5) as f64]);
                labels.push(y);
                groups.push(CowId::new(format!("cow{c:02}-{y}")));
            }
        }
        FeatureMatrix::from_rows(vec!["a".into(), "b".into()], rows, labels, groups).unwrap()
    }

    #[test]
    fn canonical_hides_inactive_genes() {
        let mut rng = seed::rng(3);
        let bounds = GrammarBounds::default();
        let mut g = Genome::random(&bounds, &mut rng);
        g.family = Family::Knn;
        let a = g.spec().canonical();
        g.n_trees = if g.n_trees == 10 { 11 } else { 10 };
        g.rf_weight = 1.0 - g.rf_weight;
        assert_eq!(a, g.spec().canonical());
    }

    #[test]
    fn default_spec_is_in_grammar() {
        let spec = PipelineSpec::default();
        spec.validate(&GrammarBounds::default()).unwrap();
        assert_eq!(spec.stages(), 4);
        assert_eq!(
            spec.canonical(),
            "scaler=minmax;expander=poly2;ensemble(n_trees=100,max_depth=none,k=5,rf_weight=0.5)"
        );
    }

    #[test]
    fn random_genomes_respect_bounds() {
        let bounds = GrammarBounds::default();
        let mut rng = seed::rng(1);
        for _ in 0..500 {
            Genome::random(&bounds, &mut rng).spec().validate(&bounds).unwrap();
        }
    }

    #[test]
    fn separable_scores_one() {
        let m = separable(10);
        let spec = PipelineSpec {
            scaler: Scaler::None,
            expander: Expander::None,
            classifier: ClassifierSpec::Rf(RfSpec {
                n_trees: 10,
                max_depth: Some(2),
            }),
        };
        let s = evaluate_pipeline(&spec, &m, 5, 4, Execution::Sequential).unwrap();
        assert_eq!(s.folds, vec![1.0; 5]);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn sequential_matches_parallel() {
        let m = separable(12);
        let spec = PipelineSpec::default();
        let a = evaluate_pipeline(&spec, &m, 4, 8, Execution::Sequential).unwrap();
        let b = evaluate_pipeline(&spec, &m, 4, 8, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn crossover_point_semantics() {
        let bounds = GrammarBounds::default();
        let mut rng = seed::rng(5);
        let a = Genome::random(&bounds, &mut rng);
        let b = Genome::random(&bounds, &mut rng);
        assert_eq!(a.crossover(&b, 0), b);
        assert_eq!(a.crossover(&b, Genome::LEN), a);
        let c = a.crossover(&b, 3);
        assert_eq!((c.scaler, c.expander, c.family), (a.scaler, a.expander, a.family));
        assert_eq!((c.n_trees, c.knn_k), (b.n_trees, b.knn_k));
    }
}
