//! CART classification trees with Gini impurity.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_xy, Classify};
use crate::herd_data::FeatureMatrix;
use crate::seed::Rng;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// `[P(class 0), P(class 1)]`.
        proba: [f64; 2],
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Rows with `x[feature] <= threshold`.
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn proba(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { proba, .. } => return proba[1],
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(c))`.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, c: usize) -> usize {
        match self {
            MaxFeatures::All => c,
            MaxFeatures::Sqrt => (c as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(n) => n,
        }
        .clamp(1, c.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
        }
    }
}

/// The split a node chose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
}

fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        return 0.0;
    }
    1.0 - (c0 / n).powi(2) - (c1 / n).powi(2)
}

/// Impurity decrease of sending `x <= threshold` left.
pub fn gini_gain(values: &[f64], labels: &[u8], threshold: f64) -> f64 {
    let mut counts = [[0.0f64; 2]; 2];
    for (&x, &y) in values.iter().zip(labels) {
        counts[usize::from(x > threshold)][y as usize] += 1.0;
    }
    let [l, r] = counts;
    let (nl, nr) = (l[0] + l[1], r[0] + r[1]);
    let n = nl + nr;
    gini(l[0] + r[0], l[1] + r[1]) - (nl / n) * gini(l[0], l[1]) - (nr / n) * gini(r[0], r[1])
}

/// Exact split score `(l0^2 + l1^2) / nl + (r0^2 + r1^2) / nr` as a fraction.
/// Maximizing it is maximizing Gini gain; integer arithmetic makes ties
/// exact so the (feature, threshold) tie-break is reliable.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn new(l: [u64; 2], r: [u64; 2]) -> Score {
        let sq = |c: [u64; 2]| (c[0] as u128).pow(2) + (c[1] as u128).pow(2);
        let nl = (l[0] + l[1]) as u128;
        let nr = (r[0] + r[1]) as u128;
        Score {
            num: sq(l) * nr + sq(r) * nl,
            den: nl * nr,
        }
    }

    fn beats(self, other: Score) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Builder<'a> {
    x: &'a [f64],
    c: usize,
    y: &'a [u8],
    params: TreeParams,
    n_try: usize,
    rng: Option<&'a mut Rng>,
    scratch: Vec<(f64, u8)>,
}

impl Builder<'_> {
    fn leaf(&self, counts: [u64; 2]) -> TreeNode {
        let n = (counts[0] + counts[1]) as f64;
        TreeNode::Leaf {
            proba: [counts[0] as f64 / n, counts[1] as f64 / n],
            samples: (counts[0] + counts[1]) as usize,
        }
    }

    /// Best threshold on one feature, ties to the lowest threshold.
    fn best_on(&mut self, rows: &[usize], feature: usize, totals: [u64; 2]) -> Option<(Score, f64)> {
        self.scratch.clear();
        self.scratch
            .extend(rows.iter().map(|&i| (self.x[i * self.c + feature], self.y[i])));
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0u64; 2];
        let mut best: Option<(Score, f64)> = None;
        for w in 0..self.scratch.len() - 1 {
            let (v, label) = self.scratch[w];
            left[label as usize] += 1;
            let next = self.scratch[w + 1].0;
            if next <= v {
                continue;
            }
            let right = [totals[0] - left[0], totals[1] - left[1]];
            let score = Score::new(left, right);
            if best.is_none_or(|(b, _)| score.beats(b)) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some((score, threshold));
            }
        }
        best
    }

    fn choose(&mut self, rows: &[usize], totals: [u64; 2]) -> Option<SplitChoice> {
        let mut order: Vec<usize> = (0..self.c).collect();
        if self.n_try < self.c {
            let rng = self.rng.as_deref_mut().expect("feature subsampling needs an rng");
            order.shuffle(rng);
        }
        let consider = |b: &mut Self, feats: &mut Vec<usize>, best: &mut Option<(Score, usize, f64)>| {
            feats.sort_unstable();
            for &f in feats.iter() {
                if let Some((score, thr)) = b.best_on(rows, f, totals) {
                    let better = match best {
                        None => true,
                        Some((bs, bf, bt)) => {
                            score.beats(*bs) || (!bs.beats(score) && (f, thr) < (*bf, *bt))
                        }
                    };
                    if better {
                        *best = Some((score, f, thr));
                    }
                }
            }
        };
        let mut best = None;
        let mut first: Vec<usize> = order[..self.n_try].to_vec();
        consider(self, &mut first, &mut best);
        // fall through the remaining features when every sampled one is constant
        let mut rest = order[self.n_try..].iter();
        while best.is_none() {
            let Some(&f) = rest.next() else { break };
            consider(self, &mut vec![f], &mut best);
        }
        best.map(|(_, feature, threshold)| SplitChoice { feature, threshold })
    }

    fn build(&mut self, rows: &mut [usize], depth: usize) -> TreeNode {
        let mut totals = [0u64; 2];
        for &i in rows.iter() {
            totals[self.y[i] as usize] += 1;
        }
        let stop = totals[0] == 0
            || totals[1] == 0
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || rows.len() < self.params.min_samples_split;
        if stop {
            return self.leaf(totals);
        }
        let Some(split) = self.choose(rows, totals) else {
            return self.leaf(totals);
        };
        let mid = partition(rows, |&i| self.x[i * self.c + split.feature] <= split.threshold);
        let (l, r) = rows.split_at_mut(mid);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Stable in-place partition; returns the number of rows satisfying `pred`.
fn partition(rows: &mut [usize], pred: impl Fn(&usize) -> bool) -> usize {
    let (yes, no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|i| pred(i));
    let mid = yes.len();
    rows[..mid].copy_from_slice(&yes);
    rows[mid..].copy_from_slice(&no);
    mid
}

/// Grows a tree on the rows listed in `rows` (duplicates allowed, as in a
/// bootstrap sample).
pub(crate) fn grow(
    x: &[f64],
    c: usize,
    y: &[u8],
    rows: &mut [usize],
    params: TreeParams,
    rng: Option<&mut Rng>,
) -> TreeNode {
    let n_try = params.max_features.resolve(c);
    let mut b = Builder {
        x,
        c,
        y,
        params,
        n_try,
        rng,
        scratch: Vec::with_capacity(rows.len()),
    };
    b.build(rows, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub n_features: usize,
}

impl Classify for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba(&self, row: &[f64]) -> f64 {
        self.root.proba(row)
    }
}

/// Trains a CART tree on every row and every feature. `max_features` other
/// than `All` needs randomness; use the forest for that.
pub fn train_tree(x: &FeatureMatrix, params: TreeParams, rng: Option<&mut Rng>) -> Result<DecisionTree> {
    check_xy(x.n_rows(), x.labels())?;
    let mut rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut fallback;
    let rng = match rng {
        Some(r) => Some(r),
        None if params.max_features.resolve(x.n_cols()) < x.n_cols() => {
            fallback = crate::seed::rng(0);
            Some(&mut fallback)
        }
        None => None,
    };
    Ok(DecisionTree {
        root: grow(x.values(), x.n_cols(), x.labels(), &mut rows, params, rng),
        n_features: x.n_cols(),
    })
}
