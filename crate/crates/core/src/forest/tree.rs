use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Label;

/// Decision tree node with axis-aligned threshold splits. Rows go left when
/// `row[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        very_good: u32,
        typical: u32,
    },
}

impl TreeNode {
    pub fn leaf_for(&self, row: &[f64]) -> (u32, u32) {
        let mut node = self;
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
                TreeNode::Leaf { very_good, typical } => return (*very_good, *typical),
            }
        }
    }

    /// Majority label of the reached leaf; ties go to `Typical`.
    pub fn vote(&self, row: &[f64]) -> Label {
        let (vg, ty) = self.leaf_for(row);
        if vg > ty {
            Label::VeryGood
        } else {
            Label::Typical
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    pub fn split_count(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.split_count() + right.split_count(),
            TreeNode::Leaf { .. } => 0,
        }
    }
}

pub(crate) struct GrowParams<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [Label],
    pub candidates: &'a [usize],
    pub max_features: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

/// `n · gini` for a node holding `vg` very-good rows out of `n`.
fn weighted_gini(vg: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let ty = n - vg;
    n - (vg * vg + ty * ty) / n
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

const MIN_GAIN: f64 = 1e-12;

pub(crate) struct Grower<'a, R: Rng> {
    params: GrowParams<'a>,
    rng: &'a mut R,
    /// Impurity decrease accumulated per feature.
    pub importance: Vec<f64>,
    scratch: Vec<(f64, bool)>,
    features: Vec<usize>,
}

impl<'a, R: Rng> Grower<'a, R> {
    pub fn new(params: GrowParams<'a>, n_features: usize, rng: &'a mut R) -> Self {
        let features = params.candidates.to_vec();
        Grower {
            params,
            rng,
            importance: vec![0.0; n_features],
            scratch: Vec::new(),
            features,
        }
    }

    fn counts(&self, idx: &[usize]) -> (u32, u32) {
        let vg = idx
            .iter()
            .filter(|&&i| self.params.labels[i] == Label::VeryGood)
            .count() as u32;
        (vg, idx.len() as u32 - vg)
    }

    pub fn grow(&mut self, idx: &mut [usize], depth: usize) -> TreeNode {
        let (vg, ty) = self.counts(idx);
        let leaf = TreeNode::Leaf {
            very_good: vg,
            typical: ty,
        };
        let n = idx.len();
        if vg == 0
            || ty == 0
            || n < 2 * self.params.min_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d)
        {
            return leaf;
        }
        let Some(best) = self.best_split(idx, f64::from(vg)) else {
            return leaf;
        };
        self.importance[best.feature] += best.gain;

        let rows = self.params.rows;
        let mut mid = 0;
        for i in 0..n {
            if rows[idx[i]][best.feature] <= best.threshold {
                idx.swap(i, mid);
                mid += 1;
            }
        }
        let (left_idx, right_idx) = idx.split_at_mut(mid);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Tries `max_features` random candidates, continuing through the rest
    /// only while no useful split has been found.
    fn best_split(&mut self, idx: &[usize], vg: f64) -> Option<BestSplit> {
        let n = idx.len() as f64;
        let parent = weighted_gini(vg, n);
        let mut features = std::mem::take(&mut self.features);
        features.shuffle(self.rng);
        let mut best: Option<BestSplit> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.params.max_features && best.is_some() {
                break;
            }
            if let Some(cand) = self.best_threshold(idx, f, parent) {
                if best.as_ref().is_none_or(|b| cand.gain > b.gain) {
                    best = Some(cand);
                }
            }
        }
        self.features = features;
        best
    }

    fn best_threshold(&mut self, idx: &[usize], feature: usize, parent: f64) -> Option<BestSplit> {
        let rows = self.params.rows;
        let labels = self.params.labels;
        self.scratch.clear();
        self.scratch.extend(
            idx.iter()
                .map(|&i| (rows[i][feature], labels[i] == Label::VeryGood)),
        );
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.scratch.len();
        let total_vg = self.scratch.iter().filter(|p| p.1).count() as f64;
        let min_leaf = self.params.min_leaf;
        let mut left_vg = 0.0;
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            if self.scratch[i].1 {
                left_vg += 1.0;
            }
            let (lo, hi) = (self.scratch[i].0, self.scratch[i + 1].0);
            let left_n = i + 1;
            if lo == hi || left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let gain = parent
                - weighted_gini(left_vg, left_n as f64)
                - weighted_gini(total_vg - left_vg, (n - left_n) as f64);
            if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(BestSplit {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
        best
    }
}
