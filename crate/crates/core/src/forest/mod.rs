//! Random-forest classifier separating VERY_GOOD from TYPICAL posts, with
//! Gini importances and stratified k-fold cross-validation.
//!
//! Trees are grown on bootstrap samples by greedy Gini-gain splitting over a
//! random subset of candidate features at each node. Every tree draws from its
//! own ChaCha stream derived from the configured seed, so training is
//! bit-for-bit reproducible regardless of thread scheduling.

mod cv;
mod tree;

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cv::{cross_validate, default_feature_sets, stratified_folds, CvReport, FeatureSet, FeatureSetResult};
pub use tree::TreeNode;

use tree::{GrowParams, Grower};

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("dataset is empty")]
    Empty,
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("feature mask selects no features")]
    EmptyMask,
    #[error("expected {expected} values per row, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{labels} labels for {rows} rows")]
    LabelCount { rows: usize, labels: usize },
    #[error("class {label} has {have} rows, need at least {need} for {need}-fold cross-validation")]
    InsufficientRows { label: Label, have: usize, need: usize },
    #[error("invalid forest configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported forest file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("forest file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("forest file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    VeryGood,
    Typical,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::VeryGood => "VERY_GOOD",
            Label::Typical => "TYPICAL",
        })
    }
}

/// Feature rows with two-class labels and an optional column mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
    mask: Vec<bool>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<Self, ForestError> {
        if rows.len() != labels.len() {
            return Err(ForestError::LabelCount {
                rows: rows.len(),
                labels: labels.len(),
            });
        }
        let width = feature_names.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(ForestError::DimensionMismatch {
                expected: width,
                got: bad.len(),
            });
        }
        Ok(Dataset {
            rows,
            labels,
            mask: vec![true; width],
            feature_names,
        })
    }

    /// Dataset whose columns are named `f0`, `f1`, ...
    pub fn unnamed(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self, ForestError> {
        let width = rows.first().map_or(0, Vec::len);
        let names = (0..width).map(|i| format!("f{i}")).collect();
        Dataset::new(rows, labels, names)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, ForestError> {
        if mask.len() != self.width() {
            return Err(ForestError::DimensionMismatch {
                expected: self.width(),
                got: mask.len(),
            });
        }
        if !mask.iter().any(|&m| m) {
            return Err(ForestError::EmptyMask);
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub(crate) fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            mask: self.mask.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    fn class_count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    fn resolve(self, available: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (available as f64).sqrt().round() as usize,
            MaxFeatures::All => available,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, available.max(1))
    }
}

pub const DEFAULT_SEED: u64 = 20_190_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: DEFAULT_SEED,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::InvalidConfig("n_trees must be positive".into()));
        }
        if self.min_leaf == 0 {
            return Err(ForestError::InvalidConfig("min_leaf must be positive".into()));
        }
        if self.max_features == MaxFeatures::Fixed(0) {
            return Err(ForestError::InvalidConfig("max_features must be positive".into()));
        }
        Ok(())
    }
}

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub config: ForestConfig,
    pub feature_names: Vec<String>,
    pub mask: Vec<bool>,
    pub trees: Vec<TreeNode>,
    /// Normalized mean decrease in impurity, one entry per feature.
    pub importances: Vec<f64>,
    /// False when no tree made a single split; importances are then zero.
    pub any_split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Share of trees voting for `label`.
    pub vote_fraction: f64,
}

fn normalize(v: &mut [f64]) -> bool {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
        true
    } else {
        false
    }
}

pub fn train(data: &Dataset, config: &ForestConfig) -> Result<ForestModel, ForestError> {
    config.validate()?;
    if data.len() < 2 {
        return Err(if data.is_empty() {
            ForestError::Empty
        } else {
            ForestError::SingleClass
        });
    }
    if data.class_count(Label::VeryGood) == 0 || data.class_count(Label::Typical) == 0 {
        return Err(ForestError::SingleClass);
    }
    let candidates: Vec<usize> = (0..data.width()).filter(|&i| data.mask[i]).collect();
    if candidates.is_empty() {
        return Err(ForestError::EmptyMask);
    }
    let max_features = config.max_features.resolve(candidates.len());
    let n = data.len();
    let width = data.width();

    let grown: Vec<(TreeNode, Vec<f64>)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            let mut idx: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let params = GrowParams {
                rows: &data.rows,
                labels: &data.labels,
                candidates: &candidates,
                max_features,
                max_depth: config.max_depth,
                min_leaf: config.min_leaf,
            };
            let mut grower = Grower::new(params, width, &mut rng);
            let tree = grower.grow(&mut idx, 0);
            let mut imp = grower.importance;
            normalize(&mut imp);
            (tree, imp)
        })
        .collect();

    let mut importances = vec![0.0; width];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (acc, v) in importances.iter_mut().zip(imp) {
            *acc += v;
        }
        trees.push(tree);
    }
    let any_split = normalize(&mut importances);

    Ok(ForestModel {
        format_version: FOREST_FORMAT_VERSION,
        config: config.clone(),
        feature_names: data.feature_names.clone(),
        mask: data.mask.clone(),
        trees,
        importances,
        any_split,
    })
}

impl ForestModel {
    pub fn predict(&self, row: &[f64]) -> Result<Prediction, ForestError> {
        if row.len() != self.feature_names.len() {
            return Err(ForestError::DimensionMismatch {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        let vg = self
            .trees
            .iter()
            .filter(|t| t.vote(row) == Label::VeryGood)
            .count();
        let total = self.trees.len();
        let (label, votes) = if 2 * vg > total {
            (Label::VeryGood, vg)
        } else {
            (Label::Typical, total - vg)
        };
        Ok(Prediction {
            label,
            vote_fraction: votes as f64 / total as f64,
        })
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64, ForestError> {
        if data.is_empty() {
            return Err(ForestError::Empty);
        }
        let mut correct = 0;
        for (row, &label) in data.rows.iter().zip(&data.labels) {
            if self.predict(row)?.label == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    /// `(feature, weight)` pairs sorted by weight, descending.
    pub fn importances(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .cloned()
            .zip(self.importances.iter().copied())
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }

    pub fn to_json(&self) -> Result<String, ForestError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ForestError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .unwrap_or(0) as u32;
        if found != FOREST_FORMAT_VERSION {
            return Err(ForestError::VersionMismatch {
                found,
                expected: FOREST_FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ForestError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ForestError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Free-function form of [`ForestModel::importances`].
pub fn importances(model: &ForestModel) -> Vec<(String, f64)> {
    model.importances()
}
