use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{train, Dataset, ForestConfig, ForestError, Label};
use crate::features::{Facet, FEATURE_COUNT};

/// A named column mask evaluated in cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub name: String,
    pub mask: Vec<bool>,
}

/// All basic features, then each facet's member features.
pub fn default_feature_sets() -> Vec<FeatureSet> {
    let mut sets = vec![FeatureSet {
        name: "all".into(),
        mask: vec![true; FEATURE_COUNT],
    }];
    sets.extend(Facet::ALL.iter().map(|f| FeatureSet {
        name: f.name().into(),
        mask: f.mask(),
    }));
    sets
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetResult {
    pub name: String,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub rows: usize,
    pub results: Vec<FeatureSetResult>,
}

impl CvReport {
    pub fn get(&self, name: &str) -> Option<&FeatureSetResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// Fold id per row. Each class is shuffled and dealt round-robin, the second
/// class continuing where the first stopped, so every fold holds its share
/// of each class to within one row.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in [Label::VeryGood, Label::Typical] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

pub fn cross_validate(
    data: &Dataset,
    config: &ForestConfig,
    folds: usize,
    feature_sets: &[FeatureSet],
) -> Result<CvReport, ForestError> {
    if folds < 2 {
        return Err(ForestError::InvalidConfig("need at least 2 folds".into()));
    }
    for label in [Label::VeryGood, Label::Typical] {
        let have = data.class_count(label);
        if have < folds {
            return Err(ForestError::InsufficientRows {
                label,
                have,
                need: folds,
            });
        }
    }
    let assignment = stratified_folds(data.labels(), folds, config.seed);

    let mut results = Vec::with_capacity(feature_sets.len());
    for set in feature_sets {
        let masked = data.clone().with_mask(set.mask.clone())?;
        let mut fold_accuracies = Vec::with_capacity(folds);
        for fold in 0..folds {
            let (test, train_idx): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| assignment[i] == fold);
            let model = train(&masked.subset(&train_idx), config)?;
            fold_accuracies.push(model.accuracy(&masked.subset(&test))?);
        }
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds as f64;
        results.push(FeatureSetResult {
            name: set.name.clone(),
            fold_accuracies,
            mean_accuracy,
        });
    }
    Ok(CvReport {
        folds,
        rows: data.len(),
        results,
    })
}
