//! Interpretable news quality model.
//!
//! Each basic feature gets weight `importance × correlation`: its Gini
//! importance when separating VERY_GOOD from TYPICAL posts, times its
//! Spearman correlation with engagement over the whole calibration corpus.
//! A post's score is the weighted sum of its min-max normalized features,
//! rescaled to `[0, 1]` by the extreme scores seen during calibration. Facet
//! scores apply the same scheme to each facet's member features, which lets
//! [`suggest`] point writers at the weakest facets.

mod persist;
mod suggest;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{Facet, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::forest::{self, Dataset, ForestConfig, ForestError, Label};
use crate::stats::spearman;

pub use persist::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use suggest::{suggest, Catalog, CatalogError, SuggestOptions, Suggestion, DEFAULT_THRESHOLD};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("calibration corpus is empty")]
    EmptyCorpus,
    #[error("{features} feature rows, {labels} labels and {quality} quality values do not line up")]
    LengthMismatch {
        features: usize,
        labels: usize,
        quality: usize,
    },
    #[error("calibration labels must contain both VERY_GOOD and TYPICAL posts")]
    SingleClass,
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("model is not calibrated")]
    Uncalibrated,
    #[error("model feature order does not match this build at index {index}: {found:?} vs {expected:?}")]
    FeatureOrderMismatch {
        index: usize,
        found: String,
        expected: String,
    },
    #[error("unsupported model version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("model checksum mismatch: file says {stored}, contents hash to {computed}")]
    ChecksumMismatch { stored: String, computed: String },
    #[error("model file does not match the schema: {0}")]
    Schema(String),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureWeight {
    pub name: String,
    pub importance: f64,
    pub correlation: f64,
    pub weight: f64,
    pub min: f64,
    pub max: f64,
    /// Calibration-corpus mean of the normalized feature.
    pub mean_normalized: f64,
    pub facets: Vec<Facet>,
}

impl FeatureWeight {
    pub fn normalize(&self, value: f64) -> f64 {
        normalize(value, self.min, self.max)
    }
}

/// Raw-score bounds and 101-point quantile table (p0..p100) of the
/// normalized facet score over the calibration corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetTable {
    pub raw_min: f64,
    pub raw_max: f64,
    pub quantiles: Vec<f64>,
}

impl FacetTable {
    /// Percentile rank in `[0, 100]`, interpolating between quantiles and
    /// taking the middle of any run of equal quantiles.
    pub fn percentile(&self, score: f64) -> f64 {
        let q = &self.quantiles;
        let last = q.len() - 1;
        let step = 100.0 / last as f64;
        if score < q[0] {
            return 0.0;
        }
        if score > q[last] {
            return 100.0;
        }
        let lo = q.partition_point(|&v| v < score);
        let hi = q.partition_point(|&v| v <= score);
        if hi > lo {
            return (lo + hi - 1) as f64 / 2.0 * step;
        }
        // q[lo - 1] < score < q[lo]
        let (a, b) = (q[lo - 1], q[lo]);
        ((lo - 1) as f64 + (score - a) / (b - a)) * step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub rows: usize,
    pub very_good_rows: usize,
    pub typical_rows: usize,
    pub forest: ForestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityModel {
    pub version: u64,
    pub created_at: DateTime<Utc>,
    pub seed: u64,
    pub features: Vec<FeatureWeight>,
    pub score_min: f64,
    pub score_max: f64,
    pub facet_percentile_tables: BTreeMap<Facet, FacetTable>,
    pub provenance: Provenance,
    #[serde(skip)]
    fingerprint: String,
}

impl QualityModel {
    /// Version tag plus the leading digits of the content checksum.
    pub fn model_version(&self) -> String {
        format!("v{}-{}", self.version, &self.fingerprint[..12.min(self.fingerprint.len())])
    }

    pub fn checksum(&self) -> &str {
        &self.fingerprint
    }

    fn check_layout(&self) -> Result<(), ModelError> {
        if self.features.is_empty() || self.facet_percentile_tables.len() != Facet::ALL.len() {
            return Err(ModelError::Uncalibrated);
        }
        for (index, expected) in FEATURE_NAMES.iter().enumerate() {
            let found = self.features.get(index).map(|f| f.name.as_str()).unwrap_or("");
            if found != *expected {
                return Err(ModelError::FeatureOrderMismatch {
                    index,
                    found: found.to_string(),
                    expected: expected.to_string(),
                });
            }
        }
        if self.features.len() != FEATURE_COUNT {
            return Err(ModelError::FeatureOrderMismatch {
                index: FEATURE_COUNT,
                found: self.features[FEATURE_COUNT].name.clone(),
                expected: String::new(),
            });
        }
        Ok(())
    }
}

fn normalize(value: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((value - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn quantiles(mut values: Vec<f64>, points: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    (0..points)
        .map(|k| {
            let h = k as f64 / (points - 1) as f64 * (n - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            values[lo] + (h - lo as f64) * (values[hi] - values[lo])
        })
        .collect()
}

pub const QUANTILE_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub forest: ForestConfig,
    /// Recorded in the model; fixed by callers that need byte-stable files.
    pub created_at: DateTime<Utc>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            forest: ForestConfig::default(),
            created_at: Utc::now(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub model: QualityModel,
    pub warnings: Vec<String>,
}

/// Fits importances, correlations, weights and normalization bounds.
pub fn calibrate(
    corpus: &[FeatureVector],
    labels: &[Label],
    quality: &[f64],
    opts: &CalibrationOptions,
) -> Result<Calibration, ModelError> {
    if corpus.len() != labels.len() || corpus.len() != quality.len() {
        return Err(ModelError::LengthMismatch {
            features: corpus.len(),
            labels: labels.len(),
            quality: quality.len(),
        });
    }
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let very_good_rows = labels.iter().filter(|&&l| l == Label::VeryGood).count();
    if very_good_rows == 0 || very_good_rows == labels.len() {
        return Err(ModelError::SingleClass);
    }

    let rows: Vec<Vec<f64>> = corpus.iter().map(FeatureVector::to_vec).collect();
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let data = Dataset::new(rows.clone(), labels.to_vec(), names)?;
    let forest = forest::train(&data, &opts.forest)?;

    let mut warnings = Vec::new();
    let mut features = Vec::with_capacity(FEATURE_COUNT);
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let correlation = match spearman(&column, quality) {
            Ok(c) => c,
            Err(e) => {
                warnings.push(format!("{name}: correlation undefined ({e}); using 0"));
                0.0
            }
        };
        let importance = forest.importances[i];
        let (min, max) = column
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let mean_normalized =
            column.iter().map(|&v| normalize(v, min, max)).sum::<f64>() / column.len() as f64;
        features.push(FeatureWeight {
            name: name.to_string(),
            importance,
            correlation,
            weight: importance * correlation,
            min,
            max,
            mean_normalized,
            facets: Facet::containing(i),
        });
    }
    for w in &warnings {
        tracing::warn!("{w}");
    }

    let contributions: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            features
                .iter()
                .zip(r)
                .map(|(fw, &v)| fw.weight * fw.normalize(v))
                .collect()
        })
        .collect();
    let raw: Vec<f64> = contributions.iter().map(|c| c.iter().sum()).collect();
    let (score_min, score_max) = bounds(&raw);

    let mut facet_percentile_tables = BTreeMap::new();
    for facet in Facet::ALL {
        let members = facet.member_indices();
        let facet_raw: Vec<f64> = contributions
            .iter()
            .map(|c| members.iter().map(|&i| c[i]).sum())
            .collect();
        let (raw_min, raw_max) = bounds(&facet_raw);
        let scores = facet_raw.iter().map(|&v| normalize(v, raw_min, raw_max)).collect();
        facet_percentile_tables.insert(
            facet,
            FacetTable {
                raw_min,
                raw_max,
                quantiles: quantiles(scores, QUANTILE_POINTS),
            },
        );
    }

    let mut model = QualityModel {
        version: MODEL_FORMAT_VERSION,
        created_at: opts.created_at,
        seed: opts.forest.seed,
        features,
        score_min,
        score_max,
        facet_percentile_tables,
        provenance: Provenance {
            rows: corpus.len(),
            very_good_rows,
            typical_rows: corpus.len() - very_good_rows,
            forest: opts.forest.clone(),
        },
        fingerprint: String::new(),
    };
    model.fingerprint = persist::body_checksum(&model);
    Ok(Calibration { model, warnings })
}

fn bounds(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub feature: String,
    pub value: f64,
    pub normalized: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetAssessment {
    pub facet: Facet,
    pub raw: f64,
    pub score: f64,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub quality_score: f64,
    /// Sum of `contributions` before rescaling.
    pub raw_score: f64,
    pub facets: Vec<FacetAssessment>,
    /// One entry per basic feature, canonical order.
    pub contributions: Vec<Contribution>,
    pub suggestions: Vec<Suggestion>,
}

impl Assessment {
    pub fn facet(&self, facet: Facet) -> &FacetAssessment {
        &self.facets[facet as usize]
    }
}

/// Scores one post. Suggestions are left empty; see [`assess`].
pub fn score(model: &QualityModel, f: &FeatureVector) -> Result<Assessment, ModelError> {
    model.check_layout()?;
    let contributions: Vec<Contribution> = model
        .features
        .iter()
        .zip(f.to_vec())
        .map(|(fw, value)| {
            let normalized = fw.normalize(value);
            Contribution {
                feature: fw.name.clone(),
                value,
                normalized,
                contribution: fw.weight * normalized,
            }
        })
        .collect();
    let raw_score: f64 = contributions.iter().map(|c| c.contribution).sum();
    let quality_score = normalize(raw_score, model.score_min, model.score_max);

    let facets = Facet::ALL
        .iter()
        .map(|&facet| {
            let table = &model.facet_percentile_tables[&facet];
            let raw: f64 = facet
                .member_indices()
                .into_iter()
                .map(|i| contributions[i].contribution)
                .sum();
            let score = normalize(raw, table.raw_min, table.raw_max);
            FacetAssessment {
                facet,
                raw,
                score,
                percentile: table.percentile(score),
            }
        })
        .collect();

    Ok(Assessment {
        quality_score,
        raw_score,
        facets,
        contributions,
        suggestions: Vec::new(),
    })
}

/// [`score`] followed by [`suggest`].
pub fn assess(
    model: &QualityModel,
    f: &FeatureVector,
    opts: &SuggestOptions<'_>,
) -> Result<Assessment, ModelError> {
    let mut a = score(model, f)?;
    a.suggestions = suggest(&a, model, opts);
    Ok(a)
}
