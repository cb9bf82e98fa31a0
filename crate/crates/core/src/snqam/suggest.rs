use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Assessment, QualityModel};
use crate::features::Facet;

pub const DEFAULT_THRESHOLD: f64 = 25.0;
const TRIGGER_LIMIT: usize = 3;

static DEFAULT_CATALOG: &str = include_str!("../../data/guidelines.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("guideline catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("guideline catalog: {0}")]
    Json(#[from] serde_json::Error),
    #[error("guideline catalog has no entry for facet {0}")]
    Missing(Facet),
}

/// One writing guideline per facet.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: BTreeMap<Facet, String>,
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let entries: BTreeMap<Facet, String> = serde_json::from_str(text)?;
        if let Some(&missing) = Facet::ALL.iter().find(|f| !entries.contains_key(f)) {
            return Err(CatalogError::Missing(missing));
        }
        Ok(Catalog { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn guideline(&self, facet: Facet) -> &str {
        &self.entries[&facet]
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::from_json(DEFAULT_CATALOG).expect("embedded catalog is complete")
    }
}

#[derive(Debug, Clone)]
pub struct SuggestOptions<'a> {
    /// Facets whose percentile falls strictly below this get a suggestion.
    pub threshold: f64,
    pub catalog: &'a Catalog,
}

impl<'a> SuggestOptions<'a> {
    pub fn new(catalog: &'a Catalog) -> Self {
        SuggestOptions {
            threshold: DEFAULT_THRESHOLD,
            catalog,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub facet: Facet,
    pub percentile: f64,
    pub guideline: String,
    /// Member features pulling the facet furthest below the calibration mean.
    pub features: Vec<String>,
}

/// Suggestions for facets below the threshold, largest deficit first.
pub fn suggest(a: &Assessment, model: &QualityModel, opts: &SuggestOptions<'_>) -> Vec<Suggestion> {
    let mut weak: Vec<_> = a
        .facets
        .iter()
        .filter(|f| f.percentile < opts.threshold)
        .collect();
    weak.sort_by(|x, y| x.percentile.total_cmp(&y.percentile));

    weak.into_iter()
        .map(|fa| {
            let mut gaps: Vec<(usize, f64)> = fa
                .facet
                .member_indices()
                .into_iter()
                .map(|i| {
                    let fw = &model.features[i];
                    (i, a.contributions[i].contribution - fw.weight * fw.mean_normalized)
                })
                .filter(|&(_, gap)| gap < 0.0)
                .collect();
            gaps.sort_by(|x, y| x.1.total_cmp(&y.1));
            Suggestion {
                facet: fa.facet,
                percentile: fa.percentile,
                guideline: opts.catalog.guideline(fa.facet).to_string(),
                features: gaps
                    .into_iter()
                    .take(TRIGGER_LIMIT)
                    .map(|(i, _)| model.features[i].name.clone())
                    .collect(),
            }
        })
        .collect()
}
