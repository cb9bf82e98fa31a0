//! JSON bodies exchanged with the scoring service.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::features::{Facet, FeatureRow, PostMeta};
use crate::lexicon::LexiconSet;
use crate::snqam::{assess, Assessment, ModelError, QualityModel, SuggestOptions};

pub const MAX_TEXT_CHARS: usize = 10_000;
pub const TOP_CONTRIBUTIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub text: String,
    #[serde(default)]
    pub has_image: bool,
    #[serde(default)]
    pub has_video: bool,
}

impl ScoreRequest {
    pub fn new(text: impl Into<String>) -> Self {
        ScoreRequest {
            text: text.into(),
            has_image: false,
            has_video: false,
        }
    }

    pub fn meta(&self) -> PostMeta {
        PostMeta {
            has_image: self.has_image,
            has_video: self.has_video,
        }
    }

    /// Character count when it exceeds [`MAX_TEXT_CHARS`].
    pub fn oversized(&self) -> Option<usize> {
        let n = self.text.chars().count();
        (n > MAX_TEXT_CHARS).then_some(n)
    }

    pub fn featurize(&self, lex: &LexiconSet) -> FeatureRow {
        crate::featurize(&self.text, self.meta(), lex)
    }
}

/// The scoring path shared by every surface.
pub fn respond(
    req: &ScoreRequest,
    model: &QualityModel,
    lex: &LexiconSet,
    opts: &SuggestOptions<'_>,
) -> Result<ScoreResponse, ModelError> {
    let row = req.featurize(lex);
    let a = assess(model, &row.features, opts)?;
    Ok(ScoreResponse::new(&a, model))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacetView {
    pub score: f64,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionView {
    pub feature: String,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub facet: Facet,
    pub guideline: String,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub quality_score: f64,
    pub facets: BTreeMap<Facet, FacetView>,
    pub top_contributions: Vec<ContributionView>,
    pub suggestions: Vec<SuggestionView>,
    pub model_version: String,
}

impl ScoreResponse {
    pub fn new(a: &Assessment, model: &QualityModel) -> Self {
        let facets = a
            .facets
            .iter()
            .map(|f| {
                (
                    f.facet,
                    FacetView {
                        score: f.score,
                        percentile: f.percentile,
                    },
                )
            })
            .collect();
        let mut top: Vec<&_> = a.contributions.iter().filter(|c| c.contribution != 0.0).collect();
        top.sort_by(|x, y| y.contribution.abs().total_cmp(&x.contribution.abs()));
        let top_contributions = top
            .into_iter()
            .take(TOP_CONTRIBUTIONS)
            .map(|c| ContributionView {
                feature: c.feature.clone(),
                contribution: c.contribution,
            })
            .collect();
        let suggestions = a
            .suggestions
            .iter()
            .map(|s| SuggestionView {
                facet: s.facet,
                guideline: s.guideline.clone(),
                features: s.features.clone(),
            })
            .collect();
        ScoreResponse {
            quality_score: a.quality_score,
            facets,
            top_contributions,
            suggestions,
            model_version: model.model_version(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_version: String,
    pub created_at: String,
    pub seed: u64,
    pub rows: usize,
    pub features: usize,
}

impl ModelInfo {
    pub fn new(model: &QualityModel) -> Self {
        ModelInfo {
            model_version: model.model_version(),
            created_at: model.created_at.to_rfc3339(),
            seed: model.seed,
            rows: model.provenance.rows,
            features: model.features.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub detail: Option<serde_json::Value>,
}

impl ErrorBody {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ErrorBody {
            code: code.to_string(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_defaults() {
        let r: ScoreRequest = serde_json::from_str(r#"{"text":"你好"}"#).unwrap();
        assert!(!r.has_image && !r.has_video);
        assert!(serde_json::from_str::<ScoreRequest>(r#"{"txt":"x"}"#).is_err());
        assert!(serde_json::from_str::<ScoreRequest>(r#"{"text":5}"#).is_err());
    }

    #[test]
    fn length_limit_counts_chars() {
        assert_eq!(ScoreRequest::new("好".repeat(MAX_TEXT_CHARS)).oversized(), None);
        assert_eq!(ScoreRequest::new("好".repeat(MAX_TEXT_CHARS + 1)).oversized(), Some(10_001));
    }

    #[test]
    fn error_body_shape() {
        let s = serde_json::to_string(&ErrorBody::new("invalid_request", "bad")).unwrap();
        assert_eq!(s, r#"{"code":"invalid_request","message":"bad","detail":null}"#);
    }
}
