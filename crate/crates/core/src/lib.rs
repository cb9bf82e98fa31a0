//! Feature extraction, statistics and the SNQAM quality model for short
//! Chinese social-media news posts.

pub mod annotate;
pub mod corpus;
pub mod features;
pub mod forest;
pub mod lexicon;
pub mod snqam;
pub mod stats;
pub mod wire;

pub use annotate::{annotate, AnnotatedText, PosTag, StructuralMarkers, Token};
pub use corpus::{
    bucket_by_period, filter_corpus, parse_corpus, CorpusError, FilterConfig, ParseMode,
    PeriodSeries, Post,
};
pub use features::{
    compute_facets, extract_features, Facet, FacetScores, FeatureRow, FeatureVector, PostMeta,
    FEATURE_COUNT, FEATURE_NAMES,
};
pub use forest::{ForestConfig, ForestModel, Label};
pub use lexicon::{load_lexicons, Category, LexiconError, LexiconSet};
pub use snqam::{
    assess, calibrate, load_model, save_model, score, suggest, Assessment, Catalog,
    CalibrationOptions, ModelError, QualityModel, SuggestOptions,
};

/// Annotates and extracts in one step.
pub fn featurize(text: &str, meta: PostMeta, lex: &LexiconSet) -> FeatureRow {
    FeatureRow::new(extract_features(&annotate(text, lex), meta))
}

/// [`featurize`] over a batch of posts, in parallel, preserving order.
pub fn featurize_posts(posts: &[Post], lex: &LexiconSet) -> Vec<FeatureRow> {
    use rayon::prelude::*;
    posts
        .par_iter()
        .map(|p| featurize(&p.text, p.meta(), lex))
        .collect()
}
