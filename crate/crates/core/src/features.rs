//! Basic linguistic features and the eight facet scores built from them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotate::{AnnotatedText, PosTag};
use crate::lexicon::Category;

macro_rules! feature_vector {
    ($($name:ident),* $(,)?) => {
        /// The basic features of one post, in canonical order.
        ///
        /// Counts are stored as `f64` so vectors feed matrices directly.
        #[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
        pub struct FeatureVector {
            $(pub $name: f64,)*
        }

        pub const FEATURE_NAMES: &[&str] = &[$(stringify!($name)),*];

        impl FeatureVector {
            pub fn to_vec(&self) -> Vec<f64> {
                vec![$(self.$name),*]
            }

            pub fn from_slice(values: &[f64]) -> Option<Self> {
                let mut it = values.iter().copied();
                let fv = FeatureVector { $($name: it.next()?,)* };
                it.next().is_none().then_some(fv)
            }

            fn slot_mut(&mut self, index: usize) -> Option<&mut f64> {
                let slots = [$(&mut self.$name),*];
                slots.into_iter().nth(index)
            }
        }
    };
}

feature_vector!(
    sentence_broken,
    characters,
    words,
    sentences,
    clauses,
    average_word_length,
    professional_words,
    rix,
    lix,
    lw,
    forward_reference,
    conj,
    at,
    numerals,
    official_speech,
    time,
    place,
    object,
    uncertainty,
    image,
    noun,
    adj,
    prep,
    pron,
    verb,
    adv,
    question_mark,
    first_pron,
    second_pron,
    interrogative_pron,
    rhetoric,
    exclamation_mark,
    face,
    idiom,
    adversative,
    sentiment_score,
    adv_of_degree,
    modal_particle,
    has_head,
    has_image,
    has_video,
    has_tag,
    has_at,
    has_url,
);

pub const FEATURE_COUNT: usize = 44;

/// Canonical feature ordering shared by matrices, model files and CSV output.
pub fn feature_names() -> &'static [&'static str] {
    FEATURE_NAMES
}

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

impl FeatureVector {
    pub fn get(&self, index: usize) -> f64 {
        self.to_vec()[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        *self.slot_mut(index).expect("feature index in range") = value;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let values: Vec<f64> = self.to_vec().into_iter().map(|v| v * factor).collect();
        Self::from_slice(&values).expect("same length")
    }
}

/// Metadata not recoverable from text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostMeta {
    pub has_image: bool,
    pub has_video: bool,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Tokens at least this many characters long count as long words.
pub const LONG_WORD_CHARS: usize = 3;

pub fn extract_features(ann: &AnnotatedText, meta: PostMeta) -> FeatureVector {
    let m = &ann.markers;
    let count = |cat: Category| ann.count(cat) as f64;
    let pos = |tag: PosTag| ann.count_pos(tag) as f64;

    let characters: usize = ann.tokens.iter().map(|t| t.char_len).sum();
    let words = ann.tokens.len() as f64;
    let has_content = ann.clean_text.chars().any(|c| !c.is_whitespace());
    let sentences = if has_content {
        m.sentence_terminators.max(1) as f64
    } else {
        0.0
    };
    let lw = ann
        .tokens
        .iter()
        .filter(|t| t.char_len >= LONG_WORD_CHARS)
        .count() as f64;
    let sentiment = ann.hits(Category::Sentiment);
    let sentiment_score =
        (sentiment.weight_sum / sentiment.count.max(1) as f64).clamp(-1.0, 1.0);
    let image = flag(meta.has_image);

    FeatureVector {
        sentence_broken: m.intra_sentence_pauses as f64,
        characters: characters as f64,
        words,
        sentences,
        clauses: sentences + m.clause_separators as f64,
        average_word_length: ratio(characters as f64, words),
        professional_words: count(Category::ProfessionalTerms),
        rix: ratio(lw, sentences),
        lix: ratio(words, sentences) + 100.0 * ratio(lw, words),
        lw,
        forward_reference: count(Category::Demonstratives) + count(Category::ThirdPersonPronouns),
        conj: count(Category::Conjunctions),
        at: m.mentions as f64,
        numerals: pos(PosTag::Numeral),
        official_speech: count(Category::OfficialSpeech),
        time: pos(PosTag::TimeWord),
        place: pos(PosTag::PlaceWord),
        object: pos(PosTag::NamedEntity),
        uncertainty: count(Category::Uncertainty),
        image,
        noun: pos(PosTag::Noun),
        adj: pos(PosTag::Adjective),
        prep: pos(PosTag::Preposition),
        pron: pos(PosTag::Pronoun),
        verb: pos(PosTag::Verb),
        adv: pos(PosTag::Adverb),
        question_mark: m.question_marks as f64,
        first_pron: count(Category::FirstPersonPronouns),
        second_pron: count(Category::SecondPersonPronouns),
        interrogative_pron: count(Category::InterrogativePronouns),
        rhetoric: m.quote_char_count as f64,
        exclamation_mark: m.exclamation_marks as f64,
        face: m.face_spans as f64,
        idiom: count(Category::Idioms),
        adversative: count(Category::Adversatives),
        sentiment_score,
        adv_of_degree: count(Category::DegreeAdverbs),
        modal_particle: count(Category::ModalParticles),
        has_head: flag(m.title_present),
        has_image: image,
        has_video: flag(meta.has_video),
        has_tag: flag(m.hashtags > 0),
        has_at: flag(m.mentions > 0),
        has_url: flag(m.urls > 0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Readability,
    Logic,
    Credibility,
    Formality,
    Interactivity,
    Interestingness,
    Sensation,
    Integrity,
}

impl Facet {
    pub const ALL: [Facet; 8] = [
        Facet::Readability,
        Facet::Logic,
        Facet::Credibility,
        Facet::Formality,
        Facet::Interactivity,
        Facet::Interestingness,
        Facet::Sensation,
        Facet::Integrity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Facet::Readability => "readability",
            Facet::Logic => "logic",
            Facet::Credibility => "credibility",
            Facet::Formality => "formality",
            Facet::Interactivity => "interactivity",
            Facet::Interestingness => "interestingness",
            Facet::Sensation => "sensation",
            Facet::Integrity => "integrity",
        }
    }

    /// Signed coefficients of the facet's defining linear formula.
    pub fn terms(self) -> &'static [(&'static str, f64)] {
        match self {
            Facet::Readability => &[
                ("sentence_broken", -1.0),
                ("characters", -1.0),
                ("words", -1.0),
                ("sentences", -1.0),
                ("clauses", -1.0),
                ("average_word_length", -1.0),
                ("professional_words", -1.0),
                ("lw", -1.0),
                ("rix", -1.0),
                ("lix", -1.0),
            ],
            Facet::Logic => &[("forward_reference", 1.0), ("conj", 1.0)],
            Facet::Credibility => &[
                ("at", 1.0),
                ("numerals", 1.0),
                ("official_speech", 1.0),
                ("time", 1.0),
                ("place", 1.0),
                ("object", 1.0),
                ("uncertainty", -1.0),
                ("image", 1.0),
            ],
            Facet::Formality => &[
                ("noun", 1.0),
                ("adj", 1.0),
                ("prep", 1.0),
                ("pron", -1.0),
                ("verb", -1.0),
                ("adv", -1.0),
                ("sentence_broken", -1.0),
            ],
            Facet::Interactivity => &[
                ("question_mark", 1.0),
                ("first_pron", 1.0),
                ("second_pron", 1.0),
                ("interrogative_pron", 1.0),
            ],
            Facet::Interestingness => &[
                ("rhetoric", 1.0),
                ("exclamation_mark", 1.0),
                ("face", 1.0),
                ("idiom", 1.0),
                ("adversative", 1.0),
                ("adj", 1.0),
                ("image", 1.0),
            ],
            Facet::Sensation => &[
                ("sentiment_score", 1.0),
                ("adv_of_degree", 1.0),
                ("modal_particle", 1.0),
                ("first_pron", 1.0),
                ("second_pron", 1.0),
                ("exclamation_mark", 1.0),
                ("question_mark", 1.0),
            ],
            Facet::Integrity => &[
                ("has_head", 2.0),
                ("has_image", 2.0),
                ("has_video", 2.0),
                ("has_tag", 2.0),
                ("has_at", 1.0),
                ("has_url", 1.0),
            ],
        }
    }

    /// Indices of the basic features this facet is built from.
    pub fn member_indices(self) -> Vec<usize> {
        self.terms()
            .iter()
            .map(|(name, _)| feature_index(name).expect("facet term is a feature"))
            .collect()
    }

    /// Boolean mask over the canonical feature order.
    pub fn mask(self) -> Vec<bool> {
        let mut mask = vec![false; FEATURE_COUNT];
        for i in self.member_indices() {
            mask[i] = true;
        }
        mask
    }

    /// Facets containing the feature at `index`.
    pub fn containing(index: usize) -> Vec<Facet> {
        Facet::ALL
            .into_iter()
            .filter(|f| f.member_indices().contains(&index))
            .collect()
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Facet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Facet::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown facet {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FacetScores {
    pub readability: f64,
    pub logic: f64,
    pub credibility: f64,
    pub formality: f64,
    pub interactivity: f64,
    pub interestingness: f64,
    pub sensation: f64,
    pub integrity: f64,
}

impl FacetScores {
    pub fn get(&self, facet: Facet) -> f64 {
        match facet {
            Facet::Readability => self.readability,
            Facet::Logic => self.logic,
            Facet::Credibility => self.credibility,
            Facet::Formality => self.formality,
            Facet::Interactivity => self.interactivity,
            Facet::Interestingness => self.interestingness,
            Facet::Sensation => self.sensation,
            Facet::Integrity => self.integrity,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        Facet::ALL.iter().map(|&f| self.get(f)).collect()
    }
}

pub fn compute_facets(f: &FeatureVector) -> FacetScores {
    let score = |facet: Facet| -> f64 {
        facet
            .terms()
            .iter()
            .zip(facet.member_indices())
            .map(|(&(_, coef), i)| coef * f.get(i))
            .sum()
    };
    FacetScores {
        readability: score(Facet::Readability),
        logic: score(Facet::Logic),
        credibility: score(Facet::Credibility),
        formality: score(Facet::Formality),
        interactivity: score(Facet::Interactivity),
        interestingness: score(Facet::Interestingness),
        sensation: score(Facet::Sensation),
        integrity: score(Facet::Integrity),
    }
}

/// Features plus facets for one post, the shape served by the extract endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub features: FeatureVector,
    pub facets: FacetScores,
}

impl FeatureRow {
    pub fn new(features: FeatureVector) -> Self {
        FeatureRow {
            facets: compute_facets(&features),
            features,
        }
    }

    /// Basic features followed by facet values.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.features.to_vec();
        v.extend(self.facets.to_vec());
        v
    }
}

/// Names for [`FeatureRow::values`]: the basic features then the facets.
pub fn row_names() -> Vec<String> {
    FEATURE_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(Facet::ALL.iter().map(|f| f.name().to_string()))
        .collect()
}

/// Writes a feature matrix as CSV: `post_id`, the basic features, and
/// optionally the eight facet columns.
pub fn write_feature_csv<W: Write>(
    out: W,
    rows: &[(String, FeatureRow)],
    with_facets: bool,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["post_id".to_string()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    if with_facets {
        header.extend(Facet::ALL.iter().map(|f| f.name().to_string()));
    }
    w.write_record(&header)?;
    for (id, row) in rows {
        let mut record = vec![id.clone()];
        let values = if with_facets {
            row.values()
        } else {
            row.features.to_vec()
        };
        record.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::annotate;
    use crate::lexicon::{Lexicon, LexiconSet};
    use proptest::prelude::*;
    use std::collections::{BTreeMap, HashMap};

    fn empty_lex() -> LexiconSet {
        LexiconSet::new(["占位".to_string()], HashMap::new(), BTreeMap::new())
    }

    #[test]
    fn canonical_names() {
        assert_eq!(FEATURE_NAMES.len(), FEATURE_COUNT);
        assert_eq!(feature_names()[0], "sentence_broken");
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            assert_eq!(feature_index(name), Some(i));
        }
        let unique: std::collections::HashSet<_> = FEATURE_NAMES.iter().collect();
        assert_eq!(unique.len(), FEATURE_COUNT);
    }

    #[test]
    fn empty_post_is_zero() {
        let ann = annotate("", &empty_lex());
        let f = extract_features(&ann, PostMeta::default());
        assert_eq!(f, FeatureVector::default());
    }

    #[test]
    fn single_long_token() {
        let lex = LexiconSet::new(["四字成语".to_string()], HashMap::new(), BTreeMap::new());
        let ann = annotate("四字成语", &lex);
        assert_eq!(ann.tokens.len(), 1);
        let f = extract_features(&ann, PostMeta::default());
        assert_eq!(f.sentences, 1.0);
        assert_eq!(f.lw, 1.0);
        assert_eq!(f.rix, 1.0);
        assert_eq!(f.lix, 101.0);
        assert_eq!(f.average_word_length, 4.0);
    }

    #[test]
    fn sentiment_mean_is_clamped_average() {
        let mut cats = BTreeMap::new();
        cats.insert(Category::Sentiment, Lexicon::from_entries([("好", 0.8), ("坏", -0.4)]));
        let lex = LexiconSet::new(["占位".to_string()], HashMap::new(), cats);
        let f = extract_features(&annotate("好好坏", &lex), PostMeta::default());
        assert!((f.sentiment_score - (0.8 + 0.8 - 0.4) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn facets_at_origin() {
        assert_eq!(compute_facets(&FeatureVector::default()), FacetScores::default());
    }

    #[test]
    fn integrity_all_flags() {
        let f = FeatureVector {
            has_head: 1.0,
            has_image: 1.0,
            has_video: 1.0,
            has_tag: 1.0,
            has_at: 1.0,
            has_url: 1.0,
            ..Default::default()
        };
        assert_eq!(compute_facets(&f).integrity, 10.0);
    }

    #[test]
    fn interactivity_sum() {
        let f = FeatureVector {
            question_mark: 2.0,
            first_pron: 1.0,
            second_pron: 1.0,
            interrogative_pron: 1.0,
            ..Default::default()
        };
        assert_eq!(compute_facets(&f).interactivity, 5.0);
    }

    #[test]
    fn exclamation_feeds_two_facets() {
        let f = FeatureVector {
            exclamation_mark: 3.0,
            ..Default::default()
        };
        let s = compute_facets(&f);
        assert_eq!(s.interestingness, 3.0);
        assert_eq!(s.sensation, 3.0);
    }

    #[test]
    fn unit_increment_directions() {
        let base = FeatureVector::default();
        let bumped = |name: &str| {
            let mut f = base;
            f.set(feature_index(name).unwrap(), 1.0);
            compute_facets(&f)
        };
        let origin = compute_facets(&base);
        for (name, _) in Facet::Readability.terms() {
            assert!(bumped(name).readability < origin.readability, "{name}");
        }
        assert!(bumped("uncertainty").credibility < origin.credibility);
        for name in ["pron", "verb", "adv", "sentence_broken"] {
            assert!(bumped(name).formality < origin.formality, "{name}");
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let rows = vec![("p1".to_string(), FeatureRow::new(FeatureVector::default()))];
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &rows, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 1 + FEATURE_COUNT + 8);
        assert_eq!(header[0], "post_id");
        assert_eq!(header[1], "sentence_broken");
        assert_eq!(*header.last().unwrap(), "integrity");
        assert_eq!(lines.count(), 1);
    }

    proptest! {
        #[test]
        fn facets_are_linear(values in proptest::collection::vec(0u8..50, FEATURE_COUNT), a in 0u8..10) {
            let mut raw: Vec<f64> = values.into_iter().map(f64::from).collect();
            raw[feature_index("sentiment_score").unwrap()] = 0.0;
            let f = FeatureVector::from_slice(&raw).unwrap();
            let a = f64::from(a);
            let lhs = compute_facets(&f.scaled(a)).to_vec();
            let rhs: Vec<f64> = compute_facets(&f).to_vec().into_iter().map(|v| a * v).collect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
