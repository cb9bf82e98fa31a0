//! Post text annotation: structural stripping, forward-maximum-match
//! segmentation, POS tagging and per-category lexicon matching.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lexicon::{Category, LexiconSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Preposition,
    Pronoun,
    Numeral,
    TimeWord,
    PlaceWord,
    NamedEntity,
    ModalParticle,
    Punctuation,
    Other,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "noun",
            PosTag::Verb => "verb",
            PosTag::Adjective => "adjective",
            PosTag::Adverb => "adverb",
            PosTag::Preposition => "preposition",
            PosTag::Pronoun => "pronoun",
            PosTag::Numeral => "numeral",
            PosTag::TimeWord => "time-word",
            PosTag::PlaceWord => "place-word",
            PosTag::NamedEntity => "named-entity",
            PosTag::ModalParticle => "modal-particle",
            PosTag::Punctuation => "punctuation",
            PosTag::Other => "other",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    /// Accepts the long tag names and the common single-letter
    /// ICTCLAS-style codes (`n`, `v`, `a`, `nr`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "noun" | "n" => PosTag::Noun,
            "verb" | "v" => PosTag::Verb,
            "adjective" | "a" => PosTag::Adjective,
            "adverb" | "d" => PosTag::Adverb,
            "preposition" | "p" => PosTag::Preposition,
            "pronoun" | "r" => PosTag::Pronoun,
            "numeral" | "m" => PosTag::Numeral,
            "time-word" | "t" => PosTag::TimeWord,
            "place-word" | "s" | "ns" => PosTag::PlaceWord,
            "named-entity" | "nr" | "nt" => PosTag::NamedEntity,
            "modal-particle" | "y" => PosTag::ModalParticle,
            "punctuation" | "w" => PosTag::Punctuation,
            "other" | "x" => PosTag::Other,
            other => return Err(format!("unknown POS tag {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Offset in chars into the clean text.
    pub char_offset: usize,
    pub char_len: usize,
    pub pos: PosTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralMarkers {
    pub mentions: usize,
    pub hashtags: usize,
    pub urls: usize,
    pub title_present: bool,
    pub face_spans: usize,
    pub quote_char_count: usize,
    pub exclamation_marks: usize,
    pub question_marks: usize,
    pub intra_sentence_pauses: usize,
    /// Runs of consecutive sentence-final marks, so `!!!` ends one sentence.
    pub sentence_terminators: usize,
    pub clause_separators: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryHits {
    pub count: usize,
    /// Sum of entry weights; only non-zero for the sentiment lexicon.
    pub weight_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedText {
    pub clean_text: String,
    pub tokens: Vec<Token>,
    pub markers: StructuralMarkers,
    hits: Vec<CategoryHits>,
}

impl AnnotatedText {
    pub fn hits(&self, cat: Category) -> CategoryHits {
        self.hits[cat.index()]
    }

    pub fn count(&self, cat: Category) -> usize {
        self.hits[cat.index()].count
    }

    pub fn count_pos(&self, tag: PosTag) -> usize {
        self.tokens.iter().filter(|t| t.pos == tag).count()
    }
}

pub const QUOTE_CHARS: &[char] = &[
    '“', '”', '‘', '’', '「', '」', '『', '』', '"', '\'', '＂', '＇',
];
pub const EXCLAMATION_CHARS: &[char] = &['!', '！'];
pub const QUESTION_CHARS: &[char] = &['?', '？'];
pub const TERMINATOR_CHARS: &[char] = &['。', '！', '？', '!', '?'];
pub const PAUSE_CHARS: &[char] = &['，', '、', '；', '：', ',', ';', ':'];
pub const CLAUSE_SEPARATOR_CHARS: &[char] = &['，', '；', ',', ';'];

/// Pictographic emoji blocks counted as faces.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F5FF
        | 0x1F600..=0x1F64F
        | 0x1F680..=0x1F6FF
        | 0x1F900..=0x1F9FF
        | 0x1FA70..=0x1FAFF
        | 0x2600..=0x26FF
        | 0x2700..=0x27BF)
}

fn is_emoji_joiner(c: char) -> bool {
    matches!(c, '\u{FE0F}' | '\u{200D}')
}

/// Characters a URL may end on that are more likely sentence punctuation.
const URL_TRAILING: &[char] = &['.', '?', ':'];

fn structure_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(concat!(
            r"(?P<url>https?://[A-Za-z0-9\-._~/?=&%+:]+)",
            r"|(?P<tag>#[^#\n]{1,64}#)",
            r"|(?P<at>@[\x{3400}-\x{4DBF}\x{4E00}-\x{9FFF}A-Za-z0-9_\-]{1,30})",
            r"|(?P<face>\[[^\[\]]{1,8}\])",
        ))
        .expect("structure pattern compiles")
    })
}

/// Removes URLs, `@` mentions, `#topic#` hashtags, bracketed faces and emoji
/// from `text`, counting each kind, then tallies punctuation over what is left.
///
/// Each removed span is replaced by one space so words on either side never
/// fuse during segmentation.
pub fn strip_structure(text: &str) -> (String, StructuralMarkers) {
    let mut markers = StructuralMarkers::default();
    let mut stripped = String::with_capacity(text.len());
    let mut last = 0;
    for caps in structure_regex().captures_iter(text) {
        let whole = caps.get(0).expect("group 0");
        stripped.push_str(&text[last..whole.start()]);
        if caps.name("url").is_some() {
            let url = whole.as_str().trim_end_matches(URL_TRAILING);
            markers.urls += 1;
            stripped.push(' ');
            stripped.push_str(&whole.as_str()[url.len()..]);
        } else {
            if caps.name("tag").is_some() {
                markers.hashtags += 1;
            } else if caps.name("at").is_some() {
                markers.mentions += 1;
            } else {
                markers.face_spans += 1;
            }
            stripped.push(' ');
        }
        last = whole.end();
    }
    stripped.push_str(&text[last..]);

    let mut clean = String::with_capacity(stripped.len());
    for c in stripped.chars() {
        if is_emoji(c) {
            markers.face_spans += 1;
            clean.push(' ');
        } else if !is_emoji_joiner(c) {
            clean.push(c);
        }
    }

    tally_punctuation(&clean, &mut markers);
    markers.title_present = has_title(&clean);
    (clean, markers)
}

fn tally_punctuation(clean: &str, markers: &mut StructuralMarkers) {
    let mut in_terminator_run = false;
    for c in clean.chars() {
        if QUOTE_CHARS.contains(&c) {
            markers.quote_char_count += 1;
        }
        if EXCLAMATION_CHARS.contains(&c) {
            markers.exclamation_marks += 1;
        }
        if QUESTION_CHARS.contains(&c) {
            markers.question_marks += 1;
        }
        if PAUSE_CHARS.contains(&c) {
            markers.intra_sentence_pauses += 1;
        }
        if CLAUSE_SEPARATOR_CHARS.contains(&c) {
            markers.clause_separators += 1;
        }
        let is_term = TERMINATOR_CHARS.contains(&c);
        if is_term && !in_terminator_run {
            markers.sentence_terminators += 1;
        }
        in_terminator_run = is_term;
    }
}

fn has_title(clean: &str) -> bool {
    let Some(rest) = clean.trim_start().strip_prefix('【') else {
        return false;
    };
    match rest.find('】') {
        Some(end) => end > 0,
        None => false,
    }
}

/// Characters that belong to some token. Whitespace, punctuation and symbols
/// separate tokens and never appear inside one.
pub fn is_token_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn tag_for(surface: &str, lex: &LexiconSet) -> PosTag {
    if surface.chars().all(|c| c.is_ascii_digit()) {
        return PosTag::Numeral;
    }
    lex.pos_of(surface).unwrap_or(PosTag::Other)
}

fn push_token(tokens: &mut Vec<Token>, chars: &[char], start: usize, len: usize, lex: &LexiconSet) {
    let surface: String = chars[start..start + len].iter().collect();
    let pos = tag_for(&surface, lex);
    tokens.push(Token {
        surface,
        char_offset: start,
        char_len: len,
        pos,
    });
}

/// Segments `clean_text` into tagged tokens.
///
/// ASCII letter/digit runs become single tokens; other alphanumeric runs are
/// segmented by forward maximum matching against the segmentation
/// dictionary, with unmatched characters emitted one per token.
pub fn tokenize(clean_text: &str, lex: &LexiconSet) -> Vec<Token> {
    let chars: Vec<char> = clean_text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !is_token_char(c) {
            i += 1;
        } else if c.is_ascii_alphanumeric() {
            let len = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric()).count();
            push_token(&mut tokens, &chars, i, len, lex);
            i += len;
        } else {
            let run = chars[i..]
                .iter()
                .take_while(|&&c| is_token_char(c) && !c.is_ascii_alphanumeric())
                .count();
            let end = i + run;
            while i < end {
                let len = lex
                    .segmentation()
                    .longest_prefix(&chars[..end], i)
                    .map_or(1, |(len, _)| len);
                push_token(&mut tokens, &chars, i, len, lex);
                i += len;
            }
        }
    }
    tokens
}

pub fn annotate(text: &str, lex: &LexiconSet) -> AnnotatedText {
    let (clean_text, markers) = strip_structure(text);
    let tokens = tokenize(&clean_text, lex);
    let chars: Vec<char> = clean_text.chars().collect();
    let hits = Category::ALL
        .iter()
        .map(|&cat| {
            let lexicon = lex.category(cat);
            let found = lexicon.find_all(&chars);
            CategoryHits {
                count: found.len(),
                weight_sum: found.iter().fold(0.0, |acc, &(_, _, id)| acc + lexicon.weight(id)),
            }
        })
        .collect();
    AnnotatedText {
        clean_text,
        tokens,
        markers,
        hits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use std::collections::{BTreeMap, HashMap};

    fn lexset(words: &[&str], pos: &[(&str, PosTag)]) -> LexiconSet {
        let pos: HashMap<String, PosTag> = pos.iter().map(|(s, t)| (s.to_string(), *t)).collect();
        let mut cats = BTreeMap::new();
        cats.insert(Category::Adversatives, Lexicon::from_entries([("但是", 0.0)]));
        LexiconSet::new(words.iter().map(|w| w.to_string()), pos, cats)
    }

    #[test]
    fn strips_title_tag_mention_url() {
        let (clean, m) = strip_structure("【标题】正文 #话题# @某人 http://t.cn/x");
        assert!(m.title_present);
        assert_eq!((m.hashtags, m.mentions, m.urls), (1, 1, 1));
        assert_eq!(clean.trim_end(), "【标题】正文");
    }

    #[test]
    fn empty_text() {
        let (clean, m) = strip_structure("");
        assert!(clean.is_empty());
        assert_eq!(m, StructuralMarkers::default());
    }

    #[test]
    fn faces_and_exclamations() {
        let (_, m) = strip_structure("真棒![赞][赞]");
        assert_eq!(m.exclamation_marks, 1);
        assert_eq!(m.face_spans, 2);
    }

    #[test]
    fn emoji_counted_as_faces() {
        let (clean, m) = strip_structure("好😀👍\u{FE0F}");
        assert_eq!(m.face_spans, 2);
        assert_eq!(clean.trim(), "好");
    }

    #[test]
    fn url_gives_back_trailing_question_mark() {
        let (clean, m) = strip_structure("看这里 http://t.cn/a?");
        assert_eq!(m.urls, 1);
        assert_eq!(m.question_marks, 1);
        assert!(clean.ends_with('?'));
    }

    #[test]
    fn terminator_runs_count_once() {
        let (_, m) = strip_structure("太好了!!!真的吗?");
        assert_eq!(m.exclamation_marks, 3);
        assert_eq!(m.sentence_terminators, 2);
    }

    #[test]
    fn idempotent_on_clean_text() {
        let text = "【快讯】#两会# @新华社 3月5日，政府工作报告发布！[鼓掌] https://t.cn/R1x";
        let (clean, m) = strip_structure(text);
        let (again, m2) = strip_structure(&clean);
        assert_eq!(clean, again);
        assert_eq!(m.exclamation_marks, m2.exclamation_marks);
        assert_eq!(m2.urls + m2.hashtags + m2.mentions + m2.face_spans, 0);
    }

    #[test]
    fn single_dictionary_word() {
        let lex = lexset(&["我们"], &[]);
        let toks = tokenize("我们", &lex);
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].char_len, 2);
    }

    #[test]
    fn maximum_match_trace() {
        let lex = lexset(&["我们", "的"], &[]);
        let surfaces: Vec<_> = tokenize("我们的", &lex).into_iter().map(|t| t.surface).collect();
        assert_eq!(surfaces, ["我们", "的"]);
    }

    #[test]
    fn ascii_digits_are_numerals() {
        let lex = lexset(&["年"], &[("年", PosTag::TimeWord)]);
        let toks = tokenize("2019年", &lex);
        assert_eq!(toks.len(), 2);
        assert_eq!((toks[0].surface.as_str(), toks[0].pos), ("2019", PosTag::Numeral));
        assert_eq!((toks[1].surface.as_str(), toks[1].pos), ("年", PosTag::TimeWord));
    }

    #[test]
    fn unmatched_cjk_split_per_char() {
        let lex = lexset(&["高铁"], &[]);
        let toks = tokenize("高铁提速", &lex);
        let lens: Vec<_> = toks.iter().map(|t| t.char_len).collect();
        assert_eq!(lens, [2, 1, 1]);
        assert!(toks.iter().skip(1).all(|t| t.pos == PosTag::Other));
    }

    #[test]
    fn punctuation_only() {
        let lex = lexset(&["我们"], &[]);
        let ann = annotate("！？。，", &lex);
        assert!(ann.tokens.is_empty());
        assert_eq!(ann.markers.exclamation_marks, 1);
        assert_eq!(ann.markers.question_marks, 1);
    }

    #[test]
    fn adversative_hit() {
        let lex = lexset(&["我们"], &[]);
        let ann = annotate("天气很好，但是有风。", &lex);
        assert_eq!(ann.count(Category::Adversatives), 1);
    }

    #[test]
    fn pos_tag_codes() {
        assert_eq!("nr".parse::<PosTag>().unwrap(), PosTag::NamedEntity);
        assert_eq!("time-word".parse::<PosTag>().unwrap(), PosTag::TimeWord);
        assert!("zz".parse::<PosTag>().is_err());
    }
}
