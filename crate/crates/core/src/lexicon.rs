//! Dictionary resources: segmentation words, POS tags, and the per-category
//! word lists that most linguistic counts are matched against.
//!
//! Each category lives in its own UTF-8 file inside a lexicon directory. Lines
//! starting with `#` and blank lines are ignored. The POS dictionary holds
//! `surface<TAB>tag` lines, the sentiment lexicon `surface<TAB>weight` lines,
//! and every other file one bare surface form per line.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::PosTag;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate entry {surface:?}")]
    Duplicate {
        path: PathBuf,
        line: usize,
        surface: String,
    },
    #[error("segmentation dictionary {0} is missing or empty")]
    EmptySegmentation(PathBuf),
}

/// Word-list categories matched against post text by substring scanning.
///
/// The segmentation and POS dictionaries are handled separately since they
/// drive tokenization rather than counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Sentiment,
    ProfessionalTerms,
    OfficialSpeech,
    Uncertainty,
    Conjunctions,
    Adversatives,
    DegreeAdverbs,
    ModalParticles,
    Idioms,
    InterrogativePronouns,
    FirstPersonPronouns,
    SecondPersonPronouns,
    Demonstratives,
    ThirdPersonPronouns,
    LotteryMarkers,
}

impl Category {
    pub const ALL: [Category; 15] = [
        Category::Sentiment,
        Category::ProfessionalTerms,
        Category::OfficialSpeech,
        Category::Uncertainty,
        Category::Conjunctions,
        Category::Adversatives,
        Category::DegreeAdverbs,
        Category::ModalParticles,
        Category::Idioms,
        Category::InterrogativePronouns,
        Category::FirstPersonPronouns,
        Category::SecondPersonPronouns,
        Category::Demonstratives,
        Category::ThirdPersonPronouns,
        Category::LotteryMarkers,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Category::Sentiment => "sentiment.txt",
            Category::ProfessionalTerms => "professional.txt",
            Category::OfficialSpeech => "official_speech.txt",
            Category::Uncertainty => "uncertainty.txt",
            Category::Conjunctions => "conjunctions.txt",
            Category::Adversatives => "adversatives.txt",
            Category::DegreeAdverbs => "degree_adverbs.txt",
            Category::ModalParticles => "modal_particles.txt",
            Category::Idioms => "idioms.txt",
            Category::InterrogativePronouns => "interrogative_pronouns.txt",
            Category::FirstPersonPronouns => "first_person_pronouns.txt",
            Category::SecondPersonPronouns => "second_person_pronouns.txt",
            Category::Demonstratives => "demonstratives.txt",
            Category::ThirdPersonPronouns => "third_person_pronouns.txt",
            Category::LotteryMarkers => "lottery_markers.txt",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name().trim_end_matches(".txt"))
    }
}

pub const SEGMENTATION_FILE: &str = "dict.txt";
pub const POS_FILE: &str = "pos.tsv";

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: HashMap<char, usize>,
    /// Index into the owning lexicon's entry list when a word ends here.
    terminal: Option<usize>,
}

/// Character trie supporting leftmost-longest scanning.
#[derive(Debug, Clone)]
pub struct Trie {
    nodes: Vec<TrieNode>,
    max_len: usize,
}

impl Default for Trie {
    fn default() -> Self {
        Trie {
            nodes: vec![TrieNode::default()],
            max_len: 0,
        }
    }
}

impl Trie {
    fn insert(&mut self, word: &str, id: usize) {
        let mut node = 0;
        let mut len = 0;
        for c in word.chars() {
            len += 1;
            node = match self.nodes[node].children.get(&c) {
                Some(&next) => next,
                None => {
                    self.nodes.push(TrieNode::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[node].children.insert(c, next);
                    next
                }
            };
        }
        self.nodes[node].terminal = Some(id);
        self.max_len = self.max_len.max(len);
    }

    /// Longest entry starting at `chars[start]`, as `(char_len, entry_id)`.
    pub fn longest_prefix(&self, chars: &[char], start: usize) -> Option<(usize, usize)> {
        let mut node = 0;
        let mut best = None;
        for (offset, c) in chars[start..].iter().enumerate() {
            match self.nodes[node].children.get(c) {
                Some(&next) => node = next,
                None => break,
            }
            if let Some(id) = self.nodes[node].terminal {
                best = Some((offset + 1, id));
            }
        }
        best
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }
}

/// One loaded word list. Sentiment entries carry a weight in `[-1, 1]`;
/// every other category stores weight 0.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<(String, f64)>,
    trie: Trie,
}

impl Lexicon {
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut lex = Lexicon::default();
        for (surface, weight) in entries {
            let surface = surface.into();
            let id = lex.entries.len();
            lex.trie.insert(&surface, id);
            lex.entries.push((surface, weight));
        }
        lex
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.entries[id].1
    }

    /// Non-overlapping leftmost-longest matches over `chars`, as
    /// `(char_offset, char_len, entry_id)`.
    pub fn find_all(&self, chars: &[char]) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        if self.is_empty() {
            return out;
        }
        let mut i = 0;
        while i < chars.len() {
            match self.trie.longest_prefix(chars, i) {
                Some((len, id)) => {
                    out.push((i, len, id));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn contained_in(&self, text: &str) -> bool {
        self.entries.iter().any(|(s, _)| text.contains(s.as_str()))
    }
}

/// Every dictionary needed for annotation. Immutable once loaded.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    segmentation: Trie,
    pos: HashMap<String, PosTag>,
    categories: Vec<Lexicon>,
    warnings: Vec<String>,
}

impl LexiconSet {
    /// Builds a set from in-memory word lists. Words in the POS dictionary are
    /// added to the segmentation dictionary.
    pub fn new(
        segmentation: impl IntoIterator<Item = String>,
        pos: HashMap<String, PosTag>,
        categories: BTreeMap<Category, Lexicon>,
    ) -> Self {
        let mut trie = Trie::default();
        let mut seen = HashSet::new();
        let mut pos_words: Vec<&String> = pos.keys().collect();
        pos_words.sort();
        for word in segmentation.into_iter().chain(pos_words.into_iter().cloned()) {
            if seen.insert(word.clone()) {
                trie.insert(&word, seen.len() - 1);
            }
        }
        let mut by_index = vec![Lexicon::default(); Category::ALL.len()];
        for (cat, lex) in categories {
            by_index[cat.index()] = lex;
        }
        LexiconSet {
            segmentation: trie,
            pos,
            categories: by_index,
            warnings: Vec::new(),
        }
    }

    pub fn segmentation(&self) -> &Trie {
        &self.segmentation
    }

    pub fn pos_of(&self, surface: &str) -> Option<PosTag> {
        self.pos.get(surface).copied()
    }

    pub fn category(&self, cat: Category) -> &Lexicon {
        &self.categories[cat.index()]
    }

    /// Warnings collected while loading (missing optional categories).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn read_optional(path: &Path) -> Result<Option<String>, LexiconError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(LexiconError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn field_count_error(path: &Path, line: usize, expected: usize, got: usize) -> LexiconError {
    parse_error(
        path,
        line,
        format!("expected {expected} tab-separated field(s), found {got}"),
    )
}

fn parse_word_list(path: &Path, text: &str, weighted: bool) -> Result<Lexicon, LexiconError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        let expected = if weighted { 2 } else { 1 };
        if fields.len() != expected {
            return Err(field_count_error(path, line_no, expected, fields.len()));
        }
        let surface = fields[0].trim();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(parse_error(path, line_no, "empty or whitespace-bearing surface form"));
        }
        let weight = if weighted {
            let w: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("bad weight {:?}", fields[1])))?;
            if !(-1.0..=1.0).contains(&w) {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("sentiment weight {w} outside [-1, 1]"),
                ));
            }
            w
        } else {
            0.0
        };
        if !seen.insert(surface.to_string()) {
            return Err(LexiconError::Duplicate {
                path: path.to_path_buf(),
                line: line_no,
                surface: surface.to_string(),
            });
        }
        entries.push((surface.to_string(), weight));
    }
    Ok(Lexicon::from_entries(entries))
}

fn parse_pos(path: &Path, text: &str) -> Result<HashMap<String, PosTag>, LexiconError> {
    let mut map = HashMap::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(field_count_error(path, line_no, 2, fields.len()));
        }
        let surface = fields[0].trim();
        if surface.is_empty() {
            return Err(parse_error(path, line_no, "empty surface form"));
        }
        let tag: PosTag = fields[1]
            .trim()
            .parse()
            .map_err(|e: String| parse_error(path, line_no, e))?;
        if map.insert(surface.to_string(), tag).is_some() {
            return Err(LexiconError::Duplicate {
                path: path.to_path_buf(),
                line: line_no,
                surface: surface.to_string(),
            });
        }
    }
    Ok(map)
}

/// Loads every dictionary from `dir`.
///
/// A missing or empty category file yields an empty lexicon and a warning;
/// a missing or empty segmentation dictionary is fatal.
pub fn load_lexicons(dir: impl AsRef<Path>) -> Result<LexiconSet, LexiconError> {
    let dir = dir.as_ref();
    let seg_path = dir.join(SEGMENTATION_FILE);
    let seg_text =
        read_optional(&seg_path)?.ok_or_else(|| LexiconError::EmptySegmentation(seg_path.clone()))?;
    let seg = parse_word_list(&seg_path, &seg_text, false)?;
    if seg.is_empty() {
        return Err(LexiconError::EmptySegmentation(seg_path));
    }

    let mut warnings = Vec::new();
    let pos_path = dir.join(POS_FILE);
    let pos = match read_optional(&pos_path)? {
        Some(text) => parse_pos(&pos_path, &text)?,
        None => {
            warnings.push(format!("{} not found; every token tagged `other`", pos_path.display()));
            HashMap::new()
        }
    };

    let mut categories = BTreeMap::new();
    for cat in Category::ALL {
        let path = dir.join(cat.file_name());
        let lex = match read_optional(&path)? {
            Some(text) => parse_word_list(&path, &text, cat == Category::Sentiment)?,
            None => Lexicon::default(),
        };
        if lex.is_empty() {
            warnings.push(format!("{} missing or empty; `{cat}` matches nothing", path.display()));
        }
        categories.insert(cat, lex);
    }
    for w in &warnings {
        tracing::warn!("{w}");
    }

    let words = seg.entries.into_iter().map(|(s, _)| s);
    let mut set = LexiconSet::new(words, pos, categories);
    set.warnings = warnings;
    Ok(set)
}
