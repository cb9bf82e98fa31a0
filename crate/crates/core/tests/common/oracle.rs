//! Naive reference implementation of annotation and feature extraction.
//!
//! Shares no code with the library beyond the `FeatureVector` struct it
//! fills: lexicon files are parsed here, structure is stripped by a
//! character scan, segmentation tries every word length, and category
//! matches compare every entry at every position.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use snqam_core::FeatureVector;

pub struct OracleLexicons {
    words: HashSet<String>,
    longest_word: usize,
    pos: HashMap<String, String>,
    categories: HashMap<&'static str, Vec<(Vec<char>, f64)>>,
}

const CATEGORY_FILES: [&str; 15] = [
    "sentiment.txt",
    "professional.txt",
    "official_speech.txt",
    "uncertainty.txt",
    "conjunctions.txt",
    "adversatives.txt",
    "degree_adverbs.txt",
    "modal_particles.txt",
    "idioms.txt",
    "interrogative_pronouns.txt",
    "first_person_pronouns.txt",
    "second_person_pronouns.txt",
    "demonstratives.txt",
    "third_person_pronouns.txt",
    "lottery_markers.txt",
];

fn data_lines(path: &Path) -> Vec<String> {
    let Ok(text) = fs::read_to_string(path) else {
        return Vec::new();
    };
    text.lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect()
}

impl OracleLexicons {
    pub fn load(dir: &Path) -> Self {
        let mut words: HashSet<String> = data_lines(&dir.join("dict.txt"))
            .into_iter()
            .map(|l| l.trim().to_string())
            .collect();
        let mut pos = HashMap::new();
        for line in data_lines(&dir.join("pos.tsv")) {
            let mut parts = line.split('\t');
            let surface = parts.next().unwrap().trim().to_string();
            let tag = parts.next().unwrap().trim().to_string();
            words.insert(surface.clone());
            pos.insert(surface, tag);
        }
        let longest_word = words.iter().map(|w| w.chars().count()).max().unwrap_or(1);
        let mut categories = HashMap::new();
        for file in CATEGORY_FILES {
            let entries = data_lines(&dir.join(file))
                .into_iter()
                .map(|line| {
                    let mut parts = line.split('\t');
                    let surface: Vec<char> = parts.next().unwrap().trim().chars().collect();
                    let weight = parts.next().map(|w| w.trim().parse().unwrap()).unwrap_or(0.0);
                    (surface, weight)
                })
                .collect();
            categories.insert(file, entries);
        }
        OracleLexicons {
            words,
            longest_word,
            pos,
            categories,
        }
    }

    /// (count, weight sum) of leftmost-longest non-overlapping matches.
    pub fn scan(&self, file: &str, text: &[char]) -> (usize, f64) {
        let entries = &self.categories[file];
        let (mut count, mut weight) = (0, 0.0);
        let mut i = 0;
        while i < text.len() {
            let mut best: Option<(usize, f64)> = None;
            for (surface, w) in entries {
                let n = surface.len();
                if i + n <= text.len()
                    && text[i..i + n] == surface[..]
                    && best.is_none_or(|(bn, _)| n > bn)
                {
                    best = Some((n, *w));
                }
            }
            match best {
                Some((n, w)) => {
                    count += 1;
                    weight += w;
                    i += n;
                }
                None => i += 1,
            }
        }
        (count, weight)
    }

    fn tag(&self, surface: &str) -> &str {
        if surface.chars().all(|c| c.is_ascii_digit()) {
            return "numeral";
        }
        self.pos.get(surface).map(String::as_str).unwrap_or("other")
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct OracleMarkers {
    pub urls: usize,
    pub tags: usize,
    pub ats: usize,
    pub faces: usize,
    pub quotes: usize,
    pub exclamations: usize,
    pub questions: usize,
    pub pauses: usize,
    pub separators: usize,
    pub terminator_runs: usize,
    pub title: bool,
}

fn url_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "-._~/?=&%+:".contains(c)
}

fn at_char(c: char) -> bool {
    let u = c as u32;
    (0x3400..=0x4DBF).contains(&u)
        || (0x4E00..=0x9FFF).contains(&u)
        || c.is_ascii_alphanumeric()
        || c == '_'
        || c == '-'
}

fn emoji(c: char) -> bool {
    let u = c as u32;
    [
        (0x1F300, 0x1F5FF),
        (0x1F600, 0x1F64F),
        (0x1F680, 0x1F6FF),
        (0x1F900, 0x1F9FF),
        (0x1FA70, 0x1FAFF),
        (0x2600, 0x26FF),
        (0x2700, 0x27BF),
    ]
    .iter()
    .any(|&(lo, hi)| (lo..=hi).contains(&u))
}

fn starts_with(chars: &[char], i: usize, s: &str) -> bool {
    let p: Vec<char> = s.chars().collect();
    i + p.len() <= chars.len() && chars[i..i + p.len()] == p[..]
}

/// Length of a URL span at `i`, before giving back trailing punctuation.
fn url_at(c: &[char], i: usize) -> Option<usize> {
    let scheme = if starts_with(c, i, "https://") {
        8
    } else if starts_with(c, i, "http://") {
        7
    } else {
        return None;
    };
    let body = c[i + scheme..].iter().take_while(|&&ch| url_char(ch)).count();
    (body > 0).then_some(scheme + body)
}

fn tag_at(c: &[char], i: usize) -> Option<usize> {
    if c[i] != '#' {
        return None;
    }
    let mut j = i + 1;
    while j < c.len() && c[j] != '#' && c[j] != '\n' {
        j += 1;
    }
    let inner = j - i - 1;
    (j < c.len() && c[j] == '#' && (1..=64).contains(&inner)).then_some(inner + 2)
}

fn at_at(c: &[char], i: usize) -> Option<usize> {
    if c[i] != '@' {
        return None;
    }
    let n = c[i + 1..].iter().take_while(|&&ch| at_char(ch)).take(30).count();
    (n > 0).then_some(n + 1)
}

fn face_at(c: &[char], i: usize) -> Option<usize> {
    if c[i] != '[' {
        return None;
    }
    let mut j = i + 1;
    while j < c.len() && c[j] != '[' && c[j] != ']' {
        j += 1;
    }
    let inner = j - i - 1;
    (j < c.len() && c[j] == ']' && (1..=8).contains(&inner)).then_some(inner + 2)
}

pub fn strip(text: &str) -> (Vec<char>, OracleMarkers) {
    let c: Vec<char> = text.chars().collect();
    let mut m = OracleMarkers::default();
    let mut out = Vec::new();
    let mut i = 0;
    while i < c.len() {
        if let Some(n) = url_at(&c, i) {
            let mut keep = n;
            while keep > 0 && ".?:".contains(c[i + keep - 1]) {
                keep -= 1;
            }
            m.urls += 1;
            out.push(' ');
            out.extend_from_slice(&c[i + keep..i + n]);
            i += n;
        } else if let Some(n) = tag_at(&c, i) {
            m.tags += 1;
            out.push(' ');
            i += n;
        } else if let Some(n) = at_at(&c, i) {
            m.ats += 1;
            out.push(' ');
            i += n;
        } else if let Some(n) = face_at(&c, i) {
            m.faces += 1;
            out.push(' ');
            i += n;
        } else {
            out.push(c[i]);
            i += 1;
        }
    }
    let mut clean = Vec::new();
    for ch in out {
        if emoji(ch) {
            m.faces += 1;
            clean.push(' ');
        } else if ch != '\u{FE0F}' && ch != '\u{200D}' {
            clean.push(ch);
        }
    }
    let mut prev_term = false;
    for &ch in &clean {
        m.quotes += "“”‘’「」『』\"'＂＇".contains(ch) as usize;
        m.exclamations += "!！".contains(ch) as usize;
        m.questions += "?？".contains(ch) as usize;
        m.pauses += "，、；：,;:".contains(ch) as usize;
        m.separators += "，；,;".contains(ch) as usize;
        let term = "。！？!?".contains(ch);
        if term && !prev_term {
            m.terminator_runs += 1;
        }
        prev_term = term;
    }
    let mut k = 0;
    while k < clean.len() && clean[k].is_whitespace() {
        k += 1;
    }
    m.title = k < clean.len()
        && clean[k] == '【'
        && clean[k + 1..].iter().position(|&ch| ch == '】').is_some_and(|p| p > 0);
    (clean, m)
}

/// Tokens as (surface, char length).
pub fn segment(clean: &[char], lex: &OracleLexicons) -> Vec<(String, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < clean.len() {
        let c = clean[i];
        if !c.is_alphanumeric() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() {
            let mut j = i;
            while j < clean.len() && clean[j].is_ascii_alphanumeric() {
                j += 1;
            }
            tokens.push((clean[i..j].iter().collect(), j - i));
            i = j;
            continue;
        }
        let mut end = i;
        while end < clean.len() && clean[end].is_alphanumeric() && !clean[end].is_ascii_alphanumeric() {
            end += 1;
        }
        while i < end {
            let mut len = 1;
            for n in (2..=lex.longest_word.min(end - i)).rev() {
                let w: String = clean[i..i + n].iter().collect();
                if lex.words.contains(&w) {
                    len = n;
                    break;
                }
            }
            tokens.push((clean[i..i + len].iter().collect(), len));
            i += len;
        }
    }
    tokens
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

pub fn features(text: &str, has_image: bool, has_video: bool, lex: &OracleLexicons) -> FeatureVector {
    let (clean, m) = strip(text);
    let tokens = segment(&clean, lex);
    let tag_count = |tags: &[&str]| {
        tokens
            .iter()
            .filter(|(s, _)| {
                let t = lex.tag(s);
                tags.contains(&t)
            })
            .count() as f64
    };
    let cat = |file: &str| lex.scan(file, &clean).0 as f64;

    let characters = tokens.iter().map(|t| t.1).sum::<usize>() as f64;
    let words = tokens.len() as f64;
    let sentences = if clean.iter().all(|c| c.is_whitespace()) {
        0.0
    } else {
        (m.terminator_runs as f64).max(1.0)
    };
    let lw = tokens.iter().filter(|t| t.1 >= 3).count() as f64;
    let (hits, wsum) = lex.scan("sentiment.txt", &clean);
    let sentiment = (wsum / (hits.max(1) as f64)).clamp(-1.0, 1.0);
    let b = |x: bool| if x { 1.0 } else { 0.0 };

    FeatureVector {
        sentence_broken: m.pauses as f64,
        characters,
        words,
        sentences,
        clauses: sentences + m.separators as f64,
        average_word_length: div(characters, words),
        professional_words: cat("professional.txt"),
        rix: div(lw, sentences),
        lix: div(words, sentences) + 100.0 * div(lw, words),
        lw,
        forward_reference: cat("demonstratives.txt") + cat("third_person_pronouns.txt"),
        conj: cat("conjunctions.txt"),
        at: m.ats as f64,
        numerals: tag_count(&["numeral", "m"]),
        official_speech: cat("official_speech.txt"),
        time: tag_count(&["time-word", "t"]),
        place: tag_count(&["place-word", "s", "ns"]),
        object: tag_count(&["named-entity", "nr", "nt"]),
        uncertainty: cat("uncertainty.txt"),
        image: b(has_image),
        noun: tag_count(&["noun", "n"]),
        adj: tag_count(&["adjective", "a"]),
        prep: tag_count(&["preposition", "p"]),
        pron: tag_count(&["pronoun", "r"]),
        verb: tag_count(&["verb", "v"]),
        adv: tag_count(&["adverb", "d"]),
        question_mark: m.questions as f64,
        first_pron: cat("first_person_pronouns.txt"),
        second_pron: cat("second_person_pronouns.txt"),
        interrogative_pron: cat("interrogative_pronouns.txt"),
        rhetoric: m.quotes as f64,
        exclamation_mark: m.exclamations as f64,
        face: m.faces as f64,
        idiom: cat("idioms.txt"),
        adversative: cat("adversatives.txt"),
        sentiment_score: sentiment,
        adv_of_degree: cat("degree_adverbs.txt"),
        modal_particle: cat("modal_particles.txt"),
        has_head: b(m.title),
        has_image: b(has_image),
        has_video: b(has_video),
        has_tag: b(m.tags > 0),
        has_at: b(m.ats > 0),
        has_url: b(m.urls > 0),
    }
}

/// The eight facet formulas written out term by term.
pub fn facets(f: &FeatureVector) -> [f64; 8] {
    [
        -(f.sentence_broken
            + f.characters
            + f.words
            + f.sentences
            + f.clauses
            + f.average_word_length
            + f.professional_words
            + f.lw
            + f.rix
            + f.lix),
        f.forward_reference + f.conj,
        f.at + f.numerals + f.official_speech + f.time + f.place + f.object - f.uncertainty + f.image,
        f.noun + f.adj + f.prep - f.pron - f.verb - f.adv - f.sentence_broken,
        f.question_mark + f.first_pron + f.second_pron + f.interrogative_pron,
        f.rhetoric + f.exclamation_mark + f.face + f.idiom + f.adversative + f.adj + f.image,
        f.sentiment_score
            + f.adv_of_degree
            + f.modal_particle
            + f.first_pron
            + f.second_pron
            + f.exclamation_mark
            + f.question_mark,
        2.0 * f.has_head + 2.0 * f.has_image + 2.0 * f.has_video + 2.0 * f.has_tag + f.has_at + f.has_url,
    ]
}

/// The JSON-lines text field and media flags, parsed without the library.
pub fn fixture_posts(path: &Path) -> Vec<(String, String, bool, bool)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (
                v["id"].as_str().unwrap().to_string(),
                v["text"].as_str().unwrap().to_string(),
                v["has_image"].as_bool().unwrap(),
                v["has_video"].as_bool().unwrap(),
            )
        })
        .collect()
}
