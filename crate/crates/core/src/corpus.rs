//! Post corpora: JSON-lines ingestion, the engagement quality measure,
//! preprocessing filters and 30-day period bucketing.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureRow, FeatureVector, PostMeta, FEATURE_COUNT};
use crate::lexicon::{Category, LexiconSet};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate post id {id:?} (lines {first} and {second})")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("window start {start} is after window end {end}")]
    InvertedWindow { start: NaiveDate, end: NaiveDate },
    #[error("cannot bucket an empty corpus")]
    Empty,
    #[error("period length must be positive")]
    ZeroPeriod,
    #[error("no feature row for post {0:?}")]
    MissingFeatures(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engagement {
    pub likes: u64,
    pub comments: u64,
    pub reposts: u64,
}

/// Popularity as the quality proxy: likes + comments + reposts.
pub fn quality_of(e: &Engagement) -> u64 {
    e.likes + e.comments + e.reposts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub account_id: String,
    pub published_at: DateTime<Utc>,
    pub text: String,
    pub has_image: bool,
    pub has_video: bool,
    pub is_original: bool,
    #[serde(flatten)]
    pub engagement: Engagement,
}

impl Post {
    pub fn quality(&self) -> u64 {
        quality_of(&self.engagement)
    }

    pub fn meta(&self) -> PostMeta {
        PostMeta {
            has_image: self.has_image,
            has_video: self.has_video,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    /// Skip malformed lines and count them instead of failing.
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedCorpus {
    pub posts: Vec<Post>,
    /// 1-based line numbers of malformed lines skipped in lenient mode.
    pub skipped_lines: Vec<usize>,
}

/// Parses JSON-lines corpus text. Blank lines are ignored.
pub fn parse_corpus_str(text: &str, mode: ParseMode) -> Result<ParsedCorpus, CorpusError> {
    let mut out = ParsedCorpus::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let post: Post = match serde_json::from_str(line) {
            Ok(p) => p,
            Err(e) => match mode {
                ParseMode::Strict => {
                    return Err(CorpusError::Malformed {
                        line: line_no,
                        message: e.to_string(),
                    })
                }
                ParseMode::Lenient => {
                    out.skipped_lines.push(line_no);
                    continue;
                }
            },
        };
        if let Some(&first) = seen.get(&post.id) {
            return Err(CorpusError::DuplicateId {
                id: post.id,
                first,
                second: line_no,
            });
        }
        seen.insert(post.id.clone(), line_no);
        out.posts.push(post);
    }
    if !out.skipped_lines.is_empty() {
        tracing::warn!("skipped {} malformed corpus line(s)", out.skipped_lines.len());
    }
    Ok(out)
}

pub fn parse_corpus(path: impl AsRef<Path>, mode: ParseMode) -> Result<ParsedCorpus, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus_str(&text, mode)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_age_days: i64,
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    pub originals_only: bool,
    pub drop_lottery: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_age_days: 7,
            window_start: None,
            window_end: None,
            originals_only: true,
            drop_lottery: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        match (self.window_start, self.window_end) {
            (Some(start), Some(end)) if start > end => Err(CorpusError::InvertedWindow { start, end }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    TooRecent,
    OutsideWindow,
    NotOriginal,
    Lottery,
}

/// First rule a post violates, checked in a fixed order.
pub fn drop_reason(
    post: &Post,
    cfg: &FilterConfig,
    lex: &LexiconSet,
    now: DateTime<Utc>,
) -> Option<DropReason> {
    if now - post.published_at < chrono::Duration::days(cfg.min_age_days) {
        return Some(DropReason::TooRecent);
    }
    let day = post.published_at.date_naive();
    if cfg.window_start.is_some_and(|s| day < s) || cfg.window_end.is_some_and(|e| day > e) {
        return Some(DropReason::OutsideWindow);
    }
    if cfg.originals_only && !post.is_original {
        return Some(DropReason::NotOriginal);
    }
    if cfg.drop_lottery && lex.category(Category::LotteryMarkers).contained_in(&post.text) {
        return Some(DropReason::Lottery);
    }
    None
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<Post>,
    pub dropped: Vec<(String, DropReason)>,
}

/// Applies the preprocessing rules and reports why each dropped post went.
///
/// `now` is explicit so results never depend on the wall clock.
pub fn filter_corpus_with_report(
    posts: &[Post],
    cfg: &FilterConfig,
    lex: &LexiconSet,
    now: DateTime<Utc>,
) -> Result<FilterOutcome, CorpusError> {
    cfg.validate()?;
    let mut out = FilterOutcome::default();
    for post in posts {
        match drop_reason(post, cfg, lex, now) {
            Some(reason) => out.dropped.push((post.id.clone(), reason)),
            None => out.kept.push(post.clone()),
        }
    }
    Ok(out)
}

pub fn filter_corpus(
    posts: &[Post],
    cfg: &FilterConfig,
    lex: &LexiconSet,
    now: DateTime<Utc>,
) -> Result<Vec<Post>, CorpusError> {
    filter_corpus_with_report(posts, cfg, lex, now).map(|o| o.kept)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodBucket {
    pub period_index: usize,
    pub post_count: usize,
    /// `None` for empty buckets.
    pub mean_quality: Option<f64>,
    /// Mean of [`FeatureRow::values`] over the bucket, `None` when empty.
    pub mean_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSeries {
    pub period_days: u32,
    /// Column names of `mean_values`.
    pub names: Vec<String>,
    pub buckets: Vec<PeriodBucket>,
}

impl PeriodSeries {
    pub fn non_empty(&self) -> impl Iterator<Item = &PeriodBucket> {
        self.buckets.iter().filter(|b| b.post_count > 0)
    }

    pub fn quality_series(&self) -> Vec<f64> {
        self.non_empty().filter_map(|b| b.mean_quality).collect()
    }

    /// Period means of column `index` over non-empty buckets.
    pub fn column_series(&self, index: usize) -> Vec<f64> {
        self.non_empty()
            .filter_map(|b| b.mean_values.as_ref().map(|v| v[index]))
            .collect()
    }

    /// Plot-ready CSV: period, count, mean quality, then every column mean.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["period_index".to_string(), "post_count".into(), "quality".into()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for b in &self.buckets {
            let mut rec = vec![b.period_index.to_string(), b.post_count.to_string()];
            rec.push(b.mean_quality.map(|q| q.to_string()).unwrap_or_default());
            match &b.mean_values {
                Some(v) => rec.extend(v.iter().map(|x| x.to_string())),
                None => rec.extend(self.names.iter().map(|_| String::new())),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Groups posts into `period_days`-long buckets counted from the earliest
/// post, averaging quality and every feature and facet value.
pub fn bucket_by_period(
    posts: &[Post],
    features: &HashMap<String, FeatureRow>,
    period_days: u32,
) -> Result<PeriodSeries, CorpusError> {
    if period_days == 0 {
        return Err(CorpusError::ZeroPeriod);
    }
    let earliest = posts
        .iter()
        .map(|p| p.published_at)
        .min()
        .ok_or(CorpusError::Empty)?;
    let width = FEATURE_COUNT + 8;
    let period_secs = i64::from(period_days) * 86_400;

    let mut sums: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for post in posts {
        let row = features
            .get(&post.id)
            .ok_or_else(|| CorpusError::MissingFeatures(post.id.clone()))?;
        let idx = ((post.published_at - earliest).num_seconds() / period_secs) as usize;
        if sums.len() <= idx {
            sums.resize_with(idx + 1, || (0, 0.0, vec![0.0; width]));
        }
        let slot = &mut sums[idx];
        slot.0 += 1;
        slot.1 += post.quality() as f64;
        for (acc, v) in slot.2.iter_mut().zip(row.values()) {
            *acc += v;
        }
    }

    let buckets = sums
        .into_iter()
        .enumerate()
        .map(|(period_index, (post_count, q, vals))| {
            let (mean_quality, mean_values) = if post_count == 0 {
                (None, None)
            } else {
                let n = post_count as f64;
                (Some(q / n), Some(vals.into_iter().map(|v| v / n).collect()))
            };
            PeriodBucket {
                period_index,
                post_count,
                mean_quality,
                mean_values,
            }
        })
        .collect();

    Ok(PeriodSeries {
        period_days,
        names: crate::features::row_names(),
        buckets,
    })
}

/// Feature rows keyed by post id.
pub fn feature_map<'a, I>(rows: I) -> HashMap<String, FeatureRow>
where
    I: IntoIterator<Item = (&'a Post, FeatureVector)>,
{
    rows.into_iter()
        .map(|(p, f)| (p.id.clone(), FeatureRow::new(f)))
        .collect()
}

/// Distinct account ids in first-seen order.
pub fn accounts(posts: &[Post]) -> Vec<String> {
    let mut seen = HashSet::new();
    posts
        .iter()
        .filter(|p| seen.insert(p.account_id.clone()))
        .map(|p| p.account_id.clone())
        .collect()
}
