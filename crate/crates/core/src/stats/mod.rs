//! Rank statistics over posts: Spearman correlation, per-user feature
//! reports and period-level quality drift.

mod drift;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Post;

pub use drift::{detect_drift, scan_change_point, DriftReport, SeriesDrift, Split, TrendSimilarity, MIN_PERIODS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("correlation undefined for constant input")]
    Constant,
    #[error("need at least {needed} non-empty periods, got {got}")]
    TooFewPeriods { needed: usize, got: usize },
}

/// Average ranks (1-based), with tied values sharing their midrank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share the mean of ranks i+1..=j
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort(x.len()));
    }
    pearson(&midranks(x), &midranks(y))
}

pub const ENGAGEMENT_INDICATORS: [&str; 3] = ["likes", "comments", "reposts"];

/// Pairwise SRC between likes, comments and reposts.
pub fn engagement_cross_correlation(posts: &[Post]) -> Result<[[f64; 3]; 3], StatsError> {
    let cols: [Vec<f64>; 3] = [
        posts.iter().map(|p| p.engagement.likes as f64).collect(),
        posts.iter().map(|p| p.engagement.comments as f64).collect(),
        posts.iter().map(|p| p.engagement.reposts as f64).collect(),
    ];
    let mut m = [[1.0; 3]; 3];
    for i in 0..3 {
        for j in (i + 1)..3 {
            let r = spearman(&cols[i], &cols[j])?;
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    // self-correlation still requires a non-constant column
    for col in &cols {
        spearman(col, col)?;
    }
    Ok(m)
}

/// One post as seen by the correlation analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub account_id: String,
    pub quality: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub name: String,
    pub mean: f64,
    /// Population standard deviation across users.
    pub std: f64,
    pub per_user: BTreeMap<String, f64>,
    /// SRC over all posts of all users; `None` when undefined.
    pub pooled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Ranked by `|mean|`, descending.
    pub features: Vec<FeatureCorrelation>,
    pub users: Vec<String>,
    pub excluded_users: Vec<(String, String)>,
    /// Features whose SRC was undefined for every included user.
    pub excluded_features: Vec<String>,
}

impl CorrelationReport {
    pub fn get(&self, name: &str) -> Option<&FeatureCorrelation> {
        self.features.iter().find(|f| f.name == name)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// SRC between each named column and quality within every account,
/// aggregated across accounts.
///
/// Accounts with fewer than two posts or constant quality are excluded and
/// named in the report; a feature constant within an account contributes no
/// value for that account.
pub fn per_user_correlations(samples: &[Sample], names: &[String]) -> CorrelationReport {
    let mut by_user: BTreeMap<&str, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        by_user.entry(&s.account_id).or_default().push(s);
    }

    let mut users = Vec::new();
    let mut excluded_users = Vec::new();
    let mut per_feature: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new(); names.len()];
    for (user, rows) in &by_user {
        let quality: Vec<f64> = rows.iter().map(|s| s.quality).collect();
        if rows.len() < 2 {
            excluded_users.push((user.to_string(), "fewer than 2 posts".to_string()));
            continue;
        }
        if quality.iter().all(|&q| q == quality[0]) {
            excluded_users.push((user.to_string(), "constant quality".to_string()));
            continue;
        }
        users.push(user.to_string());
        for (j, slot) in per_feature.iter_mut().enumerate() {
            let col: Vec<f64> = rows.iter().map(|s| s.values[j]).collect();
            if let Ok(r) = spearman(&col, &quality) {
                slot.insert(user.to_string(), r);
            }
        }
    }
    for (user, reason) in &excluded_users {
        tracing::warn!("excluding account {user:?} from correlation report: {reason}");
    }

    let pooled_quality: Vec<f64> = samples.iter().map(|s| s.quality).collect();
    let mut features = Vec::new();
    let mut excluded_features = Vec::new();
    for (j, per_user) in per_feature.into_iter().enumerate() {
        if per_user.is_empty() {
            excluded_features.push(names[j].clone());
            continue;
        }
        let vals: Vec<f64> = per_user.values().copied().collect();
        let (mean, std) = mean_std(&vals);
        let col: Vec<f64> = samples.iter().map(|s| s.values[j]).collect();
        features.push(FeatureCorrelation {
            name: names[j].clone(),
            mean,
            std,
            per_user,
            pooled: spearman(&col, &pooled_quality).ok(),
        });
    }
    features.sort_by(|a, b| b.mean.abs().total_cmp(&a.mean.abs()));

    CorrelationReport {
        features,
        users,
        excluded_users,
        excluded_features,
    }
}

/// Features appearing in every user's top-`k` by `|SRC|`, ordered by
/// `|mean SRC|`.
pub fn common_top_features(report: &CorrelationReport, k: usize) -> Vec<String> {
    // report.features is already ordered by |mean|, which doubles as the
    // tie-break inside each user's ranking.
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for user in &report.users {
        let mut ranked: Vec<(&str, f64)> = report
            .features
            .iter()
            .filter_map(|f| f.per_user.get(user).map(|&r| (f.name.as_str(), r.abs())))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (name, _) in ranked.into_iter().take(k) {
            *counts.entry(name).or_default() += 1;
        }
    }
    report
        .features
        .iter()
        .filter(|f| counts.get(f.name.as_str()) == Some(&report.users.len()))
        .map(|f| f.name.clone())
        .collect()
}
