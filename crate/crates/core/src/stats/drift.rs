use serde::{Deserialize, Serialize};

use super::{spearman, StatsError};
use crate::corpus::PeriodSeries;

pub const MIN_PERIODS: usize = 4;

/// Single change point of one period-mean series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDrift {
    pub name: String,
    /// Period index of the first bucket after the change.
    pub change_point: usize,
    pub pre_mean: f64,
    pub post_mean: f64,
    /// `|post_mean − pre_mean| / pooled_std`.
    pub shift_score: f64,
    pub no_drift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSimilarity {
    pub name: String,
    /// SRC between this column's period means and quality's.
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub periods: usize,
    pub quality: SeriesDrift,
    pub columns: Vec<SeriesDrift>,
    /// Descending by similarity; columns with constant series are omitted.
    pub similar_to_quality: Vec<TrendSimilarity>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// Number of leading values before the change, in `1..len`.
    pub at: usize,
    pub pre_mean: f64,
    pub post_mean: f64,
    pub shift_score: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sum_sq_dev(v: &[f64], m: f64) -> f64 {
    v.iter().map(|x| (x - m).powi(2)).sum()
}

/// Scans every interior split and keeps the one maximising the normalized
/// mean difference; ties go to the earliest split.
pub fn scan_change_point(values: &[f64]) -> Result<Split, StatsError> {
    let n = values.len();
    if n < MIN_PERIODS {
        return Err(StatsError::TooFewPeriods {
            needed: MIN_PERIODS,
            got: n,
        });
    }
    let scale = values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let floor = f64::EPSILON * scale;
    let mut best: Option<Split> = None;
    for at in 1..n {
        let (before, after) = values.split_at(at);
        let (m1, m2) = (mean(before), mean(after));
        let dof = (n - 2).max(1) as f64;
        let pooled = ((sum_sq_dev(before, m1) + sum_sq_dev(after, m2)) / dof).sqrt();
        let diff = (m2 - m1).abs();
        let shift_score = if diff == 0.0 { 0.0 } else { diff / pooled.max(floor) };
        if best.is_none_or(|b| shift_score > b.shift_score) {
            best = Some(Split {
                at,
                pre_mean: m1,
                post_mean: m2,
                shift_score,
            });
        }
    }
    Ok(best.expect("at least one interior split"))
}

fn drift_of(name: &str, values: &[f64], period_index: &[usize]) -> Result<SeriesDrift, StatsError> {
    let split = scan_change_point(values)?;
    Ok(SeriesDrift {
        name: name.to_string(),
        change_point: period_index[split.at],
        pre_mean: split.pre_mean,
        post_mean: split.post_mean,
        shift_score: split.shift_score,
        no_drift: split.shift_score == 0.0,
    })
}

/// Change points for quality and every column of `series`, plus the columns
/// whose period trend most resembles quality's.
///
/// Only non-empty buckets take part; reported change points are period
/// indices.
pub fn detect_drift(series: &PeriodSeries) -> Result<DriftReport, StatsError> {
    let period_index: Vec<usize> = series.non_empty().map(|b| b.period_index).collect();
    let quality_values = series.quality_series();
    let quality = drift_of("quality", &quality_values, &period_index)?;

    let mut columns = Vec::with_capacity(series.names.len());
    let mut similar = Vec::new();
    for (j, name) in series.names.iter().enumerate() {
        let values = series.column_series(j);
        columns.push(drift_of(name, &values, &period_index)?);
        if let Ok(similarity) = spearman(&values, &quality_values) {
            similar.push(TrendSimilarity {
                name: name.clone(),
                similarity,
            });
        }
    }
    // Stable sort keeps canonical column order among equal similarities.
    similar.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));

    Ok(DriftReport {
        periods: period_index.len(),
        quality,
        columns,
        similar_to_quality: similar,
    })
}
