//! Evaluation against subjective ratings: per-group logistic regression,
//! SROCC/PLCC/RMSE, size-weighted averages, F-test significance and the
//! stability-constant sweep.

pub mod ftest;
pub mod logistic;
pub mod manifest;
pub mod simplex;
pub mod stats;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmsd::{gmsd_index, Metric, MetricConfig};
use crate::image::{load_image, LuminanceImage};

pub use ftest::{f_test_better, significance_matrix, FTestOutcome};
pub use logistic::{logistic_apply, logistic_fit, LogisticFit, LogisticForm, LogisticParams};
pub use manifest::{read_manifest, DatasetRecord};
pub use stats::{pearson, rmse, spearman};

/// Smallest group the five-parameter regression accepts.
pub const MIN_GROUP: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    #[default]
    None,
    DistortionType,
    DatasetId,
}

impl GroupBy {
    fn key(self, record: &DatasetRecord) -> &str {
        match self {
            GroupBy::None => "all",
            GroupBy::DistortionType => &record.distortion_type,
            GroupBy::DatasetId => &record.dataset_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub srocc: f64,
    pub plcc: f64,
    pub rmse: f64,
    pub params: LogisticParams,
    pub n: usize,
}

/// Scores against ratings for one group. SROCC uses the raw scores; PLCC and
/// RMSE use the scores after the logistic mapping.
pub fn summarize(scores: &[f64], subjective: &[f64], form: LogisticForm) -> Result<EvalSummary> {
    if scores.len() < MIN_GROUP {
        return Err(Error::NotEnoughSamples {
            have: scores.len(),
            need: MIN_GROUP,
        });
    }
    let fit = logistic_fit(scores, subjective, form)?;
    let mapped = logistic_apply(scores, &fit.params, form);
    Ok(EvalSummary {
        srocc: spearman(scores, subjective)?,
        plcc: pearson(&mapped, subjective)?,
        rmse: rmse(&mapped, subjective)?,
        params: fit.params,
        n: scores.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub summary: EvalSummary,
}

/// Groups precomputed scores and summarizes each group, in lexicographic
/// group order.
pub fn evaluate_scores(
    records: &[DatasetRecord],
    scores: &[f64],
    group_by: GroupBy,
    form: LogisticForm,
) -> Result<Vec<GroupSummary>> {
    if records.len() != scores.len() {
        return Err(Error::LengthMismatch(records.len(), scores.len()));
    }
    let mut groups: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (record, &score) in records.iter().zip(scores) {
        let entry = groups.entry(group_by.key(record)).or_default();
        entry.0.push(score);
        entry.1.push(record.subjective);
    }
    groups
        .into_iter()
        .map(|(group, (q, s))| {
            if q.len() < MIN_GROUP {
                return Err(Error::GroupTooSmall {
                    group: group.to_owned(),
                    n: q.len(),
                    need: MIN_GROUP,
                });
            }
            Ok(GroupSummary {
                group: group.to_owned(),
                summary: summarize(&q, &s, form)?,
            })
        })
        .collect()
}

/// Loads every distinct reference once.
fn load_references(records: &[DatasetRecord]) -> Result<HashMap<PathBuf, Arc<LuminanceImage>>> {
    let mut first_use: Vec<(usize, &PathBuf)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, r) in records.iter().enumerate() {
        if seen.insert(&r.ref_path) {
            first_use.push((i, &r.ref_path));
        }
    }
    let loaded: Vec<Result<(PathBuf, Arc<LuminanceImage>)>> = first_use
        .into_par_iter()
        .map(|(i, path)| {
            load_image(path)
                .map(|img| (path.clone(), Arc::new(img)))
                .map_err(|e| Error::Record {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect();
    loaded.into_iter().collect()
}

/// Computes `f(reference, distorted)` for every record, in parallel, with
/// results in record order. The first failing record (lowest index) is
/// reported.
fn map_records<T, F>(records: &[DatasetRecord], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&LuminanceImage, &LuminanceImage) -> Result<T> + Sync,
{
    let refs = load_references(records)?;
    let results: Vec<Result<T>> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let wrap = |e| Error::Record {
                index: i,
                source: Box::new(e),
            };
            let dist = load_image(&r.dist_path).map_err(wrap)?;
            f(&refs[&r.ref_path], &dist).map_err(wrap)
        })
        .collect();
    results.into_iter().collect()
}

/// Objective scores for every record.
pub fn score_records(
    records: &[DatasetRecord],
    metric: Metric,
    config: &MetricConfig,
) -> Result<Vec<f64>> {
    map_records(records, |r, d| metric.score(r, d, config))
}

pub fn evaluate(
    records: &[DatasetRecord],
    metric: Metric,
    config: &MetricConfig,
    group_by: GroupBy,
    form: LogisticForm,
) -> Result<Vec<GroupSummary>> {
    let scores = score_records(records, metric, config)?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{metric} produced a non-finite score (identical pair?)"
        )));
    }
    evaluate_scores(records, &scores, group_by, form)
}

/// Weight-normalized mean of SROCC and PLCC, typically weighted by the
/// number of images in each database.
pub fn weighted_average(entries: &[(EvalSummary, f64)]) -> Result<(f64, f64)> {
    if entries.is_empty() {
        return Err(Error::InvalidParameter("no summaries to average".into()));
    }
    if let Some((_, w)) = entries.iter().find(|(_, w)| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "weights must be positive, got {w}"
        )));
    }
    let total: f64 = entries.iter().map(|(_, w)| w).sum();
    let srocc = entries.iter().map(|(s, w)| s.srocc * (w / total)).sum();
    let plcc = entries.iter().map(|(s, w)| s.plcc * (w / total)).sum();
    Ok((srocc, plcc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub c: f64,
    pub srocc: f64,
}

/// SROCC of GMSD over the whole manifest for each stability constant, in
/// input order. Each image pair is loaded once.
pub fn sweep_c(
    records: &[DatasetRecord],
    c_values: &[f64],
    config: &MetricConfig,
) -> Result<Vec<SweepPoint>> {
    if c_values.is_empty() {
        return Err(Error::InvalidParameter("no c values to sweep".into()));
    }
    for &c in c_values {
        config.with_c(c).validate()?;
    }
    if records.len() < 2 {
        return Err(Error::NotEnoughSamples {
            have: records.len(),
            need: 2,
        });
    }
    let per_record: Vec<Vec<f64>> = map_records(records, |r, d| {
        c_values
            .iter()
            .map(|&c| {
                let cfg = MetricConfig {
                    retain_map: false,
                    ..config.with_c(c)
                };
                gmsd_index(r, d, &cfg).map(|q| q.gmsd)
            })
            .collect()
    })?;
    let subjective: Vec<f64> = records.iter().map(|r| r.subjective).collect();
    c_values
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let scores: Vec<f64> = per_record.iter().map(|v| v[k]).collect();
            Ok(SweepPoint {
                c,
                srocc: spearman(&scores, &subjective)?,
            })
        })
        .collect()
}

/// `steps` values from `c_min` to `c_max` inclusive, evenly spaced on a
/// linear or logarithmic axis.
pub fn c_ladder(c_min: f64, c_max: f64, steps: usize, log_scale: bool) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    if !(c_min > 0.0 && c_min < c_max && c_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < c-min < c-max, got {c_min} and {c_max}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i + 1 == steps {
                c_max
            } else if log_scale {
                (c_min.ln() + t * (c_max.ln() - c_min.ln())).exp()
            } else {
                c_min + t * (c_max - c_min)
            }
        })
        .collect())
}

/// One row of the evaluation report. Correlations are magnitudes;
/// `negative_polarity` records that the signed value was negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: String,
    pub n: usize,
    pub srocc: f64,
    pub plcc: f64,
    pub rmse: f64,
    pub beta: [f64; 5],
    pub negative_polarity: bool,
}

impl From<&GroupSummary> for ReportRow {
    fn from(g: &GroupSummary) -> Self {
        Self {
            group: g.group.clone(),
            n: g.summary.n,
            srocc: g.summary.srocc.abs(),
            plcc: g.summary.plcc.abs(),
            rmse: g.summary.rmse,
            beta: g.summary.params.beta,
            negative_polarity: g.summary.srocc < 0.0 || g.summary.plcc < 0.0,
        }
    }
}

/// Aligned plain-text table of group summaries.
pub fn format_table(rows: &[ReportRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.group.len())
        .chain(std::iter::once(5))
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "{:<width$}  {:>6}  {:>9}  {:>9}  {:>11}\n",
        "group", "n", "srocc", "plcc", "rmse"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>6}  {:>9.6}  {:>9.6}  {:>11.6}{}\n",
            r.group,
            r.n,
            r.srocc,
            r.plcc,
            r.rmse,
            if r.negative_polarity { " *" } else { "" }
        ));
    }
    if rows.iter().any(|r| r.negative_polarity) {
        out.push_str(
            "* negative correlation: the score and the ratings have opposite polarity \
             (e.g. a distortion index against MOS); magnitudes shown.\n",
        );
    }
    out
}
