//! Scoring, effect-size analysis, and improvement counting.
//!
//! Two accuracy flavors are reported everywhere: UA (unweighted accuracy,
//! the mean of per-class recalls, a.k.a. balanced accuracy or UAR) and WA
//! (weighted accuracy, plain overall accuracy). Classes absent from the
//! truth vector are excluded from the UA mean. For class-balanced truth the
//! two coincide.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which accuracy to optimize or report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Ua,
    Wa,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Ua => "ua",
            Metric::Wa => "wa",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ua" => Ok(Metric::Ua),
            "wa" => Ok(Metric::Wa),
            other => Err(Error::InvalidManifest(format!("unknown metric '{other}'"))),
        }
    }
}

/// UA, WA, the confusion matrix (rows = truth, columns = predicted) and the
/// per-class recalls. Recall is `None` for classes with no true samples.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub ua: f64,
    pub wa: f64,
    pub confusion: Vec<Vec<usize>>,
    pub per_class_recall: Vec<Option<f64>>,
}

impl EvaluationReport {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Ua => self.ua,
            Metric::Wa => self.wa,
        }
    }
}

/// Scores predicted labels against the truth over `num_classes` classes.
pub fn score(pred: &[usize], truth: &[usize], num_classes: usize) -> Result<EvaluationReport> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("score over empty labels"));
    }
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (row, (&p, &t)) in pred.iter().zip(truth).enumerate() {
        for value in [p, t] {
            if value >= num_classes {
                return Err(Error::LabelOutOfRange {
                    row,
                    value,
                    classes: num_classes,
                });
            }
        }
        confusion[t][p] += 1;
    }
    let samples = pred.len() as f64;
    let correct: usize = (0..num_classes).map(|c| confusion[c][c]).sum();
    let wa = correct as f64 / samples;
    let mut per_class_recall = Vec::with_capacity(num_classes);
    let mut recall_sum = 0.0;
    let mut supported = 0usize;
    for (c, row) in confusion.iter().enumerate() {
        let support: usize = row.iter().sum();
        if support == 0 {
            per_class_recall.push(None);
        } else {
            let recall = row[c] as f64 / support as f64;
            per_class_recall.push(Some(recall));
            recall_sum += recall;
            supported += 1;
        }
    }
    let ua = recall_sum / supported as f64;
    Ok(EvaluationReport {
        ua,
        wa,
        confusion,
        per_class_recall,
    })
}

/// Cohen's d between the uncertainties of incorrectly and correctly
/// predicted samples: `(mean(incorrect) - mean(correct)) / pooled sd`,
/// with sample (n-1) variances.
///
/// Requires at least two values per group and a positive pooled standard
/// deviation; degenerate inputs are reported as errors, never as `d = 0`.
pub fn cohens_d(u_correct: &[f64], u_incorrect: &[f64]) -> Result<f64> {
    let n1 = u_correct.len();
    let n2 = u_incorrect.len();
    if n1 < 2 || n2 < 2 {
        return Err(Error::DegenerateGroups(format!(
            "need at least 2 values per group, got {n1} correct and {n2} incorrect"
        )));
    }
    let mean1 = mean(u_correct);
    let mean2 = mean(u_incorrect);
    let var1 = sample_variance(u_correct, mean1);
    let var2 = sample_variance(u_incorrect, mean2);
    let pooled = (((n1 - 1) as f64 * var1 + (n2 - 1) as f64 * var2) / (n1 + n2 - 2) as f64).sqrt();
    if pooled <= 0.0 {
        return Err(Error::DegenerateGroups(
            "pooled standard deviation is zero".into(),
        ));
    }
    Ok((mean2 - mean1) / pooled)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Effect-size bucket for |d|: below 0.2, between 0.2 and 0.8, or 0.8 up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectCategory {
    NoEffect,
    MiddleEffect,
    LargeEffect,
}

pub fn effect_category(d: f64) -> EffectCategory {
    let magnitude = d.abs();
    if magnitude < 0.2 {
        EffectCategory::NoEffect
    } else if magnitude < 0.8 {
        EffectCategory::MiddleEffect
    } else {
        EffectCategory::LargeEffect
    }
}

/// Number of histogram bins over `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 20;

/// Binned uncertainty counts for correct and incorrect predictions.
///
/// Bins are `[lo, lo + 0.05)` except the last, which is closed at 1.0 so a
/// fully uncertain sample still lands in a bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub correct: Vec<usize>,
    pub incorrect: Vec<usize>,
}

impl Histogram {
    pub fn bin_of(value: f64) -> usize {
        if value >= 0.95 {
            HISTOGRAM_BINS - 1
        } else {
            ((value.max(0.0)) / 0.05) as usize
        }
    }

    /// Lower and upper edge of a bin.
    pub fn edges(bin: usize) -> (f64, f64) {
        (bin as f64 * 0.05, (bin + 1) as f64 * 0.05)
    }
}

/// Bins per-sample uncertainties by prediction correctness.
pub fn correctness_histogram(uncertainties: &[f64], correct: &[bool]) -> Result<Histogram> {
    if uncertainties.len() != correct.len() {
        return Err(Error::LengthMismatch {
            left: uncertainties.len(),
            right: correct.len(),
        });
    }
    let mut histogram = Histogram {
        bin_width: 0.05,
        correct: vec![0; HISTOGRAM_BINS],
        incorrect: vec![0; HISTOGRAM_BINS],
    };
    for (&u, &ok) in uncertainties.iter().zip(correct) {
        let bin = Histogram::bin_of(u);
        if ok {
            histogram.correct[bin] += 1;
        } else {
            histogram.incorrect[bin] += 1;
        }
    }
    Ok(histogram)
}

/// Size, mean and sample standard deviation of one group. Mean is `None`
/// for an empty group, sd for groups smaller than two.
#[derive(Debug, Clone, Serialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

impl GroupStats {
    fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean_value = (n > 0).then(|| mean(values));
        let sd = (n > 1).then(|| sample_variance(values, mean_value.unwrap()).sqrt());
        GroupStats {
            n,
            mean: mean_value,
            sd,
        }
    }
}

/// Cohen's d with its category, group statistics and histogram.
#[derive(Debug, Clone, Serialize)]
pub struct EffectReport {
    pub d: f64,
    pub category: EffectCategory,
    pub correct: GroupStats,
    pub incorrect: GroupStats,
    pub histogram: Histogram,
}

/// Splits uncertainties by correctness and runs the full effect analysis.
pub fn effect_report(uncertainties: &[f64], correct: &[bool]) -> Result<EffectReport> {
    if uncertainties.len() != correct.len() {
        return Err(Error::LengthMismatch {
            left: uncertainties.len(),
            right: correct.len(),
        });
    }
    let mut u_correct = Vec::new();
    let mut u_incorrect = Vec::new();
    for (&u, &ok) in uncertainties.iter().zip(correct) {
        if ok {
            u_correct.push(u);
        } else {
            u_incorrect.push(u);
        }
    }
    let d = cohens_d(&u_correct, &u_incorrect)?;
    Ok(EffectReport {
        d,
        category: effect_category(d),
        correct: GroupStats::of(&u_correct),
        incorrect: GroupStats::of(&u_incorrect),
        histogram: correctness_histogram(uncertainties, correct)?,
    })
}

/// One ensemble score: a method's UA or WA on one dataset and model
/// combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCell {
    pub dataset: String,
    pub combination: String,
    pub method: String,
    pub metric: Metric,
    pub score: f64,
}

/// One single-model score on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleCell {
    pub dataset: String,
    pub model: String,
    pub metric: Metric,
    pub score: f64,
}

/// Per-method counts of ensemble cells that beat the best single model.
#[derive(Debug, Clone, Serialize)]
pub struct ImprovementCount {
    /// Method name -> number of improved cells, covering every method seen.
    pub per_method: BTreeMap<String, usize>,
    /// Number of (dataset, combination, metric) cells compared per method.
    pub cells_compared: BTreeMap<String, usize>,
}

/// Counts, per method, the (dataset-row, metric) cells whose score strictly
/// exceeds the best single-model score for the same dataset and metric.
pub fn count_improvements(
    ensemble: &[EnsembleCell],
    single: &[SingleCell],
) -> Result<ImprovementCount> {
    let mut best: BTreeMap<(&str, Metric), f64> = BTreeMap::new();
    for cell in single {
        let entry = best
            .entry((cell.dataset.as_str(), cell.metric))
            .or_insert(f64::NEG_INFINITY);
        if cell.score > *entry {
            *entry = cell.score;
        }
    }
    let mut per_method: BTreeMap<String, usize> = BTreeMap::new();
    let mut cells_compared: BTreeMap<String, usize> = BTreeMap::new();
    for cell in ensemble {
        let Some(&best_single) = best.get(&(cell.dataset.as_str(), cell.metric)) else {
            return Err(Error::KeyMismatch(format!(
                "no single-model scores for dataset '{}' metric '{}'",
                cell.dataset, cell.metric
            )));
        };
        let count = per_method.entry(cell.method.clone()).or_insert(0);
        if cell.score > best_single {
            *count += 1;
        }
        *cells_compared.entry(cell.method.clone()).or_insert(0) += 1;
    }
    Ok(ImprovementCount {
        per_method,
        cells_compared,
    })
}
