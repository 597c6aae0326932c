//! Decision-level ensemble fusion strategies.
//!
//! Six ways to combine aligned per-model class probabilities into one label
//! per sample:
//!
//! * `ul`: per sample, take the label of the model with the lowest
//!   uncertainty.
//! * `ut`: like `ul` while the lowest uncertainty is strictly below a
//!   threshold; otherwise fall back to the mean ensemble. The threshold is
//!   typically found by [`search_threshold`] over a fixed grid.
//! * `uw`: soft voting with inverse-uncertainty weights `1/u`, normalized
//!   across models within each sample (configurable axis).
//! * `cw`: soft voting with confidence weights `1 - u`, normalized across
//!   samples within each model (configurable axis).
//! * `mean`: per-class arithmetic mean of the model probabilities.
//! * `max`: per-class maximum of the model probabilities.
//!
//! All fusions are pure and deterministic: model ties break to the lowest
//! manifest index, class ties to the lowest class index, and per-sample work
//! may run in parallel without affecting the output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{score, Metric};
use crate::prediction::{argmax_label, LabelVector, PredictionSet};
use crate::uncertainty::UncertaintyMatrix;

/// A fusion strategy, with its parameter where one exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FusionMethod {
    Ul,
    Ut { threshold: f64 },
    Uw,
    Cw,
    Mean,
    Max,
}

impl FusionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FusionMethod::Ul => "ul",
            FusionMethod::Ut { .. } => "ut",
            FusionMethod::Uw => "uw",
            FusionMethod::Cw => "cw",
            FusionMethod::Mean => "mean",
            FusionMethod::Max => "max",
        }
    }

    /// Canonical report order: ul, ut, uw, cw, mean, max.
    pub const CANONICAL_NAMES: [&'static str; 6] = ["ul", "ut", "uw", "cw", "mean", "max"];
}

/// Normalization axis for the weighted fusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightAxis {
    /// Normalize across models within each sample.
    #[default]
    PerSample,
    /// Normalize across samples within each model.
    PerModel,
}

/// Axis choices for `uw` and `cw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionOptions {
    pub uw_axis: WeightAxis,
    pub cw_axis: WeightAxis,
}

impl Default for FusionOptions {
    fn default() -> Self {
        Self {
            uw_axis: WeightAxis::PerSample,
            cw_axis: WeightAxis::PerModel,
        }
    }
}

/// Where a fused label came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// ul/ut: the chosen model index.
    Model(usize),
    /// ut: uncertainty at or above the threshold, mean ensemble used.
    MeanFallback,
    /// uw/cw: the per-model weights applied to this sample.
    Weights(Vec<f64>),
    /// mean/max: fixed pooling, no per-sample choice.
    Pooled,
}

impl Provenance {
    /// Compact single-field text form used in the per-sample CSV.
    pub fn describe(&self) -> String {
        match self {
            Provenance::Model(m) => format!("model:{m}"),
            Provenance::MeanFallback => "mean-fallback".to_string(),
            Provenance::Weights(w) => {
                let parts: Vec<String> = w.iter().map(|v| format!("{v}")).collect();
                format!("weights:{}", parts.join("|"))
            }
            Provenance::Pooled => "pooled".to_string(),
        }
    }
}

/// Fused labels plus enough detail to audit each per-sample decision.
#[derive(Debug, Clone)]
pub struct FusionResult {
    pub method: FusionMethod,
    pub labels: LabelVector,
    pub provenance: Vec<Provenance>,
    /// Fused S×K scores for the soft-voting methods (uw, cw, mean, max).
    pub fused_probs: Option<Vec<Vec<f64>>>,
}

fn check_shapes(set: &PredictionSet, u: &UncertaintyMatrix) -> Result<()> {
    if u.num_models() != set.num_models() || u.num_samples() != set.num_samples() {
        return Err(Error::ShapeMismatch {
            model: "<uncertainty matrix>".into(),
            detail: format!(
                "got {}x{}, expected {}x{}",
                u.num_models(),
                u.num_samples(),
                set.num_models(),
                set.num_samples()
            ),
        });
    }
    Ok(())
}

/// Lowest-uncertainty fusion: per sample, the model with the smallest
/// uncertainty infers the label. Model ties break to the lowest index.
pub fn fuse_ul(set: &PredictionSet, u: &UncertaintyMatrix) -> Result<FusionResult> {
    check_shapes(set, u)?;
    let picks: Vec<(usize, usize)> = (0..set.num_samples())
        .into_par_iter()
        .map(|s| {
            let (m, _) = u.min_for_sample(s);
            let label = argmax_label(set.prob_row(m, s)).expect("validated rows are non-empty");
            (m, label)
        })
        .collect();
    Ok(FusionResult {
        method: FusionMethod::Ul,
        labels: picks.iter().map(|&(_, l)| l).collect(),
        provenance: picks.into_iter().map(|(m, _)| Provenance::Model(m)).collect(),
        fused_probs: None,
    })
}

/// Thresholded lowest-uncertainty fusion.
///
/// Per sample: when the smallest uncertainty is strictly below the
/// threshold, behave like `ul`; otherwise infer from the mean ensemble.
pub fn fuse_ut(set: &PredictionSet, u: &UncertaintyMatrix, threshold: f64) -> Result<FusionResult> {
    if !threshold.is_finite() || threshold <= 0.0 || threshold >= 1.0 {
        return Err(Error::InvalidThreshold(threshold));
    }
    check_shapes(set, u)?;
    let mean_labels = fuse_mean(set)?.labels;
    let picks: Vec<(Provenance, usize)> = (0..set.num_samples())
        .into_par_iter()
        .map(|s| {
            let (m, lowest) = u.min_for_sample(s);
            if lowest < threshold {
                let label =
                    argmax_label(set.prob_row(m, s)).expect("validated rows are non-empty");
                (Provenance::Model(m), label)
            } else {
                (Provenance::MeanFallback, mean_labels[s])
            }
        })
        .collect();
    Ok(FusionResult {
        method: FusionMethod::Ut { threshold },
        labels: picks.iter().map(|&(_, l)| l).collect(),
        provenance: picks.into_iter().map(|(p, _)| p).collect(),
        fused_probs: None,
    })
}

/// Inverse-uncertainty weighted soft voting with the default axis.
pub fn fuse_uw(set: &PredictionSet, u: &UncertaintyMatrix) -> Result<FusionResult> {
    fuse_uw_axis(set, u, WeightAxis::PerSample)
}

/// Inverse-uncertainty weighted soft voting.
///
/// Weights are `1/u`, normalized along the chosen axis, then each model's
/// probability row is scaled by its weight and summed per class. With the
/// per-sample axis the weights form a convex combination, so equal
/// uncertainties reduce to the mean ensemble.
pub fn fuse_uw_axis(
    set: &PredictionSet,
    u: &UncertaintyMatrix,
    axis: WeightAxis,
) -> Result<FusionResult> {
    check_shapes(set, u)?;
    let models = set.num_models();
    match axis {
        WeightAxis::PerSample => weighted_vote(set, FusionMethod::Uw, |s| {
            let inv: Vec<f64> = (0..models).map(|m| 1.0 / u.value(m, s)).collect();
            let total: f64 = inv.iter().sum();
            inv.into_iter().map(|v| v / total).collect()
        }),
        WeightAxis::PerModel => {
            let totals: Vec<f64> = (0..models)
                .map(|m| u.model_row(m).iter().map(|v| 1.0 / v).sum())
                .collect();
            weighted_vote(set, FusionMethod::Uw, move |s| {
                (0..models)
                    .map(|m| (1.0 / u.value(m, s)) / totals[m])
                    .collect()
            })
        }
    }
}

/// Confidence-weighted soft voting with the default axis.
pub fn fuse_cw(set: &PredictionSet, u: &UncertaintyMatrix) -> Result<FusionResult> {
    fuse_cw_axis(set, u, WeightAxis::PerModel)
}

/// Confidence-weighted soft voting.
///
/// Confidence is `1 - u`. The default axis normalizes each model's
/// confidences over all samples; a model whose confidences sum to zero
/// (every row uniform) receives the uniform weight `1/S` instead.
pub fn fuse_cw_axis(
    set: &PredictionSet,
    u: &UncertaintyMatrix,
    axis: WeightAxis,
) -> Result<FusionResult> {
    check_shapes(set, u)?;
    let models = set.num_models();
    let samples = set.num_samples();
    match axis {
        WeightAxis::PerModel => {
            let totals: Vec<f64> = (0..models)
                .map(|m| u.model_row(m).iter().map(|v| 1.0 - v).sum())
                .collect();
            weighted_vote(set, FusionMethod::Cw, move |s| {
                (0..models)
                    .map(|m| {
                        if totals[m] > 0.0 {
                            (1.0 - u.value(m, s)) / totals[m]
                        } else {
                            1.0 / samples as f64
                        }
                    })
                    .collect()
            })
        }
        WeightAxis::PerSample => weighted_vote(set, FusionMethod::Cw, move |s| {
            let conf: Vec<f64> = (0..models).map(|m| 1.0 - u.value(m, s)).collect();
            let total: f64 = conf.iter().sum();
            if total > 0.0 {
                conf.into_iter().map(|c| c / total).collect()
            } else {
                vec![1.0 / models as f64; models]
            }
        }),
    }
}

fn weighted_vote<F>(set: &PredictionSet, method: FusionMethod, weights_for: F) -> Result<FusionResult>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    let k = set.num_classes();
    let rows: Vec<(usize, Vec<f64>, Vec<f64>)> = (0..set.num_samples())
        .into_par_iter()
        .map(|s| {
            let weights = weights_for(s);
            let mut fused = vec![0.0; k];
            for (m, &weight) in weights.iter().enumerate() {
                let row = set.prob_row(m, s);
                for (value, p) in fused.iter_mut().zip(row) {
                    *value += weight * p;
                }
            }
            let label = argmax_label(&fused).expect("fused scores are finite");
            (label, weights, fused)
        })
        .collect();
    let mut labels = Vec::with_capacity(rows.len());
    let mut provenance = Vec::with_capacity(rows.len());
    let mut fused_probs = Vec::with_capacity(rows.len());
    for (label, weights, fused) in rows {
        labels.push(label);
        provenance.push(Provenance::Weights(weights));
        fused_probs.push(fused);
    }
    Ok(FusionResult {
        method,
        labels,
        provenance,
        fused_probs: Some(fused_probs),
    })
}

/// Mean ensemble: per-class arithmetic average over models.
pub fn fuse_mean(set: &PredictionSet) -> Result<FusionResult> {
    pooled_vote(set, FusionMethod::Mean)
}

/// Max ensemble: per-class maximum over models.
pub fn fuse_max(set: &PredictionSet) -> Result<FusionResult> {
    pooled_vote(set, FusionMethod::Max)
}

fn pooled_vote(set: &PredictionSet, method: FusionMethod) -> Result<FusionResult> {
    let k = set.num_classes();
    let models = set.num_models();
    let rows: Vec<(usize, Vec<f64>)> = (0..set.num_samples())
        .into_par_iter()
        .map(|s| {
            let mut fused = vec![0.0; k];
            match method {
                FusionMethod::Mean => {
                    for m in 0..models {
                        let row = set.prob_row(m, s);
                        for c in 0..k {
                            fused[c] += row[c];
                        }
                    }
                    for v in fused.iter_mut() {
                        *v /= models as f64;
                    }
                }
                FusionMethod::Max => {
                    fused.copy_from_slice(set.prob_row(0, s));
                    for m in 1..models {
                        let row = set.prob_row(m, s);
                        for c in 0..k {
                            if row[c] > fused[c] {
                                fused[c] = row[c];
                            }
                        }
                    }
                }
                _ => unreachable!("pooled_vote only handles mean and max"),
            }
            let label = argmax_label(&fused).expect("fused scores are finite");
            (label, fused)
        })
        .collect();
    let mut labels = Vec::with_capacity(rows.len());
    let mut fused_probs = Vec::with_capacity(rows.len());
    for (label, fused) in rows {
        labels.push(label);
        fused_probs.push(fused);
    }
    Ok(FusionResult {
        method,
        labels,
        provenance: vec![Provenance::Pooled; set.num_samples()],
        fused_probs: Some(fused_probs),
    })
}

/// Runs the requested method with the given axis options.
pub fn fuse(
    set: &PredictionSet,
    u: &UncertaintyMatrix,
    method: FusionMethod,
    options: &FusionOptions,
) -> Result<FusionResult> {
    match method {
        FusionMethod::Ul => fuse_ul(set, u),
        FusionMethod::Ut { threshold } => fuse_ut(set, u, threshold),
        FusionMethod::Uw => fuse_uw_axis(set, u, options.uw_axis),
        FusionMethod::Cw => fuse_cw_axis(set, u, options.cw_axis),
        FusionMethod::Mean => fuse_mean(set),
        FusionMethod::Max => fuse_max(set),
    }
}

/// An evenly spaced threshold grid over `(0, 1)`.
///
/// The default grid runs from 0.11 to 0.90 in steps of 0.01, 80 values.
/// Grid points are snapped to six decimal places so membership checks are
/// exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self {
            start: 0.11,
            end: 0.90,
            step: 0.01,
        }
    }
}

impl ThresholdGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite()
            && self.end.is_finite()
            && self.step.is_finite()
            && self.start > 0.0
            && self.end < 1.0
            && self.end >= self.start
            && self.step > 0.0;
        if !ok {
            return Err(Error::InvalidThreshold(self.start));
        }
        Ok(())
    }

    /// All grid values, ascending.
    pub fn thresholds(&self) -> Vec<f64> {
        let scale = 1e6;
        let start = (self.start * scale).round();
        let step = (self.step * scale).round();
        let steps = ((self.end - self.start) / self.step).round() as usize;
        (0..=steps).map(|i| (start + i as f64 * step) / scale).collect()
    }

    pub fn contains(&self, threshold: f64) -> bool {
        self.thresholds().contains(&threshold)
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub threshold: f64,
    pub ua: f64,
    pub wa: f64,
}

/// Outcome of a threshold grid search.
#[derive(Debug, Clone, Serialize)]
pub struct GridSearchResult {
    pub best_threshold: f64,
    pub optimized_metric: Metric,
    /// The full score curve, one entry per grid value, ascending.
    pub scores: Vec<GridPoint>,
}

impl GridSearchResult {
    pub fn best_point(&self) -> GridPoint {
        *self
            .scores
            .iter()
            .find(|p| p.threshold == self.best_threshold)
            .expect("best threshold is a grid point")
    }

    /// The optimized metric's value at the best threshold.
    pub fn best_score(&self) -> f64 {
        let p = self.best_point();
        match self.optimized_metric {
            Metric::Ua => p.ua,
            Metric::Wa => p.wa,
        }
    }
}

/// Grid search for the `ut` threshold over the default grid.
///
/// Scores every grid threshold on the provided set with the chosen metric
/// and returns the highest-scoring one; ties break to the lowest threshold.
pub fn search_threshold(
    set: &PredictionSet,
    u: &UncertaintyMatrix,
    metric: Metric,
) -> Result<GridSearchResult> {
    search_threshold_grid(set, u, metric, &ThresholdGrid::default())
}

/// Grid search for the `ut` threshold over a caller-supplied grid.
pub fn search_threshold_grid(
    set: &PredictionSet,
    u: &UncertaintyMatrix,
    metric: Metric,
    grid: &ThresholdGrid,
) -> Result<GridSearchResult> {
    grid.validate()?;
    check_shapes(set, u)?;
    let thresholds = grid.thresholds();
    let scores: Vec<GridPoint> = thresholds
        .par_iter()
        .map(|&threshold| {
            let fused = fuse_ut(set, u, threshold)?;
            let report = score(&fused.labels, set.truth(), set.num_classes())?;
            Ok(GridPoint {
                threshold,
                ua: report.ua,
                wa: report.wa,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = &scores[0];
    for point in &scores[1..] {
        let value = match metric {
            Metric::Ua => point.ua,
            Metric::Wa => point.wa,
        };
        let best_value = match metric {
            Metric::Ua => best.ua,
            Metric::Wa => best.wa,
        };
        if value > best_value {
            best = point;
        }
    }
    Ok(GridSearchResult {
        best_threshold: best.threshold,
        optimized_metric: metric,
        scores,
    })
}
