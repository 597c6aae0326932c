//! Aligned multi-model class-probability predictions.
//!
//! A [`PredictionSet`] holds one probability matrix per model, all aligned to
//! the same samples and the same ordered class list, together with the
//! ground-truth labels. Construction validates every invariant and normalizes
//! the data once: logit matrices are converted to probabilities with a stable
//! softmax, and probability rows are renormalized after a tolerance check, so
//! the rest of the crate can rely on well-formed rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for validating that a probability row sums to 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// How the values in a prediction matrix are to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// Rows are probability distributions over the classes.
    Probabilities,
    /// Rows are unnormalized scores, converted via softmax at load time.
    Logits,
}

/// A class position within a task's ordered class list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassLabel {
    pub index: usize,
    pub name: String,
}

/// Per-sample class label indices.
pub type LabelVector = Vec<usize>;

/// One model's S×K prediction matrix.
#[derive(Debug, Clone)]
pub struct ModelPredictions {
    name: String,
    kind: ScoreKind,
    samples: usize,
    classes: usize,
    data: Vec<f64>,
}

impl ModelPredictions {
    /// Builds a matrix from per-sample rows. Rows must be non-empty and
    /// rectangular; value-level checks happen at [`PredictionSet::new`].
    pub fn new(name: impl Into<String>, kind: ScoreKind, rows: Vec<Vec<f64>>) -> Result<Self> {
        let name = name.into();
        if rows.is_empty() {
            return Err(Error::EmptySet(format!("model '{name}' has no rows")));
        }
        let classes = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * classes);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != classes {
                return Err(Error::ShapeMismatch {
                    model: name,
                    detail: format!("row {i} has {} columns, expected {classes}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            name,
            kind,
            samples: rows.len(),
            classes,
            data,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn num_samples(&self) -> usize {
        self.samples
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.data[sample * self.classes..(sample + 1) * self.classes]
    }
}

/// Aligned predictions of M models plus ground truth for one evaluation set.
///
/// After construction every row of every model is a valid probability
/// distribution; `kind` records what the source data looked like.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    models: Vec<ModelPredictions>,
    truth: LabelVector,
    classes: Vec<String>,
}

impl PredictionSet {
    /// Validates all invariants and normalizes the data.
    ///
    /// Checks, in order: non-empty set, unique class names with K >= 2,
    /// matching shapes across models, value-level checks per model
    /// (finiteness for both kinds; range and row sums for probabilities),
    /// and truth labels in `[0, K)`. The first violation is returned.
    /// Probability rows are then divided by their sum and logit rows are
    /// passed through a stable softmax.
    pub fn new(
        models: Vec<ModelPredictions>,
        truth: LabelVector,
        classes: Vec<String>,
    ) -> Result<Self> {
        let mut set = Self {
            models,
            truth,
            classes,
        };
        set.check_raw()?;
        set.normalize()?;
        Ok(set)
    }

    fn check_raw(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::EmptySet("no models".into()));
        }
        let k = self.classes.len();
        if k < 2 {
            return Err(Error::TooFewClasses(k));
        }
        for (i, name) in self.classes.iter().enumerate() {
            if self.classes[..i].contains(name) {
                return Err(Error::DuplicateClass(name.clone()));
            }
        }
        let s = self.models[0].num_samples();
        if s == 0 {
            return Err(Error::EmptySet("no samples".into()));
        }
        for model in &self.models {
            if model.num_samples() != s || model.num_classes() != k {
                return Err(Error::ShapeMismatch {
                    model: model.name().to_string(),
                    detail: format!(
                        "got {}x{}, expected {s}x{k}",
                        model.num_samples(),
                        model.num_classes()
                    ),
                });
            }
            check_values(model)?;
        }
        if self.truth.len() != s {
            return Err(Error::LengthMismatch {
                left: self.truth.len(),
                right: s,
            });
        }
        for (row, &label) in self.truth.iter().enumerate() {
            if label >= k {
                return Err(Error::LabelOutOfRange {
                    row,
                    value: label,
                    classes: k,
                });
            }
        }
        Ok(())
    }

    fn normalize(&mut self) -> Result<()> {
        for model in &mut self.models {
            let k = model.classes;
            for s in 0..model.samples {
                let row = &mut model.data[s * k..(s + 1) * k];
                match model.kind {
                    ScoreKind::Probabilities => {
                        let sum: f64 = row.iter().sum();
                        for v in row.iter_mut() {
                            *v /= sum;
                        }
                    }
                    ScoreKind::Logits => {
                        let probs = softmax(row)?;
                        row.copy_from_slice(&probs);
                    }
                }
            }
        }
        Ok(())
    }

    /// Re-checks every invariant on the stored (normalized) data.
    pub fn validate(&self) -> Result<()> {
        self.check_raw()?;
        for model in &self.models {
            if model.kind == ScoreKind::Logits {
                // Logit rows were already converted; verify they now behave
                // like probabilities.
                for s in 0..model.samples {
                    let row = model.row(s);
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        return Err(Error::RowSumViolation {
                            model: model.name().to_string(),
                            row: s,
                            sum,
                            tolerance: ROW_SUM_TOLERANCE,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_models(&self) -> usize {
        self.models.len()
    }

    pub fn num_samples(&self) -> usize {
        self.truth.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn models(&self) -> &[ModelPredictions] {
        &self.models
    }

    pub fn model(&self, index: usize) -> &ModelPredictions {
        &self.models[index]
    }

    /// Index of the model with this name, in manifest order.
    pub fn model_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m.name() == name)
    }

    /// Probability row of model `model` for sample `sample`.
    pub fn prob_row(&self, model: usize, sample: usize) -> &[f64] {
        self.models[model].row(sample)
    }

    pub fn truth(&self) -> &[usize] {
        &self.truth
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_name(&self, index: usize) -> &str {
        &self.classes[index]
    }

    pub fn label(&self, index: usize) -> Result<ClassLabel> {
        if index >= self.classes.len() {
            return Err(Error::LabelOutOfRange {
                row: 0,
                value: index,
                classes: self.classes.len(),
            });
        }
        Ok(ClassLabel {
            index,
            name: self.classes[index].clone(),
        })
    }

    /// Per-sample argmax labels of a single model.
    pub fn argmax_labels(&self, model: usize) -> Result<LabelVector> {
        (0..self.num_samples())
            .map(|s| argmax_label(self.prob_row(model, s)))
            .collect()
    }
}

fn check_values(model: &ModelPredictions) -> Result<()> {
    for s in 0..model.samples {
        let row = model.row(s);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "model '{}' row {s}",
                model.name()
            )));
        }
        if model.kind == ScoreKind::Probabilities {
            if let Some(v) = row.iter().find(|v| **v < 0.0 || **v > 1.0) {
                return Err(Error::InvalidDistribution(format!(
                    "model '{}' row {s}: entry {v} outside [0, 1]",
                    model.name()
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSumViolation {
                    model: model.name().to_string(),
                    row: s,
                    sum,
                    tolerance: ROW_SUM_TOLERANCE,
                });
            }
        }
    }
    Ok(())
}

/// Numerically stable softmax.
///
/// Subtracts the maximum before exponentiating, so the result is invariant
/// under adding a constant to all inputs. Output entries are in (0, 1] and
/// sum to 1 within 1e-12.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::EmptyInput("softmax"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("softmax input".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Index of the largest entry; ties break to the smallest index.
pub fn argmax_label(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::EmptyInput("argmax over empty vector"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("argmax input".into()));
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    Ok(best)
}
