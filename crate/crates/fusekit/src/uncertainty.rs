//! Entropy-based per-sample uncertainty.
//!
//! A model's uncertainty about one sample is the Shannon entropy of its
//! predicted class distribution, normalized by `ln K` so the value lands in
//! `[0, 1]`: 0 for a one-hot row, 1 for a uniform row. The natural logarithm
//! is used internally; the base cancels in the normalization, so any base
//! yields the same uncertainty.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prediction::PredictionSet;

/// Lower clamp for normalized uncertainties, so inverse weights stay finite.
pub const UNCERTAINTY_EPSILON: f64 = 1e-6;

/// Shannon entropy of a probability vector, in nats.
///
/// Terms with `p = 0` contribute 0 (limit convention). The input must be a
/// distribution: entries in `[0, 1]` and summing to 1 within 1e-6.
pub fn entropy(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::EmptyInput("entropy over empty vector"));
    }
    let mut sum = 0.0;
    for &p in probs {
        if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "entropy input entry {p} outside [0, 1]"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidDistribution(format!(
            "entropy input sums to {sum}"
        )));
    }
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    Ok(h)
}

/// Scales an entropy value by `ln K`, clipping the result into `[0, 1]`.
///
/// `ln K` is the maximum entropy over K-class distributions, so this is the
/// unique scaling that maps the full entropy range onto `[0, 1]`. Undefined
/// for fewer than two classes.
pub fn normalize_entropy(h: f64, num_classes: usize) -> Result<f64> {
    if num_classes < 2 {
        return Err(Error::TooFewClasses(num_classes));
    }
    Ok((h / (num_classes as f64).ln()).clamp(0.0, 1.0))
}

/// Normalized uncertainties for every (model, sample) pair.
///
/// Entries are clamped into `[UNCERTAINTY_EPSILON, 1]`; the per-entry flag
/// records whether the epsilon clamp fired (it does exactly when the source
/// row was numerically one-hot).
#[derive(Debug, Clone)]
pub struct UncertaintyMatrix {
    models: usize,
    samples: usize,
    values: Vec<f64>,
    clamped: Vec<bool>,
}

impl UncertaintyMatrix {
    pub fn num_models(&self) -> usize {
        self.models
    }

    pub fn num_samples(&self) -> usize {
        self.samples
    }

    /// Uncertainty of model `model` on sample `sample`.
    pub fn value(&self, model: usize, sample: usize) -> f64 {
        self.values[model * self.samples + sample]
    }

    pub fn was_clamped(&self, model: usize, sample: usize) -> bool {
        self.clamped[model * self.samples + sample]
    }

    /// All uncertainties of one model, ordered by sample.
    pub fn model_row(&self, model: usize) -> &[f64] {
        &self.values[model * self.samples..(model + 1) * self.samples]
    }

    /// Smallest uncertainty for a sample and the index of the model
    /// attaining it; ties break to the lowest model index.
    pub fn min_for_sample(&self, sample: usize) -> (usize, f64) {
        let mut best = 0;
        let mut best_value = self.value(0, sample);
        for m in 1..self.models {
            let v = self.value(m, sample);
            if v < best_value {
                best = m;
                best_value = v;
            }
        }
        (best, best_value)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Builds a matrix directly from values; intended for tests.
    pub fn from_values(models: usize, samples: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != models * samples {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: models * samples,
            });
        }
        if values
            .iter()
            .any(|v| !v.is_finite() || *v < UNCERTAINTY_EPSILON || *v > 1.0)
        {
            return Err(Error::InvalidDistribution(
                "uncertainty outside [epsilon, 1]".into(),
            ));
        }
        Ok(Self {
            models,
            samples,
            values,
            clamped: vec![false; models * samples],
        })
    }
}

/// Computes the normalized, clamped uncertainty of every model on every
/// sample of a validated [`PredictionSet`].
pub fn uncertainty_matrix(set: &PredictionSet) -> Result<UncertaintyMatrix> {
    let models = set.num_models();
    let samples = set.num_samples();
    let k = set.num_classes();
    let per_model: Vec<Result<(Vec<f64>, Vec<bool>)>> = (0..models)
        .into_par_iter()
        .map(|m| {
            let mut values = Vec::with_capacity(samples);
            let mut clamped = Vec::with_capacity(samples);
            for s in 0..samples {
                let u = normalize_entropy(entropy(set.prob_row(m, s))?, k)?;
                if u < UNCERTAINTY_EPSILON {
                    values.push(UNCERTAINTY_EPSILON);
                    clamped.push(true);
                } else {
                    values.push(u);
                    clamped.push(false);
                }
            }
            Ok((values, clamped))
        })
        .collect();

    let mut values = Vec::with_capacity(models * samples);
    let mut clamped = Vec::with_capacity(models * samples);
    for row in per_model {
        let (v, c) = row?;
        values.extend(v);
        clamped.extend(c);
    }
    Ok(UncertaintyMatrix {
        models,
        samples,
        values,
        clamped,
    })
}
