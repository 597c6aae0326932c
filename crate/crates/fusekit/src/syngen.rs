//! Seeded synthetic ensembles with controllable accuracy and uncertainty
//! informativeness.
//!
//! The generator builds fixtures for property tests and desk-scale
//! experiments: per-model accuracy is hit exactly, and the `informativeness`
//! knob controls how reliably low uncertainty indicates a correct model.
//!
//! Everything is derived from a single ChaCha8 stream so fixtures are
//! byte-identical across platforms and runs. The draw procedure is fixed:
//!
//! 1. Truth: the balanced sequence `0, 1, ..., K-1, 0, 1, ...` of length S,
//!    shuffled once (exactly balanced when K divides S, uniform marginals
//!    otherwise).
//! 2. Per model `m` (in order): shuffle `0..S`, mark the first
//!    `floor(acc_m * S)` samples correct.
//! 3. Coverage repair (no draws): when the correctness budget is at least S,
//!    every sample is guaranteed at least one correct model by moving
//!    correctness from multiply-covered samples to uncovered ones,
//!    deterministically.
//! 4. Per sample: one float decides whether the informativeness event fires;
//!    then per model (in order) one float for the off-mass `delta`, plus one
//!    integer draw for the wrong class when the model is incorrect.
//!
//! Primitive draws on top of the ChaCha8 `u64` stream: floats are
//! `(x >> 11) / 2^53`; integers in `[0, n)` are `x mod n`; shuffles are
//! Fisher-Yates from the top index down.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::prediction::{ModelPredictions, PredictionSet, ScoreKind};

/// Parameters of a synthetic ensemble.
#[derive(Debug, Clone)]
pub struct SynSpec {
    pub samples: usize,
    pub classes: usize,
    pub models: usize,
    /// Per-model target accuracy in `[0, 1]`; the generated model is correct
    /// on exactly `floor(acc * samples)` samples.
    pub accs: Vec<f64>,
    /// Probability that, per sample, every correct model's uncertainty is
    /// forced strictly below every incorrect model's uncertainty.
    pub informativeness: f64,
    pub seed: u64,
}

impl SynSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::TooFewClasses(self.classes));
        }
        if self.samples == 0 || self.models == 0 {
            return Err(Error::InvalidSpec("samples and models must be >= 1".into()));
        }
        if self.accs.len() != self.models {
            return Err(Error::InvalidSpec(format!(
                "{} accuracies for {} models",
                self.accs.len(),
                self.models
            )));
        }
        if self.accs.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidSpec("accuracies must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.informativeness) {
            return Err(Error::InvalidSpec(
                "informativeness must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

// Off-mass ranges. When the informativeness event fires, correct models draw
// from the low range and incorrect models from the high range; the gap keeps
// the resulting uncertainties strictly separated.
const DELTA_MIN: f64 = 0.02;
const DELTA_MAX: f64 = 0.3;
const DELTA_LOW_MAX: f64 = 0.148;
const DELTA_HIGH_MIN: f64 = 0.152;

struct Draws(ChaCha8Rng);

impl Draws {
    fn float(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / 9007199254740992.0
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.float() * (hi - lo)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    fn shuffle<T>(&mut self, values: &mut [T]) {
        for i in (1..values.len()).rev() {
            let j = self.below(i + 1);
            values.swap(i, j);
        }
    }
}

/// Generates a validated [`PredictionSet`] from a spec; same spec, same
/// bytes.
pub fn generate(spec: &SynSpec) -> Result<PredictionSet> {
    spec.validate()?;
    let s = spec.samples;
    let k = spec.classes;
    let mut draws = Draws(ChaCha8Rng::seed_from_u64(spec.seed));

    let mut truth: Vec<usize> = (0..s).map(|i| i % k).collect();
    draws.shuffle(&mut truth);

    let mut correct: Vec<Vec<bool>> = Vec::with_capacity(spec.models);
    for m in 0..spec.models {
        let budget = (spec.accs[m] * s as f64).floor() as usize;
        let mut order: Vec<usize> = (0..s).collect();
        draws.shuffle(&mut order);
        let mut mask = vec![false; s];
        for &sample in order.iter().take(budget) {
            mask[sample] = true;
        }
        correct.push(mask);
    }
    repair_coverage(&mut correct, s);

    let mut rows: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(s); spec.models];
    for sample in 0..s {
        let informative = draws.float() < spec.informativeness;
        for m in 0..spec.models {
            let is_correct = correct[m][sample];
            let (lo, hi) = if informative {
                if is_correct {
                    (DELTA_MIN, DELTA_LOW_MAX)
                } else {
                    (DELTA_HIGH_MIN, DELTA_MAX)
                }
            } else {
                (DELTA_MIN, DELTA_MAX)
            };
            let delta = draws.range(lo, hi);
            let top = if is_correct {
                truth[sample]
            } else {
                // Uniform over the K-1 classes other than the truth.
                let pick = draws.below(k - 1);
                if pick >= truth[sample] {
                    pick + 1
                } else {
                    pick
                }
            };
            let mut row = vec![delta / (k - 1) as f64; k];
            row[top] = 1.0 - delta;
            rows[m].push(row);
        }
    }

    let models = rows
        .into_iter()
        .enumerate()
        .map(|(m, r)| ModelPredictions::new(format!("model_{m}"), ScoreKind::Probabilities, r))
        .collect::<Result<Vec<_>>>()?;
    let classes = (0..k).map(|c| format!("class_{c}")).collect();
    PredictionSet::new(models, truth, classes)
}

/// Moves correctness from multiply-covered samples to uncovered ones until
/// every sample has a correct model, whenever the total budget allows it.
/// Per-model correct counts are preserved.
fn repair_coverage(correct: &mut [Vec<bool>], samples: usize) {
    let models = correct.len();
    let budget: usize = correct.iter().map(|m| m.iter().filter(|&&c| c).count()).sum();
    if budget < samples {
        return;
    }
    let mut coverage: Vec<usize> = (0..samples)
        .map(|s| (0..models).filter(|&m| correct[m][s]).count())
        .collect();
    for s in 0..samples {
        if coverage[s] > 0 {
            continue;
        }
        'search: for mask in correct.iter_mut() {
            for t in (0..samples).rev() {
                if mask[t] && coverage[t] >= 2 {
                    mask[t] = false;
                    mask[s] = true;
                    coverage[t] -= 1;
                    coverage[s] += 1;
                    break 'search;
                }
            }
        }
    }
}
