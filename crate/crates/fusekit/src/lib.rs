//! Decision-level ensemble fusion with entropy-based uncertainty.
//!
//! fusekit combines aligned per-model class-probability predictions into a
//! single label per sample. Uncertainty is the entropy of a model's
//! predicted distribution, normalized into `[0, 1]`; four fusion strategies
//! use it (lowest, thresholded-lowest, inverse-uncertainty weighting,
//! confidence weighting) alongside the plain mean and max ensembles.
//! Results are scored with unweighted and weighted accuracy, and the
//! correctness/uncertainty relationship is summarized with Cohen's d.
//!
//! The crate is organized as:
//!
//! * [`prediction`]: validated multi-model prediction sets, softmax, argmax.
//! * [`uncertainty`]: entropy and the normalized uncertainty matrix.
//! * [`fusion`]: the six fusion strategies and the threshold grid search.
//! * [`evaluation`]: UA/WA scoring, Cohen's d, histograms, improvement
//!   counting against single-model baselines.
//! * [`syngen`]: seeded synthetic fixtures with exact per-model accuracy.
//! * [`manifest`] / [`io`]: the TOML manifest, CSV formats, and report
//!   emission.
//!
//! Everything is pure and deterministic: outputs are byte-identical across
//! runs and thread counts.
//!
//! One sharp, correct model outvoted by two hedging, wrong ones: the mean
//! ensemble follows the majority, while uncertainty-based selection follows
//! the sharp model.
//!
//! ```
//! use fusekit::fusion::{fuse_mean, fuse_ul};
//! use fusekit::prediction::{ModelPredictions, PredictionSet, ScoreKind};
//! use fusekit::uncertainty::uncertainty_matrix;
//!
//! # fn main() -> fusekit::Result<()> {
//! let rows = |row: Vec<f64>| vec![row];
//! let sharp = ModelPredictions::new(
//!     "sharp",
//!     ScoreKind::Probabilities,
//!     rows(vec![0.85, 0.10, 0.05]),
//! )?;
//! let fuzzy_a = ModelPredictions::new(
//!     "fuzzy_a",
//!     ScoreKind::Probabilities,
//!     rows(vec![0.10, 0.60, 0.30]),
//! )?;
//! let fuzzy_b = ModelPredictions::new(
//!     "fuzzy_b",
//!     ScoreKind::Probabilities,
//!     rows(vec![0.10, 0.60, 0.30]),
//! )?;
//! let classes = vec!["a".into(), "b".into(), "c".into()];
//! let set = PredictionSet::new(vec![sharp, fuzzy_a, fuzzy_b], vec![0], classes)?;
//!
//! assert_eq!(fuse_mean(&set)?.labels, vec![1]); // majority wins, wrongly
//! let u = uncertainty_matrix(&set)?;
//! assert_eq!(fuse_ul(&set, &u)?.labels, vec![0]); // lowest uncertainty wins
//! # Ok(())
//! # }
//! ```

pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod io;
pub mod manifest;
pub mod prediction;
pub mod syngen;
pub mod uncertainty;

pub use error::{Error, Result};
pub use evaluation::{EvaluationReport, Metric};
pub use fusion::{FusionMethod, FusionResult, ThresholdGrid};
pub use manifest::Manifest;
pub use prediction::{ModelPredictions, PredictionSet, ScoreKind};
pub use uncertainty::UncertaintyMatrix;
