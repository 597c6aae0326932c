//! Experiment manifests.
//!
//! A manifest is one TOML document describing a fusion experiment: the task
//! name, the ordered class list, the per-model prediction files, and the
//! fusion options. Model order in the manifest is the tie-break order used
//! everywhere. The full schema is documented in the repository README.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::Metric;
use crate::fusion::{FusionOptions, ThresholdGrid, WeightAxis};
use crate::prediction::ScoreKind;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// One model's prediction file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    /// CSV path, resolved relative to the manifest file.
    pub path: PathBuf,
    pub kind: ScoreKind,
}

/// Fusion options; all fields have defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    /// Weight normalization axis for `uw`.
    pub uw_norm: WeightAxis,
    /// Weight normalization axis for `cw`.
    pub cw_norm: WeightAxis,
    /// Fixed `ut` threshold; when absent, a grid search picks one.
    pub threshold: Option<f64>,
    pub grid: ThresholdGrid,
    /// Metric optimized by the grid search and reported first.
    pub metric: Metric,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            uw_norm: WeightAxis::PerSample,
            cw_norm: WeightAxis::PerModel,
            threshold: None,
            grid: ThresholdGrid::default(),
            metric: Metric::Ua,
        }
    }
}

impl Options {
    pub fn fusion_options(&self) -> FusionOptions {
        FusionOptions {
            uw_axis: self.uw_norm,
            cw_axis: self.cw_norm,
        }
    }
}

/// Declarative description of a fusion experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub task_name: String,
    pub classes: Vec<String>,
    pub models: Vec<ModelEntry>,
    #[serde(default)]
    pub options: Options,
}

impl Manifest {
    /// Parses a manifest file, resolves model paths against its directory,
    /// and validates the result (including that every model file exists).
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let mut manifest: Manifest = toml::from_str(&text)
            .map_err(|e| Error::InvalidManifest(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &mut manifest.models {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::InvalidManifest(format!(
                "unsupported schema_version {}, expected {MANIFEST_SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidManifest("no models listed".into()));
        }
        if self.classes.len() < 2 {
            return Err(Error::TooFewClasses(self.classes.len()));
        }
        for (i, name) in self.classes.iter().enumerate() {
            if self.classes[..i].contains(name) {
                return Err(Error::DuplicateClass(name.clone()));
            }
        }
        for (i, entry) in self.models.iter().enumerate() {
            if self.models[..i].iter().any(|m| m.name == entry.name) {
                return Err(Error::InvalidManifest(format!(
                    "duplicate model name '{}'",
                    entry.name
                )));
            }
            if !entry.path.is_file() {
                return Err(Error::MissingFile(entry.path.clone()));
            }
        }
        if let Some(t) = self.options.threshold {
            if !t.is_finite() || t <= 0.0 || t >= 1.0 {
                return Err(Error::InvalidThreshold(t));
            }
        }
        self.options.grid.validate()?;
        Ok(())
    }

    /// Serializes to TOML.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidManifest(e.to_string()))
    }
}
