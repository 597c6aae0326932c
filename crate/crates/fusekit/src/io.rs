//! File formats, loading, and report emission.
//!
//! Prediction CSVs are one file per model with the header
//! `sample_id,true_label,<class...>`: the class columns must match the
//! manifest's class list in order, `true_label` holds the class name, and
//! the truth column must agree across all model files. Rows are aligned
//! across models by `sample_id` and processed in lexicographic id order, so
//! the result does not depend on file row order.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{
    correctness_histogram, effect_report, score, EffectCategory, EffectReport, EnsembleCell,
    EvaluationReport, GroupStats, Histogram, ImprovementCount, Metric, SingleCell,
};
use crate::fusion::{
    fuse, search_threshold_grid, FusionMethod, FusionResult, GridSearchResult,
};
use crate::manifest::{Manifest, MANIFEST_SCHEMA_VERSION};
use crate::prediction::{ModelPredictions, PredictionSet};
use crate::uncertainty::uncertainty_matrix;

/// Schema version stamped into every machine-readable output file.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

/// A prediction set together with its canonical sample ids.
#[derive(Debug, Clone)]
pub struct LoadedPredictions {
    pub set: PredictionSet,
    /// Lexicographically sorted; row `s` of every matrix belongs to
    /// `sample_ids[s]`.
    pub sample_ids: Vec<String>,
}

struct RawModel {
    rows: BTreeMap<String, (usize, Vec<f64>)>,
}

/// Parses and aligns every model CSV named by the manifest.
pub fn load_predictions(manifest: &Manifest) -> Result<LoadedPredictions> {
    let raw: Vec<RawModel> = manifest
        .models
        .par_iter()
        .map(|entry| read_model_csv(&entry.path, &manifest.classes))
        .collect::<Vec<Result<RawModel>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let first = &raw[0];
    for (i, model) in raw.iter().enumerate().skip(1) {
        if let Some(id) = first.rows.keys().find(|id| !model.rows.contains_key(*id)) {
            return Err(Error::SampleIdMismatch(format!(
                "sample '{id}' is missing from model '{}'",
                manifest.models[i].name
            )));
        }
        if let Some(id) = model.rows.keys().find(|id| !first.rows.contains_key(*id)) {
            return Err(Error::SampleIdMismatch(format!(
                "sample '{id}' appears in model '{}' but not in model '{}'",
                manifest.models[i].name, manifest.models[0].name
            )));
        }
    }

    let sample_ids: Vec<String> = first.rows.keys().cloned().collect();
    let truth: Vec<usize> = sample_ids.iter().map(|id| first.rows[id].0).collect();
    for (i, model) in raw.iter().enumerate().skip(1) {
        for (id, &t) in sample_ids.iter().zip(&truth) {
            if model.rows[id].0 != t {
                return Err(Error::TruthMismatch {
                    path: manifest.models[i].path.clone(),
                    sample: id.clone(),
                });
            }
        }
    }

    let models = raw
        .into_iter()
        .zip(&manifest.models)
        .map(|(model, entry)| {
            let rows: Vec<Vec<f64>> = sample_ids
                .iter()
                .map(|id| model.rows[id].1.clone())
                .collect();
            ModelPredictions::new(entry.name.clone(), entry.kind, rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = PredictionSet::new(models, truth, manifest.classes.clone())?;
    Ok(LoadedPredictions { set, sample_ids })
}

fn read_model_csv(path: &Path, classes: &[String]) -> Result<RawModel> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected: Vec<&str> = ["sample_id", "true_label"]
        .into_iter()
        .chain(classes.iter().map(|c| c.as_str()))
        .collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::HeaderMismatch {
            path: path.to_path_buf(),
            detail: format!("expected columns {expected:?}, got {got:?}"),
        });
    }

    let mut rows = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = record[0].to_string();
        let truth_name = &record[1];
        let truth = classes
            .iter()
            .position(|c| c == truth_name)
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("unknown class '{truth_name}' in true_label"),
            })?;
        let mut values = Vec::with_capacity(classes.len());
        for (i, cell) in record.iter().enumerate().skip(2) {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("'{cell}' in column '{}' is not a number", expected[i]),
            })?;
            values.push(value);
        }
        if rows.insert(id.clone(), (truth, values)).is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("duplicate sample_id '{id}'"),
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptySet(format!("{}: no data rows", path.display())));
    }
    Ok(RawModel { rows })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = match e.position() {
        Some(p) => p.line(),
        None => 0,
    };
    Error::Parse {
        path: path.to_path_buf(),
        line,
        detail: e.to_string(),
    }
}

/// Renders a fraction as a percent with one decimal, rounding half up.
pub fn percent_1dp(fraction: f64) -> String {
    let scaled = (fraction * 1000.0 + 0.5).floor() / 10.0;
    format!("{scaled:.1}")
}

/// Zero-padded ids `s000000, s000001, ...` whose lexicographic order is the
/// generation order.
pub fn default_sample_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:06}")).collect()
}

/// Writes one model's prediction CSV.
pub fn write_prediction_csv(
    path: &Path,
    classes: &[String],
    sample_ids: &[String],
    truth: &[usize],
    rows: &[&[f64]],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("sample_id,true_label");
    for class in classes {
        out.push(',');
        out.push_str(class);
    }
    out.push('\n');
    for ((id, &t), row) in sample_ids.iter().zip(truth).zip(rows) {
        out.push_str(id);
        out.push(',');
        out.push_str(&classes[t]);
        for v in *row {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a complete fixture (model CSVs plus manifest) into `dir` and
/// returns the manifest path.
pub fn write_fixture(
    dir: &Path,
    task_name: &str,
    set: &PredictionSet,
    sample_ids: &[String],
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for m in 0..set.num_models() {
        let model = set.model(m);
        let file = format!("{}.csv", model.name());
        let rows: Vec<&[f64]> = (0..set.num_samples()).map(|s| set.prob_row(m, s)).collect();
        write_prediction_csv(
            &dir.join(&file),
            set.classes(),
            sample_ids,
            set.truth(),
            &rows,
        )?;
        entries.push((model.name().to_string(), file));
    }
    let manifest_path = dir.join("manifest.toml");
    let mut body = String::new();
    body.push_str(&format!(
        "schema_version = {MANIFEST_SCHEMA_VERSION}\ntask_name = \"{task_name}\"\nclasses = ["
    ));
    body.push_str(
        &set.classes()
            .iter()
            .map(|c| format!("\"{c}\""))
            .collect::<Vec<_>>()
            .join(", "),
    );
    body.push_str("]\n");
    for (name, file) in entries {
        body.push_str(&format!(
            "\n[[models]]\nname = \"{name}\"\npath = \"{file}\"\nkind = \"probabilities\"\n"
        ));
    }
    fs::write(&manifest_path, body)?;
    Ok(manifest_path)
}

/// One fused method's labels and scores.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub name: &'static str,
    pub threshold: Option<f64>,
    pub fusion: FusionResult,
    pub evaluation: EvaluationReport,
}

/// One single model's labels, scores and uncertainty analysis.
#[derive(Debug, Clone)]
pub struct SingleOutcome {
    pub model: String,
    pub labels: Vec<usize>,
    pub evaluation: EvaluationReport,
    pub histogram: Histogram,
    pub effect: Option<CompactEffect>,
    pub effect_note: Option<String>,
}

/// Effect summary embedded in the results file.
#[derive(Debug, Clone, Serialize)]
pub struct CompactEffect {
    pub d: f64,
    pub category: EffectCategory,
    pub correct: GroupStats,
    pub incorrect: GroupStats,
}

/// Everything `evaluate` produces for one manifest.
#[derive(Debug, Clone)]
pub struct EvaluationBundle {
    pub task: String,
    pub classes: Vec<String>,
    pub sample_ids: Vec<String>,
    pub truth: Vec<usize>,
    pub metric: Metric,
    pub threshold: Option<f64>,
    pub threshold_source: Option<&'static str>,
    pub methods: Vec<MethodOutcome>,
    pub singles: Vec<SingleOutcome>,
}

/// Runs the selected fusion methods plus all per-model singles.
///
/// `methods` filters by name; empty means all six. When `ut` is requested
/// without a manifest threshold, the grid search picks one on this same
/// data (pass a separate development manifest to decouple the two).
pub fn evaluate_manifest(
    manifest: &Manifest,
    loaded: &LoadedPredictions,
    methods: &[String],
) -> Result<EvaluationBundle> {
    let set = &loaded.set;
    let u = uncertainty_matrix(set)?;
    let options = manifest.options.fusion_options();
    let metric = manifest.options.metric;

    let selected: Vec<&'static str> = if methods.is_empty() {
        FusionMethod::CANONICAL_NAMES.to_vec()
    } else {
        let mut seen = Vec::new();
        for name in methods {
            let canonical = FusionMethod::CANONICAL_NAMES
                .iter()
                .find(|m| **m == name.as_str())
                .ok_or_else(|| Error::UnknownMethod(name.clone()))?;
            if !seen.contains(canonical) {
                seen.push(*canonical);
            }
        }
        // Report in canonical order regardless of request order.
        FusionMethod::CANONICAL_NAMES
            .iter()
            .copied()
            .filter(|m| seen.contains(m))
            .collect()
    };

    let (threshold, threshold_source) = if selected.contains(&"ut") {
        match manifest.options.threshold {
            Some(t) => (Some(t), Some("manifest")),
            None => {
                let search = search_threshold_grid(set, &u, metric, &manifest.options.grid)?;
                (Some(search.best_threshold), Some("grid-search"))
            }
        }
    } else {
        (None, None)
    };

    let mut outcomes = Vec::with_capacity(selected.len());
    for name in &selected {
        let method = match *name {
            "ul" => FusionMethod::Ul,
            "ut" => FusionMethod::Ut {
                threshold: threshold.expect("threshold fixed when ut selected"),
            },
            "uw" => FusionMethod::Uw,
            "cw" => FusionMethod::Cw,
            "mean" => FusionMethod::Mean,
            "max" => FusionMethod::Max,
            other => return Err(Error::UnknownMethod(other.to_string())),
        };
        let fusion = fuse(set, &u, method, &options)?;
        let evaluation = score(&fusion.labels, set.truth(), set.num_classes())?;
        outcomes.push(MethodOutcome {
            name,
            threshold: match method {
                FusionMethod::Ut { threshold } => Some(threshold),
                _ => None,
            },
            fusion,
            evaluation,
        });
    }

    let mut singles = Vec::with_capacity(set.num_models());
    for m in 0..set.num_models() {
        let labels = set.argmax_labels(m)?;
        let evaluation = score(&labels, set.truth(), set.num_classes())?;
        let correct: Vec<bool> = labels
            .iter()
            .zip(set.truth())
            .map(|(p, t)| p == t)
            .collect();
        let uncertainties = u.model_row(m);
        let histogram = correctness_histogram(uncertainties, &correct)?;
        let (effect, effect_note) = match effect_report(uncertainties, &correct) {
            Ok(report) => (
                Some(CompactEffect {
                    d: report.d,
                    category: report.category,
                    correct: report.correct,
                    incorrect: report.incorrect,
                }),
                None,
            ),
            Err(Error::DegenerateGroups(note)) => (None, Some(note)),
            Err(other) => return Err(other),
        };
        singles.push(SingleOutcome {
            model: set.model(m).name().to_string(),
            labels,
            evaluation,
            histogram,
            effect,
            effect_note,
        });
    }

    Ok(EvaluationBundle {
        task: manifest.task_name.clone(),
        classes: manifest.classes.clone(),
        sample_ids: loaded.sample_ids.clone(),
        truth: set.truth().to_vec(),
        metric,
        threshold,
        threshold_source,
        methods: outcomes,
        singles,
    })
}

#[derive(Serialize)]
struct MethodJson<'a> {
    method: &'a str,
    threshold: Option<f64>,
    ua: f64,
    wa: f64,
    ua_percent: String,
    wa_percent: String,
    per_class_recall: &'a [Option<f64>],
    confusion: &'a [Vec<usize>],
}

#[derive(Serialize)]
struct SingleJson<'a> {
    model: &'a str,
    ua: f64,
    wa: f64,
    ua_percent: String,
    wa_percent: String,
    per_class_recall: &'a [Option<f64>],
    confusion: &'a [Vec<usize>],
    effect: &'a Option<CompactEffect>,
    effect_note: &'a Option<String>,
}

#[derive(Serialize)]
struct ResultsJson<'a> {
    schema_version: u32,
    task: &'a str,
    classes: &'a [String],
    samples: usize,
    metric: Metric,
    threshold: Option<f64>,
    threshold_source: Option<&'a str>,
    methods: Vec<MethodJson<'a>>,
    singles: Vec<SingleJson<'a>>,
}

/// Writes the full report set into `dir`:
///
/// * `results.json`: machine-readable scores, schema-stable.
/// * `report.md`: a method-per-column table, columns in canonical order.
/// * `labels_<method>.csv`: per-sample fused labels with provenance.
/// * `histogram_<model>.csv`: binned uncertainty counts by correctness.
pub fn emit_report(bundle: &EvaluationBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let results = ResultsJson {
        schema_version: OUTPUT_SCHEMA_VERSION,
        task: &bundle.task,
        classes: &bundle.classes,
        samples: bundle.truth.len(),
        metric: bundle.metric,
        threshold: bundle.threshold,
        threshold_source: bundle.threshold_source,
        methods: bundle
            .methods
            .iter()
            .map(|m| MethodJson {
                method: m.name,
                threshold: m.threshold,
                ua: m.evaluation.ua,
                wa: m.evaluation.wa,
                ua_percent: percent_1dp(m.evaluation.ua),
                wa_percent: percent_1dp(m.evaluation.wa),
                per_class_recall: &m.evaluation.per_class_recall,
                confusion: &m.evaluation.confusion,
            })
            .collect(),
        singles: bundle
            .singles
            .iter()
            .map(|s| SingleJson {
                model: &s.model,
                ua: s.evaluation.ua,
                wa: s.evaluation.wa,
                ua_percent: percent_1dp(s.evaluation.ua),
                wa_percent: percent_1dp(s.evaluation.wa),
                per_class_recall: &s.evaluation.per_class_recall,
                confusion: &s.evaluation.confusion,
                effect: &s.effect,
                effect_note: &s.effect_note,
            })
            .collect(),
    };
    let results_path = dir.join("results.json");
    write_json(&results_path, &results)?;
    written.push(results_path);

    let report_path = dir.join("report.md");
    fs::write(&report_path, render_markdown(bundle))?;
    written.push(report_path);

    for method in &bundle.methods {
        let path = dir.join(format!("labels_{}.csv", method.name));
        let mut out = String::from("sample_id,true_label,predicted_label,provenance\n");
        for (s, id) in bundle.sample_ids.iter().enumerate() {
            out.push_str(&format!(
                "{id},{},{},{}\n",
                bundle.classes[bundle.truth[s]],
                bundle.classes[method.fusion.labels[s]],
                method.fusion.provenance[s].describe()
            ));
        }
        fs::write(&path, out)?;
        written.push(path);
    }

    for single in &bundle.singles {
        let path = dir.join(format!("histogram_{}.csv", single.model));
        write_histogram_csv(&path, &single.histogram)?;
        written.push(path);
    }

    Ok(written)
}

fn render_markdown(bundle: &EvaluationBundle) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n\n", bundle.task));
    out.push_str(&format!(
        "{} samples, {} classes, {} models.\n\n",
        bundle.truth.len(),
        bundle.classes.len(),
        bundle.singles.len()
    ));

    out.push_str("## Ensemble methods\n\n|  |");
    for m in &bundle.methods {
        out.push_str(&format!(" {} |", m.name));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(bundle.methods.len()));
    out.push('\n');
    for (label, metric) in [("UA", Metric::Ua), ("WA", Metric::Wa)] {
        out.push_str(&format!("| {label} |"));
        for m in &bundle.methods {
            out.push_str(&format!(" {} |", percent_1dp(m.evaluation.metric(metric))));
        }
        out.push('\n');
    }
    if let (Some(t), Some(source)) = (bundle.threshold, bundle.threshold_source) {
        out.push_str(&format!("\nut threshold: {t} ({source})\n"));
    }

    out.push_str("\n## Single models\n\n|  |");
    for s in &bundle.singles {
        out.push_str(&format!(" {} |", s.model));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(bundle.singles.len()));
    out.push('\n');
    for (label, metric) in [("UA", Metric::Ua), ("WA", Metric::Wa)] {
        out.push_str(&format!("| {label} |"));
        for s in &bundle.singles {
            out.push_str(&format!(" {} |", percent_1dp(s.evaluation.metric(metric))));
        }
        out.push('\n');
    }
    out
}

fn write_histogram_csv(path: &Path, histogram: &Histogram) -> Result<()> {
    let mut out = String::from("bin_lo,bin_hi,correct,incorrect\n");
    for bin in 0..histogram.correct.len() {
        let (lo, hi) = Histogram::edges(bin);
        out.push_str(&format!(
            "{lo},{hi},{},{}\n",
            histogram.correct[bin], histogram.incorrect[bin]
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidManifest(format!("serialization failed: {e}")));
    file.write_all(text?.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct SearchJson<'a> {
    schema_version: u32,
    optimized_metric: Metric,
    best_threshold: f64,
    best_ua: f64,
    best_wa: f64,
    scores: &'a [crate::fusion::GridPoint],
}

/// Writes `search.json` and the `search.csv` score curve.
pub fn write_search(result: &GridSearchResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let best = result.best_point();
    let json_path = dir.join("search.json");
    write_json(
        &json_path,
        &SearchJson {
            schema_version: OUTPUT_SCHEMA_VERSION,
            optimized_metric: result.optimized_metric,
            best_threshold: result.best_threshold,
            best_ua: best.ua,
            best_wa: best.wa,
            scores: &result.scores,
        },
    )?;
    let csv_path = dir.join("search.csv");
    let mut out = String::from("threshold,ua,wa\n");
    for point in &result.scores {
        out.push_str(&format!("{},{},{}\n", point.threshold, point.ua, point.wa));
    }
    fs::write(&csv_path, out)?;
    Ok(vec![json_path, csv_path])
}

#[derive(Serialize)]
struct EffectJson<'a> {
    schema_version: u32,
    model: &'a str,
    #[serde(flatten)]
    report: &'a EffectReport,
}

/// Writes `effect_<model>.json` and `histogram_<model>.csv`.
pub fn write_effect(model: &str, report: &EffectReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let json_path = dir.join(format!("effect_{model}.json"));
    write_json(
        &json_path,
        &EffectJson {
            schema_version: OUTPUT_SCHEMA_VERSION,
            model,
            report,
        },
    )?;
    let csv_path = dir.join(format!("histogram_{model}.csv"));
    write_histogram_csv(&csv_path, &report.histogram)?;
    Ok(vec![json_path, csv_path])
}

/// Reads an ensemble score table: `dataset,combination,method,metric,score`.
pub fn read_ensemble_table(path: &Path) -> Result<Vec<EnsembleCell>> {
    read_score_table(path, &["dataset", "combination", "method", "metric", "score"])?
        .into_iter()
        .map(|(fields, metric, score)| {
            Ok(EnsembleCell {
                dataset: fields[0].clone(),
                combination: fields[1].clone(),
                method: fields[2].clone(),
                metric,
                score,
            })
        })
        .collect()
}

/// Reads a single-model score table: `dataset,model,metric,score`.
pub fn read_single_table(path: &Path) -> Result<Vec<SingleCell>> {
    read_score_table(path, &["dataset", "model", "metric", "score"])?
        .into_iter()
        .map(|(fields, metric, score)| {
            Ok(SingleCell {
                dataset: fields[0].clone(),
                model: fields[1].clone(),
                metric,
                score,
            })
        })
        .collect()
}

fn read_score_table(
    path: &Path,
    expected: &[&str],
) -> Result<Vec<(Vec<String>, Metric, f64)>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<&str> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .collect();
    if headers != expected {
        return Err(Error::HeaderMismatch {
            path: path.to_path_buf(),
            detail: format!("expected columns {expected:?}, got {headers:?}"),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let n = record.len();
        let metric: Metric = record[n - 2].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: format!("unknown metric '{}'", &record[n - 2]),
        })?;
        let score: f64 = record[n - 1].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: format!("'{}' is not a number", &record[n - 1]),
        })?;
        let fields: Vec<String> = record.iter().take(n - 2).map(String::from).collect();
        rows.push((fields, metric, score));
    }
    Ok(rows)
}

/// Writes `improvements.json` with per-method counts in canonical order,
/// unknown methods after, alphabetically.
pub fn write_improvements(counts: &ImprovementCount, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;

    #[derive(Serialize)]
    struct Row<'a> {
        method: &'a str,
        improved: usize,
        cells: usize,
    }

    #[derive(Serialize)]
    struct ImprovementsJson<'a> {
        schema_version: u32,
        methods: Vec<Row<'a>>,
    }

    let mut names: Vec<&str> = FusionMethod::CANONICAL_NAMES
        .iter()
        .copied()
        .filter(|m| counts.per_method.contains_key(*m))
        .collect();
    for name in counts.per_method.keys() {
        if !FusionMethod::CANONICAL_NAMES.contains(&name.as_str()) {
            names.push(name);
        }
    }
    let rows = names
        .into_iter()
        .map(|name| Row {
            method: name,
            improved: counts.per_method[name],
            cells: counts.cells_compared[name],
        })
        .collect();
    let path = dir.join("improvements.json");
    write_json(
        &path,
        &ImprovementsJson {
            schema_version: OUTPUT_SCHEMA_VERSION,
            methods: rows,
        },
    )?;
    Ok(path)
}
