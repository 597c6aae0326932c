//! fusekit command-line interface.
//!
//! Batch front end over the fusekit library: fuse prediction files, evaluate
//! all methods, search the ut threshold, run the effect analysis, count
//! improvements against single-model baselines, and generate synthetic
//! fixtures.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error. The
//! `FUSEKIT_THREADS` environment variable caps worker threads (default: all
//! cores); outputs are byte-identical for any value.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fusekit::error::{Error, Result};
use fusekit::evaluation::{count_improvements, effect_report, Metric};
use fusekit::fusion::search_threshold_grid;
use fusekit::io::{
    self, default_sample_ids, evaluate_manifest, load_predictions, write_fixture,
};
use fusekit::manifest::Manifest;
use fusekit::syngen::{generate, SynSpec};
use fusekit::uncertainty::uncertainty_matrix;

#[derive(Parser)]
#[command(name = "fusekit", version, about = "Decision-level ensemble fusion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ul,
    Ut,
    Uw,
    Cw,
    Mean,
    Max,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Ul => "ul",
            MethodArg::Ut => "ut",
            MethodArg::Uw => "uw",
            MethodArg::Cw => "cw",
            MethodArg::Mean => "mean",
            MethodArg::Max => "max",
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum MetricArg {
    #[default]
    Ua,
    Wa,
}

impl From<MetricArg> for Metric {
    fn from(value: MetricArg) -> Self {
        match value {
            MetricArg::Ua => Metric::Ua,
            MetricArg::Wa => Metric::Wa,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fuse with one method and write its labels and scores.
    Fuse {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Overrides the manifest threshold for ut.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the selected methods (default: all six) plus per-model singles.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// `all` or a comma-separated subset of ul,ut,uw,cw,mean,max.
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search the ut threshold and write the score curve.
    SearchThreshold {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cohen's d and histogram data for one model's uncertainties.
    Effect {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count ensemble cells beating the best single model per dataset.
    CountImprovements {
        #[arg(long = "ensemble-table")]
        ensemble_table: PathBuf,
        #[arg(long = "single-table")]
        single_table: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded synthetic fixture (model CSVs plus manifest).
    Generate {
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        models: usize,
        /// Comma-separated per-model accuracies, e.g. `0.7,0.7,0.7`.
        #[arg(long, value_delimiter = ',')]
        accs: Vec<f64>,
        #[arg(long)]
        informativeness: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("FUSEKIT_THREADS") {
        if let Ok(threads) = value.trim().parse::<usize>() {
            if threads > 0 {
                // Ignore failure: the pool can only be built once per process.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fuse {
            manifest,
            method,
            threshold,
            out,
        } => {
            let mut manifest = Manifest::load(&manifest)?;
            if let Some(t) = threshold {
                if !t.is_finite() || t <= 0.0 || t >= 1.0 {
                    return Err(Error::InvalidThreshold(t));
                }
                manifest.options.threshold = Some(t);
            }
            let loaded = load_predictions(&manifest)?;
            let bundle = evaluate_manifest(&manifest, &loaded, &[method.name().to_string()])?;
            let written = io::emit_report(&bundle, &out)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Evaluate {
            manifest,
            methods,
            out,
        } => {
            let manifest = Manifest::load(&manifest)?;
            let loaded = load_predictions(&manifest)?;
            let selection: Vec<String> = if methods.trim() == "all" {
                Vec::new()
            } else {
                methods
                    .split(',')
                    .map(|m| m.trim().to_string())
                    .filter(|m| !m.is_empty())
                    .collect()
            };
            let bundle = evaluate_manifest(&manifest, &loaded, &selection)?;
            let written = io::emit_report(&bundle, &out)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::SearchThreshold {
            manifest,
            metric,
            out,
        } => {
            let manifest = Manifest::load(&manifest)?;
            let loaded = load_predictions(&manifest)?;
            let u = uncertainty_matrix(&loaded.set)?;
            let metric = metric.map(Metric::from).unwrap_or(manifest.options.metric);
            let result = search_threshold_grid(&loaded.set, &u, metric, &manifest.options.grid)?;
            let written = io::write_search(&result, &out)?;
            println!(
                "best threshold {} ({} = {})",
                result.best_threshold,
                metric,
                result.best_score()
            );
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Effect {
            manifest,
            model,
            out,
        } => {
            let manifest = Manifest::load(&manifest)?;
            let loaded = load_predictions(&manifest)?;
            let index = loaded
                .set
                .model_index(&model)
                .ok_or_else(|| Error::UnknownModel(model.clone()))?;
            let u = uncertainty_matrix(&loaded.set)?;
            let labels = loaded.set.argmax_labels(index)?;
            let correct: Vec<bool> = labels
                .iter()
                .zip(loaded.set.truth())
                .map(|(p, t)| p == t)
                .collect();
            let report = effect_report(u.model_row(index), &correct)?;
            let written = io::write_effect(&model, &report, &out)?;
            println!("d = {} ({:?})", report.d, report.category);
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::CountImprovements {
            ensemble_table,
            single_table,
            out,
        } => {
            let ensemble = io::read_ensemble_table(&ensemble_table)?;
            let single = io::read_single_table(&single_table)?;
            let counts = count_improvements(&ensemble, &single)?;
            let path = io::write_improvements(&counts, &out)?;
            for (method, improved) in &counts.per_method {
                println!("{method}: {improved}");
            }
            println!("{}", path.display());
            Ok(())
        }
        Command::Generate {
            samples,
            classes,
            models,
            accs,
            informativeness,
            seed,
            out,
        } => {
            let spec = SynSpec {
                samples,
                classes,
                models,
                accs,
                informativeness,
                seed,
            };
            let set = generate(&spec)?;
            let ids = default_sample_ids(samples);
            let manifest_path = write_fixture(&out, "synthetic", &set, &ids)?;
            println!("{}", manifest_path.display());
            Ok(())
        }
    }
}
