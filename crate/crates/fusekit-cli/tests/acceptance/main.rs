//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

mod bigfloat;
mod reference;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use fusekit::evaluation::{cohens_d, effect_category, score, EffectCategory, Metric};
use fusekit::fusion::{
    fuse_cw, fuse_max, fuse_mean, fuse_ul, fuse_ut, fuse_uw, ThresholdGrid,
};
use fusekit::io::{
    default_sample_ids, read_ensemble_table, read_single_table, write_fixture,
};
use fusekit::prediction::{ModelPredictions, PredictionSet, ScoreKind};
use fusekit::syngen::{generate, SynSpec};
use fusekit::uncertainty::{entropy, normalize_entropy, uncertainty_matrix, UncertaintyMatrix};

use bigfloat::{oracle_entropy, oracle_normalized_uncertainty, oracle_softmax, Fx};

struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64) -> Self {
        Draws(ChaCha8Rng::seed_from_u64(seed))
    }

    fn float(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / 9007199254740992.0
    }

    fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }
}

fn random_distribution(draws: &mut Draws, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| draws.float() + 1e-9).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn random_set(draws: &mut Draws, max_s: usize, max_m: usize, max_k: usize) -> PredictionSet {
    let s = draws.range(1, max_s);
    let m = draws.range(1, max_m);
    let k = draws.range(2, max_k);
    let models = (0..m)
        .map(|i| {
            let rows: Vec<Vec<f64>> = (0..s).map(|_| random_distribution(draws, k)).collect();
            ModelPredictions::new(format!("m{i}"), ScoreKind::Probabilities, rows).unwrap()
        })
        .collect();
    let truth: Vec<usize> = (0..s).map(|_| draws.below(k)).collect();
    let classes = (0..k).map(|c| format!("c{c}")).collect();
    PredictionSet::new(models, truth, classes).unwrap()
}

#[test]
fn criterion_1_entropy_matches_high_precision_reference() {
    bigfloat::self_check();
    let mut draws = Draws::new(0x1001);
    let started = Instant::now();
    for case in 0..1000usize {
        let k = 2 + case % 9;
        let probs: Vec<f64> = match case % 5 {
            0 => {
                let mut row = vec![0.0; k];
                row[case % k] = 1.0;
                row
            }
            1 => vec![1.0 / k as f64; k],
            _ => random_distribution(&mut draws, k),
        };
        let h = entropy(&probs).unwrap();
        let u = normalize_entropy(h, k).unwrap();
        let h_ref = oracle_entropy(&probs);
        let u_ref = oracle_normalized_uncertainty(&probs);
        assert!(
            Fx::from_f64(h).sub(&h_ref).abs_below_pow10(12),
            "case {case}: entropy {h} vs oracle {}",
            h_ref.to_f64()
        );
        assert!(
            Fx::from_f64(u).sub(&u_ref).abs_below_pow10(12),
            "case {case}: uncertainty {u} vs oracle {}",
            u_ref.to_f64()
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "oracle comparison took {elapsed:?}, budget is 5 s"
    );

    // The softmax feeding those distributions sits on the same footing:
    // spot-check it against the arbitrary-precision exponential reference.
    for case in 0..50usize {
        let k = 2 + case % 6;
        let logits: Vec<f64> = (0..k).map(|_| draws.float() * 20.0 - 10.0).collect();
        let out = fusekit::prediction::softmax(&logits).unwrap();
        let expected = oracle_softmax(&logits);
        for (got, want) in out.iter().zip(&expected) {
            assert!(Fx::from_f64(*got).sub(want).abs_below_pow10(12));
        }
    }
    let canon = fusekit::prediction::softmax(&[1.0, 2.0, 3.0]).unwrap();
    for (got, want) in canon.iter().zip(oracle_softmax(&[1.0, 2.0, 3.0])) {
        assert!(Fx::from_f64(*got).sub(&want).abs_below_pow10(12));
    }

    println!("criterion 1: PASS (1000 distributions within 1e-12 of the 60-digit reference, {elapsed:?})");
}

#[test]
fn criterion_2_reduction_identities_hold_exactly() {
    let mut draws = Draws::new(0x2002);
    let mut ut_as_ul_checks = 0usize;
    for case in 0..200usize {
        let set = random_set(&mut draws, 50, 4, 6);
        let u = uncertainty_matrix(&set).unwrap();
        let ul = fuse_ul(&set, &u).unwrap();
        let mean = fuse_mean(&set).unwrap();

        // Above every uncertainty, ut is ul.
        let max_u = u.max_value();
        if max_u < 1.0 {
            let above = (max_u + 1.0) / 2.0;
            let ut = fuse_ut(&set, &u, above).unwrap();
            assert_eq!(ut.labels, ul.labels, "case {case}: ut(t > max u) != ul");
            ut_as_ul_checks += 1;
        }

        // At or below every uncertainty, ut is the mean ensemble.
        let min_u = u.min_value();
        let ut = fuse_ut(&set, &u, min_u).unwrap();
        assert_eq!(ut.labels, mean.labels, "case {case}: ut(t <= min u) != mean");

        // Equal uncertainties collapse uw onto the mean ensemble.
        let shared: Vec<f64> = (0..set.num_samples())
            .map(|_| 1e-6 + draws.float() * (1.0 - 1e-6))
            .collect();
        let mut equal = Vec::new();
        for _ in 0..set.num_models() {
            equal.extend(shared.iter().copied());
        }
        let equal_u =
            UncertaintyMatrix::from_values(set.num_models(), set.num_samples(), equal).unwrap();
        let uw = fuse_uw(&set, &equal_u).unwrap();
        assert_eq!(uw.labels, mean.labels, "case {case}: uw(equal u) != mean");

        // A single model reduces every method to its argmax labels.
        let single = PredictionSet::new(
            vec![set.model(0).clone()],
            set.truth().to_vec(),
            set.classes().to_vec(),
        )
        .unwrap();
        let su = uncertainty_matrix(&single).unwrap();
        let expected = single.argmax_labels(0).unwrap();
        assert_eq!(fuse_ul(&single, &su).unwrap().labels, expected);
        assert_eq!(fuse_ut(&single, &su, 0.5).unwrap().labels, expected);
        assert_eq!(fuse_uw(&single, &su).unwrap().labels, expected);
        assert_eq!(fuse_cw(&single, &su).unwrap().labels, expected);
        assert_eq!(fuse_mean(&single).unwrap().labels, expected);
        assert_eq!(fuse_max(&single).unwrap().labels, expected);
    }
    assert!(ut_as_ul_checks >= 190, "too few ut==ul checks ran");
    println!(
        "criterion 2: PASS (reduction identities exact on 200 sets; ut==ul checked {ut_as_ul_checks} times)"
    );
}

fn assert_rows_bitwise(case: usize, name: &str, got: &[Vec<f64>], want: &[Vec<f64>]) {
    for (s, (g, w)) in got.iter().zip(want).enumerate() {
        for (c, (a, b)) in g.iter().zip(w).enumerate() {
            assert_eq!(
                a.to_bits(),
                b.to_bits(),
                "case {case}: {name} fused value differs at sample {s} class {c}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn criterion_3_fusions_match_naive_reference_exactly() {
    let mut draws = Draws::new(0x3003);
    for case in 0..500usize {
        let set = random_set(&mut draws, 20, 4, 5);
        let u = uncertainty_matrix(&set).unwrap();

        let ul = fuse_ul(&set, &u).unwrap();
        assert_eq!(ul.labels, reference::ref_ul(&set, &u), "case {case}: ul");

        let threshold = 0.05 + draws.float() * 0.9;
        let ut = fuse_ut(&set, &u, threshold).unwrap();
        assert_eq!(
            ut.labels,
            reference::ref_ut(&set, &u, threshold),
            "case {case}: ut({threshold})"
        );

        let uw = fuse_uw(&set, &u).unwrap();
        let (ref_labels, ref_fused) = reference::ref_uw(&set, &u);
        assert_eq!(uw.labels, ref_labels, "case {case}: uw labels");
        assert_rows_bitwise(case, "uw", uw.fused_probs.as_ref().unwrap(), &ref_fused);

        let cw = fuse_cw(&set, &u).unwrap();
        let (ref_labels, ref_fused) = reference::ref_cw(&set, &u);
        assert_eq!(cw.labels, ref_labels, "case {case}: cw labels");
        assert_rows_bitwise(case, "cw", cw.fused_probs.as_ref().unwrap(), &ref_fused);

        let mean = fuse_mean(&set).unwrap();
        let (ref_labels, ref_fused) = reference::ref_mean(&set);
        assert_eq!(mean.labels, ref_labels, "case {case}: mean labels");
        assert_rows_bitwise(case, "mean", mean.fused_probs.as_ref().unwrap(), &ref_fused);

        let max = fuse_max(&set).unwrap();
        let (ref_labels, ref_fused) = reference::ref_max(&set);
        assert_eq!(max.labels, ref_labels, "case {case}: max labels");
        assert_rows_bitwise(case, "max", max.fused_probs.as_ref().unwrap(), &ref_fused);
    }
    println!("criterion 3: PASS (all six fusions match the naive reference on 500 instances)");
}

#[test]
fn criterion_4_informative_uncertainty_makes_ul_perfect() {
    let spec = SynSpec {
        samples: 300,
        classes: 4,
        models: 3,
        accs: vec![0.7, 0.7, 0.7],
        informativeness: 1.0,
        seed: 417,
    };
    let set = generate(&spec).unwrap();

    // The construction must cover every sample with at least one correct
    // model for the claim to apply; verify rather than assume.
    let labels: Vec<Vec<usize>> = (0..3).map(|m| set.argmax_labels(m).unwrap()).collect();
    for (s, &truth) in set.truth().iter().enumerate() {
        assert!(
            labels.iter().any(|model| model[s] == truth),
            "sample {s} lacks a correct model"
        );
    }

    let u = uncertainty_matrix(&set).unwrap();
    let ul = fuse_ul(&set, &u).unwrap();
    let ul_report = score(&ul.labels, set.truth(), 4).unwrap();
    assert_eq!(ul_report.ua, 1.0, "ul must be exact on this fixture");

    let mean = fuse_mean(&set).unwrap();
    let mean_report = score(&mean.labels, set.truth(), 4).unwrap();
    assert!(
        mean_report.ua < 1.0,
        "mean must err somewhere on this fixture, got UA {}",
        mean_report.ua
    );

    let search = fusekit::fusion::search_threshold(&set, &u, Metric::Ua).unwrap();
    assert!(ThresholdGrid::default().contains(search.best_threshold));
    assert_eq!(
        search.best_score(),
        1.0,
        "grid search must find a perfect threshold"
    );
    println!(
        "criterion 4: PASS (ul UA = 1.0 exactly, mean UA = {:.4} < 1, threshold {} scores 1.0)",
        mean_report.ua, search.best_threshold
    );
}

#[test]
fn criterion_5_grid_search_is_exhaustive_and_fast() {
    let spec = SynSpec {
        samples: 1000,
        classes: 4,
        models: 3,
        accs: vec![0.75, 0.6, 0.5],
        informativeness: 0.8,
        seed: 20,
    };
    let set = generate(&spec).unwrap();
    let u = uncertainty_matrix(&set).unwrap();

    let started = Instant::now();
    let result = fusekit::fusion::search_threshold(&set, &u, Metric::Ua).unwrap();
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "grid search took {elapsed:?}, budget is 1 s"
    );

    let grid = ThresholdGrid::default();
    let thresholds = grid.thresholds();
    assert_eq!(thresholds.len(), 80);
    assert!(grid.contains(result.best_threshold));
    assert_eq!(result.scores.len(), 80);

    // Exhaustive recomputation with the naive reference, ties to the
    // lowest threshold.
    let mut best_threshold = thresholds[0];
    let mut best_ua = f64::NEG_INFINITY;
    for (&t, point) in thresholds.iter().zip(&result.scores) {
        let labels = reference::ref_ut(&set, &u, t);
        let (ua, wa) = reference::ref_scores(&labels, set.truth(), 4);
        assert_eq!(point.threshold, t);
        assert_eq!(point.ua.to_bits(), ua.to_bits(), "ua differs at t = {t}");
        assert_eq!(point.wa.to_bits(), wa.to_bits(), "wa differs at t = {t}");
        if ua > best_ua {
            best_ua = ua;
            best_threshold = t;
        }
    }
    assert_eq!(result.best_threshold, best_threshold);
    println!(
        "criterion 5: PASS (80-value grid, best {} matches exhaustive recomputation, {elapsed:?})",
        result.best_threshold
    );
}

#[test]
fn criterion_6_metrics_match_hand_fixtures_and_balance() {
    let a = score(&[0, 0, 1, 0], &[0, 0, 1, 1], 2).unwrap();
    assert!((a.ua - 0.75).abs() < 1e-12);
    assert!((a.wa - 0.75).abs() < 1e-12);
    let b = score(&[0, 0, 0, 0], &[0, 0, 0, 1], 2).unwrap();
    assert!((b.ua - 0.5).abs() < 1e-12);
    assert!((b.wa - 0.75).abs() < 1e-12);

    // Class-balanced fixture: UA and WA agree for every model and method.
    let spec = SynSpec {
        samples: 240,
        classes: 4,
        models: 3,
        accs: vec![0.7, 0.55, 0.8],
        informativeness: 0.5,
        seed: 11,
    };
    let set = generate(&spec).unwrap();
    let u = uncertainty_matrix(&set).unwrap();
    let mut label_sets: Vec<Vec<usize>> = (0..3).map(|m| set.argmax_labels(m).unwrap()).collect();
    label_sets.push(fuse_ul(&set, &u).unwrap().labels);
    label_sets.push(fuse_ut(&set, &u, 0.5).unwrap().labels);
    label_sets.push(fuse_uw(&set, &u).unwrap().labels);
    label_sets.push(fuse_cw(&set, &u).unwrap().labels);
    label_sets.push(fuse_mean(&set).unwrap().labels);
    label_sets.push(fuse_max(&set).unwrap().labels);
    for labels in &label_sets {
        let report = score(labels, set.truth(), 4).unwrap();
        assert!(
            (report.ua - report.wa).abs() < 1e-12,
            "balanced truth must give UA == WA, got {} vs {}",
            report.ua,
            report.wa
        );
    }
    println!("criterion 6: PASS (hand confusions within 1e-12; |UA-WA| < 1e-12 when balanced)");
}

#[test]
fn criterion_7_cohens_d_fixture_and_categories() {
    let d = cohens_d(&[0.2, 0.3, 0.4], &[0.6, 0.7, 0.8]).unwrap();
    assert!((d - 4.0).abs() < 1e-12, "got {d}");
    let swapped = cohens_d(&[0.6, 0.7, 0.8], &[0.2, 0.3, 0.4]).unwrap();
    assert!((d + swapped).abs() < 1e-12);

    assert_eq!(effect_category(4.0), EffectCategory::LargeEffect);
    assert_eq!(effect_category(0.8), EffectCategory::LargeEffect);
    assert_eq!(effect_category(0.7999999), EffectCategory::MiddleEffect);
    assert_eq!(effect_category(0.2), EffectCategory::MiddleEffect);
    assert_eq!(effect_category(0.1999999), EffectCategory::NoEffect);
    assert_eq!(effect_category(0.0), EffectCategory::NoEffect);
    assert_eq!(effect_category(-0.2), EffectCategory::MiddleEffect);
    assert_eq!(effect_category(-0.8), EffectCategory::LargeEffect);
    println!("criterion 7: PASS (d = 4.0 within 1e-12, antisymmetry, category boundaries)");
}

#[test]
fn criterion_8_improvement_counts_on_reference_benchmark() {
    // The fixture transcribes an upstream benchmark: 27 ensemble rows over
    // 11 datasets, six methods, UA and WA each, plus the single-model
    // scores, all rounded to one decimal as published. The expected tallies
    // below are the counts reported alongside that benchmark.
    //
    // Known inconsistency, kept deliberately red rather than papered over:
    // no uniform counting convention reproduces those tallies from the
    // rounded tables (checked exhaustively across strict and non-strict
    // comparison; best-single baselines per dataset, per combination, and
    // per best model; cell-, row-, and dataset-level counting units). The
    // upstream bold marks themselves agree with this implementation's rule
    // (strict >, best single of the dataset per metric, counted per cell)
    // in 49 of 52 cells, so the rule is kept and the divergence surfaces
    // here instead of being calibrated away.
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let ensemble = read_ensemble_table(&fixtures.join("benchmark_ensemble_scores.csv")).unwrap();
    let single = read_single_table(&fixtures.join("benchmark_single_scores.csv")).unwrap();
    assert_eq!(ensemble.len(), 27 * 6 * 2);
    let counts = fusekit::evaluation::count_improvements(&ensemble, &single).unwrap();

    let expected: BTreeMap<String, usize> = [
        ("ul", 15),
        ("ut", 17),
        ("uw", 17),
        ("cw", 14),
        ("mean", 14),
        ("max", 12),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    assert_eq!(
        counts.per_method, expected,
        "criterion 8: FAIL (strict per-(dataset, metric) counting does not \
         reproduce the published tallies on the rounded benchmark tables)"
    );
    println!("criterion 8: PASS (improvement counts match the published tallies)");
}

fn run_evaluate(manifest: &Path, out: &Path, threads: Option<&str>) -> Vec<u8> {
    let mut command = Command::new(env!("CARGO_BIN_EXE_fusekit"));
    command
        .arg("evaluate")
        .arg("--manifest")
        .arg(manifest)
        .arg("--out")
        .arg(out);
    match threads {
        Some(n) => command.env("FUSEKIT_THREADS", n),
        None => command.env_remove("FUSEKIT_THREADS"),
    };
    let output = command.output().expect("binary runs");
    assert!(
        output.status.success(),
        "evaluate failed under threads={threads:?}: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    std::fs::read(out.join("results.json")).expect("results written")
}

#[test]
fn criterion_9_evaluate_output_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynSpec {
        samples: 120,
        classes: 4,
        models: 3,
        accs: vec![0.7, 0.5, 0.9],
        informativeness: 0.6,
        seed: 99,
    };
    let set = generate(&spec).unwrap();
    let ids = default_sample_ids(spec.samples);
    let manifest = write_fixture(&dir.path().join("fixture"), "determinism", &set, &ids).unwrap();

    let runs: Vec<(Option<&str>, PathBuf)> = vec![
        (Some("1"), dir.path().join("out-1")),
        (Some("1"), dir.path().join("out-1-repeat")),
        (Some("4"), dir.path().join("out-4")),
        (None, dir.path().join("out-max")),
    ];
    let mut outputs = Vec::new();
    for (threads, out) in &runs {
        outputs.push(run_evaluate(&manifest, out, *threads));
    }
    for window in outputs.windows(2) {
        assert_eq!(window[0], window[1], "results.json differs between runs");
    }
    // Per-sample label files must agree as well.
    for name in ["labels_ul.csv", "labels_uw.csv", "labels_mean.csv"] {
        let reference = std::fs::read(runs[0].1.join(name)).unwrap();
        for (_, out) in &runs[1..] {
            assert_eq!(reference, std::fs::read(out.join(name)).unwrap(), "{name} differs");
        }
    }
    println!("criterion 9: PASS (byte-identical output for threads in {{1, 4, max}})");
}
