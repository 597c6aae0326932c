//! Straightforward-loop reference implementations of the six fusion
//! methods and the two accuracy metrics.
//!
//! These are deliberately plain translations of the definitions, kept
//! independent of the library's code paths: the acceptance suite compares
//! the two exactly, so a slip in either shows up as a mismatch. Summation
//! runs in natural order (models ascending, then classes), the same order
//! the definitions are written in.

// Index-based loops are the point here; keep them.
#![allow(clippy::needless_range_loop)]

use fusekit::prediction::PredictionSet;
use fusekit::uncertainty::UncertaintyMatrix;

fn ref_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

fn ref_min_model(u: &UncertaintyMatrix, sample: usize) -> usize {
    let mut best = 0;
    for m in 1..u.num_models() {
        if u.value(m, sample) < u.value(best, sample) {
            best = m;
        }
    }
    best
}

pub fn ref_ul(set: &PredictionSet, u: &UncertaintyMatrix) -> Vec<usize> {
    (0..set.num_samples())
        .map(|s| ref_argmax(set.prob_row(ref_min_model(u, s), s)))
        .collect()
}

pub fn ref_mean(set: &PredictionSet) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut labels = Vec::new();
    let mut fused_rows = Vec::new();
    for s in 0..set.num_samples() {
        let mut fused = vec![0.0; set.num_classes()];
        for m in 0..set.num_models() {
            let row = set.prob_row(m, s);
            for c in 0..set.num_classes() {
                fused[c] += row[c];
            }
        }
        for value in fused.iter_mut() {
            *value /= set.num_models() as f64;
        }
        labels.push(ref_argmax(&fused));
        fused_rows.push(fused);
    }
    (labels, fused_rows)
}

pub fn ref_max(set: &PredictionSet) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut labels = Vec::new();
    let mut fused_rows = Vec::new();
    for s in 0..set.num_samples() {
        let mut fused = set.prob_row(0, s).to_vec();
        for m in 1..set.num_models() {
            let row = set.prob_row(m, s);
            for c in 0..set.num_classes() {
                if row[c] > fused[c] {
                    fused[c] = row[c];
                }
            }
        }
        labels.push(ref_argmax(&fused));
        fused_rows.push(fused);
    }
    (labels, fused_rows)
}

pub fn ref_ut(set: &PredictionSet, u: &UncertaintyMatrix, threshold: f64) -> Vec<usize> {
    let (mean_labels, _) = ref_mean(set);
    (0..set.num_samples())
        .map(|s| {
            let m = ref_min_model(u, s);
            if u.value(m, s) < threshold {
                ref_argmax(set.prob_row(m, s))
            } else {
                mean_labels[s]
            }
        })
        .collect()
}

pub fn ref_uw(set: &PredictionSet, u: &UncertaintyMatrix) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut labels = Vec::new();
    let mut fused_rows = Vec::new();
    for s in 0..set.num_samples() {
        let mut inverse = Vec::new();
        for m in 0..set.num_models() {
            inverse.push(1.0 / u.value(m, s));
        }
        let mut total = 0.0;
        for value in &inverse {
            total += value;
        }
        let mut fused = vec![0.0; set.num_classes()];
        for m in 0..set.num_models() {
            let weight = inverse[m] / total;
            let row = set.prob_row(m, s);
            for c in 0..set.num_classes() {
                fused[c] += weight * row[c];
            }
        }
        labels.push(ref_argmax(&fused));
        fused_rows.push(fused);
    }
    (labels, fused_rows)
}

pub fn ref_cw(set: &PredictionSet, u: &UncertaintyMatrix) -> (Vec<usize>, Vec<Vec<f64>>) {
    let samples = set.num_samples();
    let mut totals = Vec::new();
    for m in 0..set.num_models() {
        let mut total = 0.0;
        for s in 0..samples {
            total += 1.0 - u.value(m, s);
        }
        totals.push(total);
    }
    let mut labels = Vec::new();
    let mut fused_rows = Vec::new();
    for s in 0..samples {
        let mut fused = vec![0.0; set.num_classes()];
        for m in 0..set.num_models() {
            let weight = if totals[m] > 0.0 {
                (1.0 - u.value(m, s)) / totals[m]
            } else {
                1.0 / samples as f64
            };
            let row = set.prob_row(m, s);
            for c in 0..set.num_classes() {
                fused[c] += weight * row[c];
            }
        }
        labels.push(ref_argmax(&fused));
        fused_rows.push(fused);
    }
    (labels, fused_rows)
}

/// (UA, WA) by direct counting.
pub fn ref_scores(pred: &[usize], truth: &[usize], num_classes: usize) -> (f64, f64) {
    let mut per_class_correct = vec![0usize; num_classes];
    let mut per_class_total = vec![0usize; num_classes];
    let mut correct = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        per_class_total[t] += 1;
        if p == t {
            per_class_correct[t] += 1;
            correct += 1;
        }
    }
    let wa = correct as f64 / pred.len() as f64;
    let mut recall_sum = 0.0;
    let mut supported = 0usize;
    for c in 0..num_classes {
        if per_class_total[c] > 0 {
            recall_sum += per_class_correct[c] as f64 / per_class_total[c] as f64;
            supported += 1;
        }
    }
    (recall_sum / supported as f64, wa)
}
