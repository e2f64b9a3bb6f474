//! Average precision, mAP and the positive-confidence histogram.
//!
//! AP is the mean, over positives, of the precision at each positive's rank.
//! Ranking is by descending score with ties broken by ascending sample index,
//! so results never depend on sort stability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{BinaryMatrix, LabelState, TriStateLabels};
use crate::numkit::Matrix;

/// Per-class AP and their mean over classes that have at least one positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    /// `None` for classes without positives.
    pub per_class_ap: Vec<Option<f64>>,
    pub map: f64,
    pub evaluated_classes: Vec<usize>,
    pub positives_per_class: Vec<usize>,
}

impl ApReport {
    /// Dense AP vector with `missing` substituted for excluded classes.
    pub fn ap_or(&self, missing: f64) -> Vec<f64> {
        self.per_class_ap.iter().map(|a| a.unwrap_or(missing)).collect()
    }
}

/// Sample order by descending score, ties by ascending index. `-0.0` and
/// `0.0` tie.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// AP of one ranking. Fails when `truth` has no positive.
pub fn average_precision(scores: &[f64], truth: &[bool]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::Contract(format!(
            "{} scores but {} truth entries",
            scores.len(),
            truth.len()
        )));
    }
    let n_pos = truth.iter().filter(|&&t| t).count();
    if n_pos == 0 {
        return Err(Error::Domain("average precision needs at least one positive".into()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in ranking(scores).iter().enumerate() {
        if truth[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / n_pos as f64)
}

/// AP per column of `scores` against `truth`; mAP over non-empty classes.
pub fn mean_average_precision(scores: &Matrix, truth: &BinaryMatrix) -> Result<ApReport> {
    if scores.shape() != (truth.n_samples(), truth.n_labels()) {
        return Err(Error::Contract(format!(
            "scores {:?} vs truth {}x{}",
            scores.shape(),
            truth.n_samples(),
            truth.n_labels()
        )));
    }
    let columns = (0..truth.n_labels()).map(|l| (scores.column(l), truth.column(l)));
    report_from_columns(columns)
}

/// AP on observed labels: `Positive` entries are positives, `Negative` ones
/// negatives, `Unknown` entries are left out of that class's ranking.
pub fn observed_average_precision(scores: &Matrix, observed: &TriStateLabels) -> Result<ApReport> {
    if scores.shape() != (observed.n_samples(), observed.n_labels()) {
        return Err(Error::Contract(format!(
            "scores {:?} vs labels {}x{}",
            scores.shape(),
            observed.n_samples(),
            observed.n_labels()
        )));
    }
    let columns = (0..observed.n_labels()).map(|l| {
        let mut s = Vec::new();
        let mut t = Vec::new();
        for i in 0..observed.n_samples() {
            match observed.get(i, l) {
                LabelState::Positive => {
                    s.push(scores[(i, l)]);
                    t.push(true);
                }
                LabelState::Negative => {
                    s.push(scores[(i, l)]);
                    t.push(false);
                }
                LabelState::Unknown => {}
            }
        }
        (s, t)
    });
    report_from_columns(columns)
}

fn report_from_columns(columns: impl Iterator<Item = (Vec<f64>, Vec<bool>)>) -> Result<ApReport> {
    let mut per_class_ap = Vec::new();
    let mut evaluated_classes = Vec::new();
    let mut positives_per_class = Vec::new();
    for (l, (s, t)) in columns.enumerate() {
        let n_pos = t.iter().filter(|&&b| b).count();
        positives_per_class.push(n_pos);
        if n_pos == 0 {
            per_class_ap.push(None);
        } else {
            per_class_ap.push(Some(average_precision(&s, &t)?));
            evaluated_classes.push(l);
        }
    }
    if evaluated_classes.is_empty() {
        return Err(Error::Domain("no class has a positive; mAP is undefined".into()));
    }
    let map = evaluated_classes
        .iter()
        .map(|&l| per_class_ap[l].unwrap_or(0.0))
        .sum::<f64>()
        / evaluated_classes.len() as f64;
    Ok(ApReport {
        per_class_ap,
        map,
        evaluated_classes,
        positives_per_class,
    })
}

/// Counts predicted confidences at ground-truth positive positions in bins
/// `[k·w, (k+1)·w)`; the last bin is closed at 1.
pub fn positive_confidence_histogram(pred: &Matrix, truth: &BinaryMatrix, bin_width: f64) -> Result<Vec<u64>> {
    if pred.shape() != (truth.n_samples(), truth.n_labels()) {
        return Err(Error::Contract("prediction and truth shapes differ".into()));
    }
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::Domain(format!("bin width {bin_width} must lie in (0, 1]")));
    }
    let n_bins = (1.0 / bin_width).round();
    if (n_bins * bin_width - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("bin width {bin_width} does not divide 1")));
    }
    let n_bins = n_bins as usize;
    let mut counts = vec![0u64; n_bins];
    for i in 0..truth.n_samples() {
        for l in 0..truth.n_labels() {
            if truth.get(i, l) {
                let p = pred[(i, l)].clamp(0.0, 1.0);
                let bin = ((p * n_bins as f64).floor() as usize).min(n_bins - 1);
                counts[bin] += 1;
            }
        }
    }
    Ok(counts)
}
