//! Adaptive smoothing weights and AP-driven label correction.
//!
//! Both consume per-class AP measured on the observed training labels.
//! Classes with a higher AP get smoothing weights closer to the raw
//! prediction, and fewer of their unknown entries are flipped to positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelState, TriStateLabels};
use crate::losses::SmoothingWeights;
use crate::metrics::ranking;
use crate::numkit::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    /// Scale on the per-class correction volume. `0` disables correction.
    pub label_num: f64,
    /// Exponent on AP in the smoothing weights.
    pub epsilon_power: f64,
    /// Epochs trained before smoothing weights become non-zero.
    pub warmup_epochs: usize,
    /// Epoch (0-based) at whose start the correction is applied once.
    /// `None` means 40% of the configured epochs.
    pub correction_epoch: Option<usize>,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self {
            label_num: 0.0,
            epsilon_power: 1.0,
            warmup_epochs: 1,
            correction_epoch: None,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self, epochs: usize) -> Result<()> {
        if !(self.label_num >= 0.0) || !self.label_num.is_finite() {
            return Err(Error::Domain(format!("label_num {} must be >= 0", self.label_num)));
        }
        if !(self.epsilon_power >= 0.0) || !self.epsilon_power.is_finite() {
            return Err(Error::Domain(format!(
                "epsilon_power {} must be >= 0",
                self.epsilon_power
            )));
        }
        let at = self.resolved_correction_epoch(epochs);
        if at < self.warmup_epochs {
            return Err(Error::Config(format!(
                "correction_epoch {at} precedes warmup_epochs {}",
                self.warmup_epochs
            )));
        }
        Ok(())
    }

    pub fn resolved_correction_epoch(&self, epochs: usize) -> usize {
        self.correction_epoch
            .unwrap_or_else(|| ((epochs as f64) * 0.4).round() as usize)
    }
}

/// `γ_il = pred_il · AP_l^ε` on `Unknown` entries, zero elsewhere.
pub fn smoothing_weights(
    pred: &Matrix,
    ap: &[f64],
    epsilon_power: f64,
    labels: &TriStateLabels,
) -> Result<SmoothingWeights> {
    if pred.shape() != (labels.n_samples(), labels.n_labels()) || ap.len() != pred.cols() {
        return Err(Error::Contract(format!(
            "pred {:?}, labels {}x{}, ap {}",
            pred.shape(),
            labels.n_samples(),
            labels.n_labels(),
            ap.len()
        )));
    }
    let scale: Vec<f64> = ap.iter().map(|&a| a.clamp(0.0, 1.0).powf(epsilon_power)).collect();
    let gamma = Matrix::from_fn(pred.rows(), pred.cols(), |i, l| {
        if labels.get(i, l) == LabelState::Unknown {
            (pred[(i, l)].clamp(0.0, 1.0) * scale[l]).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    SmoothingWeights::new(gamma)
}

/// Number of unknown entries to flip per class:
/// `floor(obs_num_l · label_num · (1 − AP_l))`, capped by `unknown_pool_l`.
///
/// This is `tr_num · cor_ratio_l · (1 − AP_l)` with
/// `cor_ratio_l = obs_num_l / tr_num · label_num`; `tr_num` cancels and is
/// only used to check `obs_num_l ≤ tr_num`.
pub fn correction_counts(
    tr_num: usize,
    obs_num: &[usize],
    ap: &[f64],
    label_num: f64,
    unknown_pool: &[usize],
) -> Result<Vec<usize>> {
    if obs_num.len() != ap.len() || ap.len() != unknown_pool.len() {
        return Err(Error::Contract("per-class vectors differ in length".into()));
    }
    if let Some(l) = obs_num.iter().position(|&o| o > tr_num) {
        return Err(Error::Contract(format!(
            "class {l} has {} observed labels but only {tr_num} samples",
            obs_num[l]
        )));
    }
    Ok(obs_num
        .iter()
        .zip(ap)
        .zip(unknown_pool)
        .map(|((&obs, &a), &pool)| {
            let raw = (obs as f64 * label_num * (1.0 - a)).floor();
            if raw <= 0.0 {
                0
            } else {
                (raw as usize).min(pool)
            }
        })
        .collect())
}

/// One flipped entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flip {
    pub sample: usize,
    pub class: usize,
    pub score: f64,
}

/// Flips, per class, the `counts[l]` highest-scoring `Unknown` entries to
/// `Positive` (ties by ascending sample index). Returns the new labels and
/// the flips in class-then-rank order.
pub fn apply_correction(
    labels: &TriStateLabels,
    scores: &Matrix,
    counts: &[usize],
) -> Result<(TriStateLabels, Vec<Flip>)> {
    if scores.shape() != (labels.n_samples(), labels.n_labels()) || counts.len() != labels.n_labels() {
        return Err(Error::Contract("apply_correction shape mismatch".into()));
    }
    let mut out = labels.clone();
    let mut flips = Vec::new();
    for (l, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let pool: Vec<usize> = (0..labels.n_samples())
            .filter(|&i| labels.get(i, l) == LabelState::Unknown)
            .collect();
        if count > pool.len() {
            return Err(Error::Contract(format!(
                "class {l}: {count} corrections requested but only {} unknown entries",
                pool.len()
            )));
        }
        let pool_scores: Vec<f64> = pool.iter().map(|&i| scores[(i, l)]).collect();
        for &k in ranking(&pool_scores).iter().take(count) {
            let i = pool[k];
            out.set(i, l, LabelState::Positive);
            flips.push(Flip {
                sample: i,
                class: l,
                score: scores[(i, l)],
            });
        }
    }
    Ok((out, flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rng;
    use proptest::prelude::*;

    #[test]
    fn smoothing_examples() {
        let labels = TriStateLabels::from_pattern(&["PUU"]).unwrap();
        let pred = Matrix::from_rows(&[[0.9, 0.8, 0.3]]).unwrap();
        let g = smoothing_weights(&pred, &[1.0, 1.0, 1.0], 3.0, &labels).unwrap();
        assert_eq!(g.matrix().row(0), &[0.0, 0.8, 0.3]);
        let g = smoothing_weights(&pred, &[0.1, 0.2, 0.3], 0.0, &labels).unwrap();
        assert_eq!(g.matrix().row(0), &[0.0, 0.8, 0.3]);
        let g = smoothing_weights(&pred, &[0.5, 0.25, 0.5], 0.5, &labels).unwrap();
        assert!((g.get(0, 1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn count_examples() {
        assert_eq!(correction_counts(500, &[100], &[1.0], 0.8, &[400]).unwrap(), vec![0]);
        assert_eq!(correction_counts(500, &[100], &[0.5], 0.8, &[400]).unwrap(), vec![40]);
        assert_eq!(
            correction_counts(500, &[100, 30], &[0.5, 0.1], 0.0, &[400, 470]).unwrap(),
            vec![0, 0]
        );
        assert_eq!(correction_counts(500, &[100], &[0.0], 10.0, &[7]).unwrap(), vec![7]);
        assert!(correction_counts(5, &[6], &[0.0], 1.0, &[0]).is_err());
    }

    #[test]
    fn apply_examples() {
        let labels = TriStateLabels::from_pattern(&["U", "U", "U"]).unwrap();
        let scores = Matrix::from_rows(&[[0.9], [0.2], [0.7]]).unwrap();
        let (same, flips) = apply_correction(&labels, &scores, &[0]).unwrap();
        assert_eq!(same, labels);
        assert!(flips.is_empty());

        let (out, flips) = apply_correction(&labels, &scores, &[2]).unwrap();
        assert_eq!(out, TriStateLabels::from_pattern(&["P", "U", "P"]).unwrap());
        assert_eq!(flips.iter().map(|f| f.sample).collect::<Vec<_>>(), vec![0, 2]);

        assert!(apply_correction(&labels, &scores, &[4]).is_err());
    }

    #[test]
    fn never_touches_observed_entries() {
        let labels = TriStateLabels::from_pattern(&["PUN", "UPU", "NUP"]).unwrap();
        let scores = Matrix::filled(3, 3, 5.0);
        let (out, _) = apply_correction(&labels, &scores, &[1, 2, 1]).unwrap();
        for i in 0..3 {
            for l in 0..3 {
                match labels.get(i, l) {
                    LabelState::Unknown => {}
                    s => assert_eq!(out.get(i, l), s),
                }
                assert_ne!(
                    (labels.get(i, l), out.get(i, l)),
                    (LabelState::Unknown, LabelState::Negative)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_bounded_and_monotone(p in 0.0f64..=1.0, a in 0.0f64..=1.0, e in 0.0f64..3.0, dp in 0.0f64..0.5, da in 0.0f64..0.5) {
            let labels = TriStateLabels::from_pattern(&["U"]).unwrap();
            let g = |p: f64, a: f64| smoothing_weights(&Matrix::filled(1, 1, p), &[a], e, &labels).unwrap().get(0, 0);
            let base = g(p, a);
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert!(g((p + dp).min(1.0), a) >= base);
            prop_assert!(g(p, (a + da).min(1.0)) >= base);
        }

        #[test]
        fn counts_monotone_in_ap(obs in 0usize..200, a in 0.0f64..=1.0, da in 0.0f64..0.5, ln in 0.0f64..3.0) {
            let c = |a: f64| correction_counts(200, &[obs], &[a], ln, &[usize::MAX]).unwrap()[0];
            prop_assert!(c((a + da).min(1.0)) <= c(a));
        }

        #[test]
        fn flip_set_is_sort_prefix(seed in 0u64..300) {
            let mut rng = Rng::new(seed);
            let n = 1 + rng.uniform_index(20).unwrap();
            let states: Vec<LabelState> = (0..n * 3)
                .map(|_| [LabelState::Unknown, LabelState::Unknown, LabelState::Positive][rng.uniform_index(3).unwrap()])
                .collect();
            let labels = TriStateLabels::new(n, 3, states).unwrap();
            let scores = Matrix::from_fn(n, 3, |_, _| (rng.next_f64() * 5.0).round());
            let pool = labels.column_counts(LabelState::Unknown);
            let counts: Vec<usize> = pool.iter().map(|&p| rng.uniform_index(p + 1).unwrap()).collect();
            let (out, _) = apply_correction(&labels, &scores, &counts).unwrap();
            for l in 0..3 {
                let mut unknown: Vec<(f64, usize)> = (0..n)
                    .filter(|&i| labels.get(i, l) == LabelState::Unknown)
                    .map(|i| (scores[(i, l)], i))
                    .collect();
                unknown.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                let mut expected: Vec<usize> = unknown.iter().take(counts[l]).map(|p| p.1).collect();
                expected.sort_unstable();
                let flipped: Vec<usize> = (0..n)
                    .filter(|&i| labels.get(i, l) == LabelState::Unknown && out.get(i, l) == LabelState::Positive)
                    .collect();
                prop_assert_eq!(flipped, expected);
            }
        }
    }
}
