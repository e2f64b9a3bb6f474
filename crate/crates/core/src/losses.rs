//! Multi-label losses on raw scores, each returning its value together with
//! the exact gradient with respect to the score matrix.
//!
//! Reductions: the elementwise losses (BCE, focal, asymmetric) average over
//! all `N·L` entries; the OPML family sums its log terms per row and averages
//! over the `N` rows. Absolute values are therefore not comparable between
//! the two groups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelState, TriStateLabels};
use crate::numkit::{sigmoid, softplus, stable_log_sum_grad, weighted_log_sum_grad, Matrix};

/// OPML offsets, parameterized on `(0, 1)`: `α = α̃ / (1 − α̃)`, same for β.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpmlParams {
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
}

impl OpmlParams {
    pub fn new(alpha_tilde: f64, beta_tilde: f64) -> Result<Self> {
        let p = Self {
            alpha_tilde,
            beta_tilde,
        };
        p.validate()?;
        Ok(p)
    }

    /// `α̃ = β̃ = 0.5`, i.e. `α = β = 1`.
    pub fn zlpr() -> Self {
        Self {
            alpha_tilde: 0.5,
            beta_tilde: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha_tilde", self.alpha_tilde), ("beta_tilde", self.beta_tilde)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_tilde / (1.0 - self.alpha_tilde)
    }

    pub fn beta(&self) -> f64 {
        self.beta_tilde / (1.0 - self.beta_tilde)
    }
}

impl Default for OpmlParams {
    fn default() -> Self {
        Self::zlpr()
    }
}

/// Loss value and `∂loss/∂scores`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossResult {
    pub value: f64,
    pub grad: Matrix,
}

/// Per-entry smoothing weights `γ ∈ [0, 1]`; only entries whose label state
/// is `Unknown` are read.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingWeights {
    gamma: Matrix,
}

impl SmoothingWeights {
    pub fn new(gamma: Matrix) -> Result<Self> {
        if let Some(k) = gamma.as_slice().iter().position(|g| !(0.0..=1.0).contains(g)) {
            let cols = gamma.cols().max(1);
            return Err(Error::Contract(format!(
                "smoothing weight at ({}, {}) = {} is outside [0, 1]",
                k / cols,
                k % cols,
                gamma.as_slice()[k]
            )));
        }
        Ok(Self { gamma })
    }

    pub fn zeros(n_samples: usize, n_labels: usize) -> Self {
        Self {
            gamma: Matrix::zeros(n_samples, n_labels),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.gamma
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.gamma[(i, l)]
    }

    pub fn select_rows(&self, idx: &[usize]) -> SmoothingWeights {
        Self {
            gamma: self.gamma.select_rows(idx),
        }
    }
}

fn check_shapes(scores: &Matrix, labels: &TriStateLabels) -> Result<()> {
    if scores.shape() != (labels.n_samples(), labels.n_labels()) {
        return Err(Error::Contract(format!(
            "scores are {:?} but labels are {}x{}",
            scores.shape(),
            labels.n_samples(),
            labels.n_labels()
        )));
    }
    if !scores.is_finite() {
        return Err(Error::Contract("scores contain non-finite values".into()));
    }
    Ok(())
}

/// Mean over all entries of `entry(score, is_positive) -> (loss, ∂loss/∂score)`.
fn elementwise<F>(scores: &Matrix, labels: &TriStateLabels, name: &str, entry: F) -> Result<LossResult>
where
    F: Fn(f64, bool) -> (f64, f64),
{
    check_shapes(scores, labels)?;
    if labels.has_unknown() {
        return Err(Error::Contract(format!(
            "{name} needs fully observed labels; apply assume_negative first"
        )));
    }
    let count = scores.rows() * scores.cols();
    let inv = if count == 0 { 0.0 } else { 1.0 / count as f64 };
    let mut total = 0.0;
    let mut grad = Matrix::zeros(scores.rows(), scores.cols());
    for (k, (&s, &state)) in scores.as_slice().iter().zip(labels.states()).enumerate() {
        let (v, g) = entry(s, state == LabelState::Positive);
        total += v;
        grad.as_mut_slice()[k] = g * inv;
    }
    Ok(LossResult {
        value: total * inv,
        grad,
    })
}

/// Binary cross-entropy with a sigmoid link.
pub fn bce(scores: &Matrix, labels: &TriStateLabels) -> Result<LossResult> {
    elementwise(scores, labels, "bce", |s, positive| {
        if positive {
            (softplus(-s), -sigmoid(-s))
        } else {
            (softplus(s), sigmoid(s))
        }
    })
}

/// `(1 − p_t)^γ · (−log p_t)` and its derivative in the signed score `z`
/// (`z = s` for positives, `−s` for negatives).
fn focal_term(z: f64, gamma: f64) -> (f64, f64) {
    let q = sigmoid(-z);
    let nll = softplus(-z);
    let w = q.powf(gamma);
    (w * nll, -w * (gamma * sigmoid(z) * nll + q))
}

/// Focal loss; `gamma_focus = 0` is plain BCE.
pub fn focal(scores: &Matrix, labels: &TriStateLabels, gamma_focus: f64) -> Result<LossResult> {
    if !(gamma_focus >= 0.0) || !gamma_focus.is_finite() {
        return Err(Error::Domain(format!("focal gamma {gamma_focus} must be >= 0")));
    }
    elementwise(scores, labels, "focal", |s, positive| {
        if positive {
            focal_term(s, gamma_focus)
        } else {
            let (v, dz) = focal_term(-s, gamma_focus);
            (v, -dz)
        }
    })
}

/// Asymmetric loss: focal with separate exponents and a probability margin
/// that zeroes easy negatives (`p ≤ margin`).
pub fn asymmetric(
    scores: &Matrix,
    labels: &TriStateLabels,
    gamma_pos: f64,
    gamma_neg: f64,
    margin: f64,
) -> Result<LossResult> {
    for (name, g) in [("gamma_pos", gamma_pos), ("gamma_neg", gamma_neg)] {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!("{name} = {g} must be >= 0")));
        }
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Domain(format!("margin {margin} must lie in [0, 1)")));
    }
    elementwise(scores, labels, "asymmetric", |s, positive| {
        if positive {
            return focal_term(s, gamma_pos);
        }
        if margin == 0.0 {
            let (v, dz) = focal_term(-s, gamma_neg);
            return (v, -dz);
        }
        let p = sigmoid(s);
        let shifted = p - margin;
        if shifted <= 0.0 {
            return (0.0, 0.0);
        }
        let nll = -(-shifted).ln_1p();
        let w = shifted.powf(gamma_neg);
        let dw = if gamma_neg == 0.0 {
            0.0
        } else {
            gamma_neg * shifted.powf(gamma_neg - 1.0)
        };
        let d_shifted = dw * nll + w / (1.0 - shifted);
        (w * nll, d_shifted * p * (1.0 - p))
    })
}

/// Shared OPML evaluation: per row,
/// `log(α + Σ_P e^{−s_p}) + log(β + Σ_N e^{s_n})`, averaged over rows.
/// `Unknown` entries take no part and get zero gradient.
fn opml_rows(scores: &Matrix, labels: &TriStateLabels, params: &OpmlParams) -> Result<LossResult> {
    params.validate()?;
    let (alpha, beta) = (params.alpha(), params.beta());
    let n = scores.rows();
    let inv_n = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    let mut total = 0.0;
    let mut grad = Matrix::zeros(n, scores.cols());
    let mut pos_idx = Vec::new();
    let mut pos_terms = Vec::new();
    let mut neg_idx = Vec::new();
    let mut neg_terms = Vec::new();
    for i in 0..n {
        pos_idx.clear();
        pos_terms.clear();
        neg_idx.clear();
        neg_terms.clear();
        for (l, (&s, &state)) in scores.row(i).iter().zip(labels.row(i)).enumerate() {
            match state {
                LabelState::Positive => {
                    pos_idx.push(l);
                    pos_terms.push(-s);
                }
                LabelState::Negative => {
                    neg_idx.push(l);
                    neg_terms.push(s);
                }
                LabelState::Unknown => {}
            }
        }
        let (vp, gp) = stable_log_sum_grad(alpha, &pos_terms)?;
        let (vn, gn) = stable_log_sum_grad(beta, &neg_terms)?;
        total += vp + vn;
        let row = grad.row_mut(i);
        for (&l, &g) in pos_idx.iter().zip(&gp) {
            row[l] = -g * inv_n;
        }
        for (&l, &g) in neg_idx.iter().zip(&gn) {
            row[l] = g * inv_n;
        }
    }
    Ok(LossResult {
        value: total * inv_n,
        grad,
    })
}

/// OPML for single-positive rows: `log(α + e^{−s_p}) + log(β + Σ_n e^{s_n})`.
///
/// Every row must carry exactly one `Positive`; `Negative` entries form the
/// negative set (run [`TriStateLabels::assume_negative`] first under the AN
/// convention). `Unknown` entries are ignored.
pub fn opml_sp(scores: &Matrix, labels: &TriStateLabels, params: &OpmlParams) -> Result<LossResult> {
    check_shapes(scores, labels)?;
    for i in 0..labels.n_samples() {
        let pos = labels.count_in_row(i, LabelState::Positive);
        if pos != 1 {
            return Err(Error::Contract(format!(
                "opml_sp: row {i} has {pos} observed positives, expected exactly 1"
            )));
        }
    }
    opml_rows(scores, labels, params)
}

/// Full-label OPML. A row with no positives (or no negatives) keeps the
/// constant `log α` (or `log β`) with zero gradient.
pub fn opml_full(scores: &Matrix, labels: &TriStateLabels, params: &OpmlParams) -> Result<LossResult> {
    check_shapes(scores, labels)?;
    if labels.has_unknown() {
        return Err(Error::Contract(
            "opml_full needs fully observed labels; apply assume_negative first".into(),
        ));
    }
    opml_rows(scores, labels, params)
}

/// ZLPR, the `α = β = 1` member of the OPML family.
pub fn zlpr(scores: &Matrix, labels: &TriStateLabels) -> Result<LossResult> {
    opml_full(scores, labels, &OpmlParams::zlpr())
}

/// Soft OPML. Per row:
///
/// `log(α + Σ_P e^{−s_p}) + log(α + Σ_U γ_l e^{−s_l}) + log(β + Σ_N e^{s_n} + Σ_U (1−γ_l) e^{s_l})`
///
/// With one positive and every other label unknown this is the smoothed
/// single-positive objective. Rows that already gained extra positives from
/// label correction keep them all in the first term; explicit `Negative`
/// entries enter the last term with weight 1.
pub fn soft_opml(
    scores: &Matrix,
    labels: &TriStateLabels,
    gamma: &SmoothingWeights,
    params: &OpmlParams,
) -> Result<LossResult> {
    check_shapes(scores, labels)?;
    params.validate()?;
    if gamma.matrix().shape() != scores.shape() {
        return Err(Error::Contract(format!(
            "smoothing weights are {:?}, scores are {:?}",
            gamma.matrix().shape(),
            scores.shape()
        )));
    }
    let (alpha, beta) = (params.alpha(), params.beta());
    let n = scores.rows();
    let inv_n = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    let mut total = 0.0;
    let mut grad = Matrix::zeros(n, scores.cols());

    let mut pos_idx = Vec::new();
    let mut pos_terms = Vec::new();
    let mut unk_idx = Vec::new();
    let mut unk_terms = Vec::new();
    let mut unk_weights = Vec::new();
    let mut neg_idx = Vec::new();
    let mut neg_terms = Vec::new();
    let mut neg_weights = Vec::new();
    for i in 0..n {
        pos_idx.clear();
        pos_terms.clear();
        unk_idx.clear();
        unk_terms.clear();
        unk_weights.clear();
        neg_idx.clear();
        neg_terms.clear();
        neg_weights.clear();
        for (l, (&s, &state)) in scores.row(i).iter().zip(labels.row(i)).enumerate() {
            match state {
                LabelState::Positive => {
                    pos_idx.push(l);
                    pos_terms.push(-s);
                }
                LabelState::Negative => {
                    neg_idx.push(l);
                    neg_terms.push(s);
                    neg_weights.push(1.0);
                }
                LabelState::Unknown => {
                    let g = gamma.get(i, l);
                    if !(0.0..=1.0).contains(&g) {
                        return Err(Error::Contract(format!(
                            "smoothing weight at ({i}, {l}) = {g} is outside [0, 1]"
                        )));
                    }
                    unk_idx.push(l);
                    unk_terms.push(-s);
                    unk_weights.push(g);
                    neg_idx.push(l);
                    neg_terms.push(s);
                    neg_weights.push(1.0 - g);
                }
            }
        }
        if pos_idx.is_empty() {
            return Err(Error::Contract(format!("soft_opml: row {i} has no observed positive")));
        }
        let (vp, gp) = stable_log_sum_grad(alpha, &pos_terms)?;
        let (vu, gu) = weighted_log_sum_grad(alpha, &unk_terms, &unk_weights)?;
        let (vn, gn) = weighted_log_sum_grad(beta, &neg_terms, &neg_weights)?;
        total += vp + vu + vn;

        let row = grad.row_mut(i);
        for (&l, &g) in pos_idx.iter().zip(&gp) {
            row[l] = -g * inv_n;
        }
        for (&l, &g) in unk_idx.iter().zip(&gu) {
            row[l] = -g;
        }
        for (&l, &g) in neg_idx.iter().zip(&gn) {
            row[l] = (row[l] + g) * inv_n;
        }
    }
    Ok(LossResult {
        value: total * inv_n,
        grad,
    })
}

/// Loss selection with hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossConfig {
    Bce,
    Focal {
        gamma: f64,
    },
    Asl {
        gamma_pos: f64,
        gamma_neg: f64,
        margin: f64,
    },
    Zlpr,
    Opml(OpmlParams),
    SoftOpml(OpmlParams),
}

impl LossConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LossConfig::Bce => "bce",
            LossConfig::Focal { .. } => "focal",
            LossConfig::Asl { .. } => "asl",
            LossConfig::Zlpr => "zlpr",
            LossConfig::Opml(_) => "opml",
            LossConfig::SoftOpml(_) => "soft-opml",
        }
    }

    pub fn uses_smoothing(&self) -> bool {
        matches!(self, LossConfig::SoftOpml(_))
    }

    /// Evaluates the loss on the observed labels of a batch.
    ///
    /// `observed` may contain `Unknown` entries. Every loss except soft OPML
    /// sees them as negatives; soft OPML keeps them and reads `gamma`
    /// (all-zero when `None`).
    pub fn evaluate(
        &self,
        scores: &Matrix,
        observed: &TriStateLabels,
        gamma: Option<&SmoothingWeights>,
    ) -> Result<LossResult> {
        match self {
            LossConfig::SoftOpml(p) => match gamma {
                Some(g) => soft_opml(scores, observed, g, p),
                None => soft_opml(
                    scores,
                    observed,
                    &SmoothingWeights::zeros(scores.rows(), scores.cols()),
                    p,
                ),
            },
            other => {
                let an = observed.assume_negative();
                match *other {
                    LossConfig::Bce => bce(scores, &an),
                    LossConfig::Focal { gamma } => focal(scores, &an, gamma),
                    LossConfig::Asl {
                        gamma_pos,
                        gamma_neg,
                        margin,
                    } => asymmetric(scores, &an, gamma_pos, gamma_neg, margin),
                    LossConfig::Zlpr => zlpr(scores, &an),
                    LossConfig::Opml(p) => {
                        let single = (0..an.n_samples()).all(|i| an.count_in_row(i, LabelState::Positive) == 1);
                        if single {
                            opml_sp(scores, &an, &p)
                        } else {
                            opml_full(scores, &an, &p)
                        }
                    }
                    LossConfig::SoftOpml(_) => unreachable!(),
                }
            }
        }
    }
}
