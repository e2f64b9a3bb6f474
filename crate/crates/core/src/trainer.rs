//! Deterministic minibatch SGD for linear and one-hidden-layer models.
//!
//! A training step computes raw scores, the selected loss on the batch's
//! observed labels, optionally the high-rank penalty on `σ(scores)` (chained
//! back through `σ'(s)`), backpropagates to the parameters and takes a plain
//! SGD step. Smoothing weights and the one-shot label correction are driven
//! by per-class AP on the observed training labels.
//!
//! Only observed labels ever reach a loss. Ground truth is read by
//! [`evaluate`] alone.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::correction::{apply_correction, correction_counts, smoothing_weights, CorrectionConfig};
use crate::error::{Error, Result};
use crate::labels::{Dataset, LabelState, TriStateLabels};
use crate::losses::{LossConfig, SmoothingWeights};
use crate::metrics::{mean_average_precision, observed_average_precision, positive_confidence_histogram, ApReport};
use crate::numkit::{finite_diff_grad, sigmoid, Matrix, Rng};
use crate::regularizer::{high_rank_penalty, HighRankConfig};

/// Histogram bin width used by [`evaluate`].
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.2;

/// Entries whose gradients are both below this magnitude are compared
/// absolutely (relative error is measured against at least this value).
pub const GRAD_REL_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Linear,
    Mlp,
}

/// Parameters stored as blocks: `[weights, bias]` for a linear model and
/// `[w1, b1, w2, b2]` for the MLP. Biases are `1 × width` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    kind: ModelKind,
    blocks: Vec<Matrix>,
}

/// Intermediate values kept for backpropagation.
pub struct Forward {
    hidden_pre: Option<Matrix>,
    hidden: Option<Matrix>,
    pub scores: Matrix,
}

impl Model {
    /// Weights `~ U[−1/√fan_in, 1/√fan_in]` drawn row-major block by block,
    /// biases zero.
    pub fn init(
        kind: ModelKind,
        n_features: usize,
        n_labels: usize,
        hidden_width: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut uniform = |rows: usize, cols: usize| {
            let bound = 1.0 / (rows as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| rng.uniform(-bound, bound))
        };
        let blocks = match kind {
            ModelKind::Linear => vec![uniform(n_features, n_labels), Matrix::zeros(1, n_labels)],
            ModelKind::Mlp => {
                if hidden_width == 0 {
                    return Err(Error::Config("mlp needs hidden_width >= 1".into()));
                }
                let w1 = uniform(n_features, hidden_width);
                let w2 = uniform(hidden_width, n_labels);
                vec![w1, Matrix::zeros(1, hidden_width), w2, Matrix::zeros(1, n_labels)]
            }
        };
        Ok(Self { kind, blocks })
    }

    /// Builds a model from explicit blocks, checking their shapes.
    pub fn from_blocks(kind: ModelKind, blocks: Vec<Matrix>) -> Result<Self> {
        let ok = match (kind, blocks.as_slice()) {
            (ModelKind::Linear, [w, b]) => b.rows() == 1 && b.cols() == w.cols(),
            (ModelKind::Mlp, [w1, b1, w2, b2]) => {
                b1.rows() == 1
                    && b1.cols() == w1.cols()
                    && w2.rows() == w1.cols()
                    && b2.rows() == 1
                    && b2.cols() == w2.cols()
            }
            _ => false,
        };
        if !ok {
            return Err(Error::Dataset(format!(
                "inconsistent parameter blocks for {kind:?} model"
            )));
        }
        if blocks.iter().any(|b| !b.is_finite()) {
            return Err(Error::Dataset("model parameters must be finite".into()));
        }
        Ok(Self { kind, blocks })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn block_names(&self) -> &'static [&'static str] {
        match self.kind {
            ModelKind::Linear => &["weights", "bias"],
            ModelKind::Mlp => &["w1", "b1", "w2", "b2"],
        }
    }

    pub fn n_features(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn n_labels(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.cols())
    }

    pub fn forward(&self, x: &Matrix) -> Forward {
        match self.kind {
            ModelKind::Linear => {
                let mut s = x.matmul(&self.blocks[0]);
                s.add_row_vector(self.blocks[1].as_slice());
                Forward {
                    hidden_pre: None,
                    hidden: None,
                    scores: s,
                }
            }
            ModelKind::Mlp => {
                let mut z = x.matmul(&self.blocks[0]);
                z.add_row_vector(self.blocks[1].as_slice());
                let h = z.map(|v| v.max(0.0));
                let mut s = h.matmul(&self.blocks[2]);
                s.add_row_vector(self.blocks[3].as_slice());
                Forward {
                    hidden_pre: Some(z),
                    hidden: Some(h),
                    scores: s,
                }
            }
        }
    }

    pub fn scores(&self, x: &Matrix) -> Matrix {
        self.forward(x).scores
    }

    /// Parameter gradients given `∂objective/∂scores`.
    pub fn backward(&self, x: &Matrix, fwd: &Forward, d_scores: &Matrix) -> Vec<Matrix> {
        let col_sums =
            |m: &Matrix| Matrix::new(1, m.cols(), m.column_sums()).unwrap_or_else(|_| Matrix::zeros(1, m.cols()));
        match self.kind {
            ModelKind::Linear => vec![x.t_matmul(d_scores), col_sums(d_scores)],
            ModelKind::Mlp => {
                let (z, h) = match (&fwd.hidden_pre, &fwd.hidden) {
                    (Some(z), Some(h)) => (z, h),
                    _ => unreachable!("mlp forward always caches the hidden layer"),
                };
                let d_w2 = h.t_matmul(d_scores);
                let d_b2 = col_sums(d_scores);
                let mut d_z = d_scores.matmul(&self.blocks[2].transpose());
                for (g, &pre) in d_z.as_mut_slice().iter_mut().zip(z.as_slice()) {
                    if pre <= 0.0 {
                        *g = 0.0;
                    }
                }
                vec![x.t_matmul(&d_z), col_sums(&d_z), d_w2, d_b2]
            }
        }
    }

    pub fn sgd_step(&mut self, grads: &[Matrix], learning_rate: f64) {
        for (p, g) in self.blocks.iter_mut().zip(grads) {
            p.add_scaled(g, -learning_rate);
        }
    }

    /// JSON with a shape header per block and row-major values written
    /// with 17 significant digits, so a reload reproduces every bit.
    pub fn to_json(&self) -> Result<String> {
        let blocks = self
            .blocks
            .iter()
            .zip(self.block_names())
            .map(|(m, name)| {
                let data = m
                    .as_slice()
                    .iter()
                    .map(|v| RawValue::from_string(format!("{v:.16e}")))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(BlockFile {
                    name: name.to_string(),
                    rows: m.rows(),
                    cols: m.cols(),
                    data,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(serde_json::to_string_pretty(&ModelFile {
            kind: self.kind,
            blocks,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let file: ModelFileIn = serde_json::from_str(text)?;
        let mut blocks = Vec::with_capacity(file.blocks.len());
        for b in file.blocks {
            if b.data.len() != b.rows * b.cols {
                return Err(Error::Dataset(format!(
                    "block {} declares {}x{} but holds {} values",
                    b.name,
                    b.rows,
                    b.cols,
                    b.data.len()
                )));
            }
            blocks.push(Matrix::new(b.rows, b.cols, b.data).map_err(|e| Error::Dataset(e.to_string()))?);
        }
        Model::from_blocks(file.kind, blocks)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }

    fn with_block(&self, k: usize, block: Matrix) -> Model {
        let mut m = self.clone();
        m.blocks[k] = block;
        m
    }
}

#[derive(Serialize)]
struct ModelFile {
    kind: ModelKind,
    blocks: Vec<BlockFile>,
}

#[derive(Serialize)]
struct BlockFile {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<Box<RawValue>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFileIn {
    kind: ModelKind,
    blocks: Vec<BlockFileIn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockFileIn {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Loss plus optional high-rank penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub loss: LossConfig,
    pub high_rank: HighRankConfig,
}

/// Objective value and `∂/∂scores` on one batch.
pub fn batch_objective(
    scores: &Matrix,
    observed: &TriStateLabels,
    gamma: Option<&SmoothingWeights>,
    objective: &ObjectiveConfig,
) -> Result<(f64, Matrix)> {
    let loss = objective.loss.evaluate(scores, observed, gamma)?;
    let mut value = loss.value;
    let mut d_scores = loss.grad;
    if objective.high_rank.lambda > 0.0 {
        let y = scores.map(sigmoid);
        let pen = high_rank_penalty(&y, &objective.high_rank)?;
        value += pen.value;
        for ((d, &g), &p) in d_scores
            .as_mut_slice()
            .iter_mut()
            .zip(pen.grad.as_slice())
            .zip(y.as_slice())
        {
            *d += g * p * (1.0 - p);
        }
    }
    Ok((value, d_scores))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossConfig,
    pub model: ModelKind,
    pub hidden_width: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub high_rank: HighRankConfig,
    pub correction: CorrectionConfig,
    pub eval_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossConfig::Opml(Default::default()),
            model: ModelKind::Linear,
            hidden_width: 64,
            batch_size: 32,
            learning_rate: 0.1,
            epochs: 20,
            seed: 0,
            high_rank: HighRankConfig {
                lambda: 0.0,
                ..HighRankConfig::default()
            },
            correction: CorrectionConfig::default(),
            eval_each_epoch: true,
        }
    }
}

impl TrainConfig {
    pub fn objective(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            loss: self.loss,
            high_rank: self.high_rank,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate {} must be >= 0",
                self.learning_rate
            )));
        }
        if self.model == ModelKind::Mlp && self.hidden_width == 0 {
            return Err(Error::Config("hidden_width must be >= 1 for the mlp".into()));
        }
        match self.loss {
            LossConfig::Opml(p) | LossConfig::SoftOpml(p) => p.validate()?,
            LossConfig::Focal { gamma } if !(gamma >= 0.0) => {
                return Err(Error::Config(format!("focal gamma {gamma} must be >= 0")))
            }
            LossConfig::Asl { margin, .. } if !(0.0..1.0).contains(&margin) => {
                return Err(Error::Config(format!("asl margin {margin} must lie in [0, 1)")))
            }
            _ => {}
        }
        self.high_rank.validate()?;
        self.correction.validate(self.epochs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_map: Option<f64>,
    pub test_map: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub epoch: usize,
    pub sample: usize,
    pub class: usize,
    pub score: f64,
}

/// Indices of a train/validation split, relative to the input file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub seed: u64,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: TrainConfig,
    pub epochs: Vec<EpochRecord>,
    pub final_val: Option<ApReport>,
    pub final_test: Option<ApReport>,
    pub test_histogram: Option<Vec<u64>>,
    pub flips: Vec<FlipRecord>,
    /// Population standard deviation of the per-epoch validation mAP.
    pub val_map_std: Option<f64>,
    pub split: Option<SplitRecord>,
}

impl RunReport {
    /// Standard deviation of validation mAP over epochs `from..=to` (1-based
    /// epoch numbers as stored in the report).
    pub fn val_map_std_between(&self, from: usize, to: usize) -> Option<f64> {
        let maps: Vec<f64> = self
            .epochs
            .iter()
            .filter(|e| e.epoch >= from && e.epoch <= to)
            .filter_map(|e| e.val_map)
            .collect();
        population_std(&maps)
    }

    /// `epoch,train_loss,val_map,test_map` rows.
    pub fn curves_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("epoch,train_loss,val_map,test_map\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.epoch,
                e.train_loss,
                opt(e.val_map),
                opt(e.test_map)
            ));
        }
        out
    }
}

fn population_std(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Held-out sets evaluated during training.
#[derive(Clone, Copy, Default)]
pub struct EvalSets<'a> {
    pub val: Option<&'a Dataset>,
    pub test: Option<&'a Dataset>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub ap: ApReport,
    pub histogram: Vec<u64>,
}

/// mAP and positive-confidence histogram of `σ(scores)` against ground truth.
pub fn evaluate(model: &Model, dataset: &Dataset) -> Result<Evaluation> {
    check_dims(model, dataset)?;
    let scores = model.scores(dataset.features());
    let ap = mean_average_precision(&scores, dataset.truth())?;
    let pred = scores.map(sigmoid);
    let histogram = positive_confidence_histogram(&pred, dataset.truth(), HISTOGRAM_BIN_WIDTH)?;
    Ok(Evaluation { ap, histogram })
}

fn check_dims(model: &Model, dataset: &Dataset) -> Result<()> {
    if model.n_features() != dataset.n_features() || model.n_labels() != dataset.n_labels() {
        return Err(Error::Dataset(format!(
            "model is {}→{} but dataset has {} features and {} labels",
            model.n_features(),
            model.n_labels(),
            dataset.n_features(),
            dataset.n_labels()
        )));
    }
    Ok(())
}

/// Trains `model` on the observed labels of `train_set`.
pub fn train(
    train_set: &Dataset,
    eval: EvalSets<'_>,
    mut model: Model,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(Model, RunReport)> {
    cfg.validate()?;
    check_dims(&model, train_set)?;
    for set in [eval.val, eval.test].into_iter().flatten() {
        check_dims(&model, set)?;
    }

    let n = train_set.n_samples();
    let x = train_set.features();
    let objective = cfg.objective();
    let correction_at = cfg.correction.resolved_correction_epoch(cfg.epochs);
    let correct = cfg.correction.label_num > 0.0;

    let mut working = train_set.observed().clone();
    let mut gamma: Option<SmoothingWeights> = None;
    let mut flips = Vec::new();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        let smooth_now = cfg.loss.uses_smoothing() && epoch >= cfg.correction.warmup_epochs;
        let correct_now = correct && epoch == correction_at;
        if smooth_now || correct_now {
            let scores = model.scores(x);
            let ap = observed_average_precision(&scores, &working.assume_negative())?.ap_or(0.0);
            if correct_now {
                let counts = correction_counts(
                    n,
                    &working.column_counts(LabelState::Positive),
                    &ap,
                    cfg.correction.label_num,
                    &working.column_counts(LabelState::Unknown),
                )?;
                let (corrected, applied) = apply_correction(&working, &scores, &counts)?;
                log::info!("epoch {}: corrected {} labels", epoch + 1, applied.len());
                flips.extend(applied.into_iter().map(|f| FlipRecord {
                    epoch: epoch + 1,
                    sample: f.sample,
                    class: f.class,
                    score: f.score,
                }));
                working = corrected;
            }
            if smooth_now {
                let pred = scores.map(sigmoid);
                gamma = Some(smoothing_weights(&pred, &ap, cfg.correction.epsilon_power, &working)?);
            }
        }

        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let xb = x.select_rows(batch);
            let yb = working.select_rows(batch);
            let gb = gamma.as_ref().map(|g| g.select_rows(batch));
            let fwd = model.forward(&xb);
            let (value, d_scores) = batch_objective(&fwd.scores, &yb, gb.as_ref(), &objective)?;
            if !value.is_finite() || !d_scores.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite objective at epoch {}, batch {}",
                    epoch + 1,
                    b
                )));
            }
            let grads = model.backward(&xb, &fwd, &d_scores);
            model.sgd_step(&grads, cfg.learning_rate);
            loss_sum += value;
            batches += 1;
        }

        let last = epoch + 1 == cfg.epochs;
        let measure = |set: Option<&Dataset>| -> Result<Option<f64>> {
            match set {
                Some(d) if cfg.eval_each_epoch || last => Ok(Some(
                    mean_average_precision(&model.scores(d.features()), d.truth())?.map,
                )),
                _ => Ok(None),
            }
        };
        let record = EpochRecord {
            epoch: epoch + 1,
            train_loss: if batches == 0 { 0.0 } else { loss_sum / batches as f64 },
            val_map: measure(eval.val)?,
            test_map: measure(eval.test)?,
        };
        log::debug!(
            "epoch {} loss {:.6} val {:?} test {:?}",
            record.epoch,
            record.train_loss,
            record.val_map,
            record.test_map
        );
        epochs.push(record);
    }

    let final_val = eval.val.map(|d| evaluate(&model, d)).transpose()?;
    let final_test = eval.test.map(|d| evaluate(&model, d)).transpose()?;
    let val_maps: Vec<f64> = epochs.iter().filter_map(|e| e.val_map).collect();
    let report = RunReport {
        config: cfg.clone(),
        epochs,
        final_val: final_val.map(|e| e.ap),
        test_histogram: final_test.as_ref().map(|e| e.histogram.clone()),
        final_test: final_test.map(|e| e.ap),
        flips,
        val_map_std: population_std(&val_maps),
        split: None,
    };
    Ok((model, report))
}

/// Initializes a model from `Rng::new(cfg.seed)` and trains with that stream.
pub fn train_seeded(train_set: &Dataset, eval: EvalSets<'_>, cfg: &TrainConfig) -> Result<(Model, RunReport)> {
    let mut rng = Rng::new(cfg.seed);
    let model = Model::init(
        cfg.model,
        train_set.n_features(),
        train_set.n_labels(),
        cfg.hidden_width,
        &mut rng,
    )?;
    train(train_set, eval, model, cfg, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockCheck>,
    pub max_rel_error: f64,
}

/// `|a − b| / max(|a|, |b|, GRAD_REL_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(GRAD_REL_FLOOR)
}

/// Compares backpropagated parameter gradients of the full objective with
/// central differences.
pub fn grad_check(
    model: &Model,
    x: &Matrix,
    observed: &TriStateLabels,
    gamma: Option<&SmoothingWeights>,
    objective: &ObjectiveConfig,
    h: f64,
) -> Result<GradCheckReport> {
    let fwd = model.forward(x);
    let (_, d_scores) = batch_objective(&fwd.scores, observed, gamma, objective)?;
    let analytic = model.backward(x, &fwd, &d_scores);

    let mut blocks = Vec::new();
    for (k, name) in model.block_names().iter().enumerate() {
        let mut failure = None;
        let fd = finite_diff_grad(
            |p| {
                let probe = model.with_block(k, p.clone());
                match batch_objective(&probe.scores(x), observed, gamma, objective) {
                    Ok((v, _)) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &model.blocks[k],
            h,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let fd = fd?;
        let (mut rel, mut abs) = (0.0f64, 0.0f64);
        for (&a, &f) in analytic[k].as_slice().iter().zip(fd.as_slice()) {
            rel = rel.max(relative_error(a, f));
            abs = abs.max((a - f).abs());
        }
        blocks.push(BlockCheck {
            name: name.to_string(),
            max_rel_error: rel,
            max_abs_error: abs,
        });
    }
    let max_rel_error = blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max);
    Ok(GradCheckReport { blocks, max_rel_error })
}
