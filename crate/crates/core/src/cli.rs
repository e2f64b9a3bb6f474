//! Command-line front end: `generate`, `convert`, `train`, `eval`,
//! `gradcheck` and `sweep`.
//!
//! Every command reads an optional flat JSON [`RunConfig`] (`--config`),
//! applies flag overrides on top and writes its artifacts under `--out`.
//! Failures map to exit codes through [`Error::exit_code`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::correction::CorrectionConfig;
use crate::error::{Error, Result};
use crate::labels::{
    assume_negative, generate_synthetic, random_split, read_jsonl, to_single_positive, write_jsonl, Dataset,
    LabelState, SyntheticConfig, TriStateLabels,
};
use crate::losses::{LossConfig, OpmlParams, SmoothingWeights};
use crate::numkit::{Matrix, Rng, DEFAULT_FD_STEP};
use crate::regularizer::HighRankConfig;
use crate::trainer::{
    evaluate, grad_check, train_seeded, EvalSets, Evaluation, Model, ModelKind, ObjectiveConfig, RunReport,
    SplitRecord, TrainConfig,
};

/// Largest relative gradient error accepted by `gradcheck`.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Bce,
    Focal,
    Asl,
    Zlpr,
    Opml,
    SoftOpml,
}

/// All settings any command reads. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,

    pub n_samples: usize,
    pub n_features: usize,
    pub n_labels: usize,
    pub labels_per_sample_mean: f64,
    pub noise_sd: f64,

    /// Fraction of the training file held out for validation.
    pub val_fraction: f64,
    pub single_positive: bool,
    pub assume_negative: bool,

    pub loss: LossKind,
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
    pub focal_gamma: f64,
    pub asl_gamma_pos: f64,
    pub asl_gamma_neg: f64,
    pub asl_margin: f64,

    pub model: ModelKind,
    pub hidden_width: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub eval_each_epoch: bool,

    pub lambda: f64,
    pub hr_epsilon: f64,

    pub label_num: f64,
    pub epsilon_power: f64,
    pub warmup_epochs: usize,
    pub correction_epoch: Option<usize>,

    pub alpha_tilde_grid: Vec<f64>,
    pub beta_tilde_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SyntheticConfig::default();
        let train = crate::benchmark::standard_train_config(LossConfig::Zlpr, 0);
        let correction = CorrectionConfig::default();
        Self {
            seed: 0,
            n_samples: synth.n_samples,
            n_features: synth.n_features,
            n_labels: synth.n_labels,
            labels_per_sample_mean: synth.labels_per_sample_mean,
            noise_sd: synth.noise_sd,
            val_fraction: 0.2,
            single_positive: false,
            assume_negative: false,
            loss: LossKind::Opml,
            alpha_tilde: 0.5,
            beta_tilde: 0.5,
            focal_gamma: 2.0,
            asl_gamma_pos: 0.0,
            asl_gamma_neg: 4.0,
            asl_margin: 0.05,
            model: train.model,
            hidden_width: train.hidden_width,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            epochs: train.epochs,
            eval_each_epoch: true,
            lambda: 0.0,
            hr_epsilon: HighRankConfig::default().epsilon,
            label_num: correction.label_num,
            epsilon_power: correction.epsilon_power,
            warmup_epochs: correction.warmup_epochs,
            correction_epoch: correction.correction_epoch,
            alpha_tilde_grid: vec![0.3, 0.5, 0.7],
            beta_tilde_grid: vec![0.3, 0.5, 0.7],
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn synthetic(&self) -> SyntheticConfig {
        SyntheticConfig {
            n_samples: self.n_samples,
            n_features: self.n_features,
            n_labels: self.n_labels,
            labels_per_sample_mean: self.labels_per_sample_mean,
            noise_sd: self.noise_sd,
        }
    }

    pub fn loss_config(&self) -> Result<LossConfig> {
        let opml = || {
            OpmlParams::new(self.alpha_tilde, self.beta_tilde)
                .map_err(|e| Error::Config(format!("alpha_tilde/beta_tilde: {e}")))
        };
        Ok(match self.loss {
            LossKind::Bce => LossConfig::Bce,
            LossKind::Focal => LossConfig::Focal {
                gamma: self.focal_gamma,
            },
            LossKind::Asl => LossConfig::Asl {
                gamma_pos: self.asl_gamma_pos,
                gamma_neg: self.asl_gamma_neg,
                margin: self.asl_margin,
            },
            LossKind::Zlpr => LossConfig::Zlpr,
            LossKind::Opml => LossConfig::Opml(opml()?),
            LossKind::SoftOpml => LossConfig::SoftOpml(opml()?),
        })
    }

    /// The resolved, validated training configuration.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            loss: self.loss_config()?,
            model: self.model,
            hidden_width: self.hidden_width,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed: self.seed,
            high_rank: HighRankConfig {
                lambda: self.lambda,
                epsilon: self.hr_epsilon,
            },
            correction: CorrectionConfig {
                label_num: self.label_num,
                epsilon_power: self.epsilon_power,
                warmup_epochs: self.warmup_epochs,
                correction_epoch: self.correction_epoch,
            },
            eval_each_epoch: self.eval_each_epoch,
        };
        cfg.validate().map_err(|e| match e {
            Error::Domain(m) => Error::Config(m),
            other => other,
        })?;
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "opml", version, about = "Multi-label losses for single-positive training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset (`data.jsonl` and `meta.json`).
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Reduce a dataset to single-positive and/or assume-negative labels.
    Convert {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        single_positive: bool,
        #[arg(long)]
        assume_negative: bool,
    },
    /// Train on a dataset; writes `report.json`, `curves.csv`, `model.json`.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a saved model against the ground truth of a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare backpropagated gradients with finite differences.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Grid over alpha_tilde x beta_tilde, selecting by validation mAP.
    Sweep {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR", default_value = "opml-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub loss: Option<LossKind>,
    #[arg(long)]
    pub alpha_tilde: Option<f64>,
    #[arg(long)]
    pub beta_tilde: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub label_num: Option<f64>,
    #[arg(long)]
    pub epsilon_power: Option<f64>,
    #[arg(long)]
    pub single_positive: bool,
    #[arg(long)]
    pub assume_negative: bool,
}

impl Common {
    fn resolve(&self, overrides: &Overrides) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let o = overrides;
        if let Some(v) = o.loss {
            cfg.loss = v;
        }
        if let Some(v) = o.alpha_tilde {
            cfg.alpha_tilde = v;
        }
        if let Some(v) = o.beta_tilde {
            cfg.beta_tilde = v;
        }
        if let Some(v) = o.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = o.label_num {
            cfg.label_num = v;
        }
        if let Some(v) = o.epsilon_power {
            cfg.epsilon_power = v;
        }
        cfg.single_positive |= o.single_positive;
        cfg.assume_negative |= o.assume_negative;
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(&self.out)
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_entry() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("OPML_LOG", "warn")).try_init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate { common } => cmd_generate(common, out),
        Command::Convert {
            input,
            common,
            single_positive,
            assume_negative,
        } => cmd_convert(input, common, *single_positive, *assume_negative, out),
        Command::Train {
            train,
            test,
            common,
            overrides,
        } => cmd_train(train, test.as_deref(), common, overrides, out),
        Command::Eval { model, data, common } => cmd_eval(model, data, common, out),
        Command::Gradcheck { common, overrides } => cmd_gradcheck(common, overrides, out),
        Command::Sweep {
            train,
            test,
            common,
            overrides,
        } => cmd_sweep(train, test.as_deref(), common, overrides, out),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn say(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

#[derive(Serialize)]
struct GenerateMeta {
    seed: u64,
    generator: SyntheticConfig,
}

fn cmd_generate(common: &Common, out: &mut dyn Write) -> Result<()> {
    let cfg = common.resolve(&Overrides::default())?;
    let dataset = generate_synthetic(&cfg.synthetic(), &mut Rng::new(cfg.seed)).map_err(|e| match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    })?;
    let dir = common.out_dir()?;
    let data_path = dir.join("data.jsonl");
    write_jsonl(&dataset, &data_path)?;
    let meta = GenerateMeta {
        seed: cfg.seed,
        generator: cfg.synthetic(),
    };
    write_file(&dir.join("meta.json"), &serde_json::to_string_pretty(&meta)?)?;
    say(
        out,
        &format!(
            "wrote {} ({} samples, {} features, {} labels)",
            data_path.display(),
            dataset.n_samples(),
            dataset.n_features(),
            dataset.n_labels()
        ),
    )
}

#[derive(Serialize)]
struct ConvertMeta<'a> {
    source: &'a Path,
    seed: u64,
    single_positive: bool,
    assume_negative: bool,
}

fn cmd_convert(
    input: &Path,
    common: &Common,
    single_positive: bool,
    assume_negative_flag: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = common.resolve(&Overrides {
        single_positive,
        assume_negative: assume_negative_flag,
        ..Overrides::default()
    })?;
    if !cfg.single_positive && !cfg.assume_negative {
        return Err(Error::Config(
            "convert needs --single-positive and/or --assume-negative".into(),
        ));
    }
    let mut data = read_jsonl(input)?;
    if cfg.single_positive {
        data = to_single_positive(&data, &mut Rng::new(cfg.seed))?;
    }
    if cfg.assume_negative {
        data = assume_negative(&data);
    }
    let dir = common.out_dir()?;
    let path = dir.join("converted.jsonl");
    write_jsonl(&data, &path)?;
    let meta = ConvertMeta {
        source: input,
        seed: cfg.seed,
        single_positive: cfg.single_positive,
        assume_negative: cfg.assume_negative,
    };
    write_file(&dir.join("converted.meta.json"), &serde_json::to_string_pretty(&meta)?)?;
    say(out, &format!("wrote {}", path.display()))
}

/// Training and validation parts of a training file after the seeded split
/// and the configured label transforms.
struct Prepared {
    train: Dataset,
    val: Dataset,
    split: SplitRecord,
}

fn prepare(path: &Path, cfg: &RunConfig) -> Result<Prepared> {
    let data = read_jsonl(path)?;
    let mut rng = Rng::new(cfg.seed);
    let (kept, held) = random_split(data.n_samples(), cfg.val_fraction, &mut rng)
        .map_err(|e| Error::Config(format!("val_fraction: {e}")))?;
    if kept.is_empty() || held.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: {} samples leave an empty train or validation part",
            path.display(),
            data.n_samples()
        )));
    }
    let mut train = data.select(&kept);
    if cfg.single_positive {
        train = to_single_positive(&train, &mut rng)?;
    }
    if cfg.assume_negative {
        train = assume_negative(&train);
    }
    Ok(Prepared {
        train,
        val: data.select(&held),
        split: SplitRecord {
            seed: cfg.seed,
            train: kept,
            validation: held,
        },
    })
}

/// `report.json` as written by `train`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub run_config: RunConfig,
    pub train_file: PathBuf,
    pub test_file: Option<PathBuf>,
    #[serde(flatten)]
    pub run: RunReport,
}

fn cmd_train(
    train_path: &Path,
    test_path: Option<&Path>,
    common: &Common,
    overrides: &Overrides,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = common.resolve(overrides)?;
    let train_cfg = cfg.train_config()?;
    let prepared = prepare(train_path, &cfg)?;
    let test = test_path.map(read_jsonl).transpose()?;
    let (model, mut run) = train_seeded(
        &prepared.train,
        EvalSets {
            val: Some(&prepared.val),
            test: test.as_ref(),
        },
        &train_cfg,
    )?;
    run.split = Some(prepared.split);

    let dir = common.out_dir()?;
    write_file(&dir.join("curves.csv"), &run.curves_csv())?;
    model.save(dir.join("model.json"))?;
    let summary = format!(
        "{}: val mAP {} test mAP {}",
        train_cfg.loss.name(),
        fmt_map(run.final_val.as_ref().map(|r| r.map)),
        fmt_map(run.final_test.as_ref().map(|r| r.map)),
    );
    let report = TrainReport {
        run_config: cfg,
        train_file: train_path.to_path_buf(),
        test_file: test_path.map(Path::to_path_buf),
        run,
    };
    write_file(&dir.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
    say(out, &summary)
}

fn fmt_map(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |m| format!("{m:.4}"))
}

fn cmd_eval(model_path: &Path, data_path: &Path, common: &Common, out: &mut dyn Write) -> Result<()> {
    let model = Model::load(model_path)?;
    let data = read_jsonl(data_path)?;
    let evaluation: Evaluation = evaluate(&model, &data)?;
    let text = serde_json::to_string_pretty(&evaluation)?;
    let dir = common.out_dir()?;
    write_file(&dir.join("eval.json"), &text)?;
    say(out, &text)
}

/// One row of the `gradcheck` table.
#[derive(Clone, Debug, Serialize)]
pub struct GradCheckRow {
    pub loss: String,
    pub model: ModelKind,
    pub high_rank: bool,
    pub max_rel_error: f64,
    pub passed: bool,
}

/// Gradient checks of every loss (or only `--loss`) on a small seeded batch,
/// for both model kinds, with and without the high-rank penalty.
pub fn gradcheck_rows(cfg: &RunConfig, only: Option<LossKind>) -> Result<Vec<GradCheckRow>> {
    let mut rng = Rng::new(cfg.seed);
    let synth = SyntheticConfig {
        n_samples: 12,
        n_features: 6,
        n_labels: 5,
        labels_per_sample_mean: 2.0,
        noise_sd: 0.5,
    };
    let full = generate_synthetic(&synth, &mut rng)?;
    let sp = to_single_positive(&full, &mut rng)?;
    let full_labels = TriStateLabels::from_truth(full.truth());
    let gamma = SmoothingWeights::new(Matrix::from_fn(12, 5, |i, l| {
        if sp.observed().get(i, l) == LabelState::Unknown {
            rng.next_f64()
        } else {
            0.0
        }
    }))?;
    let lambda = if cfg.lambda > 0.0 {
        cfg.lambda
    } else {
        HighRankConfig::default().lambda
    };

    let base = RunConfig {
        loss: only.unwrap_or(cfg.loss),
        ..cfg.clone()
    };
    let mut cases: Vec<(String, LossConfig, &TriStateLabels, Option<&SmoothingWeights>)> = Vec::new();
    let kinds = [
        LossKind::Bce,
        LossKind::Focal,
        LossKind::Asl,
        LossKind::Zlpr,
        LossKind::Opml,
        LossKind::SoftOpml,
    ];
    for kind in kinds.into_iter().filter(|k| only.is_none_or(|o| o == *k)) {
        let loss = RunConfig {
            loss: kind,
            ..base.clone()
        }
        .loss_config()?;
        match kind {
            LossKind::Opml => {
                cases.push(("opml (single positive)".into(), loss, sp.observed(), None));
                cases.push(("opml (full labels)".into(), loss, &full_labels, None));
            }
            LossKind::SoftOpml => cases.push((loss.name().into(), loss, sp.observed(), Some(&gamma))),
            LossKind::Bce | LossKind::Focal | LossKind::Asl => {
                cases.push((loss.name().into(), loss, sp.observed(), None))
            }
            LossKind::Zlpr => cases.push((loss.name().into(), loss, &full_labels, None)),
        }
    }

    let mut rows = Vec::new();
    for (name, loss, labels, gamma) in cases {
        for kind in [ModelKind::Linear, ModelKind::Mlp] {
            for hr in [false, true] {
                let model = Model::init(kind, 6, 5, 8, &mut rng)?;
                let objective = ObjectiveConfig {
                    loss,
                    high_rank: HighRankConfig {
                        lambda: if hr { lambda } else { 0.0 },
                        epsilon: cfg.hr_epsilon,
                    },
                };
                let report = grad_check(&model, full.features(), labels, gamma, &objective, DEFAULT_FD_STEP)?;
                rows.push(GradCheckRow {
                    loss: name.clone(),
                    model: kind,
                    high_rank: hr,
                    max_rel_error: report.max_rel_error,
                    passed: report.max_rel_error < GRAD_CHECK_TOLERANCE,
                });
            }
        }
    }
    Ok(rows)
}

fn cmd_gradcheck(common: &Common, overrides: &Overrides, out: &mut dyn Write) -> Result<()> {
    let cfg = common.resolve(overrides)?;
    let rows = gradcheck_rows(&cfg, overrides.loss)?;
    say(
        out,
        &format!(
            "{:<24} {:<7} {:<4} {:>12}  result",
            "loss", "model", "hr", "max rel err"
        ),
    )?;
    for r in &rows {
        say(
            out,
            &format!(
                "{:<24} {:<7} {:<4} {:>12.3e}  {}",
                r.loss,
                format!("{:?}", r.model).to_lowercase(),
                if r.high_rank { "on" } else { "off" },
                r.max_rel_error,
                if r.passed { "pass" } else { "FAIL" }
            ),
        )?;
    }
    let dir = common.out_dir()?;
    write_file(&dir.join("gradcheck.json"), &serde_json::to_string_pretty(&rows)?)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Error::Numerical(format!(
            "{failed} of {} gradient checks exceed {GRAD_CHECK_TOLERANCE:e}",
            rows.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
    pub val_map: f64,
    pub test_map: Option<f64>,
}

/// `sweep.json`: every grid point and the index of the best by validation mAP.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub run_config: RunConfig,
    pub split: SplitRecord,
    pub rows: Vec<SweepRow>,
    pub best: usize,
}

fn cmd_sweep(
    train_path: &Path,
    test_path: Option<&Path>,
    common: &Common,
    overrides: &Overrides,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = common.resolve(overrides)?;
    if !matches!(cfg.loss, LossKind::Opml | LossKind::SoftOpml) {
        return Err(Error::Config(format!(
            "sweep grids alpha_tilde and beta_tilde, which loss {:?} does not use",
            cfg.loss
        )));
    }
    if cfg.alpha_tilde_grid.is_empty() || cfg.beta_tilde_grid.is_empty() {
        return Err(Error::Config(
            "alpha_tilde_grid and beta_tilde_grid must be non-empty".into(),
        ));
    }
    let grid: Vec<RunConfig> = cfg
        .alpha_tilde_grid
        .iter()
        .flat_map(|&a| cfg.beta_tilde_grid.iter().map(move |&b| (a, b)))
        .map(|(a, b)| RunConfig {
            alpha_tilde: a,
            beta_tilde: b,
            ..cfg.clone()
        })
        .collect();
    let train_cfgs = grid.iter().map(RunConfig::train_config).collect::<Result<Vec<_>>>()?;
    let prepared = prepare(train_path, &cfg)?;
    let test = test_path.map(read_jsonl).transpose()?;
    let eval = EvalSets {
        val: Some(&prepared.val),
        test: test.as_ref(),
    };

    let results: Vec<Result<RunReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = train_cfgs
            .iter()
            .map(|tc| s.spawn(|| train_seeded(&prepared.train, eval, tc).map(|(_, r)| r)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Numerical("sweep trial panicked".into())))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(grid.len());
    for (rc, res) in grid.iter().zip(results) {
        let run = res?;
        rows.push(SweepRow {
            alpha_tilde: rc.alpha_tilde,
            beta_tilde: rc.beta_tilde,
            val_map: run.final_val.as_ref().map_or(f64::NAN, |r| r.map),
            test_map: run.final_test.as_ref().map(|r| r.map),
        });
    }
    let mut best = 0;
    for (k, r) in rows.iter().enumerate() {
        if r.val_map > rows[best].val_map {
            best = k;
        }
    }

    say(
        out,
        &format!(
            "  {:>11} {:>10} {:>8} {:>8}",
            "alpha_tilde", "beta_tilde", "val mAP", "test mAP"
        ),
    )?;
    for (k, r) in rows.iter().enumerate() {
        say(
            out,
            &format!(
                "{} {:>11} {:>10} {:>8.4} {:>8}",
                if k == best { "*" } else { " " },
                r.alpha_tilde,
                r.beta_tilde,
                r.val_map,
                fmt_map(r.test_map)
            ),
        )?;
    }
    let report = SweepReport {
        run_config: cfg,
        split: prepared.split,
        rows,
        best,
    };
    let dir = common.out_dir()?;
    write_file(&dir.join("sweep.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let err = serde_json::from_str::<RunConfig>(r#"{"epochs": 3, "learnig_rate": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("learnig_rate"));
        let cfg: RunConfig = serde_json::from_str(r#"{"epochs": 3, "loss": "soft-opml"}"#).unwrap();
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.loss, LossKind::SoftOpml);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let cfg = RunConfig {
            alpha_tilde: 1.0,
            ..RunConfig::default()
        };
        assert_eq!(cfg.train_config().unwrap_err().exit_code(), 2);
        let cfg = RunConfig {
            batch_size: 0,
            ..RunConfig::default()
        };
        assert_eq!(cfg.train_config().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn cli_parses_overrides() {
        let cli = Cli::try_parse_from([
            "opml",
            "train",
            "--train",
            "a.jsonl",
            "--loss",
            "soft-opml",
            "--alpha-tilde",
            "0.7",
            "--single-positive",
        ])
        .unwrap();
        match cli.command {
            Command::Train { common, overrides, .. } => {
                let cfg = common.resolve(&overrides).unwrap();
                assert_eq!(cfg.loss, LossKind::SoftOpml);
                assert_eq!(cfg.alpha_tilde, 0.7);
                assert!(cfg.single_positive);
            }
            other => panic!("parsed {other:?}"),
        }
    }
}
