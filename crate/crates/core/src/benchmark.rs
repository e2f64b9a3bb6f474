//! The standard synthetic single-positive benchmark: one generated pool
//! split into train / validation / test, with the training part reduced to
//! one observed positive per sample.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::labels::{generate_synthetic, to_single_positive, Dataset, SyntheticConfig};
use crate::losses::LossConfig;
use crate::numkit::Rng;
use crate::trainer::{train_seeded, EvalSets, Model, ModelKind, RunReport, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub n_labels: usize,
    pub labels_per_sample_mean: f64,
    pub noise_sd: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_train: 2000,
            n_val: 500,
            n_test: 1000,
            n_features: 32,
            n_labels: 16,
            labels_per_sample_mean: 3.0,
            noise_sd: 0.45,
        }
    }
}

/// Training settings shared by every loss on the benchmark: a linear model,
/// 40 epochs of plain SGD at rate 0.3 with batches of 32, no penalty and no
/// correction.
pub fn standard_train_config(loss: LossConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        loss,
        model: ModelKind::Linear,
        batch_size: 32,
        learning_rate: 0.3,
        epochs: 40,
        seed,
        ..TrainConfig::default()
    }
}

/// Train (fully labelled and single-positive views), validation and test.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub train_full: Dataset,
    pub train_sp: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

impl Benchmark {
    /// Samples are generated in one stream from `Rng::new(seed)`; the first
    /// `n_train` rows train, the next `n_val` validate, the rest test. The
    /// single-positive draw continues the same stream.
    pub fn build(cfg: &BenchmarkConfig, seed: u64) -> Result<Self> {
        let mut rng = Rng::new(seed);
        let total = cfg.n_train + cfg.n_val + cfg.n_test;
        let pool = generate_synthetic(
            &SyntheticConfig {
                n_samples: total,
                n_features: cfg.n_features,
                n_labels: cfg.n_labels,
                labels_per_sample_mean: cfg.labels_per_sample_mean,
                noise_sd: cfg.noise_sd,
            },
            &mut rng,
        )?;
        let range = |a: usize, b: usize| (a..b).collect::<Vec<_>>();
        let train_full = pool.select(&range(0, cfg.n_train));
        let val = pool.select(&range(cfg.n_train, cfg.n_train + cfg.n_val));
        let test = pool.select(&range(cfg.n_train + cfg.n_val, total));
        let train_sp = to_single_positive(&train_full, &mut rng)?;
        Ok(Self {
            train_full,
            train_sp,
            val,
            test,
        })
    }

    pub fn eval_sets(&self) -> EvalSets<'_> {
        EvalSets {
            val: Some(&self.val),
            test: Some(&self.test),
        }
    }

    /// Trains on the single-positive training view.
    pub fn run_single_positive(&self, cfg: &TrainConfig) -> Result<(Model, RunReport)> {
        train_seeded(&self.train_sp, self.eval_sets(), cfg)
    }

    /// Trains on the fully labelled training view.
    pub fn run_full(&self, cfg: &TrainConfig) -> Result<(Model, RunReport)> {
        train_seeded(&self.train_full, self.eval_sets(), cfg)
    }
}
