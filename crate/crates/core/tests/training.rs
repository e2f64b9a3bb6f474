use opml::benchmark::{Benchmark, BenchmarkConfig};
use opml::labels::{generate_synthetic, BinaryMatrix, Dataset, LabelState, SyntheticConfig, TriStateLabels};
use opml::losses::{LossConfig, OpmlParams};
use opml::numkit::Rng;
use opml::trainer::{train_seeded, EvalSets, ModelKind, TrainConfig};

#[test]
fn separable_data_is_ranked_perfectly() {
    let cfg = SyntheticConfig {
        n_samples: 600,
        noise_sd: 0.0,
        ..SyntheticConfig::default()
    };
    let pool = generate_synthetic(&cfg, &mut Rng::new(3)).unwrap();
    let full = pool.with_observed(TriStateLabels::from_truth(pool.truth())).unwrap();
    let train = full.select(&(0..400).collect::<Vec<_>>());
    let test = full.select(&(400..600).collect::<Vec<_>>());
    let run = TrainConfig {
        loss: LossConfig::Opml(OpmlParams::default()),
        model: ModelKind::Linear,
        epochs: 30,
        learning_rate: 1.0,
        seed: 1,
        ..TrainConfig::default()
    };
    let (_, report) = train_seeded(
        &train,
        EvalSets {
            val: None,
            test: Some(&test),
        },
        &run,
    )
    .unwrap();
    let map = report.final_test.unwrap().map;
    assert!((map - 1.0).abs() < 1e-6, "test mAP {map}");
}

/// Replaces the hidden part of the ground truth: only the observed positives
/// stay true.
fn corrupt_truth(d: &Dataset) -> Dataset {
    let obs = d.observed();
    let data = obs.states().iter().map(|&s| s == LabelState::Positive).collect();
    let truth = BinaryMatrix::new(obs.n_samples(), obs.n_labels(), data).unwrap();
    Dataset::new(d.features().clone(), obs.clone(), truth).unwrap()
}

#[test]
fn training_never_reads_training_truth() {
    let cfg = BenchmarkConfig {
        n_train: 400,
        n_val: 100,
        n_test: 100,
        ..BenchmarkConfig::default()
    };
    let b = Benchmark::build(&cfg, 6).unwrap();
    let corrupted = corrupt_truth(&b.train_sp);
    assert_ne!(corrupted.truth(), b.train_sp.truth());
    for loss in [
        LossConfig::Bce,
        LossConfig::Opml(OpmlParams::new(0.6, 0.4).unwrap()),
        LossConfig::SoftOpml(OpmlParams::default()),
    ] {
        let run = TrainConfig {
            loss,
            epochs: 6,
            seed: 2,
            correction: opml::correction::CorrectionConfig {
                label_num: 1.0,
                ..Default::default()
            },
            ..TrainConfig::default()
        };
        let (m1, r1) = train_seeded(&b.train_sp, b.eval_sets(), &run).unwrap();
        let (m2, r2) = train_seeded(&corrupted, b.eval_sets(), &run).unwrap();
        assert_eq!(m1, m2, "{}", loss.name());
        assert_eq!(r1, r2, "{}", loss.name());
    }
}

#[test]
fn correction_is_logged_once_at_the_scheduled_epoch() {
    let cfg = BenchmarkConfig {
        n_train: 300,
        n_val: 50,
        n_test: 50,
        ..BenchmarkConfig::default()
    };
    let b = Benchmark::build(&cfg, 1).unwrap();
    let run = TrainConfig {
        loss: LossConfig::SoftOpml(OpmlParams::default()),
        epochs: 10,
        correction: opml::correction::CorrectionConfig {
            label_num: 1.0,
            ..Default::default()
        },
        ..TrainConfig::default()
    };
    let (_, report) = b.run_single_positive(&run).unwrap();
    assert!(!report.flips.is_empty());
    assert!(report.flips.iter().all(|f| f.epoch == 5));
    let mut seen: Vec<(usize, usize)> = report.flips.iter().map(|f| (f.sample, f.class)).collect();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), report.flips.len());
    for f in &report.flips {
        assert_eq!(b.train_sp.observed().get(f.sample, f.class), LabelState::Unknown);
    }
    assert_eq!(report.epochs.len(), 10);
}
