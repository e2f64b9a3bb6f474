//! The single-positive benchmark: full-label BCE as a reference, then BCE,
//! OPML and smoothed OPML with label correction trained on one observed
//! positive per sample. Prints test mAP and where true positives land in
//! the confidence histogram.

use opml::benchmark::{standard_train_config, Benchmark, BenchmarkConfig};
use opml::correction::CorrectionConfig;
use opml::losses::{LossConfig, OpmlParams};
use opml::trainer::{RunReport, TrainConfig};

fn main() -> opml::Result<()> {
    let seeds = [0u64, 1, 2];
    let names = ["bce (full labels)", "bce", "opml", "soft opml + correction"];
    let mut maps = vec![Vec::new(); names.len()];
    let mut hist = vec![Vec::new(); names.len()];
    for &seed in &seeds {
        let b = Benchmark::build(&BenchmarkConfig::default(), seed)?;
        let soft = TrainConfig {
            correction: CorrectionConfig {
                label_num: 0.8,
                ..CorrectionConfig::default()
            },
            ..standard_train_config(LossConfig::SoftOpml(OpmlParams::default()), seed)
        };
        let runs: [RunReport; 4] = [
            b.run_full(&standard_train_config(LossConfig::Bce, seed))?.1,
            b.run_single_positive(&standard_train_config(LossConfig::Bce, seed))?.1,
            b.run_single_positive(&standard_train_config(LossConfig::Opml(OpmlParams::default()), seed))?
                .1,
            b.run_single_positive(&soft)?.1,
        ];
        for (k, r) in runs.iter().enumerate() {
            maps[k].push(r.final_test.as_ref().map_or(f64::NAN, |a| a.map));
            hist[k].push(r.test_histogram.clone().unwrap_or_default());
        }
    }

    println!(
        "{:<24} {:>8}   per seed              positives in [0,0.2) / [0.8,1]",
        "", "mAP"
    );
    for (k, name) in names.iter().enumerate() {
        let mean = maps[k].iter().sum::<f64>() / seeds.len() as f64;
        let (low, high, total) = hist[k].iter().fold((0, 0, 0), |(lo, hi, t), h| {
            (lo + h[0], hi + h[h.len() - 1], t + h.iter().sum::<u64>())
        });
        println!(
            "{name:<24} {mean:>8.4}   {:<21} {:.3} / {:.3}",
            format!("{:.3?}", maps[k]),
            low as f64 / total as f64,
            high as f64 / total as f64
        );
    }
    Ok(())
}
