//! Validation mAP per epoch for single-positive OPML with and without the
//! high-rank penalty, and the spread over epochs 10 to 40.

use opml::benchmark::{standard_train_config, Benchmark, BenchmarkConfig};
use opml::losses::{LossConfig, OpmlParams};
use opml::regularizer::HighRankConfig;
use opml::trainer::TrainConfig;

fn main() -> opml::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0u64);
    let b = Benchmark::build(&BenchmarkConfig::default(), seed)?;
    let plain = standard_train_config(LossConfig::Opml(OpmlParams::default()), seed);
    let with_penalty = TrainConfig {
        high_rank: HighRankConfig::default(),
        ..plain.clone()
    };
    let (_, a) = b.run_single_positive(&plain)?;
    let (_, h) = b.run_single_positive(&with_penalty)?;

    println!("epoch  without  with penalty");
    for (x, y) in a.epochs.iter().zip(&h.epochs) {
        if x.epoch % 5 == 0 || x.epoch == 1 {
            println!(
                "{:>5}  {:.4}   {:.4}",
                x.epoch,
                x.val_map.unwrap_or(f64::NAN),
                y.val_map.unwrap_or(f64::NAN)
            );
        }
    }
    println!(
        "std over epochs 10-40: without {:.5}, with {:.5}",
        a.val_map_std_between(10, 40).unwrap_or(f64::NAN),
        h.val_map_std_between(10, 40).unwrap_or(f64::NAN)
    );
    Ok(())
}
