//! Backpropagated parameter gradients against central differences for both
//! model kinds, with and without the high-rank penalty.

use opml::labels::{generate_synthetic, to_single_positive, SyntheticConfig};
use opml::losses::{LossConfig, OpmlParams};
use opml::numkit::{Rng, DEFAULT_FD_STEP};
use opml::regularizer::HighRankConfig;
use opml::trainer::{grad_check, Model, ModelKind, ObjectiveConfig};

fn main() -> opml::Result<()> {
    let mut rng = Rng::new(1);
    let cfg = SyntheticConfig {
        n_samples: 20,
        n_features: 6,
        n_labels: 5,
        labels_per_sample_mean: 2.0,
        noise_sd: 0.5,
    };
    let data = to_single_positive(&generate_synthetic(&cfg, &mut rng)?, &mut rng)?;
    for kind in [ModelKind::Linear, ModelKind::Mlp] {
        for lambda in [0.0, 1e-3] {
            let model = Model::init(kind, 6, 5, 8, &mut rng)?;
            let objective = ObjectiveConfig {
                loss: LossConfig::Opml(OpmlParams::new(0.6, 0.4)?),
                high_rank: HighRankConfig { lambda, epsilon: 1e-6 },
            };
            let report = grad_check(
                &model,
                data.features(),
                data.observed(),
                None,
                &objective,
                DEFAULT_FD_STEP,
            )?;
            println!("{kind:?} lambda={lambda}:");
            for b in &report.blocks {
                println!(
                    "  {:<8} rel {:.2e}  abs {:.2e}",
                    b.name, b.max_rel_error, b.max_abs_error
                );
            }
        }
    }
    Ok(())
}
