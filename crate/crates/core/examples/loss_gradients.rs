//! Every loss on one single-positive row, and the gradient each puts on the
//! negatives. OPML spreads a bounded budget over the negatives, pushing the
//! hardest one; BCE pushes every negative independently.

use opml::labels::{LabelState, TriStateLabels};
use opml::losses::{LossConfig, OpmlParams};
use opml::numkit::Matrix;

fn main() -> opml::Result<()> {
    let scores = Matrix::from_rows(&[[2.0, 1.5, -1.0, 0.5, -3.0, 0.0]])?;
    let labels = TriStateLabels::from_pattern(&["PUUUUU"])?;
    let losses = [
        LossConfig::Bce,
        LossConfig::Focal { gamma: 2.0 },
        LossConfig::Asl {
            gamma_pos: 0.0,
            gamma_neg: 4.0,
            margin: 0.05,
        },
        LossConfig::Zlpr,
        LossConfig::Opml(OpmlParams::new(0.7, 0.4)?),
        LossConfig::SoftOpml(OpmlParams::new(0.7, 0.4)?),
    ];
    println!("scores {:?}, observed positive: label 0", scores.row(0));
    println!("{:<10} {:>8}   d/ds", "loss", "value");
    for loss in losses {
        let r = loss.evaluate(&scores, &labels, None)?;
        // Elementwise losses average over entries; rescale to per-entry terms.
        let scale = match loss {
            LossConfig::Bce | LossConfig::Focal { .. } | LossConfig::Asl { .. } => scores.cols() as f64,
            _ => 1.0,
        };
        let g: Vec<String> = r.grad.row(0).iter().map(|g| format!("{:+.3}", g * scale)).collect();
        println!("{:<10} {:>8.4}   {}", loss.name(), r.value, g.join(" "));
    }

    let an = labels.assume_negative();
    let negatives = (0..6).filter(|&l| an.get(0, l) == LabelState::Negative).count();
    let opml = LossConfig::Zlpr.evaluate(&scores, &an, None)?.grad;
    let bce = LossConfig::Bce.evaluate(&scores, &an, None)?.grad.scale(6.0);
    let total = |g: &Matrix| (1..6).map(|l| g[(0, l)]).sum::<f64>();
    println!(
        "summed push on {negatives} negatives: zlpr {:.3} (always < 1), bce {:.3}",
        total(&opml),
        total(&bce)
    );
    Ok(())
}
