//! The log-det penalty on a prediction matrix: large when label columns
//! collapse onto one direction, small when they spread out.

use opml::numkit::Matrix;
use opml::regularizer::{high_rank_penalty, HighRankConfig};

fn main() -> opml::Result<()> {
    let cfg = HighRankConfig {
        lambda: 1.0,
        epsilon: 1e-6,
    };
    println!("{:>8} {:>12} {:>12}", "angle", "penalty", "|grad|");
    for degrees in [90.0f64, 60.0, 30.0, 10.0, 1.0, 0.0] {
        let t = degrees.to_radians();
        let y = Matrix::from_rows(&[[1.0, t.cos()], [0.0, t.sin()], [0.0, 0.0]])?;
        let r = high_rank_penalty(&y, &cfg)?;
        let norm = r.grad.as_slice().iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("{degrees:>8} {:>12.4} {:>12.3e}", r.value, norm);
    }

    // Predictions from a batch that uses only two of four labels.
    let y = Matrix::from_rows(&[[0.9, 0.8, 0.1, 0.1], [0.85, 0.9, 0.05, 0.1], [0.1, 0.2, 0.1, 0.05]])?;
    let r = high_rank_penalty(&y, &HighRankConfig::default())?;
    println!(
        "rank-deficient batch (3 x 4): penalty {:.4} at the default lambda",
        r.value
    );
    Ok(())
}
