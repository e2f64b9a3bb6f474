//! Smoothing weights and the one-shot label correction on a toy
//! single-positive batch.

use opml::correction::{apply_correction, correction_counts, smoothing_weights};
use opml::labels::{LabelState, TriStateLabels};
use opml::metrics::observed_average_precision;
use opml::numkit::{sigmoid, Matrix};

fn main() -> opml::Result<()> {
    let labels = TriStateLabels::from_pattern(&["PUU", "UPU", "PUU", "UUP", "PUU", "UPU"])?;
    let scores = Matrix::from_rows(&[
        [2.0, 0.5, -1.0],
        [1.2, 1.5, -2.0],
        [1.8, -0.5, 0.3],
        [-1.0, 0.9, 1.1],
        [0.4, 1.0, -0.2],
        [-0.3, 0.8, 0.6],
    ])?;

    let ap = observed_average_precision(&scores, &labels.assume_negative())?.ap_or(0.0);
    println!("observed AP per class: {ap:.3?}");

    let gamma = smoothing_weights(&scores.map(sigmoid), &ap, 1.0, &labels)?;
    for i in 0..labels.n_samples() {
        println!("sample {i}: gamma {:.3?}", gamma.matrix().row(i));
    }

    let counts = correction_counts(
        labels.n_samples(),
        &labels.column_counts(LabelState::Positive),
        &ap,
        2.0,
        &labels.column_counts(LabelState::Unknown),
    )?;
    println!("flips per class at label_num 2: {counts:?}");
    let (corrected, flips) = apply_correction(&labels, &scores, &counts)?;
    for f in &flips {
        println!(
            "  sample {} class {} (score {:+.2}) -> positive",
            f.sample, f.class, f.score
        );
    }
    println!(
        "positives before {} after {}",
        labels.count(LabelState::Positive),
        corrected.count(LabelState::Positive)
    );
    Ok(())
}
