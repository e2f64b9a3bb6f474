//! Generate a fully labelled synthetic dataset, reduce it to one observed
//! positive per sample and count the false negatives the assume-negative
//! reading introduces.

use opml::labels::{
    assume_negative, generate_synthetic, read_jsonl_from, to_single_positive, write_jsonl_to, LabelState,
    SyntheticConfig,
};
use opml::numkit::Rng;

fn main() -> opml::Result<()> {
    let cfg = SyntheticConfig {
        n_samples: 1000,
        ..SyntheticConfig::default()
    };
    let mut rng = Rng::new(7);
    let full = generate_synthetic(&cfg, &mut rng)?;
    let positives = full.truth().count_positive();
    println!(
        "{} samples, {} labels, {:.2} true positives per sample",
        full.n_samples(),
        full.n_labels(),
        positives as f64 / full.n_samples() as f64
    );

    let sp = to_single_positive(&full, &mut rng)?;
    sp.observed().check_single_positive()?;
    println!(
        "unknown entries after reduction: {}",
        sp.observed().count(LabelState::Unknown)
    );

    let an = assume_negative(&sp);
    let mut false_negatives = 0;
    for i in 0..an.n_samples() {
        for l in 0..an.n_labels() {
            if an.observed().get(i, l) == LabelState::Negative && an.truth().get(i, l) {
                false_negatives += 1;
            }
        }
    }
    println!(
        "assume-negative marks {false_negatives} of {positives} true positives as negative ({:.1}%)",
        100.0 * false_negatives as f64 / positives as f64
    );

    let mut buf = Vec::new();
    write_jsonl_to(&sp, &mut buf)?;
    let back = read_jsonl_from(buf.as_slice(), "<memory>")?;
    println!("jsonl: {} bytes, round trip exact: {}", buf.len(), back == sp);
    if let Some(line) = String::from_utf8_lossy(&buf).lines().nth(1) {
        println!("first record: {}...", &line[..line.len().min(60)]);
    }
    Ok(())
}
