//! Grid search over the OPML constants on the benchmark, selecting by
//! validation mAP and reporting the test mAP of the selected point.

use opml::benchmark::{standard_train_config, Benchmark, BenchmarkConfig};
use opml::losses::{LossConfig, OpmlParams};

fn main() -> opml::Result<()> {
    let b = Benchmark::build(&BenchmarkConfig::default(), 0)?;
    let grid = [0.3, 0.5, 0.7];
    let mut best: Option<(f64, f64, f64, f64)> = None;
    println!("alpha~ beta~   val     test");
    for &a in &grid {
        for &bt in &grid {
            let cfg = standard_train_config(LossConfig::Opml(OpmlParams::new(a, bt)?), 0);
            let (_, r) = b.run_single_positive(&cfg)?;
            let val = r.final_val.as_ref().map_or(f64::NAN, |x| x.map);
            let test = r.final_test.as_ref().map_or(f64::NAN, |x| x.map);
            println!("{a:>6} {bt:>5}  {val:.4}  {test:.4}");
            if best.is_none_or(|(_, _, v, _)| val > v) {
                best = Some((a, bt, val, test));
            }
        }
    }
    if let Some((a, bt, val, test)) = best {
        println!("selected alpha~={a} beta~={bt}: val {val:.4}, test {test:.4}");
    }
    Ok(())
}
