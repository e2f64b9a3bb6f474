//! The two numerical primitives everything else leans on: a shifted
//! `log(c + Σ e^x)` that survives extreme scores, and a Cholesky log-det.

use opml::numkit::{logdet_psd, stable_log_sum, stable_log_sum_grad, Matrix};

fn main() -> opml::Result<()> {
    let terms = [800.0, 799.0, -5.0];
    let naive = (1.0 + terms.iter().map(|t: &f64| t.exp()).sum::<f64>()).ln();
    println!("naive log(1 + sum exp) = {naive}");
    println!("stable                 = {}", stable_log_sum(1.0, &terms)?);

    let (value, weights) = stable_log_sum_grad(1.0, &[0.0, 1.0, 2.0])?;
    println!("log(1 + e^0 + e^1 + e^2) = {value:.6}, gradient {weights:.4?}");

    // Columns at 60 degrees: det(YᵀY) = sin²(60°).
    let (c, s) = (0.5f64, 0.75f64.sqrt());
    let y = Matrix::from_rows(&[[1.0, c], [0.0, s]])?;
    let gram = y.gram();
    println!(
        "log det YᵀY = {:.6} (expected {:.6})",
        logdet_psd(&gram, 0.0)?,
        (s * s).ln()
    );

    let singular = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]])?;
    match logdet_psd(&singular, 0.0) {
        Ok(v) => println!("singular gram: {v}"),
        Err(e) => println!("singular gram without shift: {e}"),
    }
    println!("with a 1e-6 shift: {:.4}", logdet_psd(&singular, 1e-6)?);
    Ok(())
}
