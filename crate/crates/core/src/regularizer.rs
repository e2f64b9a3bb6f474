//! High-rank penalty `−λ · log det(YᵀY + εI)` on a batch's predicted label
//! matrix `Y` (rows = samples, columns = labels).
//!
//! With `ε = 0` and `Y` of full column rank this is `−λ Σ log σ_i²` over the
//! singular values of `Y`. Minibatches smaller than the label count make
//! `YᵀY` singular, so a positive shift is the default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossResult;
use crate::numkit::{shifted_cholesky, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighRankConfig {
    /// Trade-off weight λ.
    pub lambda: f64,
    /// Diagonal shift ε.
    pub epsilon: f64,
}

impl Default for HighRankConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epsilon: 1e-6,
        }
    }
}

impl HighRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Domain(format!("lambda {} must be >= 0", self.lambda)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Domain(format!("epsilon {} must be >= 0", self.epsilon)));
        }
        Ok(())
    }
}

/// Penalty value and its gradient with respect to `y_pred`.
///
/// `∂/∂Y [−λ log det(YᵀY + εI)] = −2λ · Y (YᵀY + εI)⁻¹`, obtained from the
/// Cholesky factor by solving against `Yᵀ`.
pub fn high_rank_penalty(y_pred: &Matrix, cfg: &HighRankConfig) -> Result<LossResult> {
    cfg.validate()?;
    if !y_pred.is_finite() {
        return Err(Error::Contract("predicted label matrix has non-finite entries".into()));
    }
    let chol = shifted_cholesky(&y_pred.gram(), cfg.epsilon)?;
    let value = -cfg.lambda * chol.log_det();
    // (YᵀY + εI)⁻¹ Yᵀ is L×n; its transpose is Y (YᵀY + εI)⁻¹.
    let solved = chol.solve(&y_pred.transpose());
    let grad = solved.transpose().scale(-2.0 * cfg.lambda);
    Ok(LossResult { value, grad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{finite_diff_grad, Rng};
    use proptest::prelude::*;

    /// Gram–Schmidt on random columns; test helper only.
    fn orthonormal_columns(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        let mut q = Matrix::from_fn(rows, cols, |_, _| rng.normal());
        for j in 0..cols {
            for k in 0..j {
                let dot: f64 = (0..rows).map(|i| q[(i, j)] * q[(i, k)]).sum();
                for i in 0..rows {
                    q[(i, j)] -= dot * q[(i, k)];
                }
            }
            let norm = (0..rows).map(|i| q[(i, j)].powi(2)).sum::<f64>().sqrt();
            for i in 0..rows {
                q[(i, j)] /= norm;
            }
        }
        q
    }

    #[test]
    fn orthonormal_columns_have_zero_penalty() {
        let mut rng = Rng::new(1);
        let q = orthonormal_columns(6, 3, &mut rng);
        let cfg = HighRankConfig {
            lambda: 1.0,
            epsilon: 0.0,
        };
        assert!(high_rank_penalty(&q, &cfg).unwrap().value.abs() < 1e-12);

        let c: f64 = 0.3;
        let r = high_rank_penalty(&q.scale(c), &cfg).unwrap();
        assert!((r.value + 3.0 * (c * c).ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::new(2);
        let y = Matrix::from_fn(8, 4, |_, _| rng.next_f64());
        let cfg = HighRankConfig {
            lambda: 0.7,
            epsilon: 1e-6,
        };
        let analytic = high_rank_penalty(&y, &cfg).unwrap().grad;
        let fd = finite_diff_grad(|m| high_rank_penalty(m, &cfg).unwrap().value, &y, 1e-6).unwrap();
        for (a, f) in analytic.as_slice().iter().zip(fd.as_slice()) {
            assert!((a - f).abs() <= 1e-5 * a.abs().max(f.abs()).max(1e-3), "{a} vs {f}");
        }
    }

    #[test]
    fn zero_matrix_is_finite_with_shift() {
        let cfg = HighRankConfig {
            lambda: 2.0,
            epsilon: 1e-6,
        };
        let r = high_rank_penalty(&Matrix::zeros(5, 3), &cfg).unwrap();
        assert!((r.value - (-2.0 * 3.0 * 1e-6f64.ln())).abs() < 1e-9);
        assert!(r.grad.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn penalty_grows_with_column_alignment() {
        let cfg = HighRankConfig {
            lambda: 1.0,
            epsilon: 1e-6,
        };
        let values: Vec<f64> = (0..=8)
            .map(|k| {
                let theta = std::f64::consts::FRAC_PI_2 * (1.0 - k as f64 / 9.0);
                let y = Matrix::from_rows(&[[1.0, theta.cos()], [0.0, theta.sin()]]).unwrap();
                high_rank_penalty(&y, &cfg).unwrap().value
            })
            .collect();
        // |cos θ| increases with k
        assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = HighRankConfig {
            lambda: -1.0,
            epsilon: 1e-6,
        };
        assert!(high_rank_penalty(&Matrix::identity(2), &cfg).is_err());
        let cfg = HighRankConfig {
            lambda: 1.0,
            epsilon: 0.0,
        };
        assert!(matches!(
            high_rank_penalty(&Matrix::zeros(2, 2), &cfg),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    proptest! {
        #[test]
        fn rotation_invariant(seed in 0u64..500) {
            let mut rng = Rng::new(seed);
            let y = Matrix::from_fn(7, 3, |_, _| rng.normal());
            let q = orthonormal_columns(3, 3, &mut rng);
            let cfg = HighRankConfig { lambda: 1.0, epsilon: 0.0 };
            let a = high_rank_penalty(&y, &cfg).unwrap().value;
            let b = high_rank_penalty(&y.matmul(&q), &cfg).unwrap().value;
            prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }
}
