//! Numerical primitives shared by the rest of the crate.

mod matrix;
mod rng;

pub use matrix::Matrix;
pub use rng::{rng_uniform_index, Rng};

use crate::error::{Error, Result};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Symmetry tolerance accepted by [`logdet_psd`].
const SYMMETRY_TOL: f64 = 1e-10;

/// `log(constant + Σ exp(terms))` evaluated with a max shift.
pub fn stable_log_sum(constant: f64, terms: &[f64]) -> Result<f64> {
    shifted_log_sum(constant, terms, None, false).map(|(v, _)| v)
}

/// Like [`stable_log_sum`] but also returns `∂/∂terms_i`, i.e.
/// `exp(terms_i) / (constant + Σ exp(terms))`.
pub fn stable_log_sum_grad(constant: f64, terms: &[f64]) -> Result<(f64, Vec<f64>)> {
    shifted_log_sum(constant, terms, None, true)
}

/// `log(constant + Σ w_i exp(terms_i))` with its partials in `terms`.
///
/// Terms with `w_i == 0` are dropped (their partial is exactly zero), so
/// `0 · exp(large)` never appears.
pub fn weighted_log_sum_grad(constant: f64, terms: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    if terms.len() != weights.len() {
        return Err(Error::Contract(format!(
            "{} terms but {} weights",
            terms.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::Domain(format!("log-sum weight {w} is not a finite nonnegative")));
    }
    shifted_log_sum(constant, terms, Some(weights), true)
}

fn shifted_log_sum(constant: f64, terms: &[f64], weights: Option<&[f64]>, want_grad: bool) -> Result<(f64, Vec<f64>)> {
    if !(constant >= 0.0) || !constant.is_finite() {
        return Err(Error::Domain(format!(
            "log-sum constant {constant} must be finite and >= 0"
        )));
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut shift = if constant > 0.0 { 0.0 } else { f64::NEG_INFINITY };
    let mut kept = 0usize;
    for (i, &t) in terms.iter().enumerate() {
        if weight(i) == 0.0 {
            continue;
        }
        if !t.is_finite() {
            return Err(Error::Domain(format!("log-sum term {i} is {t}")));
        }
        kept += 1;
        shift = shift.max(t);
    }
    if constant == 0.0 && kept == 0 {
        return Err(Error::Domain("log of zero: constant is 0 and no terms".into()));
    }

    let mut scaled = vec![0.0; if want_grad { terms.len() } else { 0 }];
    let mut denom = if constant > 0.0 { constant * (-shift).exp() } else { 0.0 };
    for (i, &t) in terms.iter().enumerate() {
        let w = weight(i);
        if w == 0.0 {
            continue;
        }
        let e = (t - shift).exp() * w;
        denom += e;
        if want_grad {
            scaled[i] = e;
        }
    }
    for g in &mut scaled {
        *g /= denom;
    }
    Ok((shift + denom.ln(), scaled))
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Contract(format!("cholesky of non-square {:?}", a.shape())));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: diag });
            }
            let d = diag.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        let n = self.lower.rows();
        2.0 * (0..n).map(|i| self.lower[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `A X = B` by forward then back substitution.
    pub fn solve(&self, b: &Matrix) -> Matrix {
        let n = self.lower.rows();
        assert_eq!(b.rows(), n, "cholesky solve shape mismatch");
        let l = &self.lower;
        let mut x = b.clone();
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
        }
        x
    }
}

/// Symmetrizes `gram`, adds `epsilon·I` and factors it.
pub fn shifted_cholesky(gram: &Matrix, epsilon: f64) -> Result<Cholesky> {
    let n = gram.rows();
    if gram.cols() != n {
        return Err(Error::Contract(format!(
            "gram matrix is {:?}, not square",
            gram.shape()
        )));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("logdet shift {epsilon} must be >= 0")));
    }
    let scale = gram.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut shifted = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (gram[(i, j)], gram[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Contract(format!(
                    "gram matrix not symmetric at ({i}, {j}): {a} vs {b}"
                )));
            }
            shifted[(i, j)] = 0.5 * (a + b);
        }
        shifted[(i, i)] += epsilon;
    }
    Cholesky::factor(&shifted)
}

/// `log det(gram + epsilon·I)` for a symmetric positive semidefinite `gram`.
pub fn logdet_psd(gram: &Matrix, epsilon: f64) -> Result<f64> {
    shifted_cholesky(gram, epsilon).map(|c| c.log_det())
}

/// Central-difference gradient of `f` at `x`.
pub fn finite_diff_grad<F>(mut f: F, x: &Matrix, h: f64) -> Result<Matrix>
where
    F: FnMut(&Matrix) -> f64,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("finite-difference step {h} must be > 0")));
    }
    let mut probe = x.clone();
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let orig = x[(i, j)];
            probe[(i, j)] = orig + h;
            let up = f(&probe);
            probe[(i, j)] = orig - h;
            let down = f(&probe);
            probe[(i, j)] = orig;
            if !up.is_finite() || !down.is_finite() {
                return Err(Error::Numerical(format!(
                    "objective is non-finite when probing entry ({i}, {j})"
                )));
            }
            grad[(i, j)] = (up - down) / (2.0 * h);
        }
    }
    Ok(grad)
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
