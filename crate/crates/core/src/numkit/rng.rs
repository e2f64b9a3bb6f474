//! Seeded pseudo-random stream.
//!
//! The generator is SplitMix64 and every derived draw is spelled out below so
//! that another implementation can reproduce datasets and runs bit for bit:
//!
//! * `next_u64`: `state += 0x9E3779B97F4A7C15`, then the standard
//!   SplitMix64 mix (`>>30 * 0xBF58476D1CE4E5B9`, `>>27 * 0x94D049BB133111EB`,
//!   `>>31`).
//! * `next_f64`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `uniform_index(n)`: rejection sampling; draws below
//!   `threshold = (2^64 - n) mod n` are discarded, the result is `x mod n`.
//! * `normal`: Box–Muller, cosine branch only. `u1 = 1 - next_f64`,
//!   `u2 = next_f64`, `sqrt(-2 ln u1) * cos(2π u2)`.
//! * `poisson(λ)`: Knuth's product-of-uniforms method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased index in `[0, n)`.
    pub fn uniform_index(&mut self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::Domain("uniform_index over an empty range".into()));
        }
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return Ok((x % n) as usize);
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn poisson(&mut self, lambda: f64) -> Result<usize> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("poisson rate {lambda}")));
        }
        let limit = (-lambda).exp();
        let mut k = 0usize;
        let mut p = self.next_f64();
        while p > limit {
            k += 1;
            p *= self.next_f64();
        }
        Ok(k)
    }

    /// In-place Fisher–Yates shuffle (swaps from the back).
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.uniform_index(i + 1).expect("non-empty range");
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `[0, n)`, in draw order (partial Fisher–Yates).
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Result<Vec<usize>> {
        if k > n {
            return Err(Error::Domain(format!("cannot draw {k} distinct of {n}")));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.uniform_index(n - i)?;
            pool.swap(i, j);
        }
        pool.truncate(k);
        Ok(pool)
    }
}

/// Free-function form of [`Rng::uniform_index`].
pub fn rng_uniform_index(rng: &mut Rng, n: usize) -> Result<usize> {
    rng.uniform_index(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Reference outputs of SplitMix64 seeded with 0.
        let mut rng = Rng::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn single_outcome_and_empty_range() {
        let mut rng = Rng::new(0);
        assert_eq!(rng.uniform_index(1).unwrap(), 0);
        assert!(rng.uniform_index(0).is_err());
    }

    #[test]
    fn identical_seeds_identical_streams() {
        let a: Vec<usize> = {
            let mut r = Rng::new(7);
            (0..100).map(|_| r.uniform_index(13).unwrap()).collect()
        };
        let b: Vec<usize> = {
            let mut r = Rng::new(7);
            (0..100).map(|_| r.uniform_index(13).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn index_frequencies_within_five_sigma() {
        let mut rng = Rng::new(42);
        let mut counts = [0u32; 10];
        for _ in 0..100_000 {
            counts[rng.uniform_index(10).unwrap()] += 1;
        }
        // binomial(1e5, 0.1): sd = sqrt(1e5 * 0.1 * 0.9) ≈ 94.87
        let sd = (100_000.0f64 * 0.1 * 0.9).sqrt();
        for &c in &counts {
            assert!((c as f64 - 10_000.0).abs() < 5.0 * sd, "{counts:?}");
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 10_000.0).powi(2) / 10_000.0).sum();
        // 9 degrees of freedom, p = 0.001 critical value 27.88
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    #[test]
    fn normal_and_poisson_moments() {
        let mut rng = Rng::new(3);
        let n = 50_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.03, "{mean} {var}");

        let ks: Vec<usize> = (0..n).map(|_| rng.poisson(2.0).unwrap()).collect();
        let mean = ks.iter().sum::<usize>() as f64 / n as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn sample_distinct_is_distinct() {
        let mut rng = Rng::new(11);
        let mut s = rng.sample_distinct(16, 16).unwrap();
        s.sort_unstable();
        assert_eq!(s, (0..16).collect::<Vec<_>>());
        assert!(rng.sample_distinct(3, 4).is_err());
    }
}
