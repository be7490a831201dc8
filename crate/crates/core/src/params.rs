use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest simplex dimension the growth model accepts by default.
pub const DEFAULT_MAX_K: usize = 5;

/// Model parameters `(k, delta)` together with the derived rates
/// `b_m = k - m + 1 + delta (k - m)` and `tau = k + 2 + delta (k + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    k: usize,
    delta: f64,
    #[serde(skip)]
    b: Vec<f64>,
    #[serde(skip)]
    tau: f64,
}

impl ModelParams {
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        Self::with_max_k(k, delta, DEFAULT_MAX_K)
    }

    pub fn with_max_k(k: usize, delta: f64, max_k: usize) -> Result<Self> {
        if !delta.is_finite() || delta <= -1.0 {
            return Err(Error::InvalidParams(format!(
                "delta must be a finite number > -1, got {delta}"
            )));
        }
        if k > max_k {
            return Err(Error::DimensionTooLarge { k, max: max_k });
        }
        let b = (0..=k)
            .map(|m| (k - m + 1) as f64 + delta * (k - m) as f64)
            .collect();
        let tau = (k + 2) as f64 + delta * (k + 1) as f64;
        Ok(Self { k, delta, b, tau })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `b_m` for `m = 0..=k`.
    #[inline]
    pub fn b(&self, m: usize) -> f64 {
        self.b[m]
    }

    pub fn b_all(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Pareto index `tau / b_0` of the mixing variable.
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.tau / self.b[0]
    }

    /// Number of `k`-simplices after `n` steps: `1 + (n + 1)(k + 1)`.
    pub fn simplex_count(&self, n: u64) -> u64 {
        1 + (n + 1) * (self.k as u64 + 1)
    }

    /// Sum of `k`-degrees after `n` steps: `(n + 1)(k + 2)`.
    pub fn degree_sum(&self, n: u64) -> u64 {
        (n + 1) * (self.k as u64 + 2)
    }

    /// Normaliser of the selection probability at step `n >= 1`:
    /// `n (k + 2) + delta (1 + n (k + 1))`.
    pub fn selection_total(&self, n: u64) -> f64 {
        let k = self.k as f64;
        let n = n as f64;
        n * (k + 2.0) + self.delta * (1.0 + n * (k + 1.0))
    }

    /// Degree vector of a freshly created `k`-simplex, `(k + 1, k, ..., 1)`.
    pub fn minimal_vector(&self) -> Vec<u32> {
        (0..=self.k).map(|m| (self.k - m + 1) as u32).collect()
    }
}

impl<'de> Deserialize<'de> for ModelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            k: usize,
            delta: f64,
        }
        let raw = Raw::deserialize(d)?;
        ModelParams::new(raw.k, raw.delta).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = ModelParams::new(1, 0.0).unwrap();
        assert_eq!(p.b_all(), &[2.0, 1.0]);
        assert_eq!(p.tau(), 3.0);
        assert_eq!(p.alpha(), 1.5);

        let p = ModelParams::new(2, 1.0).unwrap();
        assert_eq!(p.b_all(), &[5.0, 3.0, 1.0]);
        assert_eq!(p.tau(), 7.0);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(ModelParams::new(1, -1.0).is_err());
        assert!(ModelParams::new(1, -1.5).is_err());
        assert!(ModelParams::new(1, f64::NAN).is_err());
        assert!(ModelParams::new(9, 0.0).is_err());
        assert!(ModelParams::with_max_k(9, 0.0, 10).is_ok());
    }

    #[test]
    fn structural_identities() {
        for k in 0..=5 {
            for &delta in &[-0.9, -0.5, 0.0, 1.0, 2.5] {
                let p = ModelParams::new(k, delta).unwrap();
                assert_eq!(p.b(k), 1.0);
                assert!((p.b(0) - ((k + 1) as f64 + delta * k as f64)).abs() < 1e-12);
                assert!((p.tau() - (p.b(0) + 1.0 + delta)).abs() < 1e-12);
                // the two base cases of the joint and marginal recursions agree
                let lhs = p.tau() + p.b(0) + delta;
                let rhs = p.b(0) + (k + 2) as f64 * (1.0 + delta);
                assert!((lhs - rhs).abs() < 1e-12);
                for m in 1..=k {
                    assert!(p.b(m) < p.b(m - 1));
                }
            }
        }
    }
}
