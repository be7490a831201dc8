use rand::Rng;

use super::nb::poisson;
use crate::error::{Error, Result};
use crate::stats::ln_gamma;

/// Means above this switch sampling from inverse CDF to the Poisson mixture.
const INVERSE_CDF_MAX_MEAN: f64 = 32.0;
const MAX_STEPS: u64 = 1_000_000_000;

/// Extended truncated negative binomial law on `{1, 2, ...}`:
/// `P(l) = kappa Gamma(l - kappa) / (l! Gamma(1 - kappa)) (1 - a)^l / (1 - a^kappa)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncNegBinomial {
    kappa: f64,
    a: f64,
    p1: f64,
    mean: f64,
    /// `a / (1 - a)`, the exponential tilt of the mixing density.
    beta: f64,
}

impl TruncNegBinomial {
    pub fn new(kappa: f64, a: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidArgument(format!("TNB kappa must lie in (0, 1), got {kappa}")));
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidArgument(format!("TNB a must lie in (0, 1), got {a}")));
        }
        let norm = -(kappa * a.ln()).exp_m1(); // 1 - a^kappa
        let p1 = kappa * (1.0 - a) / norm;
        let mean = kappa * (1.0 - a) * ((kappa - 1.0) * a.ln()).exp() / norm;
        Ok(Self { kappa, a, p1, mean, beta: a / (1.0 - a) })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn pmf(&self, l: u64) -> f64 {
        if l == 0 {
            return 0.0;
        }
        let k = self.kappa;
        let lf = l as f64;
        let norm = -(k * self.a.ln()).exp_m1();
        (k.ln() + ln_gamma(lf - k) - ln_gamma(lf + 1.0) - ln_gamma(1.0 - k) + lf * (-self.a).ln_1p() - norm.ln()).exp()
    }

    /// `(1 - (1 - (1 - a) x)^kappa) / (1 - a^kappa)`.
    pub fn pgf(&self, x: f64) -> f64 {
        let norm = -(self.kappa * self.a.ln()).exp_m1();
        (1.0 - (1.0 - (1.0 - self.a) * x).powf(self.kappa)) / norm
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.mean <= INVERSE_CDF_MAX_MEAN {
            self.sample_inverse(rng)
        } else {
            self.sample_mixture(rng)
        }
    }

    /// Sequential search using `P(l + 1) / P(l) = (1 - a)(l - kappa) / (l + 1)`.
    pub fn sample_inverse<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let q = 1.0 - self.a;
        let mut l = 1u64;
        let mut p = self.p1;
        let mut cum = p;
        while cum < u && cum < 1.0 - 1e-12 && l < MAX_STEPS {
            p *= q * (l as f64 - self.kappa) / (l as f64 + 1.0);
            l += 1;
            cum += p;
        }
        l
    }

    /// Zero-truncated Poisson with a random mean `L` whose density is
    /// proportional to `(1 - e^-x) x^(-1-kappa) e^(-beta x)`. `L` is drawn by
    /// rejection from the envelope `min(x, 1) x^(-1-kappa)`, which splits into
    /// a power law on `[0, 1]` with weight `kappa` and a Pareto tail on
    /// `[1, inf)` with weight `1 - kappa`.
    pub fn sample_mixture<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let k = self.kappa;
        let lambda = loop {
            let u = 1.0 - rng.random::<f64>();
            let x = if rng.random::<f64>() < k { u.powf(1.0 / (1.0 - k)) } else { u.powf(-1.0 / k) };
            let accept = -(-x).exp_m1() / x.min(1.0) * (-self.beta * x).exp();
            if rng.random::<f64>() < accept {
                break x;
            }
        };
        zero_truncated_poisson(lambda, rng)
    }
}

fn zero_truncated_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda < 1.0 {
        let u: f64 = rng.random();
        let mut p = lambda * (-lambda).exp() / -(-lambda).exp_m1();
        let mut cum = p;
        let mut l = 1u64;
        while cum < u && cum < 1.0 - 1e-15 {
            l += 1;
            p *= lambda / l as f64;
            cum += p;
        }
        l
    } else {
        loop {
            let x = poisson(lambda, rng);
            if x > 0 {
                break x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::stats::{chi_square_gof, EmpiricalDist, MeanVar};
    use std::collections::BTreeMap;

    #[test]
    fn first_mass_point() {
        let t = TruncNegBinomial::new(0.5, 0.25).unwrap();
        assert!((t.pmf(1) - 0.75).abs() < 1e-14);
        assert_eq!(t.pmf(0), 0.0);
    }

    #[test]
    fn normalisation() {
        for &(k, a) in &[(0.5, 0.25), (0.1, 0.9), (0.9, 0.05), (0.3, 0.5)] {
            let t = TruncNegBinomial::new(k, a).unwrap();
            assert!((t.pgf(1.0) - 1.0).abs() < 1e-14);
            let total: f64 = (1..5000).map(|l| t.pmf(l)).sum();
            assert!((total - 1.0).abs() < 1e-8, "k={k} a={a}: {total}");
            let mean: f64 = (1..5000).map(|l| l as f64 * t.pmf(l)).sum();
            assert!((mean - t.mean()).abs() < 1e-6 * t.mean().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TruncNegBinomial::new(1.0, 0.5).is_err());
        assert!(TruncNegBinomial::new(0.5, 1.0).is_err());
        assert!(TruncNegBinomial::new(0.0, 0.5).is_err());
    }

    fn pgf_check(t: &TruncNegBinomial, sampler: impl Fn(&mut crate::rng::SimRng) -> u64, seed: u64) {
        let mut rng = stream_rng(seed, 0);
        let x: f64 = 0.5;
        let m: MeanVar = (0..200_000).map(|_| x.powi(sampler(&mut rng).min(2000) as i32)).collect();
        let d = (m.mean() - t.pgf(x)).abs();
        assert!(d < 4.0 * m.se(), "kappa={} a={}: {} vs {}", t.kappa(), t.a(), m.mean(), t.pgf(x));
    }

    #[test]
    fn inverse_cdf_matches_pgf() {
        let t = TruncNegBinomial::new(0.5, 0.25).unwrap();
        pgf_check(&t, |r| t.sample_inverse(r), 1);
    }

    #[test]
    fn mixture_matches_pgf() {
        for (i, &(k, a)) in [(0.5, 0.25), (0.5, 1e-4), (0.2, 0.01), (0.8, 0.6)].iter().enumerate() {
            let t = TruncNegBinomial::new(k, a).unwrap();
            pgf_check(&t, |r| t.sample_mixture(r), 10 + i as u64);
        }
    }

    #[test]
    fn both_routes_agree_in_distribution() {
        // chi-square of each sampler against the exact pmf on a moderate mean
        let t = TruncNegBinomial::new(0.4, 0.05).unwrap();
        let expected: BTreeMap<u64, f64> = (1..400).map(|l| (l, t.pmf(l))).collect();
        let mut rng = stream_rng(5, 0);
        let inv: EmpiricalDist<u64> = (0..100_000).map(|_| t.sample_inverse(&mut rng)).collect();
        let mix: EmpiricalDist<u64> = (0..100_000).map(|_| t.sample_mixture(&mut rng)).collect();
        assert!(chi_square_gof(&inv, &expected, 5.0).unwrap().p_value > 1e-3);
        assert!(chi_square_gof(&mix, &expected, 5.0).unwrap().p_value > 1e-3);
    }

    #[test]
    fn large_mean_sample_mean() {
        let t = TruncNegBinomial::new(0.5, 1e-6).unwrap();
        assert!(t.mean() > 400.0);
        let mut rng = stream_rng(8, 0);
        let m: MeanVar = (0..200_000).map(|_| t.sample(&mut rng) as f64).collect();
        assert!((m.mean() - t.mean()).abs() < 4.0 * m.se());
    }
}
