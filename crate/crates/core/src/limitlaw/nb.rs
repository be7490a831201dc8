use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::stats::ln_gamma;

/// Poisson draw that stays usable for means beyond the range of the exact
/// sampler, where a rounded normal approximation is indistinguishable.
pub(crate) fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda < 1e15 {
        let d = Poisson::new(lambda).expect("finite positive mean");
        d.sample(rng) as u64
    } else {
        let g: f64 = StandardNormal.sample(rng);
        (lambda + lambda.sqrt() * g).round().max(0.0) as u64
    }
}

/// Negative binomial law with shape `r` and success probability `a`:
/// `P(l) = Gamma(l + r) / (l! Gamma(r)) (1 - a)^l a^r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegBinomial {
    r: f64,
    a: f64,
}

impl NegBinomial {
    /// `a = 1` is allowed and gives the point mass at 0.
    pub fn new(r: f64, a: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("NB shape must be positive, got {r}")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidArgument(format!("NB success probability must lie in (0, 1], got {a}")));
        }
        Ok(Self { r, a })
    }

    pub fn shape(&self) -> f64 {
        self.r
    }

    pub fn success(&self) -> f64 {
        self.a
    }

    pub fn pmf(&self, l: u64) -> f64 {
        if self.a == 1.0 {
            return if l == 0 { 1.0 } else { 0.0 };
        }
        let l = l as f64;
        (ln_gamma(l + self.r) - ln_gamma(l + 1.0) - ln_gamma(self.r) + l * (-self.a).ln_1p() + self.r * self.a.ln())
            .exp()
    }

    /// `(x (1 - 1/a) + 1/a)^(-r)`.
    pub fn pgf(&self, x: f64) -> f64 {
        (x * (1.0 - 1.0 / self.a) + 1.0 / self.a).powf(-self.r)
    }

    pub fn mean(&self) -> f64 {
        self.r * (1.0 - self.a) / self.a
    }

    pub fn variance(&self) -> f64 {
        self.r * (1.0 - self.a) / (self.a * self.a)
    }

    /// Gamma-Poisson mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.a >= 1.0 {
            return 0;
        }
        let scale = (1.0 - self.a) / self.a;
        let lambda = Gamma::new(self.r, scale).expect("valid gamma parameters").sample(rng);
        poisson(lambda, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::stats::MeanVar;

    #[test]
    fn geometric_case() {
        let nb = NegBinomial::new(1.0, 0.5).unwrap();
        assert!((nb.pmf(0) - 0.5).abs() < 1e-15);
        assert!((nb.pmf(3) - 0.0625).abs() < 1e-15);
        assert!((nb.pgf(0.5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pmf_sums_to_pgf() {
        let nb = NegBinomial::new(0.7, 0.3).unwrap();
        let total: f64 = (0..2000).map(|l| nb.pmf(l)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let x: f64 = 0.4;
        let series: f64 = (0..2000).map(|l| nb.pmf(l) * x.powi(l as i32)).sum();
        assert!((series - nb.pgf(x)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid() {
        let mut rng = stream_rng(0, 0);
        let nb = NegBinomial::new(2.0, 1.0).unwrap();
        assert!((0..100).all(|_| nb.sample(&mut rng) == 0));
        assert!(NegBinomial::new(0.0, 0.5).is_err());
        assert!(NegBinomial::new(1.0, 0.0).is_err());
    }

    #[test]
    fn sample_mean() {
        let mut rng = stream_rng(11, 0);
        for &(r, a) in &[(0.5, 0.2), (1.0, 0.5), (3.3, 0.01)] {
            let nb = NegBinomial::new(r, a).unwrap();
            let m: MeanVar = (0..200_000).map(|_| nb.sample(&mut rng) as f64).collect();
            assert!((m.mean() - nb.mean()).abs() < 4.0 * m.se(), "r={r} a={a}: {} vs {}", m.mean(), nb.mean());
        }
    }

    #[test]
    fn huge_mean_poisson() {
        let mut rng = stream_rng(2, 0);
        let x = poisson(1e16, &mut rng) as f64;
        assert!((x - 1e16).abs() < 1e9);
        assert_eq!(poisson(0.0, &mut rng), 0);
    }
}
