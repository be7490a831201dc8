//! The limiting degree vector: exact sampling from its Pareto-mixed
//! branching representation, and the joint pgf by quadrature.

mod nb;
mod tnb;

pub use nb::NegBinomial;
pub use tnb::TruncNegBinomial;

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::{integrate, QuadConfig};
use crate::stats::ln_gamma;

/// One draw of the limiting degree vector with its latent Pareto variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSample {
    pub d: SmallVec<[u64; 6]>,
    pub z: f64,
}

/// `z = u^(-b_0 / tau)`; `u = 1` gives `z = 1`.
pub fn pareto_from_uniform(params: &ModelParams, u: f64) -> f64 {
    u.powf(-params.b(0) / params.tau())
}

/// Pareto draw with tail index `tau / b_0`.
pub fn sample_pareto<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> f64 {
    pareto_from_uniform(params, 1.0 - rng.random::<f64>())
}

/// All laws of the construction at a fixed `z > 1`.
#[derive(Clone, Debug)]
pub struct Conditional {
    z: f64,
    /// `a_m = z^(-b_m / b_0)`.
    a: SmallVec<[f64; 6]>,
    /// `T_m ~ NB((1 + delta) / b_m, a_m)`.
    t: SmallVec<[NegBinomial; 6]>,
    /// `branch[m] ~ TNB(b_m / b_(m-1), a_(m-1))` for `m = 1..=k`; `branch[0]` is unused.
    branch: SmallVec<[Option<TruncNegBinomial>; 6]>,
    offsets: SmallVec<[u64; 6]>,
}

impl Conditional {
    pub fn new(params: &ModelParams, z: f64) -> Result<Self> {
        if !(z > 1.0 && z.is_finite()) {
            return Err(Error::InvalidArgument(format!("conditioning value z must exceed 1, got {z}")));
        }
        let k = params.k();
        let b = params.b_all();
        let a: SmallVec<[f64; 6]> = b.iter().map(|&bm| (-bm / b[0] * z.ln()).exp()).collect();
        let t = (0..=k)
            .map(|m| NegBinomial::new((1.0 + params.delta()) / b[m], a[m]))
            .collect::<Result<_>>()?;
        let mut branch: SmallVec<[Option<TruncNegBinomial>; 6]> = SmallVec::new();
        branch.push(None);
        for m in 1..=k {
            branch.push(Some(TruncNegBinomial::new(b[m] / b[m - 1], a[m - 1])?));
        }
        let offsets = (0..=k).map(|i| (k - i + 1) as u64).collect();
        Ok(Self { z, a, t, branch, offsets })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn a(&self, m: usize) -> f64 {
        self.a[m]
    }

    pub fn k(&self) -> usize {
        self.a.len() - 1
    }

    pub fn t_law(&self, m: usize) -> &NegBinomial {
        &self.t[m]
    }

    /// The TNB law feeding level `m - 1` from level `m`.
    pub fn branch_law(&self, m: usize) -> &TruncNegBinomial {
        self.branch[m].as_ref().expect("branch laws exist for m >= 1")
    }

    fn offspring<R: Rng + ?Sized>(&self, m: usize, count: u64, rng: &mut R) -> u64 {
        let law = self.branch_law(m);
        (0..count).map(|_| law.sample(rng)).sum()
    }

    /// `(N^(m)_0, ..., N^(m)_(m-1))` for `1 <= m <= k`.
    pub fn sample_n_vector<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<u64> {
        assert!(m >= 1 && m <= self.k(), "N-vector dimension must lie in 1..=k");
        let mut v = vec![0u64; m];
        v[m - 1] = self.branch_law(m).sample(rng);
        for l in (0..m - 1).rev() {
            v[l] = self.offspring(l + 1, v[l + 1], rng);
        }
        v
    }

    /// `sum_{j <= T_m} N^(m)_(i,j)` for `0 <= i < m <= k`.
    pub fn sample_compound<R: Rng + ?Sized>(&self, m: usize, i: usize, rng: &mut R) -> u64 {
        assert!(i < m && m <= self.k());
        let mut c = self.t[m].sample(rng);
        for l in (i..m).rev() {
            c = self.offspring(l + 1, c, rng);
        }
        c
    }

    /// The limiting degree vector given `Z = z`.
    ///
    /// Level `i` of every branching tree rooted at some `T_m` (`m > i`) is
    /// grown from the pooled level `i + 1` of all trees at once, which is the
    /// same collection of independent offspring draws.
    pub fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> SmallVec<[u64; 6]> {
        let k = self.k();
        let mut d: SmallVec<[u64; 6]> = SmallVec::from_elem(0, k + 1);
        let mut c = self.t[k].sample(rng);
        d[k] = self.offsets[k] + c;
        for i in (0..k).rev() {
            c = self.t[i].sample(rng) + self.offspring(i + 1, c, rng);
            d[i] = self.offsets[i] + c;
        }
        d
    }
}

/// `N^(m)` at a fixed `z`.
pub fn sample_n_vector<R: Rng + ?Sized>(params: &ModelParams, m: usize, z: f64, rng: &mut R) -> Result<Vec<u64>> {
    if m == 0 || m > params.k() {
        return Err(Error::InvalidArgument(format!("N-vector dimension {m} outside 1..={}", params.k())));
    }
    Ok(Conditional::new(params, z)?.sample_n_vector(m, rng))
}

/// One draw of the limiting degree vector.
pub fn sample_limit_degree<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> LimitSample {
    let z = sample_pareto(params, rng);
    if z <= 1.0 {
        // every success probability equals 1: all counts vanish
        let d = params.minimal_vector().into_iter().map(u64::from).collect();
        return LimitSample { d, z };
    }
    let cond = Conditional::new(params, z).expect("z > 1");
    LimitSample { d: cond.sample_degree(rng), z }
}

/// `z * H_0 = x_0 t + 1 - x_0` and `z^(b_m / b_0) H_m` with `t = 1 / z`, so
/// every factor stays bounded as `z -> inf`.
fn scaled_h(params: &ModelParams, x: &[f64], t: f64, out: &mut [f64]) {
    let b = params.b_all();
    out[0] = x[0] * t + 1.0 - x[0];
    for m in 1..x.len() {
        out[m] = 1.0 - x[m] + x[m] * out[m - 1].powf(b[m] / b[m - 1]);
    }
}

/// Joint pgf `E[prod x_m^(D_m)]` of the limiting degree vector by adaptive
/// quadrature over `t = 1 / z` in `(0, 1]`.
pub fn pgf_numeric(params: &ModelParams, x: &[f64]) -> Result<f64> {
    pgf_numeric_with(params, x, QuadConfig::default())
}

pub fn pgf_numeric_with(params: &ModelParams, x: &[f64], cfg: QuadConfig) -> Result<f64> {
    let k = params.k();
    if x.len() != k + 1 {
        return Err(Error::InvalidArgument(format!("pgf needs {} arguments, got {}", k + 1, x.len())));
    }
    if x.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::InvalidArgument("pgf arguments must lie in (0, 1)".into()));
    }
    let b = params.b_all().to_vec();
    let alpha = params.alpha();
    let power = alpha - 1.0 + (k as f64 + 1.0) * (1.0 + params.delta()) / b[0];
    let expo: Vec<f64> = b.iter().map(|&bm| -(1.0 + params.delta()) / bm).collect();
    let integrand = |t: f64| {
        let mut h: SmallVec<[f64; 6]> = SmallVec::from_elem(0.0, k + 1);
        scaled_h(params, x, t, &mut h);
        let mut v = alpha * t.powf(power);
        for m in 0..=k {
            v *= h[m].powf(expo[m]);
        }
        v
    };
    let r = integrate(integrand, 0.0, 1.0, cfg)?;
    let monomial: f64 = (0..=k).map(|m| x[m].powi((k - m + 1) as i32)).product();
    Ok(monomial * r.value)
}

/// `E[prod_(i<m) x_i^(N^(m)_i) | Z = z]` in closed form.
pub fn n_vector_pgf(params: &ModelParams, m: usize, z: f64, x: &[f64]) -> f64 {
    let b = params.b_all();
    let t = 1.0 / z;
    let mut h = vec![0.0; m];
    scaled_h(params, &x[..m], t, &mut h);
    let a = (-b[m] / b[0] * z.ln()).exp();
    (1.0 - h[m - 1].powf(b[m] / b[m - 1])) / (1.0 - a)
}

/// Law of coordinate `i` of the limit: `k - i + 1 + NB(r_i, Z^(-b_i/b_0))`
/// with `r_i = (k - i + 1)(1 + delta) / b_i`, mixed over the Pareto law of `Z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalLaw {
    pub axis: usize,
    pub offset: u32,
    pub shape: f64,
    /// `pmf[j]` is the probability of `offset + j`.
    pub pmf: Vec<f64>,
}

impl MarginalLaw {
    pub fn get(&self, value: u32) -> f64 {
        value
            .checked_sub(self.offset)
            .and_then(|j| self.pmf.get(j as usize))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn to_map(&self) -> BTreeMap<u32, f64> {
        self.pmf.iter().enumerate().map(|(j, &p)| (self.offset + j as u32, p)).collect()
    }
}

/// The NB mixture pmf of coordinate `i` on `offset..=max_value`, each mass
/// point integrated numerically against the Pareto density.
pub fn marginal_limit_check(params: &ModelParams, i: usize, max_value: u32) -> Result<MarginalLaw> {
    let k = params.k();
    if i > k {
        return Err(Error::InvalidArgument(format!("axis {i} exceeds k = {k}")));
    }
    let offset = (k - i + 1) as u32;
    let r = (k - i + 1) as f64 * (1.0 + params.delta()) / params.b(i);
    let c = params.tau() / params.b(i);
    // With y = Z^(-b_i/b_0): P(NB = l) = (c) * C(l, r) * int_0^1 (1-y)^l y^(r+c-1) dy,
    // and y = s^(1/(r+c)) removes the endpoint singularity.
    let s = r + c;
    let cfg = QuadConfig { rel_tol: 1e-10, abs_tol: 1e-15, max_intervals: 4_000 };
    let mut pmf = Vec::new();
    for value in offset..=max_value.max(offset) {
        let l = (value - offset) as f64;
        let coef = (ln_gamma(l + r) - ln_gamma(l + 1.0) - ln_gamma(r)).exp() * c / s;
        let integral = if l == 0.0 {
            1.0
        } else {
            integrate(|u: f64| (l * (-u.powf(1.0 / s)).ln_1p()).exp(), 0.0, 1.0, cfg)?.value
        };
        pmf.push(coef * integral);
    }
    Ok(MarginalLaw { axis: i, offset, shape: r, pmf })
}

/// Same law through the Beta integral in closed form.
pub fn marginal_limit_closed_form(params: &ModelParams, i: usize, value: u32) -> f64 {
    let k = params.k();
    let offset = (k - i + 1) as u32;
    if value < offset {
        return 0.0;
    }
    let r = (k - i + 1) as f64 * (1.0 + params.delta()) / params.b(i);
    let c = params.tau() / params.b(i);
    let l = (value - offset) as f64;
    (ln_gamma(l + r) - ln_gamma(r) + c.ln() + ln_gamma(r + c) - ln_gamma(l + 1.0 + r + c)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::{marginal_closed_form, solve_joint_pmf};
    use crate::rng::stream_rng;
    use crate::stats::MeanVar;

    fn p(k: usize, d: f64) -> ModelParams {
        ModelParams::new(k, d).unwrap()
    }

    #[test]
    fn pareto_examples() {
        let q = p(1, 0.0);
        assert_eq!(pareto_from_uniform(&q, 1.0), 1.0);
        assert!((pareto_from_uniform(&q, 0.5) - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        let mut rng = stream_rng(4, 0);
        let m: MeanVar = (0..200_000).map(|_| 1.0 / sample_pareto(&q, &mut rng)).collect();
        let a = q.alpha();
        assert!((m.mean() - a / (a + 1.0)).abs() < 4.0 * m.se());
    }

    #[test]
    fn n_vector_support() {
        let q = p(3, 0.5);
        let mut rng = stream_rng(9, 0);
        for m in 1..=3 {
            for _ in 0..2_000 {
                let v = sample_n_vector(&q, m, 3.0, &mut rng).unwrap();
                assert_eq!(v.len(), m);
                assert!(v[m - 1] >= 1);
                assert!(v.windows(2).all(|w| w[0] >= w[1]));
            }
        }
        assert!(sample_n_vector(&q, 0, 3.0, &mut rng).is_err());
        assert!(sample_n_vector(&q, 4, 3.0, &mut rng).is_err());
    }

    #[test]
    fn n_vector_pgf_matches_monte_carlo() {
        let q = p(2, 0.0);
        let x = [0.7f64, 0.8];
        let z = 3.0;
        let cond = Conditional::new(&q, z).unwrap();
        let mut rng = stream_rng(12, 0);
        for m in 1..=2 {
            let mc: MeanVar = (0..100_000)
                .map(|_| {
                    let v = cond.sample_n_vector(m, &mut rng);
                    v.iter().zip(&x).map(|(&n, &xi)| xi.powi(n.min(5000) as i32)).product::<f64>()
                })
                .collect();
            let exact = n_vector_pgf(&q, m, z, &x);
            assert!((mc.mean() - exact).abs() < 4.0 * mc.se(), "m={m}: {} vs {exact}", mc.mean());
        }
        // m = 1 is a single TNB(b_1/b_0, 1/z)
        let t = TruncNegBinomial::new(q.b(1) / q.b(0), 1.0 / z).unwrap();
        assert!((n_vector_pgf(&q, 1, z, &x) - t.pgf(x[0])).abs() < 1e-14);
    }

    #[test]
    fn limit_support_is_strict() {
        let mut rng = stream_rng(3, 0);
        for (k, d) in [(0, 0.0), (1, 0.0), (2, 1.0), (3, -0.5)] {
            let q = p(k, d);
            for _ in 0..20_000 {
                let s = sample_limit_degree(&q, &mut rng);
                assert!(s.z >= 1.0);
                assert!(s.d.windows(2).all(|w| w[0] > w[1]), "{:?}", s.d);
                assert!(s.d.iter().enumerate().all(|(i, &v)| v >= (k - i + 1) as u64));
            }
        }
    }

    #[test]
    fn minimal_outcome_frequency() {
        let q = p(1, 0.0);
        let mut rng = stream_rng(21, 0);
        let n = 200_000;
        let hits = (0..n).filter(|_| sample_limit_degree(&q, &mut rng).d.as_slice() == [2, 1]).count();
        let base = q.tau() / (q.tau() + q.b(0) + q.delta());
        let se = (base * (1.0 - base) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - base).abs() < 4.0 * se);
    }

    #[test]
    fn pgf_limits_and_bounds() {
        let q = p(1, 0.0);
        let near_one = pgf_numeric(&q, &[1.0 - 1e-12, 1.0 - 1e-12]).unwrap();
        assert!((near_one - 1.0).abs() < 1e-8);
        let x = [0.5, 0.5];
        let v = pgf_numeric(&q, &x).unwrap();
        assert!(v >= 0.6 * 0.25 * 0.5);
        let table = solve_joint_pmf(&q, 200).unwrap();
        let series: f64 = table
            .entries()
            .iter()
            .map(|(d, &pr)| pr * d.as_slice().iter().zip(&x).map(|(&i, &xi)| xi.powi(i as i32)).product::<f64>())
            .sum();
        assert!((v - series).abs() < 1e-4, "{v} vs {series}");
        assert!(pgf_numeric(&q, &[0.5]).is_err());
        assert!(pgf_numeric(&q, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn pgf_one_dimensional_matches_marginal() {
        // k = 0: the pgf of the first coordinate is the marginal pmf series
        for &d in &[-0.5, 0.0, 2.0] {
            let q = p(0, d);
            let x = 0.6f64;
            let series: f64 = (1..3000).map(|i| marginal_closed_form(&q, i) * x.powi(i as i32)).sum();
            assert!((pgf_numeric(&q, &[x]).unwrap() - series).abs() < 1e-9);
        }
    }

    #[test]
    fn marginal_mixture_examples() {
        let q = p(1, 0.0);
        let law0 = marginal_limit_check(&q, 0, 40).unwrap();
        assert!((law0.get(2) - 0.6).abs() < 1e-9);
        for i in 2..=40 {
            assert!((law0.get(i) - marginal_closed_form(&q, i)).abs() < 1e-10, "i={i}");
        }
        let law1 = marginal_limit_check(&q, 1, 40).unwrap();
        assert_eq!(law1.offset, 1);
        assert!((law1.shape - 1.0).abs() < 1e-15);
        for v in 1..=40 {
            assert!((law1.get(v) - marginal_limit_closed_form(&q, 1, v)).abs() < 1e-10);
        }
        let q = p(2, 1.0);
        for i in 0..=2 {
            let law = marginal_limit_check(&q, i, 30).unwrap();
            for v in law.offset..=30 {
                assert!((law.get(v) - marginal_limit_closed_form(&q, i, v)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn conditional_rejects_small_z() {
        assert!(Conditional::new(&p(1, 0.0), 1.0).is_err());
    }
}
