//! Distances, goodness-of-fit tests and tail estimators.

mod special;

pub use special::{chi_square_sf, gamma_cdf, gamma_sf, ln_gamma, ln_gamma_ratio};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Integer counts over an ordered key space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmpiricalDist<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for EmpiricalDist<K> {
    fn default() -> Self {
        Self { counts: BTreeMap::new(), total: 0 }
    }
}

impl<K: Ord + Clone> EmpiricalDist<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += n;
        self.total += n;
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &u64)> {
        self.counts.iter()
    }

    pub fn merge(&mut self, other: &Self) {
        for (k, &n) in &other.counts {
            self.add(k.clone(), n);
        }
    }

    /// Relative frequencies.
    pub fn pmf(&self) -> BTreeMap<K, f64> {
        let t = self.total as f64;
        self.counts.iter().map(|(k, &n)| (k.clone(), n as f64 / t)).collect()
    }
}

impl<K: Ord + Clone> FromIterator<K> for EmpiricalDist<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut d = Self::new();
        for k in iter {
            d.add(k, 1);
        }
        d
    }
}

/// Total variation distance `sum |p - q| / 2`; keys absent from one side count as 0.
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut s = 0.0;
    for (k, &pv) in p {
        s += (pv - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qv) in q {
        if !p.contains_key(k) {
            s += qv.abs();
        }
    }
    0.5 * s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub cells: usize,
}

/// Pearson goodness of fit of `observed` against the pmf `expected`.
///
/// Cells are pooled left to right in key order until each holds at least
/// `min_cell` expected counts. Mass of `expected` missing from the listed keys
/// and observations outside them form a remainder cell, merged into the last
/// cell when it is too small on its own.
pub fn chi_square_gof<K: Ord + Clone>(
    observed: &EmpiricalDist<K>,
    expected: &BTreeMap<K, f64>,
    min_cell: f64,
) -> Result<ChiSquare> {
    let n = observed.total() as f64;
    if observed.total() == 0 {
        return Err(Error::InsufficientData("no observations".into()));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let (mut o, mut e) = (0.0, 0.0);
    let mut listed_mass = 0.0;
    let mut listed_obs = 0u64;
    for (k, &p) in expected {
        let c = observed.count(k);
        listed_mass += p;
        listed_obs += c;
        o += c as f64;
        e += p * n;
        if e >= min_cell {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    let rest_e = (1.0 - listed_mass).max(0.0) * n;
    let rest_o = (observed.total() - listed_obs) as f64;
    o += rest_o;
    e += rest_e;
    if e >= min_cell || cells.is_empty() {
        cells.push((o, e));
    } else if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    if cells.len() < 2 {
        return Err(Error::DegeneratePooling);
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = cells.len() - 1;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_sf(statistic, dof), cells: cells.len() })
}

/// Pearson homogeneity test of two samples over the same cells.
///
/// Cells are pooled in key order until the pooled count over both samples
/// reaches `min_cell`; a short tail is merged into the last cell.
pub fn chi_square_two_sample<K: Ord + Clone>(a: &EmpiricalDist<K>, b: &EmpiricalDist<K>, min_cell: f64) -> Result<ChiSquare> {
    let (na, nb) = (a.total() as f64, b.total() as f64);
    if a.total() == 0 || b.total() == 0 {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut keys: Vec<&K> = a.counts.keys().chain(b.counts.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for k in keys {
        ca += a.count(k) as f64;
        cb += b.count(k) as f64;
        if ca + cb >= min_cell {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => cells.push((ca, cb)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::DegeneratePooling);
    }
    let (ra, rb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let statistic: f64 = cells.iter().map(|&(x, y)| (x * ra - y * rb).powi(2) / (x + y)).sum();
    let dof = cells.len() - 1;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_sf(statistic, dof), cells: cells.len() })
}

/// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty(), "ks_statistic needs at least one sample");
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Hill estimate of the tail index from the `top_count` largest samples,
/// relative to the next order statistic. An all-equal top set gives `+inf`.
pub fn hill_estimator(samples: &[f64], top_count: usize) -> Result<f64> {
    if top_count < 10 {
        return Err(Error::InsufficientData(format!("top_count {top_count} < 10")));
    }
    if samples.len() <= top_count {
        return Err(Error::InsufficientData(format!(
            "{} samples cannot supply {} order statistics plus a threshold",
            samples.len(),
            top_count
        )));
    }
    let mut xs = samples.to_vec();
    let pivot = xs.len() - top_count - 1;
    xs.select_nth_unstable_by(pivot, f64::total_cmp);
    let threshold = xs[pivot];
    if threshold <= 0.0 {
        return Err(Error::NonPositiveSample(threshold));
    }
    let mean = xs[pivot + 1..].iter().map(|&x| (x / threshold).ln()).sum::<f64>() / top_count as f64;
    Ok(if mean == 0.0 { f64::INFINITY } else { 1.0 / mean })
}

/// Streaming mean and variance (Welford), mergeable across shards.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.m2 / (self.n - 1) as f64 }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.n == 0 { f64::INFINITY } else { (self.variance() / self.n as f64).sqrt() }
    }
}

impl FromIterator<f64> for MeanVar {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Self::new();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(v: &[(u32, f64)]) -> BTreeMap<u32, f64> {
        v.iter().copied().collect()
    }

    #[test]
    fn tv_examples() {
        let p = map(&[(0, 0.5), (1, 0.5)]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        assert_eq!(tv_distance(&p, &map(&[(0, 1.0)])), 0.5);
        assert_eq!(tv_distance(&map(&[(0, 1.0)]), &map(&[(1, 1.0)])), 1.0);
    }

    #[test]
    fn chi_square_examples() {
        let expected = map(&[(0, 0.5), (1, 0.5)]);
        let mut obs = EmpiricalDist::new();
        obs.add(0, 60);
        obs.add(1, 40);
        let r = chi_square_gof(&obs, &expected, 5.0).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert_eq!(r.dof, 1);

        let mut exact = EmpiricalDist::new();
        exact.add(0, 50);
        exact.add(1, 50);
        let r = chi_square_gof(&exact, &expected, 5.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi_square_pooling() {
        // tiny cells pool together; everything in one cell is rejected
        let expected = map(&[(0, 0.01), (1, 0.01), (2, 0.98)]);
        let mut obs = EmpiricalDist::new();
        obs.add(0, 1);
        obs.add(2, 99);
        assert!(matches!(chi_square_gof(&obs, &expected, 5.0), Err(Error::DegeneratePooling)));
        let r = chi_square_gof(&obs, &map(&[(0, 0.04), (1, 0.04), (2, 0.5)]), 5.0).unwrap();
        // cells: {0,1}, {2}, remainder 0.42
        assert_eq!(r.cells, 3);
    }

    #[test]
    fn two_sample_chi_square() {
        let a: EmpiricalDist<u32> = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1].into_iter().collect();
        let same = chi_square_two_sample(&a, &a, 5.0).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.dof, 1);
        // 2x2 table (30, 10; 10, 30): statistic 20
        let mut x = EmpiricalDist::new();
        x.add(0u32, 30);
        x.add(1, 10);
        let mut y = EmpiricalDist::new();
        y.add(0u32, 10);
        y.add(1, 30);
        let c = chi_square_two_sample(&x, &y, 5.0).unwrap();
        assert!((c.statistic - 20.0).abs() < 1e-12);
    }

    #[test]
    fn ks_examples() {
        let n = 1000;
        let qs: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        assert!(ks_statistic(&qs, |x| x) <= 0.5 / n as f64 + 1e-15);
        assert_eq!(ks_statistic(&[0.0], |x: f64| ((x + 1.0) / 2.0).clamp(0.0, 1.0)), 0.5);
        let c = 0.3;
        assert!((ks_statistic(&[c; 7], |x: f64| x.clamp(0.0, 1.0)) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn two_sample_ks() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b: Vec<f64> = (100..200).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &b), 1.0);
    }

    #[test]
    fn hill_examples() {
        let alpha = 2.5;
        let n = 100_000;
        let top = 2_000;
        // Pareto quantiles (1 - u)^(-1/alpha) on a midpoint grid
        let xs: Vec<f64> = (0..n).map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-1.0 / alpha)).collect();
        let h = hill_estimator(&xs, top).unwrap();
        assert!((h - alpha).abs() < 5.0 * alpha / top as f64, "{h}");
        let scaled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        assert!((hill_estimator(&scaled, top).unwrap() - h).abs() < 1e-9);
        assert_eq!(hill_estimator(&[3.0; 50], 20).unwrap(), f64::INFINITY);
        assert!(matches!(hill_estimator(&[0.0; 50], 20), Err(Error::NonPositiveSample(_))));
        assert!(hill_estimator(&xs, 5).is_err());
    }

    #[test]
    fn mean_var_merge() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let all: MeanVar = xs.iter().copied().collect();
        let mut a: MeanVar = xs[..300].iter().copied().collect();
        let b: MeanVar = xs[300..].iter().copied().collect();
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    fn pmf_strategy() -> impl Strategy<Value = BTreeMap<u32, f64>> {
        proptest::collection::vec(0.0f64..1.0, 1..8).prop_map(|w| {
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            w.into_iter().enumerate().map(|(i, x)| (i as u32, x / s)).collect()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(p in pmf_strategy(), q in pmf_strategy(), r in pmf_strategy()) {
            let pq = tv_distance(&p, &q);
            prop_assert!((pq - tv_distance(&q, &p)).abs() < 1e-15);
            prop_assert!(pq <= tv_distance(&p, &r) + tv_distance(&r, &q) + 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        }
    }
}
