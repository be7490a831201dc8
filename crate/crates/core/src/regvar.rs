//! Multivariate regular variation of the limiting degree vector: the Gamma
//! limit vector, its Laplace transform, the tail measure of boxes, and tail
//! index estimates.

use rand::Rng;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::limitlaw::{Conditional, LimitSample};
use crate::params::ModelParams;
use crate::quad::{integrate, QuadConfig};
use crate::stats::{gamma_sf, hill_estimator, ln_gamma, MeanVar};

pub const DEFAULT_Z_BIG: f64 = 1e6;

/// `g_0 = 1 + theta_0`, `g_m = g_(m-1)^(b_m / b_(m-1)) + theta_m`.
pub fn g_recursion(params: &ModelParams, theta: &[f64], m: usize) -> f64 {
    let b = params.b_all();
    let mut g = 1.0 + theta[0];
    for j in 1..=m {
        g = g.powf(b[j] / b[j - 1]) + theta[j];
    }
    g
}

/// Laplace transform `E[exp(-theta . X)]` of the limit vector `X`.
pub fn laplace_limit(params: &ModelParams, theta: &[f64]) -> f64 {
    let b = params.b_all();
    let mut g = 1.0 + theta[0];
    let mut out = g.powf(-(1.0 + params.delta()) / b[0]);
    for m in 1..=params.k() {
        g = g.powf(b[m] / b[m - 1]) + theta[m];
        out *= g.powf(-(1.0 + params.delta()) / b[m]);
    }
    out
}

/// Exact Laplace transform of `(z^(-b_i/b_0) d_i)_i` with `d` the limiting
/// degree vector conditioned on `Z = z`. Tends to [`laplace_limit`] as `z -> inf`.
pub fn laplace_at(params: &ModelParams, z: f64, theta: &[f64]) -> f64 {
    let k = params.k();
    let b = params.b_all();
    let e = 1.0 + params.delta();
    let a: SmallVec<[f64; 6]> = b.iter().map(|&bm| (-bm / b[0] * z.ln()).exp()).collect();
    let x: SmallVec<[f64; 6]> = (0..=k).map(|i| (-theta[i] * a[i]).exp()).collect();
    let mut h = x[0] + z * -(-theta[0] * a[0]).exp_m1();
    let mut out = h.powf(-e / b[0]) * x[0].powi(k as i32 + 1);
    for m in 1..=k {
        h = -(-theta[m] * a[m]).exp_m1() / a[m] + x[m] * h.powf(b[m] / b[m - 1]);
        out *= h.powf(-e / b[m]) * x[m].powi((k - m + 1) as i32);
    }
    out
}

/// `(x y_0, x^(b_1/b_0) y_1, ..., x^(b_k/b_0) y_k)`.
pub fn chi_map(params: &ModelParams, x: f64, y: &[f64]) -> Vec<f64> {
    let b = params.b_all();
    y.iter().zip(b).map(|(&yi, &bi)| x.powf(bi / b[0]) * yi).collect()
}

/// A draw approximating the limit vector `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XVectorSample {
    pub s: SmallVec<[f64; 6]>,
}

/// Draws the degree vector at a fixed large `z` and rescales coordinate `i`
/// by `z^(-b_i/b_0)`.
#[derive(Clone, Debug)]
pub struct XSampler {
    cond: Conditional,
    scale: SmallVec<[f64; 6]>,
}

impl XSampler {
    pub fn new(params: &ModelParams, z_big: f64) -> Result<Self> {
        let cond = Conditional::new(params, z_big)?;
        let scale = (0..=params.k()).map(|i| cond.a(i)).collect();
        Ok(Self { cond, scale })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> XVectorSample {
        let d = self.cond.sample_degree(rng);
        XVectorSample { s: d.iter().zip(&self.scale).map(|(&v, &c)| v as f64 * c).collect() }
    }
}

pub fn sample_x_vector_approx<R: Rng + ?Sized>(params: &ModelParams, z_big: f64, rng: &mut R) -> Result<XVectorSample> {
    Ok(XSampler::new(params, z_big)?.sample(rng))
}

/// Shape of the Gamma law of coordinate `i` of the limit vector.
pub fn gamma_shape(params: &ModelParams, i: usize) -> f64 {
    (params.k() - i + 1) as f64 * (1.0 + params.delta()) / params.b(i)
}

/// Per-sample contribution to the box measure: `min_i (s_i / x_i)^(tau / b_i)`
/// over the constrained coordinates (`x_i > 0`).
fn box_term(params: &ModelParams, x: &[f64], s: &[f64]) -> f64 {
    let tau = params.tau();
    x.iter()
        .zip(s)
        .zip(params.b_all())
        .filter(|((&xi, _), _)| xi > 0.0)
        .map(|((&xi, &si), &bi)| (si / xi).powf(tau / bi))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest `u` for which the sample lies in the box scaled by `u`:
/// `max_i (x_i / s_i)^(b_0 / b_i)`.
fn entry_level(params: &ModelParams, x: &[f64], s: &[f64]) -> f64 {
    let b = params.b_all();
    x.iter()
        .zip(s)
        .zip(b)
        .filter(|((&xi, _), _)| xi > 0.0)
        .map(|((&xi, &si), &bi)| if si > 0.0 { (xi / si).powf(b[0] / bi) } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBoxEstimate {
    pub x: Vec<f64>,
    /// Sample mean of the exact outer integral per inner sample.
    pub value: f64,
    pub se: f64,
    /// Outer integral by trapezoid rule on a `u = e^v` grid against the
    /// empirical inner probability, plus the analytic upper tail.
    pub quadrature: f64,
    /// Bound on the part of the upper tail not resolved by the grid.
    pub truncation_bound: f64,
    pub samples: usize,
}

impl TailBoxEstimate {
    pub fn relative_se(&self) -> f64 {
        self.se / self.value
    }

    /// Whether the Monte Carlo error dominates the quadrature discretisation.
    pub fn se_dominates(&self) -> bool {
        self.se > (self.value - self.quadrature).abs() + self.truncation_bound
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TailConfig {
    pub grid_points: usize,
    /// Upper-tail truncation target relative to the estimate.
    pub tail_tolerance: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self { grid_points: 4_000, tail_tolerance: 1e-4 }
    }
}

/// Tail measure of the box `prod (x_i, inf]` from inner samples of the limit
/// vector. Coordinates with `x_i = 0` are unconstrained.
pub fn tail_measure_box(params: &ModelParams, x: &[f64], inner: &[XVectorSample], cfg: TailConfig) -> Result<TailBoxEstimate> {
    let k = params.k();
    if x.len() != k + 1 {
        return Err(Error::InvalidArgument(format!("box needs {} corners, got {}", k + 1, x.len())));
    }
    if x.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument("box corners must be finite and nonnegative".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::DivergentBox);
    }
    if inner.is_empty() {
        return Err(Error::InsufficientData("no inner samples".into()));
    }
    let alpha = params.alpha();
    let stats: MeanVar = inner.iter().map(|s| box_term(params, x, &s.s)).collect();

    let mut levels: Vec<f64> = inner.iter().map(|s| entry_level(params, x, &s.s)).filter(|u| u.is_finite()).collect();
    levels.sort_by(f64::total_cmp);
    let n = inner.len() as f64;
    let frac_below = |u: f64| levels.partition_point(|&l| l < u) as f64 / n;

    let (quadrature, truncation_bound) = if levels.is_empty() {
        (0.0, 0.0)
    } else {
        let lo = levels[0].max(f64::MIN_POSITIVE);
        // upper end where the unresolved tail is below tolerance
        let target = cfg.tail_tolerance * stats.mean().max(f64::MIN_POSITIVE);
        let top = *levels.last().expect("nonempty");
        let mut hi = lo;
        while hi < top && (1.0 - frac_below(hi)) * hi.powf(-alpha) > target {
            hi *= 1.5;
        }
        let hi = hi.min(top).max(lo * (1.0 + 1e-9));
        let (vlo, vhi) = (lo.ln(), hi.ln());
        let m = cfg.grid_points.max(2);
        let h = (vhi - vlo) / (m - 1) as f64;
        let f = |v: f64| frac_below(v.exp()) * alpha * (-alpha * v).exp();
        let mut body = 0.5 * (f(vlo) + f(vhi));
        for j in 1..m - 1 {
            body += f(vlo + j as f64 * h);
        }
        body *= h;
        let p_hi = frac_below(hi);
        let tail = p_hi * hi.powf(-alpha);
        let bound = (frac_below(f64::INFINITY) - p_hi) * hi.powf(-alpha);
        (body + tail + 0.5 * bound, 0.5 * bound)
    };

    Ok(TailBoxEstimate {
        x: x.to_vec(),
        value: stats.mean(),
        se: stats.se(),
        quadrature,
        truncation_bound,
        samples: inner.len(),
    })
}

/// Box measure when only coordinate `i` is constrained:
/// `x_i^(-tau/b_i) Gamma(a + tau/b_i) / Gamma(a)` with `a` the Gamma shape of
/// coordinate `i`.
pub fn single_axis_box(params: &ModelParams, i: usize, xi: f64) -> f64 {
    let a = gamma_shape(params, i);
    let p = params.tau() / params.b(i);
    (ln_gamma(a + p) - ln_gamma(a) - p * xi.ln()).exp()
}

/// The same quantity as a one-dimensional integral of the Gamma survival
/// function against the Pareto density.
pub fn single_axis_box_quadrature(params: &ModelParams, i: usize, xi: f64) -> Result<f64> {
    let a = gamma_shape(params, i);
    let p = params.tau() / params.b(i);
    let upper = a + 40.0 * a.sqrt() + 200.0;
    let cfg = QuadConfig { rel_tol: 1e-10, abs_tol: 1e-14, max_intervals: 4_000 };
    let r = integrate(|w: f64| gamma_sf(a, w) * w.powf(p - 1.0), 0.0, upper, cfg)?;
    Ok(p * xi.powf(-p) * r.value)
}

/// `h` times the fraction of samples with `d_m > x_m h^(b_m / tau)` for all `m`.
pub fn empirical_tail_box(params: &ModelParams, samples: &[LimitSample], h: f64, x: &[f64]) -> Result<f64> {
    if h < 1.0 {
        return Err(Error::InvalidArgument(format!("scale h must be at least 1, got {h}")));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("no limit samples".into()));
    }
    Ok(h * tail_box_hits(params, samples, h, x) as f64 / samples.len() as f64)
}

/// Number of samples inside the box scaled by `h`.
pub fn tail_box_hits(params: &ModelParams, samples: &[LimitSample], h: f64, x: &[f64]) -> u64 {
    let tau = params.tau();
    let thresholds: SmallVec<[f64; 6]> = x.iter().zip(params.b_all()).map(|(&xi, &bi)| xi * h.powf(bi / tau)).collect();
    samples
        .iter()
        .filter(|s| s.d.iter().zip(&thresholds).all(|(&d, &t)| d as f64 > t))
        .count() as u64
}

/// Hill estimate of the tail index using the top `top_fraction` of the data.
pub fn hill_tail_index(samples: &[f64], top_fraction: f64) -> Result<f64> {
    if samples.len() < 10_000 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 10000", samples.len())));
    }
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("top fraction {top_fraction} outside (0, 1)")));
    }
    let top = (samples.len() as f64 * top_fraction).round() as usize;
    hill_estimator(samples, top)
}
