//! Acceptance suites shared by the `acceptance` test target and the CLI.
//!
//! Each suite runs one block of checks at full size and returns the measured
//! quantities next to their tolerances. Every Monte Carlo draw is addressed
//! through `(seed, stream)`, so a report is reproducible regardless of the
//! number of worker threads.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::bicoupling::{
    coupling_check, jump_time_only, scaled_fixed_degrees, scaling_from_time, scaling_limit_cdf, scaling_statistic,
    simulate_bi, BiTrajectory,
};
use crate::error::{Error, Result};
use crate::limitlaw::{pgf_numeric, sample_limit_degree, Conditional, LimitSample, NegBinomial};
use crate::model::{DegreeVector, GrowthState};
use crate::par;
use crate::params::ModelParams;
use crate::recursion::{marginal_closed_form, marginal_tail, marginalize, solve_joint_pmf};
use crate::regvar::{
    empirical_tail_box, gamma_shape, hill_tail_index, laplace_at, laplace_limit, tail_box_hits, tail_measure_box,
    TailConfig, XSampler, XVectorSample, DEFAULT_Z_BIG,
};
use crate::rng::{clock_rng, selection_rng, stream_rng};
use crate::stats::{chi_square_gof, gamma_cdf, ks_statistic, median, tv_distance, EmpiricalDist, MeanVar};
use crate::SCHEMA;

/// Suite names in criterion order.
pub const SUITES: [&str; 12] = [
    "identities",
    "recursion",
    "slln",
    "sampler",
    "nb-sums",
    "pgf",
    "gamma",
    "hill",
    "tail",
    "coupling",
    "scaling",
    "common-rate",
];

pub const DEFAULT_SEED: u64 = 20_240_601;

const SHARD: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Below,
    AtMost,
    Above,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub seed: u64,
    pub passed: bool,
    /// Diagnostics are reported but do not decide the verdict.
    pub gating: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, measured: f64, bound: Bound, tolerance: f64, seed: u64) -> Self {
        let passed = match bound {
            Bound::Below => measured < tolerance,
            Bound::AtMost => measured <= tolerance,
            Bound::Above => measured > tolerance,
        };
        Self { name: name.into(), measured, bound, tolerance, seed, passed, gating: true }
    }

    fn diagnostic(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub criterion: usize,
    pub seconds: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Run one suite by name.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let criterion = SUITES.iter().position(|&s| s == name).ok_or_else(|| Error::UnknownSuite(name.to_string()))? + 1;
    let start = Instant::now();
    let checks = match name {
        "identities" => identities(seed)?,
        "recursion" => recursion(seed)?,
        "slln" => slln(seed)?,
        "sampler" => sampler(seed)?,
        "nb-sums" => nb_sums(seed)?,
        "pgf" => pgf(seed)?,
        "gamma" => gamma(seed)?,
        "hill" => hill(seed)?,
        "tail" => tail(seed)?,
        "coupling" => coupling(seed)?,
        "scaling" => scaling(seed)?,
        "common-rate" => common_rate(seed)?,
        _ => unreachable!("name resolved above"),
    };
    let passed = checks.iter().filter(|c| c.gating).all(|c| c.passed);
    Ok(SuiteReport { suite: name.to_string(), criterion, seconds: start.elapsed().as_secs_f64(), passed, checks })
}

/// Run the named suites, or all of them when `names` is empty. Names are
/// checked before anything runs.
pub fn run<S: AsRef<str>>(names: &[S], seed: u64) -> Result<Report> {
    let selected: Vec<&str> = if names.is_empty() { SUITES.to_vec() } else { names.iter().map(|s| s.as_ref()).collect() };
    if let Some(bad) = selected.iter().find(|s| !SUITES.contains(s)) {
        return Err(Error::UnknownSuite(bad.to_string()));
    }
    let suites = selected.iter().map(|s| run_suite(s, seed)).collect::<Result<Vec<_>>>()?;
    let passed = suites.iter().all(|s| s.passed);
    Ok(Report { schema: SCHEMA, seed, passed, suites })
}

fn params(k: usize, delta: f64) -> ModelParams {
    ModelParams::new(k, delta).expect("grid parameters are valid")
}

const DELTAS: [f64; 4] = [-0.5, 0.0, 1.0, 2.5];

fn full_grid() -> Vec<(usize, f64)> {
    (0..=3).flat_map(|k| DELTAS.iter().map(move |&d| (k, d))).collect()
}

fn to_degree_vector(d: &[u64]) -> DegreeVector {
    DegreeVector::new(&d.iter().map(|&v| v as u32).collect::<Vec<_>>())
}

/// `f(size, rng)` for every shard of `count` draws, stream `stream_base + s`
/// for shard `s`, returned in shard order.
fn sharded<T, F>(count: u64, seed: u64, stream_base: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut crate::rng::SimRng) -> T + Sync + Send,
{
    let shards = par::shard_sizes(count, SHARD);
    par::map_indexed(shards.len() as u64, |s| {
        let mut rng = stream_rng(seed, stream_base + s);
        f(shards[s as usize], &mut rng)
    })
}

// 1. exact combinatorial identities along every step

fn identities(seed: u64) -> Result<Vec<CheckResult>> {
    const N: u64 = 10_000;
    const SEEDS: u64 = 10;
    let start = Instant::now();
    let grid = full_grid();
    let bad = par::map_indexed(grid.len() as u64 * SEEDS, |j| {
        let (k, d) = grid[(j / SEEDS) as usize];
        let p = params(k, d);
        let mut g = GrowthState::new(p.clone());
        let mut bad = u64::from(g.simplex_count() as u64 != p.simplex_count(0) || g.degree_sum() != p.degree_sum(0));
        g.run_with(N, &mut selection_rng(seed, j % SEEDS), |s, _| {
            let n = s.step_count();
            if s.simplex_count() as u64 != p.simplex_count(n) || s.degree_sum() != p.degree_sum(n) {
                bad += 1;
            }
        });
        bad + u64::from(g.recount_degree_sum() != p.degree_sum(N))
    });
    let seconds = start.elapsed().as_secs_f64();
    Ok(vec![
        CheckResult::new("identity_violations", bad.iter().sum::<u64>() as f64, Bound::AtMost, 0.0, seed),
        CheckResult::new("runtime_seconds", seconds, Bound::Below, 30.0, seed),
    ])
}

// 2. recursion base case, worked values and the marginal closed form

fn recursion(seed: u64) -> Result<Vec<CheckResult>> {
    const CAP: u32 = 60;
    let mut base_err: f64 = 0.0;
    let mut closed_err: f64 = 0.0;
    for (k, d) in full_grid() {
        let p = params(k, d);
        let table = solve_joint_pmf(&p, CAP)?;
        let expected = p.tau() / (p.tau() + p.b(0) + d);
        base_err = base_err.max((table.get(&DegreeVector::from(p.minimal_vector())) - expected).abs());
        let marginal = marginalize(&table, 0);
        for i in (k as u32 + 1)..=CAP {
            let m = marginal.get(&i).copied().unwrap_or(0.0);
            closed_err = closed_err.max((m - marginal_closed_form(&p, i)).abs());
        }
    }
    let p = params(1, 0.0);
    let table = solve_joint_pmf(&p, 3)?;
    let worked = [([2, 1], 3.0 / 5.0), ([3, 1], 3.0 / 35.0), ([3, 2], 3.0 / 35.0)]
        .iter()
        .map(|(v, e)| (table.get(&DegreeVector::new(v)) - e).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        CheckResult::new("base_case_max_abs_error", base_err, Bound::Below, 1e-12, seed),
        CheckResult::new("worked_values_max_abs_error", worked, Bound::Below, 1e-12, seed),
        CheckResult::new("closed_form_max_abs_error", closed_err, Bound::Below, 1e-10, seed),
    ])
}

// 3. strong law for the empirical joint degree pmf on one trajectory

fn restrict<K: Ord + Clone>(dist: &EmpiricalDist<K>, keep: impl Fn(&K) -> bool, total: u64) -> BTreeMap<K, f64> {
    dist.iter().filter(|(k, _)| keep(k)).map(|(k, &c)| (k.clone(), c as f64 / total as f64)).collect()
}

fn slln(seed: u64) -> Result<Vec<CheckResult>> {
    const N: u64 = 200_000;
    const CAP: u32 = 20;
    let start = Instant::now();
    let p = params(1, 0.0);
    let mut g = GrowthState::new(p.clone());
    g.run(N, &mut selection_rng(seed, 0));
    let counts = g.degree_counts();
    let empirical = restrict(&counts, |v| v.get(0) <= CAP, counts.total());
    let table = solve_joint_pmf(&p, CAP)?;
    let tv = tv_distance(&empirical, table.entries());
    let seconds = start.elapsed().as_secs_f64();
    Ok(vec![
        CheckResult::new("tv_restricted_i0_le_20", tv, Bound::Below, 0.02, seed),
        CheckResult::new("runtime_seconds", seconds, Bound::Below, 60.0, seed),
    ])
}

// 4. mixture sampler against the recursion table

fn limit_degree_pmf(p: &ModelParams, cap: u32, samples: u64, seed: u64, stream_base: u64) -> BTreeMap<DegreeVector, f64> {
    let parts = sharded(samples, seed, stream_base, |size, rng| {
        let mut dist = EmpiricalDist::new();
        for _ in 0..size {
            let s = sample_limit_degree(p, rng);
            if s.d[0] <= cap as u64 {
                dist.add(to_degree_vector(&s.d), 1);
            }
        }
        dist
    });
    let mut dist = EmpiricalDist::new();
    for d in &parts {
        dist.merge(d);
    }
    restrict(&dist, |_| true, samples)
}

fn sampler(seed: u64) -> Result<Vec<CheckResult>> {
    const SAMPLES: u64 = 1_000_000;
    let mut out = Vec::new();
    for (k, d, cap, tol, stream) in [(1, 0.0, 20, 0.01, 0), (2, 1.0, 15, 0.015, 1 << 20)] {
        let p = params(k, d);
        let empirical = limit_degree_pmf(&p, cap, SAMPLES, seed, stream);
        let table = solve_joint_pmf(&p, cap)?;
        let tv = tv_distance(&empirical, table.entries());
        out.push(CheckResult::new(format!("tv_k{k}_delta{d}_cap{cap}"), tv, Bound::Below, tol, seed));
    }
    Ok(out)
}

// 5. compound sums of the branching counts are negative binomial given z

fn nb_sums(seed: u64) -> Result<Vec<CheckResult>> {
    const DRAWS: u64 = 100_000;
    let mut out = Vec::new();
    let mut stream = 0u64;
    for (k, d) in [(1, 0.0), (2, 0.0), (2, 1.0)] {
        let p = params(k, d);
        for z in [1.5, 3.0, 10.0] {
            let cond = Conditional::new(&p, z)?;
            for m in 1..=k {
                for i in 0..m {
                    let law = NegBinomial::new((1.0 + d) / p.b(i), z.powf(-p.b(i) / p.b(0)))?;
                    let parts = sharded(DRAWS, seed, stream << 8, |size, rng| {
                        (0..size).map(|_| cond.sample_compound(m, i, rng)).collect::<EmpiricalDist<u64>>()
                    });
                    stream += 1;
                    let mut observed = EmpiricalDist::new();
                    for part in &parts {
                        observed.merge(part);
                    }
                    let mut expected = BTreeMap::new();
                    let mut mass = 0.0;
                    let mut l = 0u64;
                    while mass < 1.0 - 1e-12 && l < 1_000_000 {
                        let q = law.pmf(l);
                        expected.insert(l, q);
                        mass += q;
                        l += 1;
                    }
                    let gof = chi_square_gof(&observed, &expected, 5.0)?;
                    out.push(CheckResult::new(
                        format!("chi2_p_value_k{k}_delta{d}_z{z}_m{m}_i{i}"),
                        gof.p_value,
                        Bound::Above,
                        1e-3,
                        seed,
                    ));
                }
            }
        }
    }
    Ok(out)
}

// 6. pgf by quadrature, by the recursion table and by Monte Carlo

fn pgf_grid(k: usize) -> Vec<Vec<f64>> {
    let levels = [0.3, 0.6, 0.9];
    let mut points = vec![Vec::new()];
    for _ in 0..=k {
        points = points
            .into_iter()
            .flat_map(|p| levels.iter().map(move |&x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    points
}

fn monomial(x: &[f64], d: &[u64]) -> f64 {
    x.iter().zip(d).map(|(&xi, &di)| xi.powf(di as f64)).product()
}

fn pgf(seed: u64) -> Result<Vec<CheckResult>> {
    const SAMPLES: u64 = 200_000;
    let mut out = Vec::new();
    for (k, d, cap, stream) in [(0, 0.0, 400, 0u64), (1, 0.0, 200, 1 << 20), (2, 1.0, 60, 2 << 20)] {
        let p = params(k, d);
        let points = pgf_grid(k);
        let table = solve_joint_pmf(&p, cap)?;
        let tail = marginal_tail(&p, cap);

        let parts = sharded(SAMPLES, seed, stream, |size, rng| {
            let mut acc = vec![MeanVar::new(); points.len()];
            for _ in 0..size {
                let s = sample_limit_degree(&p, rng);
                for (a, x) in acc.iter_mut().zip(&points) {
                    a.push(monomial(x, &s.d));
                }
            }
            acc
        });
        let mut mc = vec![MeanVar::new(); points.len()];
        for part in &parts {
            for (a, b) in mc.iter_mut().zip(part) {
                a.merge(b);
            }
        }

        let mut table_excess: f64 = f64::NEG_INFINITY;
        let mut mc_z: f64 = 0.0;
        for (x, m) in points.iter().zip(&mc) {
            let numeric = pgf_numeric(&p, x)?;
            let table_sum: f64 = table
                .entries()
                .iter()
                .map(|(v, &q)| q * x.iter().zip(v.as_slice()).map(|(&xi, &vi)| xi.powi(vi as i32)).product::<f64>())
                .sum();
            let bound = x[0].powi(cap as i32 + 1) * tail;
            table_excess = table_excess.max((numeric - table_sum).abs() - bound);
            mc_z = mc_z.max((numeric - m.mean()).abs() / m.se());
        }
        out.push(CheckResult::new(format!("table_excess_over_tail_bound_k{k}"), table_excess, Bound::Below, 1e-4, seed));
        out.push(CheckResult::new(format!("mc_max_abs_z_k{k}"), mc_z, Bound::Below, 3.0, seed));
    }
    Ok(out)
}

// 7. Gamma marginals and joint Laplace transform of the large-z limit vector

fn x_samples(p: &ModelParams, count: u64, seed: u64, stream_base: u64) -> Result<Vec<XVectorSample>> {
    let sampler = XSampler::new(p, DEFAULT_Z_BIG)?;
    let parts = sharded(count, seed, stream_base, |size, rng| {
        (0..size).map(|_| sampler.sample(rng)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

fn gamma(seed: u64) -> Result<Vec<CheckResult>> {
    const DRAWS: u64 = 100_000;
    let mut out = Vec::new();
    let cases = [(0, 0.0, true), (1, 0.0, true), (1, 1.0, true), (2, 1.0, false)];
    for (idx, (k, d, gating)) in cases.into_iter().enumerate() {
        let p = params(k, d);
        let xs = x_samples(&p, DRAWS, seed, (idx as u64) << 20)?;
        let mut ks: f64 = 0.0;
        for i in 0..=k {
            let coord: Vec<f64> = xs.iter().map(|s| s.s[i]).collect();
            let shape = gamma_shape(&p, i);
            ks = ks.max(ks_statistic(&coord, |x| gamma_cdf(shape, x)));
        }
        let thetas: Vec<Vec<f64>> = pgf_grid(k)
            .into_iter()
            .map(|x| x.iter().map(|&v| if v < 0.5 { 0.5 } else if v < 0.8 { 1.0 } else { 2.0 }).collect())
            .collect();
        let mut z_max: f64 = 0.0;
        let mut bias: f64 = 0.0;
        for th in &thetas {
            let mv: MeanVar = xs.iter().map(|s| (-s.s.iter().zip(th).map(|(a, b)| a * b).sum::<f64>()).exp()).collect();
            let limit = laplace_limit(&p, th);
            z_max = z_max.max((mv.mean() - limit).abs() / mv.se());
            bias = bias.max((laplace_at(&p, DEFAULT_Z_BIG, th) - limit).abs());
        }
        let tag = format!("k{k}_delta{d}");
        let ks_check = CheckResult::new(format!("ks_max_coordinate_{tag}"), ks, Bound::Below, 0.01, seed);
        let lt_check = CheckResult::new(format!("laplace_max_abs_z_{tag}"), z_max, Bound::Below, 3.0, seed);
        if gating {
            out.push(ks_check);
            out.push(lt_check);
        } else {
            out.push(ks_check.diagnostic());
            out.push(lt_check.diagnostic());
        }
        out.push(CheckResult::new(format!("laplace_finite_z_bias_{tag}"), bias, Bound::Below, 1e-2, seed).diagnostic());
    }
    Ok(out)
}

// 8. Hill estimates of the marginal tail indices

fn limit_samples(p: &ModelParams, count: u64, seed: u64, stream_base: u64) -> Vec<LimitSample> {
    sharded(count, seed, stream_base, |size, rng| {
        (0..size).map(|_| sample_limit_degree(p, rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

fn hill(seed: u64) -> Result<Vec<CheckResult>> {
    const SAMPLES: u64 = 1_000_000;
    const TOP: f64 = 0.01;
    let mut out = Vec::new();
    for (k, d, coord, target, tol, stream) in
        [(0, 0.0, 0, 2.0, 0.15, 0u64), (1, 0.0, 0, 1.5, 0.15, 1 << 20), (1, 0.0, 1, 3.0, 0.20, 1 << 20)]
    {
        let p = params(k, d);
        let xs: Vec<f64> = limit_samples(&p, SAMPLES, seed, stream).iter().map(|s| s.d[coord] as f64).collect();
        let est = hill_tail_index(&xs, TOP)?;
        out.push(CheckResult::new(
            format!("hill_relative_error_k{k}_delta{d}_coord{coord}"),
            (est / target - 1.0).abs(),
            Bound::Below,
            tol,
            seed,
        ));
    }
    Ok(out)
}

// 9. tail measure of boxes: empirical scaling against the quadrature

fn tail(seed: u64) -> Result<Vec<CheckResult>> {
    const SAMPLES: u64 = 10_000_000;
    const INNER: u64 = 100_000;
    let p = params(1, 0.0);
    let boxes = [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]];
    let scales = [100.0, 1000.0];

    let parts = sharded(SAMPLES, seed, 0, |size, rng| {
        let mut hits = [[0u64; 2]; 3];
        let mut chunk = Vec::with_capacity(1024);
        let mut left = size;
        while left > 0 {
            let take = left.min(1024);
            chunk.clear();
            chunk.extend((0..take).map(|_| sample_limit_degree(&p, rng)));
            for (bi, x) in boxes.iter().enumerate() {
                for (hi, &h) in scales.iter().enumerate() {
                    hits[bi][hi] += tail_box_hits(&p, &chunk, h, x);
                }
            }
            left -= take;
        }
        hits
    });
    let mut hits = [[0u64; 2]; 3];
    for part in &parts {
        for b in 0..3 {
            for h in 0..2 {
                hits[b][h] += part[b][h];
            }
        }
    }

    let inner = x_samples(&p, INNER, seed, 1 << 32)?;
    let mut out = Vec::new();
    for (bi, x) in boxes.iter().enumerate() {
        let est = tail_measure_box(&p, x, &inner, TailConfig::default())?;
        let disc: Vec<f64> = scales
            .iter()
            .enumerate()
            .map(|(hi, &h)| (h * hits[bi][hi] as f64 / SAMPLES as f64 / est.quadrature - 1.0).abs())
            .collect();
        let tag = format!("x{}_{}", x[0], x[1]);
        out.push(CheckResult::new(format!("relative_discrepancy_h1000_{tag}"), disc[1], Bound::Below, 0.2, seed));
        out.push(CheckResult::new(format!("discrepancy_h1000_minus_h100_{tag}"), disc[1] - disc[0], Bound::AtMost, 0.0, seed));
        out.push(
            CheckResult::new(format!("quadrature_vs_mean_relative_{tag}"), (est.quadrature / est.value - 1.0).abs(), Bound::Below, 0.01, seed)
                .diagnostic(),
        );
    }
    // the reference helper and the streamed counts agree on a small batch
    let batch = limit_samples(&p, 1_000, seed, 1 << 33);
    let direct = empirical_tail_box(&p, &batch, 1.0, &boxes[0])?;
    let counted = tail_box_hits(&p, &batch, 1.0, &boxes[0]) as f64 / 1_000.0;
    out.push(CheckResult::new("helper_consistency", (direct - counted).abs(), Bound::AtMost, 0.0, seed).diagnostic());
    Ok(out)
}

// 10. coupling with the birth-immigration construction

fn coupling(seed: u64) -> Result<Vec<CheckResult>> {
    let p = params(1, 0.0);
    let report = coupling_check(&p, 15, 100_000, seed)?;
    let mut mismatches = 0u64;
    for (k, d) in [(0, 0.5), (1, 0.0), (2, 1.0), (3, -0.5)] {
        let q = params(k, d);
        for r in 0..10 {
            let mut g = GrowthState::new(q.clone());
            let mut labels = Vec::new();
            g.run_with(1_000, &mut selection_rng(seed, r), |_, rec| labels.push(rec.chosen));
            let t = simulate_bi(&q, 1_000, &mut selection_rng(seed, r), &mut clock_rng(seed, r));
            mismatches += u64::from(t.chosen_labels() != labels.as_slice());
            mismatches += u64::from(t.ledger().degree_counts().pmf() != g.degree_counts().pmf());
        }
    }
    let mut out = vec![
        CheckResult::new("tv_label1_n15", report.tv, Bound::Below, 0.02, seed),
        CheckResult::new("invariant_failures", f64::from(u8::from(!report.invariants_hold)), Bound::AtMost, 0.0, seed),
        CheckResult::new("shared_stream_mismatches", mismatches as f64, Bound::AtMost, 0.0, seed),
    ];
    if let Some(chi) = report.chi_square {
        out.push(CheckResult::new("chi2_p_value_label1_n15", chi.p_value, Bound::Above, 1e-3, seed).diagnostic());
    }
    Ok(out)
}

// 11. scaling law of the jump times

fn scaling(seed: u64) -> Result<Vec<CheckResult>> {
    const N: u64 = 10_000;
    const REPLICATES: u64 = 10_000;
    let mut out = Vec::new();
    for (k, d) in [(1, 0.0), (2, 1.0)] {
        let p = params(k, d);
        let stats = par::map_indexed(REPLICATES, |r| scaling_from_time(&p, N, jump_time_only(&p, N, &mut clock_rng(seed, r))));
        let ks = ks_statistic(&stats, |y| scaling_limit_cdf(&p, y));
        out.push(CheckResult::new(format!("ks_k{k}_delta{d}"), ks, Bound::Below, 0.05, seed));
        let mut mismatches = 0u64;
        for r in 0..5 {
            let t = simulate_bi(&p, 2_000, &mut selection_rng(seed, r), &mut clock_rng(seed, r));
            let alone = jump_time_only(&p, 2_000, &mut clock_rng(seed, r));
            mismatches += u64::from(t.jump_time(2_000)? != alone);
        }
        out.push(CheckResult::new(format!("clock_only_mismatches_k{k}_delta{d}"), mismatches as f64, Bound::AtMost, 0.0, seed));
    }
    Ok(out)
}

// 12. stabilisation of one fixed simplex under the common scaling

/// Label-1 row and scalar statistic of one path at both horizons.
struct PathDrift {
    v1: Vec<f64>,
    v2: Vec<f64>,
    s1: f64,
    s2: f64,
}

fn common_rate(seed: u64) -> Result<Vec<CheckResult>> {
    const N1: u64 = 10_000;
    const N2: u64 = 100_000;
    const PATHS: u64 = 200;
    let p = params(1, 0.0);
    let k = p.k();
    let paths = par::map_indexed(PATHS, |r| -> Result<PathDrift> {
        let mut sel = selection_rng(seed, r);
        let mut clk = clock_rng(seed, r);
        let mut t = BiTrajectory::new(p.clone());
        t.extend(N1, &mut sel, &mut clk);
        let v1 = scaled_fixed_degrees(&t, N1, 1)?;
        let s1 = scaling_statistic(&t, N1)?;
        t.extend(N2 - N1, &mut sel, &mut clk);
        let v2 = scaled_fixed_degrees(&t, N2, 1)?;
        let s2 = scaling_statistic(&t, N2)?;
        Ok(PathDrift { v1, v2, s1, s2 })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let column = |f: &dyn Fn(&PathDrift) -> f64| median(&paths.iter().map(f).collect::<Vec<_>>());

    let ratio = |v: &[f64]| v[k] / v[0];
    let mut out = vec![
        CheckResult::new("median_ratio_drift_label1", column(&|x| (ratio(&x.v2) / ratio(&x.v1) - 1.0).abs()), Bound::Below, 0.1, seed),
        CheckResult::new("median_scalar_drift", column(&|x| (x.s2 / x.s1 - 1.0).abs()), Bound::Below, 0.1, seed),
        CheckResult::new("median_top_coordinate_drift", column(&|x| (x.v2[k] / x.v1[k] - 1.0).abs()), Bound::Below, 0.1, seed)
            .diagnostic(),
    ];
    // growth exponent of each unscaled coordinate between the two horizons
    let decades = (N2 as f64 / N1 as f64).log10();
    for m in 0..=k {
        let exponent = column(&|x| (x.v2[m] / x.v1[m]).log10() / decades) + 1.0 / p.tau();
        let expected = p.b(m) / p.tau();
        out.push(
            CheckResult::new(format!("growth_exponent_coord{m}_minus_b{m}_over_tau"), (exponent - expected).abs(), Bound::Below, 0.05, seed)
                .diagnostic(),
        );
    }
    Ok(out)
}

/// One line per suite: `criterion N <suite>: PASS|FAIL (...)`.
pub fn summary_line(s: &SuiteReport) -> String {
    let failing: Vec<&str> = s.checks.iter().filter(|c| c.gating && !c.passed).map(|c| c.name.as_str()).collect();
    let verdict = if s.passed { "PASS" } else { "FAIL" };
    if failing.is_empty() {
        format!("criterion {:>2} {:<12} {verdict} ({} checks, {:.1}s)", s.criterion, s.suite, s.checks.len(), s.seconds)
    } else {
        format!("criterion {:>2} {:<12} {verdict} (failing: {}, {:.1}s)", s.criterion, s.suite, failing.join(", "), s.seconds)
    }
}
