//! Continuous-time construction from independent birth-immigration
//! processes, one per `k`-simplex, each jumping at rate `value + delta`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DegreeVector, GrowthState, KSimplexRecord, SimplexKey};
use crate::params::ModelParams;
use crate::par;
use crate::rng::{selection_rng, stream_rng};
use crate::stats::{chi_square_two_sample, gamma_cdf, tv_distance, ChiSquare, EmpiricalDist};

/// Total jump rate after `n` events: `(n + 1)(k + 2) + delta (1 + (n + 1)(k + 1))`.
pub fn total_rate(params: &ModelParams, n: u64) -> f64 {
    params.degree_sum(n) as f64 + params.delta() * params.simplex_count(n) as f64
}

/// A run of the coupled processes.
///
/// The process values live in a [`GrowthState`], whose `k`-degree of label
/// `j` is the current value of the process attached to `sigma_j`; its lower
/// ledgers give the degree-equivalent reading of the construction.
#[derive(Clone, Debug)]
pub struct BiTrajectory {
    state: GrowthState,
    jump_times: Vec<f64>,
    chosen: Vec<usize>,
}

impl BiTrajectory {
    pub fn new(params: ModelParams) -> Self {
        Self { state: GrowthState::new(params), jump_times: vec![0.0], chosen: Vec::new() }
    }

    pub fn params(&self) -> &ModelParams {
        self.state.params()
    }

    /// Number of jumps so far.
    pub fn events(&self) -> u64 {
        self.chosen.len() as u64
    }

    /// `T_0 = 0 < T_1 < ... < T_n`.
    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn jump_time(&self, n: u64) -> Result<f64> {
        self.jump_times.get(n as usize).copied().ok_or(Error::BeyondHorizon {
            requested: n as usize,
            available: self.chosen.len(),
        })
    }

    /// Label of the process that jumped at each event.
    pub fn chosen_labels(&self) -> &[usize] {
        &self.chosen
    }

    pub fn registry(&self) -> &[KSimplexRecord] {
        self.state.registry()
    }

    /// Current value of the process of `label`.
    pub fn value(&self, label: usize) -> Result<u32> {
        self.state.k_degree(label)
    }

    /// Event index at which `label` was born.
    pub fn birth_index(&self, label: usize) -> Result<u64> {
        Ok(self.state.record(label)?.birth_step)
    }

    /// Sum of all current process values.
    pub fn total_value(&self) -> u64 {
        self.state.degree_sum()
    }

    pub fn ledger(&self) -> &GrowthState {
        &self.state
    }

    fn record_jump(&mut self, label: usize, dt: f64) {
        self.state.attach(label).expect("jumping label is live");
        self.chosen.push(label);
        let t = *self.jump_times.last().expect("T_0 present") + dt;
        self.jump_times.push(t);
    }

    /// Advance by `events` jumps through the embedded chain: the jumping
    /// process is drawn from `selection` with probability proportional to
    /// `value + delta`, the holding time from `clock` at the total rate.
    pub fn extend<R1, R2>(&mut self, events: u64, selection: &mut R1, clock: &mut R2)
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        for _ in 0..events {
            let n = self.events();
            let label = self.state.select(selection.random::<f64>());
            let e: f64 = Exp1.sample(clock);
            self.record_jump(label, e / total_rate(self.params(), n));
        }
    }

    /// Advance by `events` jumps racing one exponential clock per live process.
    pub fn extend_race<R: Rng + ?Sized>(&mut self, events: u64, rng: &mut R) {
        let delta = self.params().delta();
        for _ in 0..events {
            let mut best = (f64::INFINITY, 0usize);
            for label in 1..=self.state.simplex_count() {
                let rate = self.state.k_degree(label).expect("live") as f64 + delta;
                let e: f64 = Exp1.sample(rng);
                let t = e / rate;
                if t < best.0 {
                    best = (t, label);
                }
            }
            self.record_jump(best.1, best.0);
        }
    }

    /// Values of every process live at event `n`, replayed from the jump record.
    pub fn values_at(&self, n: u64) -> Result<Vec<u32>> {
        if n > self.events() {
            return Err(Error::BeyondHorizon { requested: n as usize, available: self.chosen.len() });
        }
        let live = self.params().simplex_count(n) as usize;
        let mut v = vec![1u32; live];
        for &l in &self.chosen[..n as usize] {
            v[l - 1] += 1;
        }
        Ok(v)
    }
}

/// Embedded-chain simulation with separate selection and clock streams.
pub fn simulate_bi<R1, R2>(params: &ModelParams, steps: u64, selection: &mut R1, clock: &mut R2) -> BiTrajectory
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let mut t = BiTrajectory::new(params.clone());
    t.extend(steps, selection, clock);
    t
}

/// Simulation with one exponential clock per live process.
pub fn simulate_bi_race<R: Rng + ?Sized>(params: &ModelParams, steps: u64, rng: &mut R) -> BiTrajectory {
    let mut t = BiTrajectory::new(params.clone());
    t.extend_race(steps, rng);
    t
}

/// `T_n` alone. The holding times depend only on the event count, so this
/// reproduces the jump times of [`simulate_bi`] driven by the same clock stream.
pub fn jump_time_only<R: Rng + ?Sized>(params: &ModelParams, n: u64, clock: &mut R) -> f64 {
    let mut t = 0.0;
    for i in 0..n {
        let e: f64 = Exp1.sample(clock);
        t += e / total_rate(params, i);
    }
    t
}

/// Rows `(k - m + (1/(k-m+1)) sum_{tau contains suffix_m(sigma_j)} BI_tau(T_n))_m`
/// for every label `j` live at event `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DTildeSequence {
    pub n: u64,
    pub rows: Vec<DegreeVector>,
}

impl DTildeSequence {
    pub fn row(&self, label: usize) -> Result<&DegreeVector> {
        label.checked_sub(1).and_then(|i| self.rows.get(i)).ok_or(Error::UnknownLabel(label))
    }
}

/// The sequence at event `n`, summing process values over all containing simplices.
pub fn dtilde(traj: &BiTrajectory, n: u64) -> Result<DTildeSequence> {
    let k = traj.params().k();
    let values = traj.values_at(n)?;
    let live = values.len();
    let registry = &traj.registry()[..live];
    let full = (1u32 << (k + 1)) - 1;

    // value sums over every face of every live k-simplex
    let mut sums: FxHashMap<SimplexKey, u64> = FxHashMap::default();
    for (rec, &v) in registry.iter().zip(&values) {
        for mask in 1..=full {
            *sums.entry(rec.vertices.subset(mask)).or_insert(0) += v as u64;
        }
    }
    let mut rows = Vec::with_capacity(live);
    for rec in registry {
        let mut row = smallvec::SmallVec::with_capacity(k + 1);
        for m in 0..=k {
            let s = sums[&rec.vertices.suffix(m)];
            let width = (k - m + 1) as u64;
            debug_assert_eq!(s % width, 0, "containing-sum not divisible");
            row.push((k - m) as u32 + (s / width) as u32);
        }
        rows.push(DegreeVector(row));
    }
    Ok(DTildeSequence { n, rows })
}

/// Same sequence at the current event, read from the degree ledgers.
pub fn dtilde_ledger(traj: &BiTrajectory) -> DTildeSequence {
    let s = traj.ledger();
    let rows = (1..=s.simplex_count()).map(|l| s.degree_vector(l).expect("live label")).collect();
    DTildeSequence { n: traj.events(), rows }
}

/// Remainders of the containing-sums modulo `k - m + 1`; all zero when the
/// sequence is integral.
pub fn dtilde_remainders(traj: &BiTrajectory, n: u64) -> Result<Vec<u64>> {
    let k = traj.params().k();
    let values = traj.values_at(n)?;
    let registry = &traj.registry()[..values.len()];
    let full = (1u32 << (k + 1)) - 1;
    let mut sums: FxHashMap<SimplexKey, u64> = FxHashMap::default();
    for (rec, &v) in registry.iter().zip(&values) {
        for mask in 1..=full {
            *sums.entry(rec.vertices.subset(mask)).or_insert(0) += v as u64;
        }
    }
    Ok(registry
        .iter()
        .flat_map(|rec| (0..=k).map(move |m| (rec, m)))
        .map(|(rec, m)| sums[&rec.vertices.suffix(m)] % (k - m + 1) as u64)
        .collect())
}

/// `n^(1/tau) e^(-T_n)`.
pub fn scaling_statistic(traj: &BiTrajectory, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("the scaling statistic needs n >= 1".into()));
    }
    Ok(scaling_from_time(traj.params(), n, traj.jump_time(n)?))
}

pub fn scaling_from_time(params: &ModelParams, n: u64, t_n: f64) -> f64 {
    ((n as f64).ln() / params.tau() - t_n).exp()
}

/// CDF of the limit `G^(1/tau)`, `G ~ Gamma(1 + delta / tau, 1)`.
pub fn scaling_limit_cdf(params: &ModelParams, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    gamma_cdf(1.0 + params.delta() / params.tau(), y.powf(params.tau()))
}

/// `n^(-1/tau)` times row `label` of the sequence at event `n`.
pub fn scaled_fixed_degrees(traj: &BiTrajectory, n: u64, label: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("scaling needs n >= 1".into()));
    }
    let live = traj.params().simplex_count(n) as usize;
    if label == 0 || label > live {
        return Err(Error::UnknownLabel(label));
    }
    let scale = (n as f64).powf(-1.0 / traj.params().tau());
    let row = if n == traj.events() {
        traj.ledger().degree_vector(label)?
    } else {
        dtilde(traj, n)?.row(label)?.clone()
    };
    Ok(row.as_slice().iter().map(|&v| v as f64 * scale).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingReport {
    pub n: u64,
    pub replicates: u64,
    pub tv: f64,
    pub chi_square: Option<ChiSquare>,
    /// Every replicate reproduced the simplex count and the value sum exactly.
    pub invariants_hold: bool,
    pub model: EmpiricalDist<DegreeVector>,
    pub coupled: EmpiricalDist<DegreeVector>,
}

/// Seed offset separating the coupled replicates from the growth replicates.
const COUPLED_SEED_SALT: u64 = 0x5bd1_e995_9e37_79b9;
const SHARD: u64 = 1_000;

/// Compare the law of the degree vector of label 1 after `n` growth steps
/// with the law of row 1 of the coupled sequence, each over `replicates`
/// independent runs.
pub fn coupling_check(params: &ModelParams, n: u64, replicates: u64, seed: u64) -> Result<CouplingReport> {
    if replicates < 2 {
        return Err(Error::InsufficientData(format!("{replicates} replicates")));
    }
    let shards = par::shard_sizes(replicates, SHARD);
    let parts = par::map_indexed(shards.len() as u64, |s| {
        let size = shards[s as usize];
        let mut model = EmpiricalDist::new();
        let mut coupled = EmpiricalDist::new();
        let mut ok = true;
        let mut rng = selection_rng(seed, s);
        let mut rng_bi = stream_rng(seed ^ COUPLED_SEED_SALT, s);
        for _ in 0..size {
            let mut g = GrowthState::new(params.clone());
            g.run(n, &mut rng);
            model.add(g.degree_vector(1).expect("label 1 lives"), 1);

            let t = simulate_bi_race(params, n, &mut rng_bi);
            ok &= t.total_value() == params.degree_sum(n)
                && t.registry().len() as u64 == params.simplex_count(n)
                && g.degree_sum() == params.degree_sum(n);
            let row = dtilde(&t, n).expect("n within horizon").rows[0].clone();
            coupled.add(row, 1);
        }
        (model, coupled, ok)
    });
    let mut model = EmpiricalDist::new();
    let mut coupled = EmpiricalDist::new();
    let mut invariants_hold = true;
    for (m, c, ok) in parts {
        model.merge(&m);
        coupled.merge(&c);
        invariants_hold &= ok;
    }
    let tv = tv_distance(&model.pmf(), &coupled.pmf());
    let chi_square = chi_square_two_sample(&model, &coupled, 5.0).ok();
    Ok(CouplingReport { n, replicates, tv, chi_square, invariants_hold, model, coupled })
}
