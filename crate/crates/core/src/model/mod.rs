//! The growing simplicial complex.
//!
//! Only what the degree statistics need is stored: the enumerated
//! `k`-simplices with their `k`-degrees, and one hash ledger per lower
//! dimension `m < k` holding the `m`-degree of every `m`-simplex. The face
//! lattice itself stays implicit.

mod index;
mod simplex;

pub use index::{Fenwick, WeightIndex};
pub use simplex::{DegreeVector, KSimplexRecord, SimplexKey};

use rand::Rng;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::stats::EmpiricalDist;

/// What happened at one growth step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    /// Step index `n >= 1`.
    pub step: u64,
    /// Label of the `k`-simplex the new vertex attached to.
    pub chosen: usize,
    /// Labels of the `k + 1` simplices created at this step, in enumeration order.
    pub new_labels: std::ops::RangeInclusive<usize>,
}

#[derive(Clone, Debug)]
pub struct GrowthState {
    params: ModelParams,
    step: u64,
    registry: Vec<KSimplexRecord>,
    k_degree: Vec<u32>,
    /// `lower[m]` maps every `m`-simplex (`m < k`) to its `m`-degree.
    lower: Vec<FxHashMap<SimplexKey, u32>>,
    index: WeightIndex,
    degree_sum: u64,
}

impl GrowthState {
    /// The complex at time 0: one `(k+1)`-simplex on `{1, ..., k+2}`.
    ///
    /// The `k`-faces are labelled `sigma_j = {1..k+2} \ {k+3-j}`, so
    /// `sigma_1 = {1..k+1}` and `sigma_{k+2} = {2..k+2}`.
    pub fn new(params: ModelParams) -> Self {
        let k = params.k();
        let top: SmallVec<[u32; 6]> = (1..=(k as u32 + 2)).collect();
        let top = SimplexKey::from_sorted(top);
        let full = (1u32 << (k + 2)) - 1;

        let mut registry = Vec::with_capacity(k + 2);
        let mut index = WeightIndex::new(params.delta());
        for j in 1..=k + 2 {
            let drop_pos = k + 2 - j; // position of vertex k+3-j
            let vertices = top.subset(full & !(1 << drop_pos));
            registry.push(KSimplexRecord { label: j, vertices, birth_step: 0 });
            index.push(1);
        }

        let mut lower: Vec<FxHashMap<SimplexKey, u32>> = vec![FxHashMap::default(); k];
        for mask in 1..full {
            let size = mask.count_ones() as usize;
            if size <= k {
                let m = size - 1;
                lower[m].insert(top.subset(mask), (k - m + 1) as u32);
            }
        }

        Self {
            step: 0,
            k_degree: vec![1; k + 2],
            registry,
            lower,
            index,
            degree_sum: (k + 2) as u64,
            params,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of completed steps `n`.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Number of `k`-simplices currently present.
    pub fn simplex_count(&self) -> usize {
        self.registry.len()
    }

    pub fn registry(&self) -> &[KSimplexRecord] {
        &self.registry
    }

    pub fn record(&self, label: usize) -> Result<&KSimplexRecord> {
        label
            .checked_sub(1)
            .and_then(|i| self.registry.get(i))
            .ok_or(Error::UnknownLabel(label))
    }

    pub fn k_degree(&self, label: usize) -> Result<u32> {
        self.record(label)?;
        Ok(self.k_degree[label - 1])
    }

    /// `m`-degree of an `m`-simplex with `m < k`; `None` if it is not present.
    pub fn lower_degree(&self, key: &SimplexKey) -> Option<u32> {
        self.lower.get(key.dim())?.get(key).copied()
    }

    /// Running sum of `k`-degrees, maintained from the increments actually applied.
    pub fn degree_sum(&self) -> u64 {
        self.degree_sum
    }

    /// Sum of `k`-degrees recounted from scratch.
    pub fn recount_degree_sum(&self) -> u64 {
        self.k_degree.iter().map(|&d| d as u64).sum()
    }

    /// Total selection weight `sum(D + delta)` held by the index.
    pub fn total_weight(&self) -> f64 {
        self.index.total_weight()
    }

    /// Probability that `label` is chosen at the next step.
    pub fn selection_probability(&self, label: usize) -> Result<f64> {
        let d = self.k_degree(label)?;
        Ok(self.index.probability(d as u64))
    }

    /// Map a uniform `u` in `[0, 1)` to the label it selects.
    pub fn select(&self, u: f64) -> usize {
        self.index.select(u) + 1
    }

    /// Attach the next vertex to `label`.
    pub fn attach(&mut self, label: usize) -> Result<StepRecord> {
        let sigma = self.record(label)?.vertices.clone();
        let k = self.params.k();
        let n = self.step + 1;
        let w = (n + k as u64 + 2) as u32;
        let full = (1u32 << (k + 1)) - 1;

        // every face of sigma gains one coface
        self.k_degree[label - 1] += 1;
        self.index.increment(label - 1);
        self.degree_sum += 1;
        for mask in 1..full {
            let face = sigma.subset(mask);
            let m = face.dim();
            *self
                .lower[m]
                .get_mut(&face)
                .expect("faces of a present simplex are present") += 1;
        }

        // faces containing the new vertex, below dimension k
        for mask in 0..full {
            let size = mask.count_ones() as usize;
            if size < k {
                let mut v: SmallVec<[u32; 6]> = sigma.subset(mask).vertices().iter().copied().collect();
                v.push(w);
                self.lower[size].insert(SimplexKey::from_sorted(v), (k - size + 1) as u32);
            }
        }

        // new k-simplices: drop sigma(k), then sigma(k-1), ..., then sigma(0)
        let first = self.registry.len() + 1;
        for drop_pos in (0..=k).rev() {
            let mut v: SmallVec<[u32; 6]> = sigma.subset(full & !(1 << drop_pos)).vertices().iter().copied().collect();
            v.push(w);
            let label = self.registry.len() + 1;
            self.registry.push(KSimplexRecord {
                label,
                vertices: SimplexKey::from_sorted(v),
                birth_step: n,
            });
            self.k_degree.push(1);
            self.index.push(1);
            self.degree_sum += 1;
        }

        self.step = n;
        Ok(StepRecord { step: n, chosen: label, new_labels: first..=self.registry.len() })
    }

    /// One preferential-attachment step driven by a single uniform from `rng`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepRecord {
        let label = self.select(rng.random::<f64>());
        self.attach(label).expect("selected label is registered")
    }

    /// Advance `steps` steps.
    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    /// Advance `steps` steps, handing each record to `observe`.
    pub fn run_with<R, F>(&mut self, steps: u64, rng: &mut R, mut observe: F)
    where
        R: Rng + ?Sized,
        F: FnMut(&Self, &StepRecord),
    {
        for _ in 0..steps {
            let rec = self.step(rng);
            observe(self, &rec);
        }
    }

    /// Degrees of the youngest faces of `sigma_label`:
    /// `(D^(m)(v_{k-m}, ..., v_k))_{m = 0..k}`.
    pub fn degree_vector(&self, label: usize) -> Result<DegreeVector> {
        let rec = self.record(label)?;
        let k = self.params.k();
        let mut out: SmallVec<[u32; 6]> = SmallVec::with_capacity(k + 1);
        for m in 0..k {
            let face = rec.vertices.suffix(m);
            out.push(self.lower[m][&face]);
        }
        out.push(self.k_degree[label - 1]);
        Ok(DegreeVector(out))
    }

    /// The counts `N_n(i_0, ..., i_k)` over all present `k`-simplices.
    pub fn degree_counts(&self) -> EmpiricalDist<DegreeVector> {
        let mut counts = EmpiricalDist::new();
        for label in 1..=self.registry.len() {
            counts.add(self.degree_vector(label).expect("registered"), 1);
        }
        counts
    }

    /// Number of `k`-simplices containing `face` and the sum of their
    /// `k`-degrees, by a full scan.
    pub fn containing_stats(&self, face: &SimplexKey) -> (u64, u64) {
        self.registry
            .iter()
            .zip(&self.k_degree)
            .filter(|(r, _)| r.vertices.contains(face))
            .fold((0, 0), |(c, s), (_, &d)| (c + 1, s + d as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn key(v: &[u32]) -> SimplexKey {
        SimplexKey::new(v).unwrap()
    }

    #[test]
    fn initial_complex_k2() {
        let s = GrowthState::new(ModelParams::new(2, 0.0).unwrap());
        assert_eq!(s.simplex_count(), 4);
        assert_eq!(s.total_weight(), 4.0);
        let labels: Vec<_> = s.registry().iter().map(|r| r.vertices.vertices().to_vec()).collect();
        assert_eq!(labels, vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]);
        for l in 1..=4 {
            assert_eq!(s.k_degree(l).unwrap(), 1);
            assert_eq!(s.selection_probability(l).unwrap(), 0.25);
            assert_eq!(s.degree_vector(l).unwrap().as_slice(), &[3, 2, 1]);
        }
        assert_eq!(s.lower_degree(&key(&[2])), Some(3));
        assert_eq!(s.lower_degree(&key(&[2, 4])), Some(2));
    }

    #[test]
    fn initial_complex_small_k() {
        let s = GrowthState::new(ModelParams::new(0, 0.5).unwrap());
        assert_eq!(s.simplex_count(), 2);
        assert_eq!(s.total_weight(), 3.0);
        assert_eq!(s.degree_vector(1).unwrap().as_slice(), &[1]);

        let s = GrowthState::new(ModelParams::new(1, 0.0).unwrap());
        assert_eq!(s.simplex_count(), 3);
        assert_eq!(s.degree_sum(), 3);
        assert_eq!(s.recount_degree_sum(), 3);
    }

    #[test]
    fn worked_attachment_k2() {
        let mut s = GrowthState::new(ModelParams::new(2, 0.0).unwrap());
        let rec = s.attach(3).unwrap();
        assert_eq!(rec.new_labels, 5..=7);
        let new: Vec<_> = s.registry()[4..].iter().map(|r| r.vertices.vertices().to_vec()).collect();
        assert_eq!(new, vec![vec![1, 3, 5], vec![1, 4, 5], vec![3, 4, 5]]);
        assert_eq!(s.simplex_count(), 7);
        assert_eq!(s.selection_probability(3).unwrap(), 0.25);
        for l in [1, 2, 4, 5, 6, 7] {
            assert_eq!(s.selection_probability(l).unwrap(), 0.125);
        }
        // {1,3,4} had (3,2,1) and every youngest face received the new vertex
        assert_eq!(s.degree_vector(3).unwrap().as_slice(), &[4, 3, 2]);
        // {1,2,4}: youngest vertex 4 and edge {2,4}; only vertex 4 gained
        assert_eq!(s.degree_vector(2).unwrap().as_slice(), &[4, 2, 1]);
        for l in 5..=7 {
            assert_eq!(s.degree_vector(l).unwrap().as_slice(), &[3, 2, 1]);
        }
        assert_eq!(s.lower_degree(&key(&[5])), Some(3));
        assert_eq!(s.lower_degree(&key(&[1, 5])), Some(2));
    }

    #[test]
    fn one_step_k1_outcomes() {
        let expected: [&[([u32; 2], u64)]; 3] = [
            &[([2, 1], 4), ([3, 2], 1)],
            &[([2, 1], 3), ([3, 1], 1), ([3, 2], 1)],
            &[([2, 1], 2), ([3, 1], 2), ([3, 2], 1)],
        ];
        for (chosen, want) in (1..=3).zip(expected) {
            let mut s = GrowthState::new(ModelParams::new(1, 0.0).unwrap());
            s.attach(chosen).unwrap();
            let c = s.degree_counts();
            assert_eq!(c.total(), 5);
            assert_eq!(c.support_len(), want.len());
            for (v, n) in want {
                assert_eq!(c.count(&DegreeVector::new(v)), *n, "chosen {chosen}, vector {v:?}");
            }
            assert_eq!(s.degree_vector(chosen).unwrap().as_slice(), &[3, 2]);
        }
    }

    #[test]
    fn run_counts() {
        let mut rng = stream_rng(1, 0);
        let mut s = GrowthState::new(ModelParams::new(2, 0.0).unwrap());
        s.run(2, &mut rng);
        assert_eq!(s.simplex_count(), 10);

        let s0 = GrowthState::new(ModelParams::new(2, 0.0).unwrap());
        let mut s1 = s0.clone();
        s1.run(0, &mut rng);
        assert_eq!(s1.degree_counts(), s0.degree_counts());

        let mut s = GrowthState::new(ModelParams::new(1, 1.0).unwrap());
        s.run(10_000, &mut rng);
        assert_eq!(s.degree_sum(), 10_001 * 3);
        assert_eq!(s.recount_degree_sum(), 10_001 * 3);
    }

    #[test]
    fn k0_after_one_step() {
        let mut rng = stream_rng(3, 0);
        let mut s = GrowthState::new(ModelParams::new(0, 0.0).unwrap());
        s.run(1, &mut rng);
        assert_eq!(s.simplex_count(), 3);
        assert_eq!(s.degree_sum(), 4);
    }

    #[test]
    fn initial_counts() {
        for k in 0..=3 {
            let s = GrowthState::new(ModelParams::new(k, 0.0).unwrap());
            let c = s.degree_counts();
            let minimal = DegreeVector::from(s.params().minimal_vector());
            assert_eq!(c.count(&minimal), (k + 2) as u64);
            assert_eq!(c.total(), (k + 2) as u64);
        }
    }

    #[test]
    fn unknown_label_is_error() {
        let s = GrowthState::new(ModelParams::new(1, 0.0).unwrap());
        assert!(matches!(s.degree_vector(0), Err(Error::UnknownLabel(0))));
        assert!(matches!(s.degree_vector(4), Err(Error::UnknownLabel(4))));
    }
}
