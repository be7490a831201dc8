use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use simplex_pa::limitlaw::sample_limit_degree;
use simplex_pa::model::GrowthState;
use simplex_pa::par::{map_indexed, map_indexed_seq};
use simplex_pa::rng::{selection_rng, stream_rng};
use simplex_pa::ModelParams;

fn growth_replicate(params: &ModelParams, steps: u64, r: u64) -> u64 {
    let mut g = GrowthState::new(params.clone());
    g.run(steps, &mut selection_rng(1, r));
    g.degree_vector(1).unwrap().get(0) as u64
}

fn limit_shard(params: &ModelParams, size: u64, r: u64) -> u64 {
    let mut rng = stream_rng(2, r);
    (0..size).map(|_| sample_limit_degree(params, &mut rng).d[0]).sum()
}

fn bench_growth(c: &mut Criterion) {
    let params = ModelParams::new(1, 0.0).unwrap();
    let mut group = c.benchmark_group("growth_replicates");
    group.sample_size(10);
    for &reps in &[16u64, 64] {
        group.bench_with_input(BenchmarkId::new("parallel", reps), &reps, |b, &reps| {
            b.iter(|| map_indexed(reps, |r| growth_replicate(&params, 2_000, r)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", reps), &reps, |b, &reps| {
            b.iter(|| map_indexed_seq(reps, |r| growth_replicate(&params, 2_000, r)))
        });
    }
    group.finish();
}

fn bench_limit_samples(c: &mut Criterion) {
    let params = ModelParams::new(2, 1.0).unwrap();
    let mut group = c.benchmark_group("limit_sample_shards");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| map_indexed(32, |r| limit_shard(&params, 1_000, r))));
    group.bench_function("sequential", |b| b.iter(|| map_indexed_seq(32, |r| limit_shard(&params, 1_000, r))));
    group.finish();
}

fn bench_single_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("growth_step");
    for k in [1usize, 3, 5] {
        let params = ModelParams::new(k, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(k), &params, |b, p| {
            b.iter(|| {
                let mut g = GrowthState::new(p.clone());
                g.run(black_box(1_000), &mut selection_rng(3, 0));
                g.simplex_count()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_growth, bench_limit_samples, bench_single_step);
criterion_main!(benches);
