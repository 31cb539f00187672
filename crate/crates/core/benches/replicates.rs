use std::hint::black_box;

use cerlab::density::densest_subgraph_exact;
use cerlab::inference::tv_mc;
use cerlab::model::{sample_gnp, ModelParams};
use cerlab::{par, RandomSeed};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn densest_replicate(n: usize, lambda: f64, seed: RandomSeed, i: usize) -> f64 {
    let g = sample_gnp(n, lambda / n as f64, &mut seed.derive(i as u64).rng());
    densest_subgraph_exact(&g).expect("nonempty graph").density_f64()
}

fn rho_replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("rho_replicates");
    group.sample_size(10);
    let seed = RandomSeed(1);
    for n in [200, 1000] {
        let reps = 16;
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| par::map_indexed_seq(reps, |i| densest_replicate(n, 2.0, seed, i)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| par::map_indexed_par(reps, |i| densest_replicate(n, 2.0, seed, i)))
        });
    }
    group.finish();
}

fn tv_monte_carlo(c: &mut Criterion) {
    let params = ModelParams::new(6, 0.5, 0.8).expect("valid params");
    c.bench_function("tv_mc_n6_200", |b| {
        b.iter(|| tv_mc(black_box(&params), 200, RandomSeed(3)).expect("tv"))
    });
}

criterion_group!(benches, rho_replicates, tv_monte_carlo);
criterion_main!(benches);
