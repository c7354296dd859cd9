use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use squadkit::genmodels::{generate_batch, GenerationConfig};

const SEEDS: [&str; 4] = ["cristiano", "barackobama", "katyperry", "nasa"];

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let all = rayon::ThreadPoolBuilder::new().build().expect("pool");
    vec![("sequential", one), ("parallel", all)]
}

fn bench_generation(c: &mut Criterion) {
    let seeds: Vec<String> = SEEDS.iter().map(|s| s.to_string()).collect();
    let cfg = GenerationConfig::default();
    let mut group = c.benchmark_group("generate_batch");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new(name, seeds.len()), &seeds, |b, seeds| {
            b.iter(|| pool.install(|| generate_batch(seeds, &cfg)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_generation);
criterion_main!(benches);
