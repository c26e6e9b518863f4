use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use chorex::corpus::{generated_corpus, DEFAULT_SEED};
use chorex::model::Network;
use chorex::par::{extract_and_check_all, extract_and_check_all_sequential};
use chorex::pipeline::ExtractOptions;

fn batch(c: &mut Criterion) {
    let opts = ExtractOptions::default();
    let mut group = c.benchmark_group("extract_and_check");
    group.sample_size(20);
    for size in [8usize, 32, 96] {
        let nets: Vec<Network> = generated_corpus(size, DEFAULT_SEED).into_iter().map(|(_, n)| n).collect();
        group.bench_with_input(BenchmarkId::new("sequential", size), &nets, |b, nets| {
            b.iter(|| extract_and_check_all_sequential(black_box(nets), &opts, 12))
        });
        group.bench_with_input(BenchmarkId::new("parallel", size), &nets, |b, nets| {
            b.iter(|| extract_and_check_all(black_box(nets), &opts, 12))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
