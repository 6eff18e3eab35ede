use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qcbc_core::amplifier::{simulate_chain, AmplifierSpec};
use qcbc_core::cbc::{simulate_cbc, CbcConfig};
use qcbc_core::{ComplexAmplitude, Moments, RngStream};

const TRIALS: u64 = 65_536;

fn bench_cbc(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_cbc");
    group.sample_size(10);
    group.throughput(Throughput::Elements(TRIALS));
    for beams in [2usize, 8, 32] {
        let cfg = CbcConfig::with_xi(beams, 100.0, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(beams), &cfg, |b, cfg| {
            b.iter(|| simulate_cbc(black_box(cfg), TRIALS, RngStream::new(1, 0)).unwrap())
        });
    }
    group.finish();
}

fn bench_amplifier(c: &mut Criterion) {
    let mut group = c.benchmark_group("amplifier");
    group.sample_size(10);
    group.throughput(Throughput::Elements(TRIALS));
    let spec = [AmplifierSpec::quantum_limited(2.0)];
    group.bench_function("quantum_limited", |b| {
        b.iter(|| simulate_chain(&spec, ComplexAmplitude::new(1.0, 0.0), TRIALS, RngStream::new(2, 0)).unwrap())
    });
    group.finish();
}

fn bench_merge(c: &mut Criterion) {
    let values: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.37).sin()).collect();
    let a = Moments::from_slice(&values[..2048]);
    let b = Moments::from_slice(&values[2048..]);
    c.bench_function("moments/push_4096", |bench| bench.iter(|| Moments::from_slice(black_box(&values))));
    c.bench_function("moments/merge", |bench| bench.iter(|| black_box(&a).merge(black_box(&b))));
}

criterion_group!(benches, bench_cbc, bench_amplifier, bench_merge);
criterion_main!(benches);
