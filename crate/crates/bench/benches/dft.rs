use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qcbc_bench::jittered_inputs;
use qcbc_core::cbc::{dft, error_signals};

fn bench_dft(c: &mut Criterion) {
    let mut group = c.benchmark_group("dft");
    for n in [8usize, 64, 256, 1024] {
        let inputs = jittered_inputs(n);
        group.bench_with_input(BenchmarkId::new("forward", n), &inputs, |b, x| {
            b.iter(|| dft(black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("error_signals", n), &inputs, |b, x| {
            b.iter(|| error_signals(black_box(x)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_dft);
criterion_main!(benches);
