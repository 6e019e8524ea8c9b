use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kmeans_bench::{blobs, worker_sweep};
use kmeans_core::{run_gpu, run_multi, run_single, HostReferenceDevice};

fn regimes(c: &mut Criterion) {
    let w = blobs(20_000, 16, 8, 1);
    let mut group = c.benchmark_group(format!("run/{}", w.name));
    group.sample_size(10);
    group.bench_function("single", |b| {
        b.iter(|| run_single(&w.dataset, &w.config).unwrap())
    });
    for n in worker_sweep() {
        group.bench_with_input(BenchmarkId::new("multi", n), &n, |b, &n| {
            b.iter(|| run_multi(&w.dataset, &w.config, n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gpu-reference", n), &n, |b, &n| {
            let dev = HostReferenceDevice::default();
            b.iter(|| run_gpu(&w.dataset, &w.config, n, &dev).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, regimes);
criterion_main!(benches);
