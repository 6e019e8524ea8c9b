//! Workloads shared by the criterion benchmarks.

use kmeans_core::{generate_synthetic, Dataset, KmeansConfig};

/// Blob spread used by every benchmark workload. Wide enough that blobs
/// overlap and runs take a dozen or more rounds.
pub const SPREAD: f64 = 8.0;

/// A named `(dataset, config)` pair.
pub struct Workload {
    pub name: String,
    pub dataset: Dataset,
    pub config: KmeansConfig,
}

/// `k` blobs of `n` samples in `m` dimensions, clustered with `k` centers.
pub fn blobs(n: usize, m: usize, k: usize, seed: u64) -> Workload {
    let dataset = generate_synthetic(n, m, k, seed, SPREAD).expect("valid synthetic parameters");
    let config = KmeansConfig {
        seed,
        ..KmeansConfig::new(k)
    };
    Workload {
        name: format!("n{n}_m{m}_k{k}"),
        dataset,
        config,
    }
}

/// Worker counts worth sweeping on this host: powers of two up to the
/// available parallelism, and always at least `[1, 2]`.
pub fn worker_sweep() -> Vec<usize> {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut out = vec![1];
    let mut w = 2;
    while w <= hw.max(2) {
        out.push(w);
        w *= 2;
    }
    out
}
