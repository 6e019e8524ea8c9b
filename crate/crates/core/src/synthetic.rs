//! Seeded Gaussian blob datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Half-width of the cube blob centers are drawn from.
pub const CENTER_BOX: f64 = 10.0;

/// `n` samples in `m` dimensions around `k_true` isotropic blobs.
///
/// Blob centers are uniform in `[-10, 10]^m`; sample `i` belongs to blob
/// `i % k_true` and is its center plus `spread` times a standard normal
/// vector. Output depends only on the arguments.
pub fn generate_synthetic(
    n: usize,
    m: usize,
    k_true: usize,
    seed: u64,
    spread: f64,
) -> Result<Dataset> {
    if n == 0 || m == 0 || k_true == 0 {
        return Err(Error::InvalidConfig(format!(
            "synthetic data needs n, m, k_true >= 1 (got {n}, {m}, {k_true})"
        )));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "spread = {spread} must be finite and >= 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<f64> = (0..k_true * m)
        .map(|_| rng.random_range(-CENTER_BOX..CENTER_BOX))
        .collect();
    let mut coords = Vec::with_capacity(n * m);
    for i in 0..n {
        let c = i % k_true;
        for x in &centers[c * m..(c + 1) * m] {
            let noise: f64 = rng.sample(StandardNormal);
            coords.push(x + spread * noise);
        }
    }
    Dataset::new(coords, m)
}
