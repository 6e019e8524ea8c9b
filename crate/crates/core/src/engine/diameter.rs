use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Euclidean, Metric};
use crate::model::Dataset;
use crate::partial::{max_pair_rows, merge_max, PartialMax};

/// Samples above which [`DiameterMode::Sampled`] takes effect.
pub const SAMPLED_DIAMETER_MIN_N: usize = 100_000;

/// The farthest pair of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterResult {
    pub d: f64,
    pub i: usize,
    pub j: usize,
    /// False when the pair came from the sampled scan.
    pub exact: bool,
}

impl DiameterResult {
    pub(crate) fn from_partial<M: Metric + ?Sized>(metric: &M, p: PartialMax, exact: bool) -> Self {
        Self {
            d: metric.finish(p.score),
            i: p.i,
            j: p.j,
            exact,
        }
    }
}

/// How the farthest pair is searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DiameterMode {
    /// All `n(n-1)/2` pairs.
    #[default]
    Exact,
    /// For `n` above [`SAMPLED_DIAMETER_MIN_N`], scan only the pairs among
    /// an evenly strided subset of at most `max_pairs` pairs, then sweep all
    /// samples against the two endpoints. Smaller inputs stay exact.
    Sampled { max_pairs: u64 },
}

impl DiameterMode {
    pub(crate) fn is_sampled_for(&self, n: usize) -> bool {
        matches!(self, DiameterMode::Sampled { .. }) && n > SAMPLED_DIAMETER_MIN_N
    }
}

/// Exact Euclidean diameter.
pub fn diameter(dataset: &Dataset) -> Result<DiameterResult> {
    diameter_with(dataset, &Euclidean, DiameterMode::Exact)
}

pub fn diameter_with<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    mode: DiameterMode,
) -> Result<DiameterResult> {
    let n = dataset.n();
    if n < 2 {
        return Err(Error::InsufficientData { n });
    }
    if let DiameterMode::Sampled { max_pairs } = mode {
        if mode.is_sampled_for(n) {
            let idx = sampled_indices(n, max_pairs);
            let best = max_pair_subset(dataset, metric, &idx, 0..idx.len());
            let best =
                refine_endpoints(dataset, metric, best.expect("subset has at least two rows"));
            return Ok(DiameterResult::from_partial(metric, best, false));
        }
    }
    let best = max_pair_rows(dataset, metric, 0..n).expect("n >= 2 yields a pair");
    Ok(DiameterResult::from_partial(metric, best, true))
}

/// Evenly strided sample indices whose pair count stays within `max_pairs`.
pub(crate) fn sampled_indices(n: usize, max_pairs: u64) -> Vec<usize> {
    // largest s with s(s-1)/2 <= max_pairs
    let mut s = ((2.0 * max_pairs as f64).sqrt() as usize + 1).min(n);
    while s > 2 && (s as u64) * (s as u64 - 1) / 2 > max_pairs {
        s -= 1;
    }
    let s = s.max(2);
    (0..s).map(|t| t * n / s).collect()
}

/// Pairs among `idx[pos]` for `pos` in `positions` against all later
/// subset members.
pub(crate) fn max_pair_subset<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    idx: &[usize],
    positions: std::ops::Range<usize>,
) -> Option<PartialMax> {
    let mut best = None;
    for p in positions {
        let i = idx[p];
        let a = dataset.row(i);
        for &j in &idx[p + 1..] {
            let score = metric.surrogate(a, dataset.row(j));
            best = merge_max(best, Some(PartialMax { score, i, j }));
        }
    }
    best
}

const MAX_REFINE_SWEEPS: usize = 8;

/// Sweeps every sample against both endpoints of the incumbent pair until
/// the pair stops changing.
pub(crate) fn refine_endpoints<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    seed: PartialMax,
) -> PartialMax {
    let mut best = seed;
    for _ in 0..MAX_REFINE_SWEEPS {
        let next = sweep_endpoints(dataset, metric, best);
        if next == best {
            break;
        }
        best = next;
    }
    best
}

fn sweep_endpoints<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    seed: PartialMax,
) -> PartialMax {
    let mut best = Some(seed);
    for end in [seed.i, seed.j] {
        let a = dataset.row(end);
        for x in 0..dataset.n() {
            if x == end {
                continue;
            }
            let (i, j) = if x < end { (x, end) } else { (end, x) };
            let score = metric.surrogate(a, dataset.row(x));
            best = merge_max(best, Some(PartialMax { score, i, j }));
        }
    }
    best.unwrap()
}
