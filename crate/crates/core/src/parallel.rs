//! The multi-worker regime.
//!
//! Every phase forks one scoped worker per chunk, waits for all of them and
//! merges their partial results on the calling thread in chunk order.
//! Row-wise work (diameter rows, labels) uses the near-equal chunks of a
//! [`ChunkPlan`]; sums use runs of whole accumulation blocks so that the
//! merged floating point value never depends on the worker count.

use std::ops::Range;

use crate::engine::{
    self, check_assignment, drive, finish_assign, finish_update, max_pair_subset, refine_endpoints,
    sampled_indices, DiameterMode, DiameterResult, KmeansConfig, KmeansResult, PairSchedule,
    Phases,
};
use crate::error::{Error, Result};
use crate::metric::Euclidean;
use crate::model::{Assignment, Centroid, ClusterModel, Dataset};
use crate::partial::{
    block_count, blockwise, cluster_sums, coordinate_sums, fold_in_order, max_pair_rows, merge_max,
    DEFAULT_BLOCK_ROWS, I_TILE,
};

pub use crate::partial::{PartialMax, PartialSums};

/// How `n` rows are split among workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    n: usize,
    n_workers: usize,
    chunks: Vec<Range<usize>>,
    block_rows: usize,
}

/// Splits `0..n` into `parts` contiguous ranges whose sizes differ by at
/// most one, larger ranges first. `parts` is clamped to `1..=n`.
pub fn split_even(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    let (base, extra) = (n / parts, n % parts);
    let mut start = 0;
    (0..parts)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Canonical plan with the default accumulation block size.
pub fn plan_chunks(n: usize, n_workers: usize) -> ChunkPlan {
    plan_chunks_with(n, n_workers, DEFAULT_BLOCK_ROWS)
}

pub fn plan_chunks_with(n: usize, n_workers: usize, block_rows: usize) -> ChunkPlan {
    let chunks = split_even(n, n_workers);
    ChunkPlan {
        n,
        n_workers: chunks.len(),
        chunks,
        block_rows: block_rows.max(1),
    }
}

impl ChunkPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Worker count after clamping to `n`.
    pub fn n_workers(&self) -> usize {
        self.n_workers
    }

    pub fn chunks(&self) -> &[Range<usize>] {
        &self.chunks
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    /// Row ranges made of whole accumulation blocks, one per worker that
    /// gets at least one block.
    pub fn block_chunks(&self) -> Vec<Range<usize>> {
        let blocks = block_count(self.n, self.block_rows);
        split_even(blocks, self.n_workers)
            .into_iter()
            .map(|b| b.start * self.block_rows..(b.end * self.block_rows).min(self.n))
            .collect()
    }
}

/// Runs `work` on every range concurrently and returns the results in range
/// order. A single range runs on the calling thread.
pub(crate) fn fork_join<T, F>(ranges: &[Range<usize>], work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    if ranges.len() <= 1 {
        return ranges.iter().cloned().map(&work).collect();
    }
    let work = &work;
    std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .iter()
            .cloned()
            .map(|r| s.spawn(move || work(r)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
            .collect()
    })
}

fn check_plan(dataset: &Dataset, plan: &ChunkPlan) -> Result<()> {
    if plan.n != dataset.n() {
        return Err(Error::InconsistentSizes(format!(
            "plan covers {} rows, dataset has {}",
            plan.n,
            dataset.n()
        )));
    }
    Ok(())
}

/// Exact diameter with rows split across workers.
pub fn diameter_parallel(dataset: &Dataset, plan: &ChunkPlan) -> Result<DiameterResult> {
    diameter_parallel_with(dataset, plan, DiameterMode::Exact, PairSchedule::Rows)
}

pub fn diameter_parallel_with(
    dataset: &Dataset,
    plan: &ChunkPlan,
    mode: DiameterMode,
    schedule: PairSchedule,
) -> Result<DiameterResult> {
    check_plan(dataset, plan)?;
    let n = dataset.n();
    if n < 2 {
        return Err(Error::InsufficientData { n });
    }
    let metric = Euclidean;
    if let DiameterMode::Sampled { max_pairs } = mode {
        if mode.is_sampled_for(n) {
            let idx = sampled_indices(n, max_pairs);
            let parts = fork_join(&split_even(idx.len(), plan.n_workers), |r| {
                max_pair_subset(dataset, &metric, &idx, r)
            });
            let best = parts
                .into_iter()
                .fold(None, merge_max)
                .expect("subset has a pair");
            let best = refine_endpoints(dataset, &metric, best);
            return Ok(DiameterResult::from_partial(&metric, best, false));
        }
    }
    let parts = match schedule {
        PairSchedule::Rows => fork_join(&plan.chunks, |rows| max_pair_rows(dataset, &metric, rows)),
        PairSchedule::Balanced => {
            // tile `u` from the front travels with tile `tiles - 1 - u` from
            // the back, so every unit owns about the same number of pairs
            let tiles = n.div_ceil(I_TILE);
            let tile = |t: usize| t * I_TILE..((t + 1) * I_TILE).min(n);
            fork_join(&split_even(tiles.div_ceil(2), plan.n_workers), |us| {
                let mut best = None;
                for u in us {
                    let mirror = tiles - 1 - u;
                    best = merge_max(best, max_pair_rows(dataset, &metric, tile(u)));
                    if mirror != u {
                        best = merge_max(best, max_pair_rows(dataset, &metric, tile(mirror)));
                    }
                }
                best
            })
        }
    };
    let best = parts
        .into_iter()
        .fold(None, merge_max)
        .expect("n >= 2 yields a pair");
    Ok(DiameterResult::from_partial(&metric, best, true))
}

/// Global center of gravity from per-worker block sums.
pub fn centroid_parallel(dataset: &Dataset, plan: &ChunkPlan) -> Result<Centroid> {
    check_plan(dataset, plan)?;
    let n = dataset.n();
    let per_worker = fork_join(&plan.block_chunks(), |rows| {
        blockwise(n, plan.block_rows, rows, |b| coordinate_sums(dataset, b))
    });
    let total = fold_in_order(1, dataset.m(), per_worker.iter().flatten());
    Ok(engine::centroid_from_sums(&total))
}

/// Nearest-center labels with each worker owning one chunk of samples.
pub fn assign_parallel(
    dataset: &Dataset,
    model: &mut ClusterModel,
    plan: &ChunkPlan,
) -> Result<Assignment> {
    Ok(assign_parallel_scored(dataset, model, plan)?.0)
}

pub(crate) fn assign_parallel_scored(
    dataset: &Dataset,
    model: &mut ClusterModel,
    plan: &ChunkPlan,
) -> Result<(Assignment, f64)> {
    check_plan(dataset, plan)?;
    if model.m() != dataset.m() {
        return Err(Error::DimensionMismatch {
            expected: dataset.m(),
            found: model.m(),
        });
    }
    let n = dataset.n();
    let mut labels = vec![0; n];
    let mut scores = vec![0.0; n];
    {
        let mut label_slices = Vec::with_capacity(plan.chunks.len());
        let mut score_slices = Vec::with_capacity(plan.chunks.len());
        let (mut lrest, mut srest) = (labels.as_mut_slice(), scores.as_mut_slice());
        for r in &plan.chunks {
            let (l, lr) = lrest.split_at_mut(r.len());
            let (s, sr) = srest.split_at_mut(r.len());
            label_slices.push(l);
            score_slices.push(s);
            lrest = lr;
            srest = sr;
        }
        let shared: &ClusterModel = model;
        let jobs: Vec<_> = plan
            .chunks
            .iter()
            .cloned()
            .zip(label_slices)
            .zip(score_slices)
            .collect();
        if jobs.len() <= 1 {
            for ((rows, l), s) in jobs {
                engine::assign_rows(dataset, shared, &Euclidean, rows, l, s);
            }
        } else {
            std::thread::scope(|sc| {
                for ((rows, l), s) in jobs {
                    sc.spawn(move || engine::assign_rows(dataset, shared, &Euclidean, rows, l, s));
                }
            });
        }
    }
    Ok(finish_assign(model, labels, &scores))
}

/// Centers from per-worker block sums merged in block order, with the same
/// empty-cluster repair as the single-worker update.
pub fn update_parallel(
    dataset: &Dataset,
    assignment: &Assignment,
    k: usize,
    plan: &ChunkPlan,
) -> Result<ClusterModel> {
    check_plan(dataset, plan)?;
    check_assignment(dataset, assignment, k)?;
    let n = dataset.n();
    let labels = assignment.labels();
    let per_worker = fork_join(&plan.block_chunks(), |rows| {
        blockwise(n, plan.block_rows, rows, |b| {
            cluster_sums(dataset, labels, k, b)
        })
    });
    let total = fold_in_order(k, dataset.m(), per_worker.iter().flatten());
    Ok(finish_update(dataset, labels, total))
}

struct MultiWorker {
    plan: ChunkPlan,
}

impl Phases for MultiWorker {
    fn diameter(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<DiameterResult> {
        diameter_parallel_with(dataset, &self.plan, config.diameter, config.pair_schedule)
    }

    fn global_centroid(&self, dataset: &Dataset, _config: &KmeansConfig) -> Result<Centroid> {
        centroid_parallel(dataset, &self.plan)
    }

    fn assign(&self, dataset: &Dataset, model: &mut ClusterModel) -> Result<(Assignment, f64)> {
        assign_parallel_scored(dataset, model, &self.plan)
    }

    fn update(
        &self,
        dataset: &Dataset,
        assignment: &Assignment,
        config: &KmeansConfig,
    ) -> Result<ClusterModel> {
        update_parallel(dataset, assignment, config.k, &self.plan)
    }
}

/// Runs the clustering with `n_workers` workers per phase. Convergence is
/// checked on the calling thread.
pub fn run_multi(
    dataset: &Dataset,
    config: &KmeansConfig,
    n_workers: usize,
) -> Result<KmeansResult> {
    if n_workers == 0 {
        return Err(Error::InvalidConfig("n_workers must be at least 1".into()));
    }
    config.validate(dataset.n())?;
    let plan = plan_chunks_with(dataset.n(), n_workers, config.block_rows);
    drive(dataset, config, &MultiWorker { plan })
}
