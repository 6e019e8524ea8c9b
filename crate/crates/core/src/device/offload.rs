use std::ops::Range;

use super::{Device, DeviceJob, DeviceResult, Ticket};
use crate::engine::{drive, finish_update, DiameterResult, KmeansConfig, KmeansResult, Phases};
use crate::error::{Error, Result};
use crate::metric::Euclidean;
use crate::model::{Assignment, Centroid, ClusterModel, Dataset};
use crate::parallel::{
    assign_parallel_scored, diameter_parallel_with, fork_join, plan_chunks_with, run_multi,
    ChunkPlan,
};
use crate::partial::{fold_in_order, merge_max, PartialMax, PartialSums};

/// Default rows per device job.
pub const DEFAULT_JOB_ROWS: usize = 65_536;

/// Runs the clustering with `n_workers` coordinating workers that offload
/// farthest-pair scans and coordinate sums to `device`.
///
/// Assignment stays on the host workers and convergence is checked on the
/// calling thread. If the device is lost mid-run the whole run is repeated
/// in the multi-worker regime and the event is recorded in
/// [`KmeansResult::fallback_events`].
pub fn run_gpu(
    dataset: &Dataset,
    config: &KmeansConfig,
    n_workers: usize,
    device: &dyn Device,
) -> Result<KmeansResult> {
    if n_workers == 0 {
        return Err(Error::InvalidConfig("n_workers must be at least 1".into()));
    }
    config.validate(dataset.n())?;
    let phases = Offload {
        plan: plan_chunks_with(dataset.n(), n_workers, config.block_rows),
        device,
        job_rows: device.capability().preferred_job_rows.max(1),
    };
    match drive(dataset, config, &phases) {
        Err(Error::DeviceLost(why)) => {
            let mut result = run_multi(dataset, config, n_workers)?;
            result.fallback_events.push(format!(
                "device {:?} lost ({why}); reran in the multi-worker regime",
                device.capability().name
            ));
            Ok(result)
        }
        other => other,
    }
}

struct Offload<'d> {
    plan: ChunkPlan,
    device: &'d dyn Device,
    job_rows: usize,
}

impl Offload<'_> {
    /// Cuts `rows` into job ranges. Sum jobs are widened to whole blocks.
    fn job_ranges(&self, rows: Range<usize>, align: usize) -> Vec<Range<usize>> {
        let step = self.job_rows.div_ceil(align) * align;
        let mut out = Vec::new();
        let mut start = rows.start;
        while start < rows.end {
            let end = (start + step).min(rows.end);
            out.push(start..end);
            start = end;
        }
        out
    }

    /// Submits a job, halving its range while the device reports it too
    /// large. Returns the tickets in row order.
    fn submit_split<'a, F>(
        &self,
        rows: Range<usize>,
        align: usize,
        make: &F,
        tickets: &mut Vec<Ticket>,
    ) -> Result<()>
    where
        F: Fn(Range<usize>) -> DeviceJob<'a>,
    {
        match self.device.submit(make(rows.clone())) {
            Ok(t) => {
                tickets.push(t);
                Ok(())
            }
            Err(Error::CapacityExceeded { .. }) if rows.len() > align => {
                let half = (rows.len() / 2).div_ceil(align) * align;
                let mid = rows.start + half.min(rows.len() - 1);
                self.submit_split(rows.start..mid, align, make, tickets)?;
                self.submit_split(mid..rows.end, align, make, tickets)
            }
            Err(e) => Err(e),
        }
    }

    /// One worker's share: submit every job, then collect every ticket even
    /// after a failure so none is left outstanding.
    fn run_worker<'a, F>(
        &self,
        rows: Range<usize>,
        align: usize,
        make: F,
    ) -> Result<Vec<DeviceResult>>
    where
        F: Fn(Range<usize>) -> DeviceJob<'a>,
    {
        let mut tickets = Vec::new();
        let mut first_err = None;
        for r in self.job_ranges(rows, align) {
            if let Err(e) = self.submit_split(r, align, &make, &mut tickets) {
                first_err = Some(e);
                break;
            }
        }
        let mut results = Vec::with_capacity(tickets.len());
        for t in tickets {
            match self.device.collect(t) {
                Ok(r) => results.push(r),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        match first_err {
            Some(e) => Err(e),
            None => Ok(results),
        }
    }

    fn block_sums<'a, F>(&self, make: F) -> Result<Vec<PartialSums>>
    where
        F: Fn(Range<usize>) -> DeviceJob<'a> + Sync,
    {
        let block = self.plan.block_rows();
        let per_worker = fork_join(&self.plan.block_chunks(), |rows| {
            self.run_worker(rows, block, &make)
        });
        let mut blocks = Vec::new();
        for results in per_worker {
            for r in results? {
                match r {
                    DeviceResult::CoordinateSum(p) | DeviceResult::ClusterSum(p) => {
                        blocks.extend(p)
                    }
                    other => return Err(kind_mismatch(other)),
                }
            }
        }
        Ok(blocks)
    }
}

fn kind_mismatch(result: DeviceResult) -> Error {
    Error::DeviceLost(format!(
        "device returned a {} result for a different job",
        result.kind()
    ))
}

impl Phases for Offload<'_> {
    fn diameter(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<DiameterResult> {
        let n = dataset.n();
        if n < 2 {
            return Err(Error::InsufficientData { n });
        }
        if config.diameter.is_sampled_for(n) {
            return diameter_parallel_with(
                dataset,
                &self.plan,
                config.diameter,
                config.pair_schedule,
            );
        }
        let per_worker = fork_join(self.plan.chunks(), |rows| {
            self.run_worker(rows, 1, |r| DeviceJob::MaxPairDistance { dataset, rows: r })
        });
        let mut best: Option<PartialMax> = None;
        for results in per_worker {
            for r in results? {
                match r {
                    DeviceResult::MaxPairDistance(p) => best = merge_max(best, p),
                    other => return Err(kind_mismatch(other)),
                }
            }
        }
        let best = best.ok_or_else(|| Error::DeviceLost("no farthest pair returned".into()))?;
        Ok(DiameterResult::from_partial(&Euclidean, best, true))
    }

    fn global_centroid(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<Centroid> {
        let blocks = self.block_sums(|rows| DeviceJob::CoordinateSum {
            dataset,
            rows,
            block_rows: config.block_rows,
        })?;
        Ok(crate::engine::centroid_from_sums(&fold_in_order(
            1,
            dataset.m(),
            &blocks,
        )))
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
        let labels = assignment.labels();
        let blocks = self.block_sums(|rows| DeviceJob::ClusterSum {
            dataset,
            labels,
            k: config.k,
            rows,
            block_rows: config.block_rows,
        })?;
        Ok(finish_update(
            dataset,
            labels,
            fold_in_order(config.k, dataset.m(), &blocks),
        ))
    }
}
