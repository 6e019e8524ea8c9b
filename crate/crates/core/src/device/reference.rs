use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::{Device, DeviceCapability, DeviceJob, DeviceResult, Ticket, DEFAULT_JOB_ROWS};
use crate::error::{Error, Result};
use crate::metric::Euclidean;
use crate::partial::{blockwise, cluster_sums, coordinate_sums, max_pair_rows};

/// Runs device jobs on the submitting host thread with the same kernels and
/// summation order as the multi-worker regime.
#[derive(Debug)]
pub struct HostReferenceDevice {
    capability: DeviceCapability,
    next: AtomicU64,
    state: Mutex<Tickets>,
}

#[derive(Debug, Default)]
struct Tickets {
    ready: HashMap<Ticket, DeviceResult>,
    collected: HashSet<Ticket>,
}

impl Default for HostReferenceDevice {
    fn default() -> Self {
        Self::new(usize::MAX, DEFAULT_JOB_ROWS)
    }
}

impl HostReferenceDevice {
    pub fn new(max_buffer_bytes: usize, preferred_job_rows: usize) -> Self {
        Self {
            capability: DeviceCapability {
                name: "reference".into(),
                max_buffer_bytes,
                preferred_job_rows: preferred_job_rows.max(1),
            },
            next: AtomicU64::new(1),
            state: Mutex::new(Tickets::default()),
        }
    }

    fn execute(job: &DeviceJob<'_>) -> DeviceResult {
        match job {
            DeviceJob::MaxPairDistance { dataset, rows } => {
                DeviceResult::MaxPairDistance(max_pair_rows(dataset, &Euclidean, rows.clone()))
            }
            DeviceJob::CoordinateSum {
                dataset,
                rows,
                block_rows,
            } => DeviceResult::CoordinateSum(blockwise(
                dataset.n(),
                *block_rows,
                rows.clone(),
                |b| coordinate_sums(dataset, b),
            )),
            DeviceJob::ClusterSum {
                dataset,
                labels,
                k,
                rows,
                block_rows,
            } => DeviceResult::ClusterSum(blockwise(dataset.n(), *block_rows, rows.clone(), |b| {
                cluster_sums(dataset, labels, *k, b)
            })),
        }
    }
}

impl Device for HostReferenceDevice {
    fn capability(&self) -> &DeviceCapability {
        &self.capability
    }

    fn submit(&self, job: DeviceJob<'_>) -> Result<Ticket> {
        job.validate()?;
        let needed = job.buffer_bytes();
        if needed > self.capability.max_buffer_bytes {
            return Err(Error::CapacityExceeded {
                needed,
                limit: self.capability.max_buffer_bytes,
            });
        }
        let result = Self::execute(&job);
        let ticket = self.next.fetch_add(1, Ordering::Relaxed);
        self.state.lock().unwrap().ready.insert(ticket, result);
        Ok(ticket)
    }

    fn collect(&self, ticket: Ticket) -> Result<DeviceResult> {
        let mut state = self.state.lock().unwrap();
        match state.ready.remove(&ticket) {
            Some(r) => {
                state.collected.insert(ticket);
                Ok(r)
            }
            None if state.collected.contains(&ticket) => Err(Error::DoubleCollect(ticket)),
            None => Err(Error::UnknownTicket(ticket)),
        }
    }

    fn outstanding(&self) -> usize {
        self.state.lock().unwrap().ready.len()
    }
}
