//! Accelerator offload.
//!
//! Workers package farthest-pair scans and coordinate sums as [`DeviceJob`]s,
//! submit them to a [`Device`] and collect the results by ticket. Sum jobs
//! return one partial per accumulation block, so the host merge is the same
//! fold the other regimes use. Assignment never goes to the device.

mod offload;
mod reference;

use std::fmt;
use std::ops::Range;

pub use offload::{run_gpu, DEFAULT_JOB_ROWS};
pub use reference::HostReferenceDevice;

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::partial::{PartialMax, PartialSums};

/// Handle for one submitted job. Unique per device.
pub type Ticket = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JobKind {
    MaxPairDistance,
    CoordinateSum,
    ClusterSum,
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JobKind::MaxPairDistance => "max-pair-distance",
            JobKind::CoordinateSum => "coordinate-sum",
            JobKind::ClusterSum => "cluster-sum",
        })
    }
}

/// A unit of offloaded work over a row range of a read-only dataset.
#[derive(Debug, Clone)]
pub enum DeviceJob<'a> {
    /// Farthest pair `(i, j)` with `i` in `rows` and `j > i` anywhere.
    MaxPairDistance {
        dataset: &'a Dataset,
        rows: Range<usize>,
    },
    /// Coordinate sums of `rows`, one partial per accumulation block.
    CoordinateSum {
        dataset: &'a Dataset,
        rows: Range<usize>,
        block_rows: usize,
    },
    /// Per-cluster sums and counts of `rows`, one partial per block.
    ClusterSum {
        dataset: &'a Dataset,
        labels: &'a [usize],
        k: usize,
        rows: Range<usize>,
        block_rows: usize,
    },
}

impl DeviceJob<'_> {
    pub fn kind(&self) -> JobKind {
        match self {
            DeviceJob::MaxPairDistance { .. } => JobKind::MaxPairDistance,
            DeviceJob::CoordinateSum { .. } => JobKind::CoordinateSum,
            DeviceJob::ClusterSum { .. } => JobKind::ClusterSum,
        }
    }

    pub fn rows(&self) -> Range<usize> {
        match self {
            DeviceJob::MaxPairDistance { rows, .. }
            | DeviceJob::CoordinateSum { rows, .. }
            | DeviceJob::ClusterSum { rows, .. } => rows.clone(),
        }
    }

    fn dataset(&self) -> &Dataset {
        match self {
            DeviceJob::MaxPairDistance { dataset, .. }
            | DeviceJob::CoordinateSum { dataset, .. }
            | DeviceJob::ClusterSum { dataset, .. } => dataset,
        }
    }

    /// Bytes the device must hold to run the job. A farthest-pair job reads
    /// every row from the start of its range to the end of the dataset.
    pub fn buffer_bytes(&self) -> usize {
        let ds = self.dataset();
        let row = ds.m() * std::mem::size_of::<f64>();
        match self {
            DeviceJob::MaxPairDistance { rows, .. } => (ds.n() - rows.start.min(ds.n())) * row,
            DeviceJob::CoordinateSum { rows, .. } => rows.len() * row,
            DeviceJob::ClusterSum { rows, .. } => rows.len() * (row + std::mem::size_of::<u32>()),
        }
    }

    /// Checks ranges, label buffers and block alignment.
    pub fn validate(&self) -> Result<()> {
        let ds = self.dataset();
        let rows = self.rows();
        if rows.start > rows.end || rows.end > ds.n() {
            return Err(Error::ValidationFailure(format!(
                "rows {rows:?} outside 0..{}",
                ds.n()
            )));
        }
        match self {
            DeviceJob::MaxPairDistance { .. } => Ok(()),
            DeviceJob::CoordinateSum { block_rows, .. } => {
                check_alignment(&rows, *block_rows, ds.n())
            }
            DeviceJob::ClusterSum {
                labels,
                k,
                block_rows,
                ..
            } => {
                check_alignment(&rows, *block_rows, ds.n())?;
                if labels.len() != ds.n() {
                    return Err(Error::ValidationFailure(format!(
                        "{} labels for {} samples",
                        labels.len(),
                        ds.n()
                    )));
                }
                if *k == 0 {
                    return Err(Error::ValidationFailure("k must be at least 1".into()));
                }
                if let Some(i) = rows.clone().find(|&i| labels[i] >= *k) {
                    return Err(Error::ValidationFailure(format!(
                        "label {} of sample {i} is not below k = {k}",
                        labels[i]
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Sum jobs cover whole accumulation blocks only.
fn check_alignment(rows: &Range<usize>, block_rows: usize, n: usize) -> Result<()> {
    let aligned = |r: usize| r.is_multiple_of(block_rows);
    if block_rows == 0 || !aligned(rows.start) || !(aligned(rows.end) || rows.end == n) {
        return Err(Error::ValidationFailure(format!(
            "sum job over rows {rows:?} does not cover whole blocks of {block_rows}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceResult {
    /// `None` when the range holds no pair.
    MaxPairDistance(Option<PartialMax>),
    CoordinateSum(Vec<PartialSums>),
    ClusterSum(Vec<PartialSums>),
}

impl DeviceResult {
    pub fn kind(&self) -> JobKind {
        match self {
            DeviceResult::MaxPairDistance(_) => JobKind::MaxPairDistance,
            DeviceResult::CoordinateSum(_) => JobKind::CoordinateSum,
            DeviceResult::ClusterSum(_) => JobKind::ClusterSum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceCapability {
    pub name: String,
    pub max_buffer_bytes: usize,
    /// Rows per job the orchestrator aims for.
    pub preferred_job_rows: usize,
}

/// An execution target for device jobs.
///
/// `submit` and `collect` may be called concurrently from several workers.
/// Every ticket must be collected exactly once.
pub trait Device: Send + Sync {
    fn capability(&self) -> &DeviceCapability;

    fn submit(&self, job: DeviceJob<'_>) -> Result<Ticket>;

    /// Blocks until the job behind `ticket` has finished.
    fn collect(&self, ticket: Ticket) -> Result<DeviceResult>;

    /// Tickets submitted but not yet collected.
    fn outstanding(&self) -> usize;
}

/// Device names accepted by [`open_device`].
pub const DEVICE_NAMES: [&str; 2] = ["reference", "gpu"];

/// Opens a device by its configured name.
///
/// `"reference"` is always available. `"gpu"` needs an accelerator backend,
/// which this build does not include.
pub fn open_device(name: &str) -> Result<Box<dyn Device>> {
    match name {
        "reference" => Ok(Box::new(HostReferenceDevice::default())),
        "gpu" => Err(Error::DeviceUnavailable(
            "no accelerator backend is compiled into this build".into(),
        )),
        other => Err(Error::DeviceUnavailable(format!(
            "unknown device {other:?}; expected one of {DEVICE_NAMES:?}"
        ))),
    }
}
