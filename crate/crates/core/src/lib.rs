//! K-means clustering in three execution regimes.
//!
//! * [`run_single`]: everything on the calling thread.
//! * [`run_multi`]: each phase split across `N` scoped workers.
//! * [`run_gpu`]: `N` workers offload farthest-pair scans and coordinate
//!   sums to a [`Device`]; assignment stays on the host.
//!
//! All three share one numeric path. Sums are accumulated over fixed row
//! blocks and merged in block order, ties break toward the lowest index,
//! and the convergence test runs on the calling thread, so for a given
//! [`KmeansConfig`] the regimes return bit-identical labels and centers.
//! [`regime`] picks a regime from the sample count.

pub mod device;
pub mod engine;
pub mod error;
pub mod metric;
pub mod model;
pub mod parallel;
pub mod partial;
pub mod regime;
pub mod synthetic;

pub use device::{
    open_device, run_gpu, Device, DeviceCapability, DeviceJob, DeviceResult, HostReferenceDevice,
};
pub use engine::{
    assign_step, converged, diameter, init_centers, run_single, update_step, DiameterMode,
    DiameterResult, InitStrategy, KmeansConfig, KmeansResult, PairSchedule, PhaseTimings,
};
pub use error::{Error, Result};
pub use metric::{distance, squared_distance, Euclidean, Metric};
pub use model::{centroid_of, wcss, Assignment, Centroid, ClusterModel, Dataset, Point};
pub use parallel::{
    assign_parallel, centroid_parallel, diameter_parallel, plan_chunks, run_multi, update_parallel,
    ChunkPlan, PartialMax, PartialSums,
};
pub use regime::{
    allowed_regimes, run_planned, select, select_with, AutoPrefer, Regime, RegimePlan,
};
pub use synthetic::generate_synthetic;
