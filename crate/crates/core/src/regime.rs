//! Choosing between the single-worker, multi-worker and offload regimes.
//!
//! The allowed set depends only on the sample count:
//!
//! | n                  | allowed                     |
//! |--------------------|-----------------------------|
//! | below 10 000       | single                      |
//! | 10 000 ..= 100 000 | single, multi               |
//! | above 100 000      | single, multi, gpu          |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::device::Device;
use crate::engine::{run_single, KmeansConfig, KmeansResult};
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::parallel::run_multi;

/// Smallest `n` for which the multi-worker regime is offered.
pub const MULTI_MIN_N: usize = 10_000;
/// Largest `n` for which the offload regime is still withheld.
pub const GPU_MAX_WITHHELD_N: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Single,
    Multi,
    GpuMulti,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Single, Regime::Multi, Regime::GpuMulti];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Single => "single",
            Regime::Multi => "multi",
            Regime::GpuMulti => "gpu",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Regime::Single),
            "multi" => Ok(Regime::Multi),
            "gpu" | "gpu-multi" => Ok(Regime::GpuMulti),
            other => Err(Error::InvalidConfig(format!("unknown regime {other:?}"))),
        }
    }
}

/// What automatic selection may pick at most.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AutoPrefer {
    /// The most parallel regime that is allowed and available.
    #[default]
    MostParallel,
    /// Never choose the offload regime automatically.
    Multi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimePlan {
    pub regime: Regime,
    pub n_workers: usize,
    pub allowed: BTreeSet<Regime>,
}

pub fn allowed_regimes(n: usize) -> BTreeSet<Regime> {
    let mut set = BTreeSet::from([Regime::Single]);
    if n >= MULTI_MIN_N {
        set.insert(Regime::Multi);
    }
    if n > GPU_MAX_WITHHELD_N {
        set.insert(Regime::GpuMulti);
    }
    set
}

/// Honors `requested` when allowed and runnable, otherwise picks
/// automatically.
pub fn select(
    n: usize,
    requested: Option<Regime>,
    hw_workers: usize,
    device_present: bool,
) -> Result<RegimePlan> {
    select_with(
        n,
        requested,
        hw_workers,
        device_present,
        AutoPrefer::MostParallel,
    )
}

pub fn select_with(
    n: usize,
    requested: Option<Regime>,
    hw_workers: usize,
    device_present: bool,
    prefer: AutoPrefer,
) -> Result<RegimePlan> {
    let allowed = allowed_regimes(n);
    let regime = match requested {
        Some(r) if !allowed.contains(&r) => {
            return Err(Error::RegimeNotAllowed { requested: r, n })
        }
        Some(Regime::GpuMulti) if !device_present => {
            return Err(Error::DeviceUnavailable(
                "the gpu regime was requested but no device is available".into(),
            ))
        }
        Some(r) => r,
        None => {
            let gpu_ok = device_present && prefer == AutoPrefer::MostParallel;
            if gpu_ok && allowed.contains(&Regime::GpuMulti) {
                Regime::GpuMulti
            } else if allowed.contains(&Regime::Multi) {
                Regime::Multi
            } else {
                Regime::Single
            }
        }
    };
    let n_workers = match regime {
        Regime::Single => 1,
        _ => hw_workers.max(1),
    };
    Ok(RegimePlan {
        regime,
        n_workers,
        allowed,
    })
}

/// Runs the regime chosen by `plan`.
pub fn run_planned(
    dataset: &Dataset,
    config: &KmeansConfig,
    plan: &RegimePlan,
    device: Option<&dyn Device>,
) -> Result<KmeansResult> {
    match plan.regime {
        Regime::Single => run_single(dataset, config),
        Regime::Multi => run_multi(dataset, config, plan.n_workers),
        Regime::GpuMulti => {
            let device =
                device.ok_or_else(|| Error::DeviceUnavailable("no device was opened".into()))?;
            crate::device::run_gpu(dataset, config, plan.n_workers, device)
        }
    }
}
