//! Machine-readable run and benchmark reports.

use std::time::Duration;

use kmeans_core::{KmeansResult, RegimePlan};
use serde::{Deserialize, Serialize};

pub fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingsMs {
    pub diameter: f64,
    pub global_centroid: f64,
    pub init: f64,
    /// One entry per assignment round.
    pub assign: Vec<f64>,
    /// One entry per update round.
    pub update: Vec<f64>,
    /// All assignment and update rounds together.
    pub assign_update: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    pub d: f64,
    pub i: usize,
    pub j: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub regime: String,
    pub allowed_regimes: Vec<String>,
    pub device: Option<String>,
    pub n_workers: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub wcss: f64,
    pub wcss_history: Vec<f64>,
    pub diameter: DiameterReport,
    pub timings_ms: TimingsMs,
    pub fallback_events: Vec<String>,
    /// Peak resident set size of the process, where the OS reports it.
    pub peak_rss_bytes: Option<u64>,
}

impl RunReport {
    pub fn new(
        result: &KmeansResult,
        plan: &RegimePlan,
        device: Option<&str>,
        n: usize,
        seed: u64,
    ) -> Self {
        let t = &result.timings;
        Self {
            regime: plan.regime.to_string(),
            allowed_regimes: plan.allowed.iter().map(ToString::to_string).collect(),
            device: device.map(str::to_string),
            n_workers: plan.n_workers,
            n,
            m: result.model.m(),
            k: result.model.k(),
            seed,
            iterations: result.iterations,
            converged: result.converged,
            wcss: result.wcss(),
            wcss_history: result.wcss_history.clone(),
            diameter: DiameterReport {
                d: result.diameter.d,
                i: result.diameter.i,
                j: result.diameter.j,
                exact: result.diameter.exact,
            },
            timings_ms: TimingsMs {
                diameter: ms(t.diameter),
                global_centroid: ms(t.centroid),
                init: ms(t.init),
                assign: t.assign.iter().copied().map(ms).collect(),
                update: t.update.iter().copied().map(ms).collect(),
                assign_update: ms(t.iterations()),
                total: ms(t.total),
            },
            fallback_events: result.fallback_events.clone(),
            peak_rss_bytes: peak_rss_bytes(),
        }
    }
}

/// One (regime, worker count) cell of a benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub regime: String,
    pub n_workers: usize,
    pub total_ms: Vec<f64>,
    pub assign_update_ms: Vec<f64>,
    pub median_total_ms: f64,
    pub median_assign_update_ms: f64,
    /// Single-worker median over this row's median, whole run.
    pub speedup_total: f64,
    /// Same ratio over the assignment and update phases only.
    pub speedup_assign_update: f64,
    pub fallback_events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub workload: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub repeats: usize,
    pub host_parallelism: usize,
    pub iterations: usize,
    pub rows: Vec<BenchRow>,
    /// Every run produced the same labels and centers as the first
    /// single-worker run.
    pub identical: bool,
    pub mismatches: Vec<String>,
}

impl BenchReport {
    pub fn row(&self, regime: &str, n_workers: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.regime == regime && r.n_workers == n_workers)
    }

    /// Plain-text table for terminals.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} ({} repeats, median; host parallelism {})\n{:<8} {:>7} {:>12} {:>10} {:>16} {:>10}\n",
            self.workload,
            self.repeats,
            self.host_parallelism,
            "regime",
            "workers",
            "total ms",
            "speedup",
            "assign+update ms",
            "speedup"
        );
        for r in &self.rows {
            out += &format!(
                "{:<8} {:>7} {:>12.1} {:>10.2} {:>16.1} {:>10.2}\n",
                r.regime,
                r.n_workers,
                r.median_total_ms,
                r.speedup_total,
                r.median_assign_update_ms,
                r.speedup_assign_update
            );
        }
        out
    }
}

/// Median of a non-empty sample; the mean of the middle pair for even
/// lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// High-water mark of resident memory, from `/proc/self/status`.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
