//! The `run` and `bench` commands.

use std::num::NonZeroUsize;

use kmeans_core::device::DEFAULT_JOB_ROWS;
use kmeans_core::{
    allowed_regimes, generate_synthetic, open_device, run_planned, select_with, AutoPrefer,
    Dataset, Device, DiameterMode, Error as CoreError, HostReferenceDevice, InitStrategy,
    KmeansConfig, PairSchedule, Regime, RegimePlan,
};

use crate::args::{AutoPreferArg, BenchArgs, Common, InitArg, RegimeArg, RunArgs};
use crate::error::CliError;
use crate::io::{load_dataset, write_centers, write_labels, write_text, CsvOptions};
use crate::report::{median, ms, BenchReport, BenchRow, RunReport};

/// Everything a command needs before it starts timing.
pub struct Prepared {
    pub dataset: Dataset,
    pub config: KmeansConfig,
    pub workload: String,
    pub device: Option<Box<dyn Device>>,
    pub device_name: Option<String>,
    /// Why a named device could not be opened.
    pub device_error: Option<CoreError>,
    pub hw_workers: usize,
    pub prefer: AutoPrefer,
}

pub fn host_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

pub fn prepare(common: &Common) -> Result<Prepared, CliError> {
    let k = common
        .k
        .ok_or_else(|| CliError::Usage("--k is required".into()))?;
    let (dataset, workload) = match (&common.source.input, &common.source.synthetic) {
        (Some(path), _) => {
            let opts = CsvOptions {
                header: common.header,
                id_column: common.id_column,
            };
            (
                load_dataset(path, opts)?,
                format!("file {}", path.display()),
            )
        }
        (None, Some(s)) => (
            generate_synthetic(s.n, s.m, s.k_true, common.seed, s.spread)?,
            format!(
                "synthetic blobs n={} m={} k_true={} spread={} seed={}",
                s.n, s.m, s.k_true, s.spread, common.seed
            ),
        ),
        (None, None) => {
            return Err(CliError::Usage(
                "one of --input or --synthetic is required".into(),
            ))
        }
    };
    let hw_workers = match common.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => t,
        None => host_parallelism(),
    };
    let mut config = KmeansConfig {
        max_iters: common.max_iters,
        tol: common.tol,
        seed: common.seed,
        init: match common.init {
            InitArg::Maximin => InitStrategy::MaximinDeterministic,
            InitArg::RandomFar => InitStrategy::RandomFarApart,
        },
        pair_schedule: if common.balanced_pairs {
            PairSchedule::Balanced
        } else {
            PairSchedule::Rows
        },
        ..KmeansConfig::new(k)
    };
    if let Some(b) = common.block_rows {
        config.block_rows = b;
    }
    if let Some(max_pairs) = common.diameter_pairs {
        config.diameter = DiameterMode::Sampled { max_pairs };
    }
    config.validate(dataset.n())?;
    if common.job_rows == Some(0) {
        return Err(CliError::Usage("--job-rows must be at least 1".into()));
    }

    let (device, device_error) = match common.device.as_deref() {
        None => (None, None),
        Some("reference") => {
            let dev =
                HostReferenceDevice::new(usize::MAX, common.job_rows.unwrap_or(DEFAULT_JOB_ROWS));
            (Some(Box::new(dev) as Box<dyn Device>), None)
        }
        Some(name) => match open_device(name) {
            Ok(d) => (Some(d), None),
            Err(e) => (None, Some(e)),
        },
    };
    Ok(Prepared {
        dataset,
        config,
        workload,
        device,
        device_name: common.device.clone(),
        device_error,
        hw_workers,
        prefer: match common.auto_prefer {
            AutoPreferArg::MostParallel => AutoPrefer::MostParallel,
            AutoPreferArg::Multi => AutoPrefer::Multi,
        },
    })
}

fn requested(regime: RegimeArg) -> Option<Regime> {
    match regime {
        RegimeArg::Auto => None,
        RegimeArg::Single => Some(Regime::Single),
        RegimeArg::Multi => Some(Regime::Multi),
        RegimeArg::Gpu => Some(Regime::GpuMulti),
    }
}

/// Clusters once and writes the requested artifacts. The report is
/// returned; it is also written when `--report-out` is set.
pub fn run_command(args: &RunArgs) -> Result<RunReport, CliError> {
    let p = prepare(&args.common)?;
    let requested = requested(args.regime);
    if let (Some(Regime::GpuMulti), Some(e)) = (requested, &p.device_error) {
        return Err(e.clone().into());
    }
    let plan = select_with(
        p.dataset.n(),
        requested,
        p.hw_workers,
        p.device.is_some(),
        p.prefer,
    )?;
    let mut result = run_planned(&p.dataset, &p.config, &plan, p.device.as_deref())?;
    if let Some(e) = &p.device_error {
        result
            .fallback_events
            .insert(0, format!("{e}; continuing without a device"));
    }
    if let Some(path) = &args.labels_out {
        write_labels(path, &result.assignment)?;
    }
    if let Some(path) = &args.centers_out {
        write_centers(path, &result.model)?;
    }
    let device = p
        .device
        .as_ref()
        .map(|_| p.device_name.as_deref().unwrap_or_default());
    let report = RunReport::new(&result, &plan, device, p.dataset.n(), p.config.seed);
    if let Some(path) = &args.report_out {
        write_text(path, &to_json(&report))?;
    }
    Ok(report)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize") + "\n"
}

/// The (regime, workers) cells a sweep measures. The single-worker baseline
/// always comes first.
pub fn bench_cells(
    n: usize,
    workers: &[usize],
    regimes: Option<&[Regime]>,
    device_present: bool,
) -> Result<Vec<(Regime, usize)>, CliError> {
    let allowed = allowed_regimes(n);
    let wanted: Vec<Regime> = match regimes {
        Some(list) => {
            for &r in list {
                if !allowed.contains(&r) {
                    return Err(CoreError::RegimeNotAllowed { requested: r, n }.into());
                }
                if r == Regime::GpuMulti && !device_present {
                    return Err(CoreError::DeviceUnavailable(
                        "the gpu regime needs --device".into(),
                    )
                    .into());
                }
            }
            list.to_vec()
        }
        None => allowed
            .iter()
            .copied()
            .filter(|&r| r != Regime::GpuMulti || device_present)
            .collect(),
    };
    if workers.contains(&0) {
        return Err(CliError::Usage("worker counts must be at least 1".into()));
    }
    let mut cells = vec![(Regime::Single, 1)];
    for r in [Regime::Multi, Regime::GpuMulti] {
        if wanted.contains(&r) {
            cells.extend(workers.iter().map(|&w| (r, w)));
        }
    }
    Ok(cells)
}

fn default_workers() -> Vec<usize> {
    let mut w = vec![1, 2, 4, host_parallelism()];
    w.sort_unstable();
    w.dedup();
    w
}

/// Runs every cell `repeats` times on the same input and compares each
/// run's labels and centers against the first single-worker run.
pub fn run_bench(
    dataset: &Dataset,
    config: &KmeansConfig,
    cells: &[(Regime, usize)],
    repeats: usize,
    device: Option<&dyn Device>,
    inject_mismatch: bool,
) -> Result<BenchReport, CliError> {
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    // a corrupted baseline would have nothing to differ from
    let repeats = if inject_mismatch && cells.len() == 1 {
        repeats.max(2)
    } else {
        repeats
    };
    let n = dataset.n();
    let allowed = allowed_regimes(n);
    let mut baseline: Option<(Vec<usize>, Vec<u64>)> = None;
    let mut iterations = 0;
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for (c, &(regime, n_workers)) in cells.iter().enumerate() {
        let plan = RegimePlan {
            regime,
            n_workers,
            allowed: allowed.clone(),
        };
        let mut total = Vec::with_capacity(repeats);
        let mut phases = Vec::with_capacity(repeats);
        let mut events = Vec::new();
        for rep in 0..repeats {
            let result = run_planned(dataset, config, &plan, device)?;
            total.push(ms(result.timings.total));
            phases.push(ms(result.timings.iterations()));
            events.extend(result.fallback_events.iter().cloned());
            let mut labels = result.assignment.into_labels();
            let mut centers: Vec<u64> = result
                .model
                .flat_centers()
                .iter()
                .map(|x| x.to_bits())
                .collect();
            if inject_mismatch && c + 1 == cells.len() && rep + 1 == repeats {
                if config.k > 1 {
                    labels[0] = (labels[0] + 1) % config.k;
                } else {
                    centers[0] ^= 1;
                }
            }
            match &baseline {
                None => {
                    iterations = result.iterations;
                    baseline = Some((labels, centers));
                }
                Some((l0, c0)) => {
                    if let Some(diff) = describe_diff(l0, c0, &labels, &centers) {
                        mismatches.push(format!("{regime} x{n_workers} run {}: {diff}", rep + 1));
                    }
                }
            }
        }
        rows.push(BenchRow {
            regime: regime.to_string(),
            n_workers,
            median_total_ms: median(&total),
            median_assign_update_ms: median(&phases),
            total_ms: total,
            assign_update_ms: phases,
            speedup_total: 1.0,
            speedup_assign_update: 1.0,
            fallback_events: events,
        });
    }
    if let Some(base) = rows.first().cloned() {
        for r in rows.iter_mut().skip(1) {
            r.speedup_total = base.median_total_ms / r.median_total_ms;
            r.speedup_assign_update = base.median_assign_update_ms / r.median_assign_update_ms;
        }
    }
    Ok(BenchReport {
        workload: String::new(),
        n,
        m: dataset.m(),
        k: config.k,
        repeats,
        host_parallelism: host_parallelism(),
        iterations,
        rows,
        identical: mismatches.is_empty(),
        mismatches,
    })
}

fn describe_diff(l0: &[usize], c0: &[u64], labels: &[usize], centers: &[u64]) -> Option<String> {
    let differing: Vec<usize> = (0..l0.len()).filter(|&i| l0[i] != labels[i]).collect();
    let coords =
        c0.iter().zip(centers).filter(|(a, b)| a != b).count() + c0.len().abs_diff(centers.len());
    if differing.is_empty() && coords == 0 {
        return None;
    }
    let mut out = format!("{} of {} labels differ", differing.len(), l0.len());
    if let Some(first) = differing.first() {
        out += &format!(
            " (first at sample {first}: {} vs {})",
            l0[*first], labels[*first]
        );
    }
    out += &format!(", {coords} center coordinates differ");
    Some(out)
}

/// Runs the sweep described by `args` and writes the report. A report with
/// mismatches is still written before the error is returned.
pub fn bench_command(args: &BenchArgs) -> Result<BenchReport, CliError> {
    let p = prepare(&args.common)?;
    let regimes: Option<Vec<Regime>> = args
        .regimes
        .as_ref()
        .map(|list| list.iter().filter_map(|&r| requested(r)).collect());
    if let (Some(list), Some(e)) = (&regimes, &p.device_error) {
        if list.contains(&Regime::GpuMulti) {
            return Err(e.clone().into());
        }
    }
    let workers = args.workers.clone().unwrap_or_else(default_workers);
    let cells = bench_cells(
        p.dataset.n(),
        &workers,
        regimes.as_deref().filter(|l| !l.is_empty()),
        p.device.is_some(),
    )?;
    let mut report = run_bench(
        &p.dataset,
        &p.config,
        &cells,
        args.repeats,
        p.device.as_deref(),
        args.inject_mismatch,
    )?;
    report.workload = format!("{}; k={}", p.workload, p.config.k);
    if let Some(path) = &args.report_out {
        write_text(path, &to_json(&report))?;
    }
    Ok(report)
}
