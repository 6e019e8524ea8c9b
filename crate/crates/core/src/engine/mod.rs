//! The single-worker regime and the Lloyd loop shared by every regime.
//!
//! A run computes the diameter, the global centroid and the initial centers,
//! then alternates assignment and update rounds until two consecutive center
//! sets are congruent or `max_iters` rounds have run.

mod diameter;
mod init;

use std::ops::Range;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use diameter::{diameter, diameter_with, DiameterMode, DiameterResult, SAMPLED_DIAMETER_MIN_N};
pub(crate) use diameter::{max_pair_subset, refine_endpoints, sampled_indices};
pub use init::{init_centers, init_centers_with};

use crate::error::{Error, Result};
use crate::metric::{squared_distance, Euclidean, Metric};
use crate::model::{Assignment, Centroid, ClusterModel, Dataset};
use crate::partial::{
    blockwise, cluster_sums, coordinate_sums, fold_in_order, PartialSums, DEFAULT_BLOCK_ROWS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitStrategy {
    /// Diameter pair first, then farthest-first traversal.
    #[default]
    MaximinDeterministic,
    /// Seeded random draws kept only when farther than `D / 2k` from every
    /// chosen center.
    RandomFarApart,
}

/// How multi-worker diameter scans split rows among workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PairSchedule {
    /// Contiguous row ranges. Early rows own more pairs.
    #[default]
    Rows,
    /// Leading rows travel with trailing rows so every worker owns about
    /// the same number of pairs.
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Largest center movement still considered congruent. Zero demands
    /// bitwise-equal coordinates.
    pub tol: f64,
    pub seed: u64,
    pub init: InitStrategy,
    pub diameter: DiameterMode,
    pub pair_schedule: PairSchedule,
    /// Rows per accumulation block. Part of the numeric contract: results
    /// are only bit-comparable between runs that share it.
    pub block_rows: usize,
}

impl KmeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iters: 1000,
            tol: 0.0,
            seed: 0,
            init: InitStrategy::default(),
            diameter: DiameterMode::default(),
            pair_schedule: PairSchedule::default(),
            block_rows: DEFAULT_BLOCK_ROWS,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidConfig(format!(
                "k = {} must be in 1..={n}",
                self.k
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol = {} must be finite and >= 0",
                self.tol
            )));
        }
        if self.block_rows == 0 {
            return Err(Error::InvalidConfig("block_rows must be at least 1".into()));
        }
        Ok(())
    }
}

/// Wall-clock time spent in each phase of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseTimings {
    pub diameter: Duration,
    pub centroid: Duration,
    pub init: Duration,
    pub assign: Vec<Duration>,
    pub update: Vec<Duration>,
    pub total: Duration,
}

impl PhaseTimings {
    /// Sum of all assignment and update rounds.
    pub fn iterations(&self) -> Duration {
        self.assign.iter().chain(&self.update).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    /// The centers the final assignment was computed against; counts are
    /// that assignment's histogram.
    pub model: ClusterModel,
    pub assignment: Assignment,
    pub iterations: usize,
    pub converged: bool,
    pub diameter: DiameterResult,
    pub global_centroid: Centroid,
    /// Objective after each assignment round.
    pub wcss_history: Vec<f64>,
    pub timings: PhaseTimings,
    /// Degraded-mode events, e.g. a lost device.
    pub fallback_events: Vec<String>,
}

impl KmeansResult {
    /// True when both runs produced identical numbers, ignoring timings and
    /// fallback notes.
    pub fn same_outcome(&self, other: &KmeansResult) -> bool {
        self.model == other.model
            && self.assignment == other.assignment
            && self.iterations == other.iterations
            && self.converged == other.converged
            && self.diameter == other.diameter
            && self.global_centroid == other.global_centroid
            && self.wcss_history.len() == other.wcss_history.len()
            && self
                .wcss_history
                .iter()
                .zip(&other.wcss_history)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn wcss(&self) -> f64 {
        self.wcss_history.last().copied().unwrap_or(0.0)
    }
}

/// Nearest center for every row in `rows`; lowest center index on ties.
/// Writes labels and the winning surrogate for each row.
pub(crate) fn assign_rows<M: Metric + ?Sized>(
    dataset: &Dataset,
    model: &ClusterModel,
    metric: &M,
    rows: Range<usize>,
    labels: &mut [usize],
    scores: &mut [f64],
) {
    debug_assert_eq!(labels.len(), rows.len());
    for ((i, label), score) in rows.zip(labels.iter_mut()).zip(scores.iter_mut()) {
        let x = dataset.row(i);
        let mut best = (0, f64::INFINITY);
        for (c, center) in model.centers().enumerate() {
            let s = metric.surrogate(x, center);
            if s < best.1 {
                best = (c, s);
            }
        }
        *label = best.0;
        *score = best.1;
    }
}

fn check_model(dataset: &Dataset, model: &ClusterModel) -> Result<()> {
    if model.m() != dataset.m() {
        return Err(Error::DimensionMismatch {
            expected: dataset.m(),
            found: model.m(),
        });
    }
    Ok(())
}

pub(crate) fn check_assignment(dataset: &Dataset, assignment: &Assignment, k: usize) -> Result<()> {
    if assignment.len() != dataset.n() {
        return Err(Error::InconsistentSizes(format!(
            "{} labels for {} samples",
            assignment.len(),
            dataset.n()
        )));
    }
    if assignment.k() != k {
        return Err(Error::InconsistentSizes(format!(
            "assignment built for k = {}, asked for k = {k}",
            assignment.k()
        )));
    }
    if k > dataset.n() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} exceeds n = {}",
            dataset.n()
        )));
    }
    Ok(())
}

/// Labels every sample with its nearest center and sets `model.counts` to
/// the label histogram.
pub fn assign_step(dataset: &Dataset, model: &mut ClusterModel) -> Result<Assignment> {
    assign_step_with(dataset, &Euclidean, model)
}

pub fn assign_step_with<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    model: &mut ClusterModel,
) -> Result<Assignment> {
    Ok(assign_sequential(dataset, metric, model)?.0)
}

fn assign_sequential<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    model: &mut ClusterModel,
) -> Result<(Assignment, f64)> {
    check_model(dataset, model)?;
    let n = dataset.n();
    let mut labels = vec![0; n];
    let mut scores = vec![0.0; n];
    assign_rows(dataset, model, metric, 0..n, &mut labels, &mut scores);
    Ok(finish_assign(model, labels, &scores))
}

/// Shared tail of every assignment path: histogram into the model, WCSS
/// summed in sample order.
pub(crate) fn finish_assign(
    model: &mut ClusterModel,
    labels: Vec<usize>,
    scores: &[f64],
) -> (Assignment, f64) {
    let assignment = Assignment::from_labels_unchecked(labels, model.k());
    model.set_counts(assignment.histogram());
    (assignment, scores.iter().sum())
}

/// Recomputes every center as the mean of its members.
pub fn update_step(dataset: &Dataset, assignment: &Assignment, k: usize) -> Result<ClusterModel> {
    update_blocked(dataset, assignment, k, DEFAULT_BLOCK_ROWS)
}

pub(crate) fn update_blocked(
    dataset: &Dataset,
    assignment: &Assignment,
    k: usize,
    block_rows: usize,
) -> Result<ClusterModel> {
    check_assignment(dataset, assignment, k)?;
    let labels = assignment.labels();
    let parts = blockwise(dataset.n(), block_rows, 0..dataset.n(), |r| {
        cluster_sums(dataset, labels, k, r)
    });
    Ok(finish_update(
        dataset,
        labels,
        fold_in_order(k, dataset.m(), &parts),
    ))
}

/// Turns merged cluster sums into centers, re-seeding empty clusters.
///
/// Each empty cluster, in increasing index order, takes the sample farthest
/// from its own current center among clusters with more than one member
/// (lowest sample index on ties). The donor's center is recomputed without
/// it.
pub(crate) fn finish_update(
    dataset: &Dataset,
    labels: &[usize],
    total: PartialSums,
) -> ClusterModel {
    let (k, m) = (total.k(), total.m());
    let (mut sums, mut counts) = total.into_parts();
    let mut centers = vec![0.0; k * m];
    for c in 0..k {
        if counts[c] > 0 {
            mean_into(
                &mut centers[c * m..(c + 1) * m],
                &sums[c * m..(c + 1) * m],
                counts[c],
            );
        }
    }
    if counts.iter().all(|&c| c > 0) {
        return ClusterModel::from_parts(centers, counts, m);
    }

    let mut labels = labels.to_vec();
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut pick: Option<(usize, f64)> = None;
        for (x, &l) in labels.iter().enumerate() {
            if counts[l] < 2 {
                continue;
            }
            let s = squared_distance(dataset.row(x), &centers[l * m..(l + 1) * m]);
            if pick.is_none_or(|(_, best)| s > best) {
                pick = Some((x, s));
            }
        }
        // n >= k guarantees a donor cluster with two or more members
        let (x, _) = pick.expect("a cluster with at least two members exists");
        let donor = labels[x];
        let row = dataset.row(x);
        for (s, v) in sums[donor * m..(donor + 1) * m].iter_mut().zip(row) {
            *s -= v;
        }
        counts[donor] -= 1;
        mean_into(
            &mut centers[donor * m..(donor + 1) * m],
            &sums[donor * m..(donor + 1) * m],
            counts[donor],
        );
        sums[empty * m..(empty + 1) * m].copy_from_slice(row);
        centers[empty * m..(empty + 1) * m].copy_from_slice(row);
        counts[empty] = 1;
        labels[x] = empty;
    }
    ClusterModel::from_parts(centers, counts, m)
}

fn mean_into(dst: &mut [f64], sums: &[f64], count: usize) {
    let count = count as f64;
    for (d, s) in dst.iter_mut().zip(sums) {
        *d = s / count;
    }
}

/// True when no center moved by more than `tol`.
pub fn converged(prev: &ClusterModel, next: &ClusterModel, tol: f64) -> Result<bool> {
    if prev.k() != next.k() || prev.m() != next.m() {
        return Err(Error::InconsistentSizes(format!(
            "comparing {}x{} centers with {}x{}",
            prev.k(),
            prev.m(),
            next.k(),
            next.m()
        )));
    }
    if tol == 0.0 {
        return Ok(prev.flat_centers() == next.flat_centers());
    }
    let tol2 = tol * tol;
    Ok(prev
        .centers()
        .zip(next.centers())
        .all(|(a, b)| a == b || squared_distance(a, b) <= tol2))
}

/// Mean of all samples, accumulated over canonical blocks.
pub(crate) fn global_centroid_blocked(dataset: &Dataset, block_rows: usize) -> Centroid {
    let n = dataset.n();
    let parts = blockwise(n, block_rows, 0..n, |r| coordinate_sums(dataset, r));
    centroid_from_sums(&fold_in_order(1, dataset.m(), &parts))
}

pub(crate) fn centroid_from_sums(total: &PartialSums) -> Centroid {
    let count = total.total_count() as f64;
    Centroid::from_vec_unchecked(total.sums().iter().map(|s| s / count).collect())
}

/// The per-phase operations a regime supplies to the shared Lloyd driver.
pub(crate) trait Phases {
    fn diameter(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<DiameterResult>;
    fn global_centroid(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<Centroid>;
    fn assign(&self, dataset: &Dataset, model: &mut ClusterModel) -> Result<(Assignment, f64)>;
    fn update(
        &self,
        dataset: &Dataset,
        assignment: &Assignment,
        config: &KmeansConfig,
    ) -> Result<ClusterModel>;
}

pub(crate) fn drive<P: Phases + ?Sized>(
    dataset: &Dataset,
    config: &KmeansConfig,
    phases: &P,
) -> Result<KmeansResult> {
    config.validate(dataset.n())?;
    let start = Instant::now();
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let diameter = phases.diameter(dataset, config)?;
    timings.diameter = t.elapsed();

    let t = Instant::now();
    let global_centroid = phases.global_centroid(dataset, config)?;
    timings.centroid = t.elapsed();

    let t = Instant::now();
    let mut current = init_centers(dataset, config, &diameter)?;
    timings.init = t.elapsed();

    let mut wcss_history = Vec::new();
    let mut iterations = 0;
    let mut converged_flag = false;
    let assignment = loop {
        iterations += 1;

        let t = Instant::now();
        let (assignment, wcss) = phases.assign(dataset, &mut current)?;
        timings.assign.push(t.elapsed());
        wcss_history.push(wcss);

        let t = Instant::now();
        let next = phases.update(dataset, &assignment, config)?;
        timings.update.push(t.elapsed());

        if converged(&current, &next, config.tol)? {
            converged_flag = true;
            break assignment;
        }
        if iterations == config.max_iters {
            break assignment;
        }
        current = next;
    };
    timings.total = start.elapsed();

    Ok(KmeansResult {
        model: current,
        assignment,
        iterations,
        converged: converged_flag,
        diameter,
        global_centroid,
        wcss_history,
        timings,
        fallback_events: Vec::new(),
    })
}

struct SingleWorker;

impl Phases for SingleWorker {
    fn diameter(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<DiameterResult> {
        diameter_with(dataset, &Euclidean, config.diameter)
    }

    fn global_centroid(&self, dataset: &Dataset, config: &KmeansConfig) -> Result<Centroid> {
        Ok(global_centroid_blocked(dataset, config.block_rows))
    }

    fn assign(&self, dataset: &Dataset, model: &mut ClusterModel) -> Result<(Assignment, f64)> {
        assign_sequential(dataset, &Euclidean, model)
    }

    fn update(
        &self,
        dataset: &Dataset,
        assignment: &Assignment,
        config: &KmeansConfig,
    ) -> Result<ClusterModel> {
        update_blocked(dataset, assignment, config.k, config.block_rows)
    }
}

/// Runs the whole clustering on the calling thread.
pub fn run_single(dataset: &Dataset, config: &KmeansConfig) -> Result<KmeansResult> {
    drive(dataset, config, &SingleWorker)
}
