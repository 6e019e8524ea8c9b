//! Partial reductions and their ordered merges.
//!
//! Sums are always accumulated over fixed row blocks whose boundaries depend
//! only on `n` and the block size. Block partials are then folded in block
//! index order, so the floating point result is the same no matter how many
//! workers (or device jobs) produced the blocks.

use std::cmp::Ordering;
use std::ops::Range;

use crate::metric::Metric;
use crate::model::Dataset;

/// Rows per accumulation block unless configured otherwise.
pub const DEFAULT_BLOCK_ROWS: usize = 4096;

/// The farthest pair found in some slice of the pair space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialMax {
    /// Metric surrogate of the pair distance (squared distance for Euclidean).
    pub score: f64,
    pub i: usize,
    pub j: usize,
}

impl PartialMax {
    /// Ordering used for merging: higher score wins, then the
    /// lexicographically smaller pair.
    pub fn beats(&self, other: &PartialMax) -> bool {
        match self.score.partial_cmp(&other.score) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => (self.i, self.j) < (other.i, other.j),
        }
    }
}

/// Merge two optional partial maxima.
pub fn merge_max(a: Option<PartialMax>, b: Option<PartialMax>) -> Option<PartialMax> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.beats(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Rows of `i` sharing one transposed tile of `j` rows.
pub(crate) const I_TILE: usize = 32;
/// Rows of `j` transposed together.
const J_TILE: usize = 128;

/// Scans every pair `(i, j)` with `i` in `rows` and `i < j < n`.
///
/// The result is the maximum under [`PartialMax::beats`], so ties resolve to
/// the lexicographically smallest pair regardless of visiting order. The
/// scan is tiled: `j` rows are transposed to column-major once and scored
/// against a run of `i` rows with [`Metric::surrogate_columns`].
pub fn max_pair_rows<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    rows: Range<usize>,
) -> Option<PartialMax> {
    let (n, m) = (dataset.n(), dataset.m());
    let mut tile = vec![0.0f64; m * J_TILE];
    let mut scores = [0.0f64; J_TILE];
    let mut best: Option<PartialMax> = None;
    let mut ib = rows.start;
    while ib < rows.end {
        let ie = (ib + I_TILE).min(rows.end);
        let mut jb = ib + 1;
        while jb < n {
            let len = J_TILE.min(n - jb);
            for l in 0..len {
                for (c, &x) in dataset.row(jb + l).iter().enumerate() {
                    tile[c * J_TILE + l] = x;
                }
            }
            for i in ib..ie.min(jb + len - 1) {
                // only j > i counts
                let skip = (i + 1).saturating_sub(jb);
                let out = &mut scores[..len];
                metric.surrogate_columns(dataset.row(i), &tile, J_TILE, out);
                let live = &out[skip..];
                let top = live.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                if best.is_some_and(|b| top < b.score) {
                    continue;
                }
                if let Some(off) = live.iter().position(|&s| s == top) {
                    let cand = PartialMax {
                        score: top,
                        i,
                        j: jb + skip + off,
                    };
                    if best.is_none_or(|b| cand.beats(&b)) {
                        best = Some(cand);
                    }
                }
            }
            jb += len;
        }
        ib = ie;
    }
    best
}

/// Per-cluster coordinate sums and member counts over a row range.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    k: usize,
    m: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl PartialSums {
    pub fn zeros(k: usize, m: usize) -> Self {
        Self {
            k,
            m,
            sums: vec![0.0; k * m],
            counts: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Row-major `k × m` sums.
    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn cluster_sum(&self, c: usize) -> &[f64] {
        &self.sums[c * self.m..(c + 1) * self.m]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub(crate) fn into_parts(self) -> (Vec<f64>, Vec<usize>) {
        (self.sums, self.counts)
    }

    /// Adds `other` into `self` coordinate by coordinate.
    pub fn absorb(&mut self, other: &PartialSums) {
        debug_assert_eq!((self.k, self.m), (other.k, other.m));
        for (s, o) in self.sums.iter_mut().zip(&other.sums) {
            *s += o;
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
    }
}

/// Folds block partials left to right. Returns zeros for an empty sequence.
pub fn fold_in_order<'a, I>(k: usize, m: usize, parts: I) -> PartialSums
where
    I: IntoIterator<Item = &'a PartialSums>,
{
    let mut total = PartialSums::zeros(k, m);
    for p in parts {
        total.absorb(p);
    }
    total
}

/// Coordinate sums over `rows` grouped by label.
pub fn cluster_sums(
    dataset: &Dataset,
    labels: &[usize],
    k: usize,
    rows: Range<usize>,
) -> PartialSums {
    let m = dataset.m();
    let mut acc = PartialSums::zeros(k, m);
    for i in rows {
        let l = labels[i];
        acc.counts[l] += 1;
        let dst = &mut acc.sums[l * m..(l + 1) * m];
        for (s, x) in dst.iter_mut().zip(dataset.row(i)) {
            *s += x;
        }
    }
    acc
}

/// Coordinate sums over `rows` as a single cluster.
pub fn coordinate_sums(dataset: &Dataset, rows: Range<usize>) -> PartialSums {
    let m = dataset.m();
    let mut acc = PartialSums::zeros(1, m);
    acc.counts[0] = rows.len();
    for i in rows {
        for (s, x) in acc.sums.iter_mut().zip(dataset.row(i)) {
            *s += x;
        }
    }
    acc
}

/// Number of accumulation blocks covering `n` rows.
pub fn block_count(n: usize, block_rows: usize) -> usize {
    n.div_ceil(block_rows)
}

/// Row range of block `b`.
pub fn block_range(n: usize, block_rows: usize, b: usize) -> Range<usize> {
    let start = b * block_rows;
    start..(start + block_rows).min(n)
}

/// Block partials for every block whose first row lies in `rows`.
///
/// `rows` must be block-aligned at its start.
pub(crate) fn blockwise<F>(
    n: usize,
    block_rows: usize,
    rows: Range<usize>,
    mut f: F,
) -> Vec<PartialSums>
where
    F: FnMut(Range<usize>) -> PartialSums,
{
    debug_assert_eq!(rows.start % block_rows, 0);
    let first = rows.start / block_rows;
    let last = block_count(rows.end, block_rows);
    (first..last)
        .map(|b| f(block_range(n, block_rows, b)))
        .collect()
}
