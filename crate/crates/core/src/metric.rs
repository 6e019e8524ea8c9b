//! Distance functions.
//!
//! Every regime compares points through [`Metric::surrogate`], a value that
//! orders pairs the same way the true distance does but is cheaper to
//! compute. The true distance is only materialized through
//! [`Metric::finish`] where it is reported.

use crate::error::{Error, Result};

/// A distance on coordinate vectors of equal length.
pub trait Metric: Send + Sync {
    /// A monotone transform of the distance used for all comparisons.
    fn surrogate(&self, a: &[f64], b: &[f64]) -> f64;

    /// Maps a surrogate value back to the distance itself.
    fn finish(&self, surrogate: f64) -> f64;

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.finish(self.surrogate(a, b))
    }

    /// Surrogates from `a` to `out.len()` points stored column-major in
    /// `cols`: coordinate `c` of point `l` is `cols[c * stride + l]`. Must
    /// equal calling [`Metric::surrogate`] per point, bit for bit.
    fn surrogate_columns(&self, a: &[f64], cols: &[f64], stride: usize, out: &mut [f64]) {
        let mut b = vec![0.0; a.len()];
        for (l, o) in out.iter_mut().enumerate() {
            for (c, x) in b.iter_mut().enumerate() {
                *x = cols[c * stride + l];
            }
            *o = self.surrogate(a, &b);
        }
    }
}

/// The Euclidean metric; the surrogate is the squared distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Euclidean;

impl Metric for Euclidean {
    #[inline]
    fn surrogate(&self, a: &[f64], b: &[f64]) -> f64 {
        squared_distance(a, b)
    }

    #[inline]
    fn finish(&self, surrogate: f64) -> f64 {
        surrogate.sqrt()
    }

    // One accumulator per point, each still adding coordinates left to
    // right; the lanes are independent so this vectorizes. Wider vectors
    // change nothing numerically (no fused multiply-add is introduced).
    fn surrogate_columns(&self, a: &[f64], cols: &[f64], stride: usize, out: &mut [f64]) {
        #[cfg(target_arch = "x86_64")]
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was just detected on this CPU.
            return unsafe { columns_avx2(a, cols, stride, out) };
        }
        columns_kernel(a, cols, stride, out)
    }
}

#[inline(always)]
fn columns_kernel(a: &[f64], cols: &[f64], stride: usize, out: &mut [f64]) {
    out.fill(0.0);
    let len = out.len();
    for (c, x) in a.iter().enumerate() {
        let col = &cols[c * stride..c * stride + len];
        for (s, y) in out.iter_mut().zip(col) {
            let d = x - y;
            *s += d * d;
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn columns_avx2(a: &[f64], cols: &[f64], stride: usize, out: &mut [f64]) {
    columns_kernel(a, cols, stride, out)
}

/// Sum of squared coordinate differences, accumulated left to right.
///
/// This is the single numeric path every regime uses for nearest-center and
/// farthest-pair comparisons, so its summation order must never depend on
/// the caller.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Euclidean distance between two coordinate vectors.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}
