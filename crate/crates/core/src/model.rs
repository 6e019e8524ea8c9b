//! Data containers shared by every regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::squared_distance;

/// `n` samples of `m` features, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    m: usize,
    coords: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row-major coordinates.
    ///
    /// Rejects empty input, a length that is not a multiple of `m`, and any
    /// non-finite coordinate.
    pub fn new(coords: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDataset(
                "feature count must be at least 1".into(),
            ));
        }
        if coords.is_empty() {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if !coords.len().is_multiple_of(m) {
            return Err(Error::InvalidDataset(format!(
                "{} coordinates do not form rows of {m}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at sample {}, feature {}",
                pos / m,
                pos % m
            )));
        }
        Ok(Self {
            n: coords.len() / m,
            m,
            coords,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} features, expected {m}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::new(coords, m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.m..(i + 1) * self.m]
    }

    pub fn point(&self, index: usize) -> Point<'_> {
        Point {
            index,
            coords: self.row(index),
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = Point<'_>> + '_ {
        self.coords
            .chunks_exact(self.m)
            .enumerate()
            .map(|(index, coords)| Point { index, coords })
    }
}

/// A borrowed view of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<'a> {
    pub index: usize,
    pub coords: &'a [f64],
}

/// A center of gravity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid(Vec<f64>);

impl Centroid {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDataset("centroid has no coordinates".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset(
                "centroid has a non-finite coordinate".into(),
            ));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Centroid {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `k` centers stored contiguously, with per-cluster member counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    m: usize,
    centers: Vec<f64>,
    counts: Vec<usize>,
}

impl ClusterModel {
    /// Builds a model from flat row-major centers; counts start at zero.
    pub fn new(centers: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 || centers.is_empty() || !centers.len().is_multiple_of(m) {
            return Err(Error::InconsistentSizes(format!(
                "{} center coordinates for dimension {m}",
                centers.len()
            )));
        }
        if centers.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset(
                "center has a non-finite coordinate".into(),
            ));
        }
        let k = centers.len() / m;
        Ok(Self {
            m,
            centers,
            counts: vec![0; k],
        })
    }

    pub fn from_centroids(centroids: &[Centroid]) -> Result<Self> {
        let m = centroids.first().map(Centroid::dim).unwrap_or(0);
        let mut flat = Vec::with_capacity(centroids.len() * m);
        for c in centroids {
            if c.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: c.dim(),
                });
            }
            flat.extend_from_slice(c.coords());
        }
        Self::new(flat, m)
    }

    pub(crate) fn from_parts(centers: Vec<f64>, counts: Vec<usize>, m: usize) -> Self {
        debug_assert_eq!(centers.len(), counts.len() * m);
        Self { m, centers, counts }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.m..(i + 1) * self.m]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centers.chunks_exact(self.m)
    }

    /// All center coordinates, row-major.
    pub fn flat_centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub(crate) fn set_counts(&mut self, counts: Vec<usize>) {
        debug_assert_eq!(counts.len(), self.k());
        self.counts = counts;
    }

    pub fn centroids(&self) -> Vec<Centroid> {
        self.centers()
            .map(|c| Centroid::from_vec_unchecked(c.to_vec()))
            .collect()
    }
}

/// Per-sample cluster labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    k: usize,
    labels: Vec<usize>,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::InconsistentSizes(format!(
                "label {l} of sample {i} is not below k = {k}"
            )));
        }
        Ok(Self { k, labels })
    }

    pub(crate) fn from_labels_unchecked(labels: Vec<usize>, k: usize) -> Self {
        debug_assert!(labels.iter().all(|&l| l < k));
        Self { k, labels }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    /// Number of samples carrying each label.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Coordinate-wise arithmetic mean of a non-empty point collection.
pub fn centroid_of<P: AsRef<[f64]>>(points: &[P]) -> Result<Centroid> {
    let first = points.first().ok_or(Error::EmptyCluster)?.as_ref();
    let m = first.len();
    let mut sums = vec![0.0; m];
    for p in points {
        let p = p.as_ref();
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.len(),
            });
        }
        for (s, x) in sums.iter_mut().zip(p) {
            *s += x;
        }
    }
    let count = points.len() as f64;
    for s in &mut sums {
        *s /= count;
    }
    Ok(Centroid(sums))
}

/// Within-cluster sum of squared distances, summed in sample order.
pub fn wcss(dataset: &Dataset, model: &ClusterModel, assignment: &Assignment) -> Result<f64> {
    if model.m() != dataset.m() {
        return Err(Error::DimensionMismatch {
            expected: dataset.m(),
            found: model.m(),
        });
    }
    if assignment.len() != dataset.n() {
        return Err(Error::InconsistentSizes(format!(
            "{} labels for {} samples",
            assignment.len(),
            dataset.n()
        )));
    }
    if assignment.k() > model.k() {
        return Err(Error::InconsistentSizes(format!(
            "assignment uses k = {}, model has {} centers",
            assignment.k(),
            model.k()
        )));
    }
    Ok(dataset
        .points()
        .zip(assignment.labels())
        .map(|(p, &l)| squared_distance(p.coords, model.center(l)))
        .sum())
}
