use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiameterResult, InitStrategy, KmeansConfig};
use crate::error::{Error, Result};
use crate::metric::{Euclidean, Metric};
use crate::model::{ClusterModel, Dataset};

/// Picks the `k` initial centers. Counts start at zero.
pub fn init_centers(
    dataset: &Dataset,
    config: &KmeansConfig,
    diameter: &DiameterResult,
) -> Result<ClusterModel> {
    init_centers_with(dataset, &Euclidean, config, diameter)
}

pub fn init_centers_with<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    config: &KmeansConfig,
    diameter: &DiameterResult,
) -> Result<ClusterModel> {
    config.validate(dataset.n())?;
    let chosen = match config.init {
        InitStrategy::MaximinDeterministic => maximin(dataset, metric, config.k, diameter)?,
        InitStrategy::RandomFarApart => {
            random_far_apart(dataset, metric, config.k, config.seed, diameter.d)?
        }
    };
    let mut centers = Vec::with_capacity(config.k * dataset.m());
    for &c in &chosen {
        centers.extend_from_slice(dataset.row(c));
    }
    ClusterModel::new(centers, dataset.m())
}

/// Nearest-chosen-center surrogate for every sample.
struct Coverage {
    nearest: Vec<f64>,
    chosen: Vec<usize>,
}

impl Coverage {
    fn new(n: usize, k: usize) -> Self {
        Self {
            nearest: vec![f64::INFINITY; n],
            chosen: Vec::with_capacity(k),
        }
    }

    fn add<M: Metric + ?Sized>(&mut self, dataset: &Dataset, metric: &M, c: usize) {
        let center = dataset.row(c);
        for (x, best) in self.nearest.iter_mut().enumerate() {
            let s = metric.surrogate(dataset.row(x), center);
            if s < *best {
                *best = s;
            }
        }
        self.chosen.push(c);
    }

    /// The sample farthest from every chosen center; lowest index on ties.
    fn farthest(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (x, &s) in self.nearest.iter().enumerate() {
            if s > best.1 {
                best = (x, s);
            }
        }
        best
    }

    fn maximin_step<M: Metric + ?Sized>(
        &mut self,
        dataset: &Dataset,
        metric: &M,
        k: usize,
    ) -> Result<()> {
        let (x, s) = self.farthest();
        if s <= 0.0 {
            return Err(Error::DegenerateData {
                k,
                distinct: self.chosen.len(),
            });
        }
        self.add(dataset, metric, x);
        Ok(())
    }
}

fn maximin<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    k: usize,
    diameter: &DiameterResult,
) -> Result<Vec<usize>> {
    let mut cov = Coverage::new(dataset.n(), k);
    cov.add(dataset, metric, diameter.i);
    if k >= 2 {
        if diameter.d <= 0.0 {
            return Err(Error::DegenerateData { k, distinct: 1 });
        }
        cov.add(dataset, metric, diameter.j);
    }
    while cov.chosen.len() < k {
        cov.maximin_step(dataset, metric, k)?;
    }
    Ok(cov.chosen)
}

fn random_far_apart<M: Metric + ?Sized>(
    dataset: &Dataset,
    metric: &M,
    k: usize,
    seed: u64,
    diameter: f64,
) -> Result<Vec<usize>> {
    let n = dataset.n();
    let threshold = diameter / (2 * k) as f64;
    let max_rejections = 10 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cov = Coverage::new(n, k);
    cov.add(dataset, metric, rng.random_range(0..n));
    let mut rejections = 0;
    while cov.chosen.len() < k {
        if rejections > max_rejections {
            cov.maximin_step(dataset, metric, k)?;
            rejections = 0;
            continue;
        }
        let cand = rng.random_range(0..n);
        if metric.finish(cov.nearest[cand]) > threshold {
            cov.add(dataset, metric, cand);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    Ok(cov.chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::diameter;
    use crate::metric::squared_distance;

    fn cloud(seed: u64, n: usize, m: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Dataset::new((0..n * m).map(|_| rng.random_range(-5.0..5.0)).collect(), m).unwrap()
    }

    fn config(k: usize, init: InitStrategy) -> KmeansConfig {
        KmeansConfig {
            init,
            ..KmeansConfig::new(k)
        }
    }

    // Farthest-first traversal by exhaustive scan, seeded with the diameter pair.
    fn farthest_first_oracle(ds: &Dataset, k: usize) -> Vec<usize> {
        let mut best = (0.0, 0, 0);
        for i in 0..ds.n() {
            for j in i + 1..ds.n() {
                let d = squared_distance(ds.row(i), ds.row(j));
                if d > best.0 {
                    best = (d, i, j);
                }
            }
        }
        let mut chosen = vec![best.1, best.2];
        while chosen.len() < k {
            let mut pick = (0, -1.0);
            for x in 0..ds.n() {
                let near = chosen
                    .iter()
                    .map(|&c| squared_distance(ds.row(x), ds.row(c)))
                    .fold(f64::INFINITY, f64::min);
                if near > pick.1 {
                    pick = (x, near);
                }
            }
            chosen.push(pick.0);
        }
        chosen
    }

    fn center_rows(ds: &Dataset, model: &ClusterModel) -> Vec<Vec<f64>> {
        let _ = ds;
        model.centers().map(<[f64]>::to_vec).collect()
    }

    #[test]
    fn k2_maximin_is_the_diameter_pair() {
        let ds = cloud(3, 30, 2);
        let d = diameter(&ds).unwrap();
        let model = init_centers(&ds, &config(2, InitStrategy::MaximinDeterministic), &d).unwrap();
        assert_eq!(model.center(0), ds.row(d.i));
        assert_eq!(model.center(1), ds.row(d.j));
        assert_eq!(model.counts(), &[0, 0]);
    }

    #[test]
    fn k3_maximin_matches_exhaustive_traversal() {
        let ds = cloud(17, 20, 2);
        let d = diameter(&ds).unwrap();
        let model = init_centers(&ds, &config(3, InitStrategy::MaximinDeterministic), &d).unwrap();
        let expected: Vec<Vec<f64>> = farthest_first_oracle(&ds, 3)
            .into_iter()
            .map(|i| ds.row(i).to_vec())
            .collect();
        assert_eq!(center_rows(&ds, &model), expected);
    }

    #[test]
    fn k_equals_n_uses_every_point_once() {
        let ds = cloud(8, 12, 3);
        let d = diameter(&ds).unwrap();
        for init in [
            InitStrategy::MaximinDeterministic,
            InitStrategy::RandomFarApart,
        ] {
            let model = init_centers(&ds, &config(12, init), &d).unwrap();
            let mut got = center_rows(&ds, &model);
            let mut all: Vec<Vec<f64>> = (0..12).map(|i| ds.row(i).to_vec()).collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got, all);
        }
    }

    #[test]
    fn duplicates_are_degenerate() {
        let ds = Dataset::from_rows(&[[1.0, 1.0], [1.0, 1.0], [2.0, 2.0], [2.0, 2.0]]).unwrap();
        let d = diameter(&ds).unwrap();
        for init in [
            InitStrategy::MaximinDeterministic,
            InitStrategy::RandomFarApart,
        ] {
            let err = init_centers(&ds, &config(3, init), &d).unwrap_err();
            assert_eq!(err, Error::DegenerateData { k: 3, distinct: 2 });
        }
        let same = Dataset::from_rows(&[[0.0], [0.0]]).unwrap();
        let d = diameter(&same).unwrap();
        let err =
            init_centers(&same, &config(2, InitStrategy::MaximinDeterministic), &d).unwrap_err();
        assert_eq!(err, Error::DegenerateData { k: 2, distinct: 1 });
    }

    #[test]
    fn random_far_apart_is_seeded_and_separated() {
        let ds = cloud(21, 200, 2);
        let d = diameter(&ds).unwrap();
        let cfg = KmeansConfig {
            seed: 99,
            ..config(5, InitStrategy::RandomFarApart)
        };
        let a = init_centers(&ds, &cfg, &d).unwrap();
        let b = init_centers(&ds, &cfg, &d).unwrap();
        assert_eq!(a, b);
        let threshold = d.d / 10.0;
        let centers: Vec<&[f64]> = a.centers().collect();
        for x in 0..centers.len() {
            for y in x + 1..centers.len() {
                assert!(squared_distance(centers[x], centers[y]).sqrt() > threshold);
            }
        }
        let other = KmeansConfig { seed: 100, ..cfg };
        assert_ne!(init_centers(&ds, &other, &d).unwrap(), a);
    }

    #[test]
    fn k_above_n_is_rejected() {
        let ds = cloud(1, 3, 1);
        let d = diameter(&ds).unwrap();
        assert!(matches!(
            init_centers(&ds, &config(4, InitStrategy::MaximinDeterministic), &d),
            Err(Error::InvalidConfig(_))
        ));
    }
}
