//! Straightforward reference implementations, written from the rules alone
//! and kept free of any blocking, tiling or parallelism.

pub type Rows = Vec<Vec<f64>>;

pub fn sqdist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for t in 0..a.len() {
        let d = a[t] - b[t];
        s += d * d;
    }
    s
}

/// Farthest pair over all `i < j`; the first pair in lexicographic order
/// wins ties. Returns `(d, i, j)`.
pub fn diameter(x: &Rows) -> (f64, usize, usize) {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let s = sqdist(&x[i], &x[j]);
            if best.is_none() || s > best.unwrap().0 {
                best = Some((s, i, j));
            }
        }
    }
    let (s, i, j) = best.expect("at least two rows");
    (s.sqrt(), i, j)
}

/// Farthest-first traversal seeded with the diameter pair. `None` when
/// fewer than `k` distinct rows exist.
pub fn maximin(x: &Rows, k: usize) -> Option<Vec<usize>> {
    let (d, i, j) = diameter(x);
    let mut chosen = vec![i];
    if k >= 2 {
        if d <= 0.0 {
            return None;
        }
        chosen.push(j);
    }
    while chosen.len() < k {
        let mut far: Option<(usize, f64)> = None;
        for (p, row) in x.iter().enumerate() {
            let near = chosen
                .iter()
                .map(|&c| sqdist(row, &x[c]))
                .fold(f64::INFINITY, f64::min);
            if far.is_none() || near > far.unwrap().1 {
                far = Some((p, near));
            }
        }
        let (p, s) = far.unwrap();
        if s <= 0.0 {
            return None;
        }
        chosen.push(p);
    }
    Some(chosen)
}

pub struct Outcome {
    pub labels: Vec<usize>,
    pub centers: Rows,
    pub iterations: usize,
    pub wcss: Vec<f64>,
}

fn nearest(row: &[f64], centers: &Rows) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let s = sqdist(row, center);
        if s < best.1 {
            best = (c, s);
        }
    }
    best
}

/// Means of each cluster; an empty cluster takes the sample farthest from
/// its own center among clusters with two or more members, and that donor's
/// mean is recomputed without it.
fn update(x: &Rows, labels: &[usize], k: usize) -> Rows {
    let m = x[0].len();
    let mut labels = labels.to_vec();
    let mut sums = vec![vec![0.0; m]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in x.iter().zip(&labels) {
        for t in 0..m {
            sums[l][t] += row[t];
        }
        counts[l] += 1;
    }
    let mean =
        |sum: &[f64], count: usize| sum.iter().map(|s| s / count as f64).collect::<Vec<f64>>();
    let mut centers: Rows = (0..k)
        .map(|c| {
            if counts[c] > 0 {
                mean(&sums[c], counts[c])
            } else {
                vec![0.0; m]
            }
        })
        .collect();
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut pick: Option<(usize, f64)> = None;
        for p in 0..x.len() {
            if counts[labels[p]] < 2 {
                continue;
            }
            let s = sqdist(&x[p], &centers[labels[p]]);
            if pick.is_none() || s > pick.unwrap().1 {
                pick = Some((p, s));
            }
        }
        let (p, _) = pick.unwrap();
        let donor = labels[p];
        for t in 0..m {
            sums[donor][t] -= x[p][t];
        }
        counts[donor] -= 1;
        centers[donor] = mean(&sums[donor], counts[donor]);
        sums[empty] = x[p].clone();
        centers[empty] = x[p].clone();
        counts[empty] = 1;
        labels[p] = empty;
    }
    centers
}

/// Lloyd iterations from the maximin start until the centers repeat exactly
/// or `max_iters` rounds ran. The reported centers are the ones the final
/// labels were computed against.
pub fn lloyd(x: &Rows, k: usize, max_iters: usize) -> Option<Outcome> {
    let mut centers: Rows = maximin(x, k)?.into_iter().map(|c| x[c].clone()).collect();
    let mut wcss = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let scored: Vec<(usize, f64)> = x.iter().map(|row| nearest(row, &centers)).collect();
        let labels: Vec<usize> = scored.iter().map(|s| s.0).collect();
        wcss.push(scored.iter().fold(0.0, |acc, s| acc + s.1));
        let next = update(x, &labels, k);
        if next == centers || iterations == max_iters {
            return Some(Outcome {
                labels,
                centers,
                iterations,
                wcss,
            });
        }
        centers = next;
    }
}
