use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Clone, Debug)]
pub struct KmeansResult {
    pub assignments: Vec<usize>,
    pub centroids: DenseMatrix,
    pub objective: f64,
    pub representative_rows: Vec<usize>,
}

/// One Lloyd run together with the objective after every centroid update.
#[derive(Clone, Debug)]
pub struct KmeansRun {
    pub result: KmeansResult,
    pub history: Vec<f64>,
}

/// Best of `restarts` seeded Lloyd runs on the rows of `data`. Restart `i`
/// is seeded with `seed + i`, so the answer does not depend on how the
/// restarts are scheduled across threads.
pub fn kmeans(data: &DenseMatrix, k: usize, restarts: usize, seed: u64) -> Result<KmeansResult> {
    let runs = kmeans_runs(data, k, restarts, seed)?;
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.result.objective < runs[best].result.objective {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("at least one restart").result)
}

pub fn kmeans_runs(data: &DenseMatrix, k: usize, restarts: usize, seed: u64) -> Result<Vec<KmeansRun>> {
    let n = data.rows();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, rows: n });
    }
    let points = Points::new(data);
    let restarts = restarts.max(1);
    Ok((0..restarts)
        .into_par_iter()
        .map(|r| lloyd(&points, k, seed.wrapping_add(r as u64)))
        .collect())
}

struct Points {
    n: usize,
    d: usize,
    rows: Vec<f64>,
}

impl Points {
    fn new(m: &DenseMatrix) -> Self {
        let (n, d) = m.shape();
        let mut rows = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                rows.push(m.get(i, j));
            }
        }
        Self { n, d, rows }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_plus_plus(p: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![p.row(rng.gen_range(0..p.n)).to_vec()];
    let mut dmin: Vec<f64> = (0..p.n).map(|i| sq_dist(p.row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dmin.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = p.n - 1;
            for (i, &w) in dmin.iter().enumerate() {
                if w > 0.0 && target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            // rounding can leave the target past the last positive weight
            if dmin[idx] == 0.0 {
                idx = dmin.iter().rposition(|&w| w > 0.0).unwrap_or(idx);
            }
            idx
        } else {
            rng.gen_range(0..p.n)
        };
        let c = p.row(pick).to_vec();
        for (i, dm) in dmin.iter_mut().enumerate() {
            *dm = dm.min(sq_dist(p.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn update_centroids(p: &Points, assign: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; p.d]; k];
    let mut counts = vec![0usize; k];
    for (i, &a) in assign.iter().enumerate() {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p.row(i)) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    (sums, counts)
}

/// Moves the point farthest from its own centroid into each empty cluster,
/// taking only from clusters that keep at least one member.
fn repair_empty(p: &Points, assign: &mut [usize], k: usize) -> Vec<Vec<f64>> {
    loop {
        let (centers, counts) = update_centroids(p, assign, k);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return centers;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for i in 0..p.n {
            if counts[assign[i]] > 1 {
                let d = sq_dist(p.row(i), &centers[assign[i]]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        let i = far.expect("k <= n guarantees a donor cluster");
        assign[i] = empty;
    }
}

fn objective(p: &Points, assign: &[usize], centers: &[Vec<f64>]) -> f64 {
    (0..p.n).map(|i| sq_dist(p.row(i), &centers[assign[i]])).sum()
}

fn lloyd(p: &Points, k: usize, seed: u64) -> KmeansRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_plus_plus(p, k, &mut rng);
    let mut assign: Vec<usize> = (0..p.n).map(|i| nearest(p.row(i), &centers).0).collect();
    centers = repair_empty(p, &mut assign, k);
    let mut history = vec![objective(p, &assign, &centers)];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let next: Vec<usize> = (0..p.n)
            .map(|i| {
                // keep the current cluster on exact ties so the objective cannot rise
                let (c, d) = nearest(p.row(i), &centers);
                if sq_dist(p.row(i), &centers[assign[i]]) <= d {
                    assign[i]
                } else {
                    c
                }
            })
            .collect();
        if next == assign {
            break;
        }
        assign = next;
        centers = repair_empty(p, &mut assign, k);
        history.push(objective(p, &assign, &centers));
    }

    let mut representative_rows = vec![usize::MAX; k];
    let mut rep_d = vec![f64::INFINITY; k];
    for i in 0..p.n {
        let a = assign[i];
        let d = sq_dist(p.row(i), &centers[a]);
        if d < rep_d[a] {
            rep_d[a] = d;
            representative_rows[a] = i;
        }
    }
    let centroid_matrix = DenseMatrix::from_fn(k, p.d.max(1), |c, j| {
        if p.d == 0 {
            0.0
        } else {
            centers[c][j]
        }
    })
    .expect("centroids are finite means of finite rows");
    KmeansRun {
        result: KmeansResult {
            objective: *history.last().expect("non-empty history"),
            assignments: assign,
            centroids: centroid_matrix,
            representative_rows,
        },
        history,
    }
}
