//! Affinity propagation clustering (responsibility / availability message
//! passing over negative squared Euclidean similarities).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityConfig {
    pub damping: f64,
    pub max_iter: usize,
    /// Sweeps the exemplar set must stay unchanged to declare convergence.
    pub convergence_iter: usize,
    /// Self-similarity. `None` uses the median of the off-diagonal similarities.
    pub preference: Option<f64>,
    /// Seed of the tie-breaking perturbation added to the similarities.
    pub noise_seed: u64,
}

impl Default for AffinityConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 200,
            convergence_iter: 15,
            preference: None,
            noise_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster id per point, gapless, ordered by exemplar index.
    pub labels: Vec<usize>,
    /// Exemplar point index per cluster.
    pub exemplars: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

impl Clustering {
    pub fn n_clusters(&self) -> usize {
        self.exemplars.len()
    }

    fn single(m: usize, converged: bool, iterations: usize) -> Self {
        Self {
            labels: vec![0; m],
            exemplars: vec![0],
            converged,
            iterations,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ClusteringError {
    #[error("no points to cluster")]
    Empty,
    #[error("damping {0} outside [0.5, 1)")]
    Damping(f64),
    #[error("{len} values do not form rows of dimension {dim}")]
    Shape { len: usize, dim: usize },
    #[error("convergence_iter must be positive")]
    ConvergenceIter,
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + upper) / 2.0
    }
}

fn argmax(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Clusters the rows of `points` (row-major, `dim` columns).
///
/// Non-convergence within `max_iter`, or a run that ends without any
/// exemplar, falls back to a single cluster with `converged = false`.
/// Results are identical for any rayon thread count.
pub fn affinity_propagation(
    points: &[f64],
    dim: usize,
    config: &AffinityConfig,
) -> Result<Clustering, ClusteringError> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(ClusteringError::Shape { len: points.len(), dim });
    }
    let m = points.len() / dim;
    if m == 0 {
        return Err(ClusteringError::Empty);
    }
    if !(0.5..1.0).contains(&config.damping) {
        return Err(ClusteringError::Damping(config.damping));
    }
    if config.convergence_iter == 0 {
        return Err(ClusteringError::ConvergenceIter);
    }
    if m == 1 {
        return Ok(Clustering::single(1, true, 0));
    }

    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut s = vec![0.0f64; m * m];
    s.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
        let xi = row(i);
        for (k, o) in out.iter_mut().enumerate() {
            if k != i {
                *o = -row(k).iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
        }
    });

    let mut off: Vec<f64> = (0..m * m).filter(|&ix| ix / m != ix % m).map(|ix| s[ix]).collect();
    if off.iter().all(|&v| v == off[0]) {
        // All points mutually equidistant: message passing has nothing to
        // separate, keep them together.
        return Ok(Clustering::single(m, true, 0));
    }
    let preference = config.preference.unwrap_or_else(|| median(&mut off));
    drop(off);
    for i in 0..m {
        s[i * m + i] = preference;
    }
    // Tiny perturbation to break exact ties between candidate exemplars.
    let mut rng = ChaCha8Rng::seed_from_u64(config.noise_seed);
    for v in s.iter_mut() {
        let u: f64 = rng.random_range(-1.0..1.0);
        *v += (f64::EPSILON * *v + f64::MIN_POSITIVE * 100.0) * u;
    }

    let damping = config.damping;
    let mut r = vec![0.0f64; m * m];
    let mut a = vec![0.0f64; m * m];
    let window = config.convergence_iter;
    let mut history = vec![false; m * window];
    let mut exemplar = vec![false; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut col = vec![0.0f64; m];

    for it in 0..config.max_iter {
        iterations = it + 1;
        // responsibilities
        r.par_chunks_mut(m).enumerate().for_each(|(i, r_row)| {
            let s_row = &s[i * m..(i + 1) * m];
            let a_row = &a[i * m..(i + 1) * m];
            let (mut best, mut first, mut second) = (0, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for k in 0..m {
                let v = a_row[k] + s_row[k];
                if v > first {
                    second = first;
                    first = v;
                    best = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..m {
                let new = if k == best { s_row[k] - second } else { s_row[k] - first };
                r_row[k] = r_row[k] * damping + new * (1.0 - damping);
            }
        });

        // availabilities
        col.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..m {
            for k in 0..m {
                let v = r[i * m + k];
                col[k] += if i == k { v } else { v.max(0.0) };
            }
        }
        a.par_chunks_mut(m).enumerate().for_each(|(i, a_row)| {
            for k in 0..m {
                let rik = r[i * m + k];
                let rp = if i == k { rik } else { rik.max(0.0) };
                let mut neg = rp - col[k];
                if i != k {
                    neg = neg.max(0.0);
                }
                a_row[k] = a_row[k] * damping - neg * (1.0 - damping);
            }
        });

        let slot = it % window;
        let mut k_count = 0;
        for i in 0..m {
            exemplar[i] = a[i * m + i] + r[i * m + i] > 0.0;
            history[i * window + slot] = exemplar[i];
            k_count += usize::from(exemplar[i]);
        }
        if it >= window {
            let stable = (0..m).all(|i| {
                let n = history[i * window..(i + 1) * window].iter().filter(|&&e| e).count();
                n == 0 || n == window
            });
            if stable && k_count > 0 {
                converged = true;
                break;
            }
        }
    }

    let mut centers: Vec<usize> = (0..m).filter(|&i| exemplar[i]).collect();
    if !converged || centers.is_empty() {
        return Ok(Clustering::single(m, false, iterations));
    }

    let assign = |centers: &[usize]| -> Vec<usize> {
        let mut c: Vec<usize> = (0..m)
            .map(|i| argmax(centers.iter().map(|&k| s[i * m + k])))
            .collect();
        for (j, &k) in centers.iter().enumerate() {
            c[k] = j;
        }
        c
    };
    let c = assign(&centers);
    for (j, center) in centers.iter_mut().enumerate() {
        let members: Vec<usize> = (0..m).filter(|&i| c[i] == j).collect();
        let best = argmax(members.iter().map(|&col| members.iter().map(|&row| s[row * m + col]).sum()));
        *center = members[best];
    }
    let c = assign(&centers);
    let mut point_exemplar: Vec<usize> = c.iter().map(|&j| centers[j]).collect();
    let mut exemplars = point_exemplar.clone();
    exemplars.sort_unstable();
    exemplars.dedup();
    for e in point_exemplar.iter_mut() {
        *e = exemplars.binary_search(e).expect("exemplar present");
    }
    Ok(Clustering {
        labels: point_exemplar,
        exemplars,
        converged: true,
        iterations,
    })
}
