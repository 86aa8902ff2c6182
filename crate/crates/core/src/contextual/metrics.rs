use rayon::prelude::*;

use super::{check_pair, MetricError, UsageMatrix};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn unit_rows(u: &UsageMatrix) -> Result<Vec<f64>, MetricError> {
    let mut out = Vec::with_capacity(u.as_flat().len());
    for (i, r) in u.iter_rows().enumerate() {
        let n = norm(r);
        if n == 0.0 || !n.is_finite() {
            return Err(MetricError::ZeroNormRow {
                lemma: u.lemma.clone(),
                period: u.period,
                row: i,
            });
        }
        out.extend(r.iter().map(|x| x / n));
    }
    Ok(out)
}

/// Average pairwise cosine distance between the rows of `u1` and `u2`.
///
/// Rows of `u1` are processed in parallel; each row's sum and the final
/// reduction run in a fixed order, so the result does not depend on the
/// number of threads.
pub fn apd(u1: &UsageMatrix, u2: &UsageMatrix) -> Result<f64, MetricError> {
    check_pair(u1, u2)?;
    let a = unit_rows(u1)?;
    let b = unit_rows(u2)?;
    let d = u1.dim();
    let row_sums: Vec<f64> = a
        .par_chunks_exact(d)
        .map(|x| b.chunks_exact(d).map(|y| 1.0 - dot(x, y)).sum::<f64>())
        .collect();
    let total: f64 = row_sums.iter().sum();
    Ok(total / (u1.rows() as f64 * u2.rows() as f64))
}

fn prototype(u: &UsageMatrix) -> Vec<f64> {
    let mut mean = vec![0.0; u.dim()];
    for r in u.iter_rows() {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    let n = u.rows() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Cosine distance between the mean rows of `u1` and `u2`.
pub fn prt(u1: &UsageMatrix, u2: &UsageMatrix) -> Result<f64, MetricError> {
    check_pair(u1, u2)?;
    for u in [u1, u2] {
        unit_rows(u)?;
    }
    let p1 = prototype(u1);
    let p2 = prototype(u2);
    let (s1, s2) = (dot(&p1, &p1), dot(&p2, &p2));
    for (n, u) in [(s1, u1), (s2, u2)] {
        if n == 0.0 {
            return Err(MetricError::ZeroNormPrototype {
                lemma: u.lemma.clone(),
                period: u.period,
            });
        }
    }
    // sqrt of the product keeps identical prototypes at exactly 0
    Ok((1.0 - dot(&p1, &p2) / (s1 * s2).sqrt()).clamp(0.0, 2.0))
}

/// Arithmetic mean of [`apd`] and [`prt`].
pub fn apd_prt(u1: &UsageMatrix, u2: &UsageMatrix) -> Result<f64, MetricError> {
    Ok(combine_apd_prt(apd(u1, u2)?, prt(u1, u2)?))
}

pub(crate) fn combine_apd_prt(apd: f64, prt: f64) -> f64 {
    (apd + prt) / 2.0
}
