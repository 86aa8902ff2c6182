use serde::{Deserialize, Serialize};

use super::affinity::{affinity_propagation, AffinityConfig, Clustering};
use super::{check_pair, MetricError, UsageMatrix};
use crate::Period;

/// Normalised cluster-membership counts of one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDistribution {
    pub lemma: String,
    pub period: Period,
    pub probs: Vec<f64>,
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Jensen-Shannon divergence (natural log) between two distributions over
/// the same support. Lies in `[0, ln 2]`.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    let mix: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    let d = entropy(&mix) - (entropy(p) + entropy(q)) / 2.0;
    d.clamp(0.0, std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsdOutcome {
    pub score: f64,
    pub clustering: Clustering,
    pub t1: ClusterDistribution,
    pub t2: ClusterDistribution,
}

impl JsdOutcome {
    pub fn converged(&self) -> bool {
        self.clustering.converged
    }
}

/// Column-wise z-scores (population standard deviation). Constant columns
/// become zero.
fn standardise(rows: usize, dim: usize, data: &mut [f64]) {
    for j in 0..dim {
        let mean = (0..rows).map(|i| data[i * dim + j]).sum::<f64>() / rows as f64;
        let var = (0..rows).map(|i| (data[i * dim + j] - mean).powi(2)).sum::<f64>() / rows as f64;
        let sd = var.sqrt();
        for i in 0..rows {
            let v = &mut data[i * dim + j];
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
}

/// Clusters the stacked, standardised usages of both periods and compares
/// the per-period cluster distributions.
///
/// A clustering that fails to converge puts everything in one cluster, so
/// the score is 0; check [`JsdOutcome::converged`].
pub fn jsd_score(
    u1: &UsageMatrix,
    u2: &UsageMatrix,
    config: &AffinityConfig,
) -> Result<JsdOutcome, MetricError> {
    check_pair(u1, u2)?;
    let (n1, n2, dim) = (u1.rows(), u2.rows(), u1.dim());
    let mut stacked = Vec::with_capacity((n1 + n2) * dim);
    stacked.extend_from_slice(u1.as_flat());
    stacked.extend_from_slice(u2.as_flat());
    standardise(n1 + n2, dim, &mut stacked);
    let clustering = affinity_propagation(&stacked, dim, config).map_err(|e| MetricError::Clustering {
        lemma: u1.lemma.clone(),
        reason: e.to_string(),
    })?;

    let k = clustering.n_clusters();
    let dist = |labels: &[usize], u: &UsageMatrix| {
        let mut counts = vec![0.0; k];
        for &l in labels {
            counts[l] += 1.0;
        }
        let n = labels.len() as f64;
        ClusterDistribution {
            lemma: u.lemma.clone(),
            period: u.period,
            probs: counts.into_iter().map(|c| c / n).collect(),
        }
    };
    let t1 = dist(&clustering.labels[..n1], u1);
    let t2 = dist(&clustering.labels[n1..], u2);
    Ok(JsdOutcome {
        score: jensen_shannon(&t1.probs, &t2.probs),
        clustering,
        t1,
        t2,
    })
}
