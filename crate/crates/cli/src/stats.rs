//! Statistical utilities for the verification suites: total variation
//! distance, two-sample chi-square, power-iteration PageRank, and symmetric
//! mean absolute percentage error.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Total variation distance between an empirical count map and a reference
/// distribution.
pub fn total_variation(counts: &BTreeMap<u64, u64>, reference: &[(u64, f64)]) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 1.0;
    }
    let mut tvd = 0.0;
    let mut covered = 0.0;
    for &(v, p) in reference {
        let emp = counts.get(&v).copied().unwrap_or(0) as f64 / total as f64;
        tvd += (emp - p).abs();
        covered += emp;
    }
    // empirical mass on vertices outside the reference support
    tvd += 1.0 - covered;
    tvd / 2.0
}

/// Two-sample chi-square statistic over the union support of two count
/// maps. Returns `(statistic, degrees_of_freedom)`; `None` when there is
/// nothing to compare.
pub fn chi_square_two_sample(
    first: &BTreeMap<u64, u64>,
    second: &BTreeMap<u64, u64>,
) -> Option<(f64, u64)> {
    let n1: u64 = first.values().sum();
    let n2: u64 = second.values().sum();
    if n1 == 0 || n2 == 0 {
        return None;
    }
    let k1 = (n2 as f64 / n1 as f64).sqrt();
    let k2 = (n1 as f64 / n2 as f64).sqrt();
    let mut bins = 0u64;
    let mut stat = 0.0;
    let keys: std::collections::BTreeSet<u64> =
        first.keys().chain(second.keys()).copied().collect();
    for v in keys {
        let r = first.get(&v).copied().unwrap_or(0) as f64;
        let s = second.get(&v).copied().unwrap_or(0) as f64;
        if r + s == 0.0 {
            continue;
        }
        bins += 1;
        stat += (k1 * r - k2 * s).powi(2) / (r + s);
    }
    if bins < 2 {
        return None;
    }
    Some((stat, bins - 1))
}

/// Upper critical value of the chi-square distribution.
pub fn chi_square_critical(df: u64, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// PageRank with uniform teleportation over the given undirected adjacency,
/// iterated to convergence. `alpha` is the restart probability.
pub fn power_iteration_ppr(
    adjacency: &BTreeMap<u64, Vec<u64>>,
    alpha: f64,
    tolerance: f64,
    max_iterations: usize,
) -> BTreeMap<u64, f64> {
    let n = adjacency.len();
    if n == 0 {
        return BTreeMap::new();
    }
    let uniform = 1.0 / n as f64;
    let mut scores: BTreeMap<u64, f64> = adjacency.keys().map(|&v| (v, uniform)).collect();
    for _ in 0..max_iterations {
        let mut next: BTreeMap<u64, f64> = adjacency.keys().map(|&v| (v, alpha * uniform)).collect();
        for (&v, neighbors) in adjacency {
            let share = (1.0 - alpha) * scores[&v] / neighbors.len() as f64;
            for &d in neighbors {
                *next.get_mut(&d).expect("undirected adjacency is closed") += share;
            }
        }
        let diff: f64 = next
            .iter()
            .map(|(v, p)| (p - scores[v]).abs())
            .sum();
        scores = next;
        if diff < tolerance {
            break;
        }
    }
    scores
}

/// Symmetric mean absolute percentage error between estimates and a
/// reference, averaged over the reference's support.
pub fn smape(estimate: &BTreeMap<u64, f64>, reference: &BTreeMap<u64, f64>) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (&v, &actual) in reference {
        let forecast = estimate.get(&v).copied().unwrap_or(0.0);
        let denom = (actual.abs() + forecast.abs()) / 2.0;
        if denom > 0.0 {
            total += (forecast - actual).abs() / denom;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}
