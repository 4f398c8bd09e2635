//! Brute-force oracles and input generators shared by the integration
//! suites. Everything here is written as directly as possible — full
//! double loops over explicit matrices — and stays independent of the
//! optimized kernels it checks.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Threshold definition shared with the implementation: factor times the
/// population standard deviation accumulated over sorted values.
pub fn oracle_epsilon(series: &[f64], factor: f64) -> f64 {
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    factor * var.sqrt()
}

/// Explicit N x N boolean recurrence matrix.
pub fn oracle_matrix(series: &[f64], eps: f64) -> Vec<Vec<bool>> {
    let n = series.len();
    (0..n)
        .map(|i| (0..n).map(|j| (series[i] - series[j]).abs() <= eps).collect())
        .collect()
}

/// Recurrence rate by double loop over the explicit matrix.
pub fn oracle_recurrence_rate(series: &[f64], eps: f64, include_diag: bool) -> f64 {
    let m = oracle_matrix(series, eps);
    let n = series.len();
    let mut count = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i == j && !include_diag {
                continue;
            }
            if m[i][j] {
                count += 1;
            }
        }
    }
    count as f64 / (n * n) as f64
}

/// Determinism by scanning every diagonal of the explicit matrix, both
/// triangles independently. `None` when no off-diagonal point recurs.
pub fn oracle_determinism(series: &[f64], eps: f64, min_len: usize) -> Option<f64> {
    let m = oracle_matrix(series, eps);
    let n = series.len();
    let mut on_lines = 0u64;
    let mut total = 0u64;
    // offsets +k (upper triangle) and -k (lower triangle)
    for k in 1..n {
        for (di, dj) in [(0usize, k), (k, 0usize)] {
            let mut run = 0u64;
            let len = n - k;
            for t in 0..len {
                if m[di + t][dj + t] {
                    run += 1;
                } else {
                    total += run;
                    if run >= min_len as u64 {
                        on_lines += run;
                    }
                    run = 0;
                }
            }
            total += run;
            if run >= min_len as u64 {
                on_lines += run;
            }
        }
    }
    if total == 0 {
        None
    } else {
        Some(on_lines as f64 / total as f64)
    }
}

/// Sample entropy by two independent full template scans.
pub fn oracle_sample_entropy(series: &[f64], m: usize, r: f64) -> Option<f64> {
    let n = series.len();
    if n < m + 2 {
        return None;
    }
    let count_pairs = |len: usize| -> u64 {
        let templates = n - m; // both lengths range over the same start indices
        let mut count = 0u64;
        for i in 0..templates {
            for j in 0..templates {
                if i == j {
                    continue;
                }
                let mut max_dist = 0.0f64;
                for k in 0..len {
                    max_dist = max_dist.max((series[i + k] - series[j + k]).abs());
                }
                if max_dist <= r {
                    count += 1;
                }
            }
        }
        count / 2 // ordered -> unordered
    };
    let b = count_pairs(m);
    let a = count_pairs(m + 1);
    if a == 0 || b == 0 {
        return None;
    }
    Some(-((a as f64) / (b as f64)).ln())
}

/// AUC by exhaustive positive x negative pair counting with half-credit
/// for ties.
pub fn oracle_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0f64;
    let mut pairs = 0.0f64;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Two-group F statistic from explicit group sums.
pub fn oracle_anova_f(column: &[f64], labels: &[u8], mask: &[bool]) -> Option<f64> {
    let g0: Vec<f64> = column
        .iter()
        .zip(labels)
        .zip(mask)
        .filter(|((_, &l), &m)| m && l == 0)
        .map(|((v, _), _)| *v)
        .collect();
    let g1: Vec<f64> = column
        .iter()
        .zip(labels)
        .zip(mask)
        .filter(|((_, &l), &m)| m && l == 1)
        .map(|((v, _), _)| *v)
        .collect();
    if g0.len() < 2 || g1.len() < 2 {
        return None;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let m0 = mean(&g0);
    let m1 = mean(&g1);
    let n = (g0.len() + g1.len()) as f64;
    let grand = (g0.iter().sum::<f64>() + g1.iter().sum::<f64>()) / n;
    let ssb = g0.len() as f64 * (m0 - grand).powi(2) + g1.len() as f64 * (m1 - grand).powi(2);
    let ssw: f64 = g0.iter().map(|v| (v - m0).powi(2)).sum::<f64>()
        + g1.iter().map(|v| (v - m1).powi(2)).sum::<f64>();
    let msw = ssw / (n - 2.0);
    if msw == 0.0 {
        return None;
    }
    Some(ssb / msw)
}

/// Kolmogorov-Smirnov distance against the uniform distribution on [0,1].
pub fn ks_distance_uniform(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, v) in sorted.iter().enumerate() {
        let ecdf_hi = (i + 1) as f64 / n;
        let ecdf_lo = i as f64 / n;
        d = d.max((ecdf_hi - v).abs()).max((v - ecdf_lo).abs());
    }
    d
}

/// Mixed test series: constants, periodic patterns, pure noise, random
/// walks, and noisy constants, in rotation.
pub fn mixed_series(seed: u64, index: usize, max_len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let n = rng.random_range(4..=max_len);
    match index % 5 {
        0 => {
            let c = rng.random_range(-5.0..5.0);
            vec![c; n]
        }
        1 => {
            let period = rng.random_range(2..=4usize);
            let vals: Vec<f64> = (0..period).map(|_| rng.random_range(-2.0..2.0)).collect();
            (0..n).map(|t| vals[t % period]).collect()
        }
        2 => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        3 => {
            let mut x = 0.0;
            (0..n)
                .map(|_| {
                    x += rng.random_range(-0.5..0.5);
                    x
                })
                .collect()
        }
        _ => {
            let c = rng.random_range(-3.0..3.0);
            (0..n).map(|_| c + rng.random_range(-0.01..0.01)).collect()
        }
    }
}

/// Random score/label vectors with deliberate ties and both classes.
pub fn scored_labels(seed: u64, index: usize, max_n: usize) -> (Vec<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64 * 7919));
    let n = rng.random_range(2..=max_n);
    loop {
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2) as u8).collect();
        if labels.contains(&0) && labels.contains(&1) {
            // quantized scores force frequent ties
            let scores: Vec<f64> = (0..n)
                .map(|_| (rng.random_range(0..10) as f64) / 10.0)
                .collect();
            return (scores, labels);
        }
    }
}
