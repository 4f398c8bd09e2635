//! Comparison biomarker families: static pooled summaries, sample entropy,
//! AR(1) forecastability, rescaled-range Hurst exponent, and the
//! Lyapunov-like local instability proxy.
//!
//! Every per-channel function returns `None` for channels where the
//! quantity is undefined (too few finite values, zero variance, empty
//! template counts); the cohort extractors record those cells in the
//! feature-table validity mask instead of failing.

use crate::data::{subsample_frames, Cohort, CohortFeatureTable};
use crate::error::{Error, Result};
use crate::rqa::{self, RecurrenceParams};
use crate::special::ln_gamma;
use crate::stats::{linear_fit, mean, pearson, population_std};

/// Template length for sample entropy.
pub const DEFAULT_ENTROPY_M: usize = 2;
/// Tolerance factor: `r = factor * sigma`.
pub const DEFAULT_ENTROPY_R_FACTOR: f64 = 0.2;
/// Regularizer inside the log of the instability proxy.
pub const DEFAULT_LYAPUNOV_DELTA: f64 = 1e-8;

/// One-lag autoregressive fit `x_{t+1} = a x_t + e_t` on the mean-centered
/// series, with no intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct AR1Fit {
    pub coefficient: f64,
    pub residual_std: f64,
    pub lag1_autocorr: f64,
    pub forecast_rmse: f64,
}

/// Rescaled-range scaling estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstEstimate {
    pub exponent: f64,
    pub n_scales: usize,
    /// RMS residual of the empirical log-log fit.
    pub fit_residual: f64,
}

/// Mean log one-step fluctuation magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovProxy {
    pub lambda_star: f64,
    pub delta: f64,
}

fn finite(series: &[f64]) -> Vec<f64> {
    series.iter().copied().filter(|v| v.is_finite()).collect()
}

/// Consecutive-frame pairs with both sides finite. Missing frames break
/// the chain: nothing is paired across a gap.
fn adjacent_finite_pairs(series: &[f64]) -> Vec<(f64, f64)> {
    series
        .windows(2)
        .filter(|w| w[0].is_finite() && w[1].is_finite())
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Channel mean and population standard deviation.
pub fn static_pooled(series: &[f64]) -> Option<(f64, f64)> {
    let x = finite(series);
    if x.len() < 2 {
        return None;
    }
    Some((mean(&x), population_std(&x)))
}

/// Sample entropy: `-ln(A/B)` where `B` counts template pairs of length `m`
/// within Chebyshev distance `r = r_factor * sigma` and `A` counts the same
/// pairs extended to length `m + 1`. Self-matches are excluded. `None` when
/// the series is too short or either count is zero.
pub fn sample_entropy(series: &[f64], m: usize, r_factor: f64) -> Option<f64> {
    assert!(m >= 1, "template length must be at least 1");
    assert!(r_factor > 0.0, "tolerance factor must be positive");
    let x = finite(series);
    let n = x.len();
    if n < m + 2 {
        return None;
    }
    let r = r_factor * population_std(&x);
    let templates = n - m; // both template lengths indexed over 0..n-m
    let mut count_m = 0u64;
    let mut count_m1 = 0u64;
    for i in 0..templates {
        for j in (i + 1)..templates {
            let mut matches = true;
            for k in 0..m {
                if (x[i + k] - x[j + k]).abs() > r {
                    matches = false;
                    break;
                }
            }
            if matches {
                count_m += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    count_m1 += 1;
                }
            }
        }
    }
    if count_m == 0 || count_m1 == 0 {
        return None;
    }
    Some(-(count_m1 as f64 / count_m as f64).ln())
}

/// Least-squares AR(1) fit on the centered series; forecast error is the
/// in-sample residual RMS. `None` on zero variance or too little data.
pub fn ar1_forecastability(series: &[f64]) -> Option<AR1Fit> {
    let x = finite(series);
    if x.len() < 3 {
        return None;
    }
    let center = mean(&x);
    let pairs = adjacent_finite_pairs(series);
    if pairs.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0 - center).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1 - center).collect();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let coefficient = sxy / sxx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(a, b)| b - coefficient * a)
        .collect();
    let forecast_rmse =
        (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let lag1_autocorr = pearson(&xs, &ys)?;
    Some(AR1Fit {
        coefficient,
        residual_std: population_std(&residuals),
        lag1_autocorr,
        forecast_rmse,
    })
}

/// Expected R/S of an i.i.d. series of length `n` (Anis-Lloyd with the
/// small-sample prefactor), used to debias the log-log slope.
fn expected_rs_iid(n: usize) -> f64 {
    let nf = n as f64;
    let sum: f64 = (1..n)
        .map(|i| ((nf - i as f64) / i as f64).sqrt())
        .sum();
    let front = if n <= 340 {
        (ln_gamma((nf - 1.0) / 2.0) - ln_gamma(nf / 2.0)).exp() / std::f64::consts::PI.sqrt()
    } else {
        (2.0 / (nf * std::f64::consts::PI)).sqrt()
    };
    (nf - 0.5) / nf * front * sum
}

/// Range of cumulative mean-adjusted sums over one window.
fn rescaled_range(block: &[f64]) -> Option<f64> {
    let m = mean(block);
    let sigma = population_std(block);
    if sigma == 0.0 {
        return None;
    }
    let mut cum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for v in block {
        cum += v - m;
        if cum > max {
            max = cum;
        }
        if cum < min {
            min = cum;
        }
    }
    Some((max - min) / sigma)
}

/// Rescaled-range Hurst estimate on a dyadic window grid from 8 to N/2,
/// averaging R/S over non-overlapping windows per scale.
///
/// The raw log(R/S) versus log(n) slope overestimates H for short windows,
/// so the estimate subtracts the slope the Anis-Lloyd expectation produces
/// on the same grid and re-centers at 0.5. Windows with zero variance are
/// skipped; `None` if fewer than 3 scales survive or fewer than 64 finite
/// values exist.
pub fn hurst_exponent(series: &[f64]) -> Option<HurstEstimate> {
    let x = finite(series);
    let n = x.len();
    if n < 64 {
        return None;
    }
    let mut log_scale = Vec::new();
    let mut log_rs = Vec::new();
    let mut log_expected = Vec::new();
    let mut scale = 8usize;
    while scale <= n / 2 {
        let windows = n / scale;
        let mut values = Vec::with_capacity(windows);
        for w in 0..windows {
            if let Some(rs) = rescaled_range(&x[w * scale..(w + 1) * scale]) {
                values.push(rs);
            }
        }
        if !values.is_empty() {
            log_scale.push((scale as f64).ln());
            log_rs.push(mean(&values).ln());
            log_expected.push(expected_rs_iid(scale).ln());
        }
        scale *= 2;
    }
    if log_scale.len() < 3 {
        return None;
    }
    let (slope_emp, intercept) = linear_fit(&log_scale, &log_rs)?;
    let (slope_iid, _) = linear_fit(&log_scale, &log_expected)?;
    let ssr: f64 = log_scale
        .iter()
        .zip(&log_rs)
        .map(|(s, r)| {
            let e = r - (slope_emp * s + intercept);
            e * e
        })
        .sum();
    Some(HurstEstimate {
        exponent: 0.5 + slope_emp - slope_iid,
        n_scales: log_scale.len(),
        fit_residual: (ssr / log_scale.len() as f64).sqrt(),
    })
}

/// Mean of `log(|x_{t+1} - x_t| + delta)` over consecutive finite pairs.
pub fn lyapunov_proxy(series: &[f64], delta: f64) -> Option<LyapunovProxy> {
    assert!(delta > 0.0, "delta must be positive");
    let pairs = adjacent_finite_pairs(series);
    if pairs.is_empty() {
        return None;
    }
    let total: f64 = pairs.iter().map(|(a, b)| ((b - a).abs() + delta).ln()).sum();
    Some(LyapunovProxy {
        lambda_star: total / pairs.len() as f64,
        delta,
    })
}

/// Feature family selector shared by the extractors and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFamily {
    Static,
    Entropy,
    Forecastability,
    Hurst,
    Lyapunov,
    Determinism,
    Recurrence,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 7] = [
        FeatureFamily::Static,
        FeatureFamily::Entropy,
        FeatureFamily::Forecastability,
        FeatureFamily::Hurst,
        FeatureFamily::Lyapunov,
        FeatureFamily::Determinism,
        FeatureFamily::Recurrence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureFamily::Static => "static",
            FeatureFamily::Entropy => "entropy",
            FeatureFamily::Forecastability => "forecastability",
            FeatureFamily::Hurst => "hurst",
            FeatureFamily::Lyapunov => "lyapunov",
            FeatureFamily::Determinism => "determinism",
            FeatureFamily::Recurrence => "recurrence",
        }
    }
}

impl std::str::FromStr for FeatureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureFamily::ALL
            .iter()
            .find(|f| f.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown feature family `{s}`")))
    }
}

fn extract_per_channel<F>(
    cohort: &Cohort,
    max_frames: usize,
    names: Vec<String>,
    per_channel: F,
) -> CohortFeatureTable
where
    F: Fn(&[f64]) -> Vec<Option<f64>> + Sync,
{
    let cols_per_channel = names.len() / cohort.channel_count();
    let compute = |traj: &crate::data::TrajectoryMatrix| -> Vec<Option<f64>> {
        let capped = subsample_frames(traj, max_frames).expect("validated max_frames");
        let mut row = Vec::with_capacity(names.len());
        for c in 0..capped.channel_count() {
            let cells = per_channel(&capped.channel(c));
            debug_assert_eq!(cells.len(), cols_per_channel);
            row.extend(cells);
        }
        row
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Option<f64>>> = {
        use rayon::prelude::*;
        cohort
            .members()
            .par_iter()
            .map(|(traj, _)| compute(traj))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Option<f64>>> =
        cohort.members().iter().map(|(traj, _)| compute(traj)).collect();

    let mut table = CohortFeatureTable::empty(cohort.participant_ids(), cohort.labels(), names);
    for (i, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            table.set(i, c, v);
        }
    }
    table
}

fn channel_names(cohort: &Cohort, pattern: impl Fn(usize) -> Vec<String>) -> Vec<String> {
    (1..=cohort.channel_count()).flat_map(pattern).collect()
}

/// Extract one feature family for every participant and channel.
///
/// Recurrence parameters supply the threshold factor for the recurrence and
/// determinism families and the frame cap applied to every family.
pub fn extract_baseline_features(
    cohort: &Cohort,
    family: FeatureFamily,
    params: &RecurrenceParams,
) -> Result<CohortFeatureTable> {
    params.validate()?;
    let max_frames = params.max_frames;
    let table = match family {
        FeatureFamily::Static => extract_per_channel(
            cohort,
            max_frames,
            channel_names(cohort, |c| vec![format!("mean_ch{c}"), format!("std_ch{c}")]),
            |series| match static_pooled(series) {
                Some((m, s)) => vec![Some(m), Some(s)],
                None => vec![None, None],
            },
        ),
        FeatureFamily::Entropy => extract_per_channel(
            cohort,
            max_frames,
            channel_names(cohort, |c| vec![format!("entropy_ch{c}")]),
            |series| vec![sample_entropy(series, DEFAULT_ENTROPY_M, DEFAULT_ENTROPY_R_FACTOR)],
        ),
        FeatureFamily::Forecastability => extract_per_channel(
            cohort,
            max_frames,
            channel_names(cohort, |c| {
                vec![
                    format!("forecastability_ch{c}_coef"),
                    format!("forecastability_ch{c}_lag1"),
                    format!("forecastability_ch{c}_rmse"),
                ]
            }),
            |series| match ar1_forecastability(series) {
                Some(fit) => vec![
                    Some(fit.coefficient),
                    Some(fit.lag1_autocorr),
                    Some(fit.forecast_rmse),
                ],
                None => vec![None, None, None],
            },
        ),
        FeatureFamily::Hurst => extract_per_channel(
            cohort,
            max_frames,
            channel_names(cohort, |c| vec![format!("hurst_ch{c}")]),
            |series| vec![hurst_exponent(series).map(|h| h.exponent)],
        ),
        FeatureFamily::Lyapunov => extract_per_channel(
            cohort,
            max_frames,
            channel_names(cohort, |c| vec![format!("lyapunov_ch{c}")]),
            |series| vec![lyapunov_proxy(series, DEFAULT_LYAPUNOV_DELTA).map(|p| p.lambda_star)],
        ),
        FeatureFamily::Determinism => extract_per_channel(
            cohort,
            max_frames,
            channel_names(cohort, |c| vec![format!("determinism_ch{c}")]),
            |series| vec![rqa::determinism_proxy(series, params)],
        ),
        FeatureFamily::Recurrence => rqa::extract_recurrence_features(cohort, params)?,
    };
    Ok(table)
}

/// Every family side by side, names prefixed `{family}.`.
pub fn extract_all_features(
    cohort: &Cohort,
    params: &RecurrenceParams,
) -> Result<CohortFeatureTable> {
    let mut blocks = Vec::with_capacity(FeatureFamily::ALL.len());
    for family in FeatureFamily::ALL {
        let mut t = extract_baseline_features(cohort, family, params)?;
        t.feature_names = t
            .feature_names
            .iter()
            .map(|n| format!("{}.{n}", family.name()))
            .collect();
        blocks.push(t);
    }
    CohortFeatureTable::hconcat(&blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn static_pooled_hand_values() {
        let (m, s) = static_pooled(&[1.0, 2.0, 3.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-15);
        assert!((s - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(static_pooled(&[4.0, 4.0]).unwrap(), (4.0, 0.0));
        assert_eq!(static_pooled(&[-1.0, 1.0]).unwrap(), (0.0, 1.0));
        assert!(static_pooled(&[1.0]).is_none());
    }

    #[test]
    fn sample_entropy_constant_is_zero() {
        let v = vec![2.5; 10];
        assert_eq!(sample_entropy(&v, 2, 0.2), Some(0.0));
    }

    #[test]
    fn sample_entropy_periodic_is_zero() {
        let v: Vec<f64> = (0..20).map(|t| if t % 2 == 0 { 1.0 } else { 2.0 }).collect();
        assert_eq!(sample_entropy(&v, 2, 0.2), Some(0.0));
    }

    #[test]
    fn sample_entropy_noise_exceeds_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut total = 0.0;
        let reps = 20;
        for _ in 0..reps {
            let v: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
            total += sample_entropy(&v, 2, 0.2).unwrap();
        }
        assert!(total / reps as f64 > 1.0, "mean {}", total / reps as f64);
    }

    #[test]
    fn sample_entropy_too_short_is_invalid() {
        assert!(sample_entropy(&[1.0, 2.0, 3.0], 2, 0.2).is_none());
    }

    #[test]
    fn ar1_alternating_series() {
        let v: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let fit = ar1_forecastability(&v).unwrap();
        assert!((fit.coefficient + 1.0).abs() < 1e-12);
        assert!(fit.forecast_rmse < 1e-12);
        assert!((fit.lag1_autocorr + 1.0).abs() < 1e-3);
    }

    #[test]
    fn ar1_ramp_is_highly_autocorrelated() {
        let v: Vec<f64> = (0..100).map(|t| t as f64).collect();
        let fit = ar1_forecastability(&v).unwrap();
        assert!(fit.lag1_autocorr >= 0.9, "got {}", fit.lag1_autocorr);
    }

    #[test]
    fn ar1_constant_is_invalid() {
        assert!(ar1_forecastability(&[3.0; 50]).is_none());
    }

    #[test]
    fn ar1_does_not_pair_across_gaps() {
        // only (0,1) and (5,6) are adjacent finite pairs
        let v = [0.0, 1.0, f64::NAN, 5.0, f64::NAN, 5.0, 6.0];
        let pairs = adjacent_finite_pairs(&v);
        assert_eq!(pairs, vec![(0.0, 1.0), (5.0, 6.0)]);
    }

    #[test]
    fn hurst_needs_64_values_and_3_scales() {
        let short: Vec<f64> = (0..63).map(|t| (t as f64).sin()).collect();
        assert!(hurst_exponent(&short).is_none());
        let just: Vec<f64> = (0..64).map(|t| (t as f64 * 0.7).sin()).collect();
        let est = hurst_exponent(&just).unwrap();
        assert_eq!(est.n_scales, 3); // scales 8, 16, 32
    }

    #[test]
    fn hurst_ramp_is_persistent() {
        let v: Vec<f64> = (0..1024).map(|t| 0.3 * t as f64).collect();
        let h = hurst_exponent(&v).unwrap().exponent;
        assert!(h >= 0.9, "got {h}");
    }

    #[test]
    fn hurst_alternating_is_antipersistent() {
        let v: Vec<f64> = (0..1024).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let h = hurst_exponent(&v).unwrap().exponent;
        assert!(h < 0.5, "got {h}");
    }

    #[test]
    fn hurst_noise_single_seed_sanity() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..4096)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let h = hurst_exponent(&v).unwrap().exponent;
        assert!((h - 0.5).abs() < 0.15, "got {h}");
    }

    #[test]
    fn lyapunov_hand_values() {
        let d = 1e-8;
        let p = lyapunov_proxy(&[4.2; 10], d).unwrap();
        assert!((p.lambda_star - d.ln()).abs() < 1e-12);

        let p = lyapunov_proxy(&[0.0, 1.0, 0.0, 1.0], d).unwrap();
        assert!((p.lambda_star - (1.0 + d).ln()).abs() < 1e-12);
        assert!(p.lambda_star.abs() < 1e-7);

        let p = lyapunov_proxy(&[0.0, std::f64::consts::E - d], d).unwrap();
        assert!((p.lambda_star - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_translation_invariant() {
        let v = [0.3, 1.7, -2.0, 0.9, 4.4];
        let shifted: Vec<f64> = v.iter().map(|x| x + 17.25).collect();
        let a = lyapunov_proxy(&v, 1e-8).unwrap().lambda_star;
        let b = lyapunov_proxy(&shifted, 1e-8).unwrap().lambda_star;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_each_term_bounded_below_by_log_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let delta = 1e-8;
            let v: Vec<f64> = (0..20).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let p = lyapunov_proxy(&v, delta).unwrap();
            assert!(p.lambda_star >= delta.ln());
        }
    }

    fn tiny_cohort(channels: usize) -> Cohort {
        use crate::data::{LabelRecord, TrajectoryMatrix};
        let frames = 80;
        let make = |id: &str, phase: f64| {
            let values: Vec<f64> = (0..frames)
                .flat_map(|t| {
                    (0..channels)
                        .map(move |c| ((t as f64) * 0.3 + phase + c as f64).sin())
                })
                .collect();
            TrajectoryMatrix::new(id, values, frames, channels).unwrap()
        };
        Cohort::new(vec![
            (make("a", 0.0), LabelRecord::new("a", 0).unwrap()),
            (make("b", 0.5), LabelRecord::new("b", 1).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn family_column_counts() {
        let cohort = tiny_cohort(3);
        let params = RecurrenceParams::default();
        let cases = [
            (FeatureFamily::Static, 6),
            (FeatureFamily::Entropy, 3),
            (FeatureFamily::Forecastability, 9),
            (FeatureFamily::Hurst, 3),
            (FeatureFamily::Lyapunov, 3),
            (FeatureFamily::Determinism, 3),
            (FeatureFamily::Recurrence, 3),
        ];
        for (family, cols) in cases {
            let t = extract_baseline_features(&cohort, family, &params).unwrap();
            assert_eq!(t.n_features(), cols, "{family:?}");
            assert_eq!(t.n_participants(), 2);
        }
    }

    #[test]
    fn all_families_concatenate_with_prefixes() {
        let cohort = tiny_cohort(2);
        let t = extract_all_features(&cohort, &RecurrenceParams::default()).unwrap();
        assert_eq!(t.n_features(), 4 + 2 + 6 + 2 + 2 + 2 + 2);
        assert!(t.feature_names.iter().any(|n| n == "static.mean_ch1"));
        assert!(t.feature_names.iter().any(|n| n == "recurrence.rr_ch2"));
        assert!(t.feature_names.iter().any(|n| n == "forecastability.forecastability_ch1_lag1"));
    }

    #[test]
    fn family_parses_from_str() {
        assert_eq!("hurst".parse::<FeatureFamily>().unwrap(), FeatureFamily::Hurst);
        assert!("spectral".parse::<FeatureFamily>().is_err());
    }
}
