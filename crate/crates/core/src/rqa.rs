//! Recurrence kernels: thresholded recurrence matrices, recurrence rate,
//! and the diagonal-line determinism proxy.
//!
//! Recurrence between two time points is `|x_i - x_j| <= epsilon` with the
//! boundary counted as recurrent, and `epsilon` set to a factor times the
//! population standard deviation of the channel. The recurrence rate only
//! depends on the value multiset, so it is counted by a sort + two-pointer
//! sweep in O(N log N) instead of materializing the N x N matrix; the
//! determinism proxy needs temporal structure and scans each diagonal
//! offset with run-length counting. Both kernels are validated against a
//! double-loop brute force in the test suites.

use crate::data::{subsample_frames, Cohort, CohortFeatureTable};
use crate::error::{Error, Result};

/// Parameters of the recurrence computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceParams {
    /// Multiplies the channel standard deviation to give the threshold.
    pub epsilon_factor: f64,
    /// Count the trivial i = j recurrences in the rate.
    pub include_main_diagonal: bool,
    /// Minimum diagonal run length for the determinism numerator.
    pub min_diag_length: usize,
    /// Frame cap applied before the quadratic kernels.
    pub max_frames: usize,
}

impl Default for RecurrenceParams {
    fn default() -> Self {
        Self {
            epsilon_factor: 0.2,
            include_main_diagonal: true,
            min_diag_length: 2,
            max_frames: 2000,
        }
    }
}

impl RecurrenceParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_factor.is_nan() || self.epsilon_factor <= 0.0 {
            return Err(Error::Config(format!(
                "epsilon_factor must be positive, got {}",
                self.epsilon_factor
            )));
        }
        if self.min_diag_length < 2 {
            return Err(Error::Config(format!(
                "min_diag_length must be at least 2, got {}",
                self.min_diag_length
            )));
        }
        if self.max_frames < 2 {
            return Err(Error::Config(format!(
                "max_frames must be at least 2, got {}",
                self.max_frames
            )));
        }
        Ok(())
    }
}

/// Per-channel recurrence summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceStats {
    pub recurrence_rate: f64,
    /// Undefined when there are no off-diagonal recurrence points.
    pub determinism: Option<f64>,
    pub frames_used: usize,
    pub epsilon_value: f64,
}

/// Symmetric binary recurrence matrix with bit-packed rows.
#[derive(Debug, Clone)]
pub struct RecurrenceMatrix {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl RecurrenceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n);
        let w = self.bits[i * self.words_per_row + j / 64];
        (w >> (j % 64)) & 1 == 1
    }

    /// Number of recurrent (i, j) pairs, optionally counting the main
    /// diagonal.
    pub fn count_recurrent(&self, include_main_diagonal: bool) -> u64 {
        let total: u64 = self.bits.iter().map(|w| w.count_ones() as u64).sum();
        if include_main_diagonal {
            total
        } else {
            total - self.n as u64
        }
    }
}

/// Build the recurrence matrix for a finite series at a fixed threshold.
pub fn recurrence_matrix(series: &[f64], epsilon: f64) -> Result<RecurrenceMatrix> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Data(format!(
            "recurrence matrix needs at least 2 points, got {n}"
        )));
    }
    assert!(
        series.iter().all(|v| v.is_finite()),
        "recurrence_matrix requires a finite series"
    );
    assert!(epsilon >= 0.0, "epsilon must be nonnegative");
    let words_per_row = n.div_ceil(64);
    let mut bits = vec![0u64; n * words_per_row];
    for i in 0..n {
        let row = i * words_per_row;
        for j in 0..n {
            if (series[i] - series[j]).abs() <= epsilon {
                bits[row + j / 64] |= 1 << (j % 64);
            }
        }
    }
    Ok(RecurrenceMatrix {
        n,
        words_per_row,
        bits,
    })
}

/// Finite values of `series` after the uniform-stride frame cap, in
/// temporal order. The cap runs on the raw frame grid first, matching the
/// trajectory-level subsampling, then missing values drop out.
fn prepare_series(series: &[f64], max_frames: usize) -> Vec<f64> {
    let n = series.len();
    let stride = if n > max_frames {
        n.div_ceil(max_frames)
    } else {
        1
    };
    series
        .iter()
        .step_by(stride)
        .copied()
        .filter(|v| v.is_finite())
        .collect()
}

/// Threshold from the value multiset: `epsilon_factor` times the population
/// standard deviation, computed over sorted values so the result does not
/// depend on temporal order.
fn epsilon_from_sorted(sorted: &[f64], epsilon_factor: f64) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    epsilon_factor * var.sqrt()
}

/// Unordered pairs i < j with `sorted[j] - sorted[i] <= eps`.
fn count_close_pairs_sorted(sorted: &[f64], eps: f64) -> u64 {
    let mut pairs = 0u64;
    let mut lo = 0usize;
    for j in 0..sorted.len() {
        while sorted[j] - sorted[lo] > eps {
            lo += 1;
        }
        pairs += (j - lo) as u64;
    }
    pairs
}

/// Diagonal-line counts over both triangles: `(points_on_long_lines,
/// off_diagonal_recurrence_points)`.
fn diagonal_line_counts(series: &[f64], eps: f64, min_len: usize) -> (u64, u64) {
    let n = series.len();
    let mut on_lines = 0u64;
    let mut total = 0u64;
    for offset in 1..n {
        let mut run = 0u64;
        for i in 0..(n - offset) {
            if (series[i] - series[i + offset]).abs() <= eps {
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
    // The matrix is symmetric; the lower triangle doubles both counts,
    // leaving the ratio unchanged.
    (2 * on_lines, 2 * total)
}

struct Prepared {
    temporal: Vec<f64>,
    epsilon: f64,
}

fn prepare(series: &[f64], params: &RecurrenceParams) -> Option<Prepared> {
    let temporal = prepare_series(series, params.max_frames);
    if temporal.len() < 2 {
        return None;
    }
    let mut sorted = temporal.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let epsilon = epsilon_from_sorted(&sorted, params.epsilon_factor);
    Some(Prepared { temporal, epsilon })
}

/// Recurrence rate of one channel. `None` when fewer than 2 finite values
/// survive; the caller records that in the validity mask.
pub fn recurrence_rate(series: &[f64], params: &RecurrenceParams) -> Option<RecurrenceStats> {
    let prep = prepare(series, params)?;
    let n = prep.temporal.len() as u64;
    let mut sorted = prep.temporal.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let close = count_close_pairs_sorted(&sorted, prep.epsilon);
    let recurrent = 2 * close + if params.include_main_diagonal { n } else { 0 };
    Some(RecurrenceStats {
        recurrence_rate: recurrent as f64 / (n * n) as f64,
        determinism: None,
        frames_used: prep.temporal.len(),
        epsilon_value: prep.epsilon,
    })
}

/// Fraction of off-diagonal recurrence points on diagonal runs of length at
/// least `min_diag_length`. `None` when undefined (no off-diagonal
/// recurrence or fewer than 2 finite values).
pub fn determinism_proxy(series: &[f64], params: &RecurrenceParams) -> Option<f64> {
    let prep = prepare(series, params)?;
    let (on_lines, total) =
        diagonal_line_counts(&prep.temporal, prep.epsilon, params.min_diag_length);
    if total == 0 {
        return None;
    }
    Some(on_lines as f64 / total as f64)
}

/// Full per-channel summary: rate, determinism, frames used, threshold.
pub fn recurrence_stats(series: &[f64], params: &RecurrenceParams) -> Option<RecurrenceStats> {
    let mut stats = recurrence_rate(series, params)?;
    stats.determinism = determinism_proxy(series, params);
    Some(stats)
}

pub(crate) fn channel_feature_rows<F>(
    cohort: &Cohort,
    params: &RecurrenceParams,
    per_channel: F,
) -> Vec<Vec<Option<f64>>>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let compute = |traj: &crate::data::TrajectoryMatrix| -> Vec<Option<f64>> {
        let capped = subsample_frames(traj, params.max_frames).expect("validated max_frames");
        (0..capped.channel_count())
            .map(|c| per_channel(&capped.channel(c)))
            .collect()
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cohort
            .members()
            .par_iter()
            .map(|(traj, _)| compute(traj))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    cohort.members().iter().map(|(traj, _)| compute(traj)).collect()
}

/// Per-channel recurrence rate for every participant: one `rr_ch{c}` column
/// per channel, invalid channels flagged in the mask.
pub fn extract_recurrence_features(
    cohort: &Cohort,
    params: &RecurrenceParams,
) -> Result<CohortFeatureTable> {
    params.validate()?;
    let names = (1..=cohort.channel_count())
        .map(|c| format!("rr_ch{c}"))
        .collect();
    let rows = channel_feature_rows(cohort, params, |series| {
        recurrence_rate(series, params).map(|s| s.recurrence_rate)
    });
    let mut table = CohortFeatureTable::empty(cohort.participant_ids(), cohort.labels(), names);
    for (i, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            table.set(i, c, v);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    #![allow(clippy::needless_range_loop)]

    use super::*;

    fn params_eps(epsilon_factor: f64) -> RecurrenceParams {
        RecurrenceParams {
            epsilon_factor,
            ..Default::default()
        }
    }

    #[test]
    fn matrix_two_distant_points() {
        let m = recurrence_matrix(&[0.0, 10.0], 1.0).unwrap();
        assert!(m.get(0, 0) && m.get(1, 1));
        assert!(!m.get(0, 1) && !m.get(1, 0));
    }

    #[test]
    fn matrix_three_points_enumerated() {
        // all nine pairs at eps = 1: the diagonal recurs, |0 - 0.5| = 0.5
        // recurs, and both distances to 10 exceed the threshold
        let m = recurrence_matrix(&[0.0, 0.5, 10.0], 1.0).unwrap();
        let expected = [
            [true, true, false],
            [true, true, false],
            [false, false, true],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), expected[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn matrix_saturates_at_max_distance() {
        let series = [3.0, -1.0, 7.5, 2.25];
        let max_dist = 8.5; // |7.5 - (-1.0)|, Theta(0) = 1 counts the boundary
        let m = recurrence_matrix(&series, max_dist).unwrap();
        assert_eq!(m.count_recurrent(true), 16);
    }

    #[test]
    fn matrix_rejects_single_point() {
        assert!(recurrence_matrix(&[1.0], 1.0).is_err());
    }

    #[test]
    fn rate_constant_series_is_one() {
        let stats = recurrence_rate(&[5.0, 5.0, 5.0, 5.0], &params_eps(0.2)).unwrap();
        assert_eq!(stats.recurrence_rate, 1.0);
        assert_eq!(stats.epsilon_value, 0.0);
    }

    #[test]
    fn rate_spread_series_only_diagonal() {
        // sigma ~ 11.18, eps ~ 2.236: no off-diagonal pair is close
        let stats = recurrence_rate(&[0.0, 10.0, 20.0, 30.0], &params_eps(0.2)).unwrap();
        assert_eq!(stats.recurrence_rate, 0.25);
    }

    #[test]
    fn rate_alternating_pairs_by_hand() {
        // sigma = 0.5, eps = 0.1; equal values recur: 9 + 9 = 18 of 36
        let stats = recurrence_rate(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0], &params_eps(0.2)).unwrap();
        assert_eq!(stats.recurrence_rate, 0.5);
    }

    #[test]
    fn rate_excluding_diagonal() {
        let params = RecurrenceParams {
            include_main_diagonal: false,
            ..params_eps(0.2)
        };
        let stats = recurrence_rate(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0], &params).unwrap();
        assert_eq!(stats.recurrence_rate, 12.0 / 36.0);
    }

    #[test]
    fn rate_requires_two_finite_values() {
        assert!(recurrence_rate(&[1.0, f64::NAN], &params_eps(0.2)).is_none());
        assert!(recurrence_rate(&[f64::NAN, f64::NAN], &params_eps(0.2)).is_none());
        assert!(recurrence_rate(&[1.0, f64::NAN, 2.0], &params_eps(0.2)).is_some());
    }

    #[test]
    fn determinism_alternating_all_on_lines() {
        // off-diagonal recurrences sit at offsets 2 and 4, all in runs >= 2
        let det = determinism_proxy(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0], &params_eps(0.2)).unwrap();
        assert_eq!(det, 1.0);
    }

    #[test]
    fn determinism_undefined_without_offdiagonal_recurrence() {
        assert!(determinism_proxy(&[0.0, 10.0, 20.0, 30.0], &params_eps(0.2)).is_none());
    }

    #[test]
    fn determinism_constant_series_counts_short_corners() {
        // all points recur; the two length-1 corner diagonals fall below
        // min_diag_length, so DET = (n^2 - n - 2) / (n^2 - n)
        let det = determinism_proxy(&[3.0; 6], &params_eps(0.2)).unwrap();
        assert_eq!(det, 28.0 / 30.0);
    }

    #[test]
    fn frame_cap_applies_before_kernels() {
        let series: Vec<f64> = (0..100).map(|t| (t as f64 * 0.37).sin()).collect();
        let params = RecurrenceParams {
            max_frames: 10,
            ..Default::default()
        };
        let stats = recurrence_rate(&series, &params).unwrap();
        assert!(stats.frames_used <= 10);
    }

    #[test]
    fn extract_shapes_and_masks() {
        use crate::data::{Cohort, LabelRecord, TrajectoryMatrix};
        // participant a: 3 channels, channel 2 all-missing
        let a = TrajectoryMatrix::new(
            "a",
            vec![
                1.0,
                f64::NAN,
                0.5, //
                2.0,
                f64::NAN,
                0.7, //
                1.5,
                f64::NAN,
                0.6,
            ],
            3,
            3,
        )
        .unwrap();
        let b = TrajectoryMatrix::new(
            "b",
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            3,
            3,
        )
        .unwrap();
        let cohort = Cohort::new(vec![
            (a, LabelRecord::new("a", 0).unwrap()),
            (b, LabelRecord::new("b", 1).unwrap()),
        ])
        .unwrap();
        let table = extract_recurrence_features(&cohort, &RecurrenceParams::default()).unwrap();
        assert_eq!(table.n_participants(), 2);
        assert_eq!(table.n_features(), 3);
        assert_eq!(
            table.feature_names,
            vec!["rr_ch1", "rr_ch2", "rr_ch3"]
        );
        assert!(!table.is_valid(0, 1), "all-missing channel must be invalid");
        assert!(table.is_valid(0, 0) && table.is_valid(0, 2));
        for row in 0..2 {
            for col in 0..3 {
                if let Some(v) = table.get(row, col) {
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
