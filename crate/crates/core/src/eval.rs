//! Statistical evaluation: stratified cross-validation, rank-based
//! AUC-ROC, label-permutation testing, bootstrap confidence intervals, and
//! per-feature channel ranking.
//!
//! Every randomized step draws from an indexed substream of the master
//! seed (see [`crate::rng`]), so permutation replicas and bootstrap
//! resamples can run in any parallel order and still reproduce the
//! sequential result bit for bit.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::CohortFeatureTable;
use crate::error::{Error, Result};
use crate::pipeline::{anova_f, fit_pipeline, score_pipeline, PipelineConfig};
use crate::rng::{substream, Purpose};
use crate::stats::quantile;

/// Cross-validation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CVConfig {
    pub n_folds: usize,
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for CVConfig {
    fn default() -> Self {
        Self {
            n_folds: 5,
            shuffle: true,
            seed: 42,
        }
    }
}

/// Cross-validation outcome: per-fold AUCs plus held-out scores pooled in
/// participant order.
#[derive(Debug, Clone)]
pub struct CVResult {
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
    pub pooled_scores: Vec<f64>,
    pub pooled_labels: Vec<u8>,
    pub fold_assignment: Vec<usize>,
}

impl CVResult {
    /// AUC of the concatenated held-out scores. Differs in general from
    /// `mean_auc`, the arithmetic mean of the fold AUCs; both are reported.
    pub fn pooled_auc(&self) -> Result<f64> {
        auc_roc(&self.pooled_scores, &self.pooled_labels)
    }
}

/// Label-permutation test result with `p = (b + 1) / (m + 1)`.
#[derive(Debug, Clone)]
pub struct PermutationResult {
    pub observed: f64,
    pub null_scores: Vec<f64>,
    /// Count of null scores at least as large as the observed one.
    pub b: usize,
    pub m: usize,
    pub p: f64,
}

/// Percentile bootstrap interval over resampled participants.
#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub point_auc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_resamples: usize,
    pub seed: u64,
}

/// One row of the channel ranking table.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRank {
    pub feature: String,
    pub f_stat: f64,
    pub p_value: f64,
}

/// AUC-ROC in the Mann-Whitney formulation with mid-rank tie handling:
/// `(sum of positive ranks - n1(n1+1)/2) / (n1 * n0)`.
pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Data("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Data("scores must be finite".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Data("AUC needs both classes".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // mid-ranks: equal scores share the average of their 1-based positions
    let mut rank = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }

    let rank_sum: f64 = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 1)
        .map(|(i, _)| rank[i])
        .sum();
    let n_pos = n_pos as f64;
    let n_neg = n_neg as f64;
    Ok((rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

/// Assign each participant to a test fold: within each class, indices are
/// shuffled by a seeded substream and dealt round-robin, so per-class fold
/// sizes differ by at most one. Deterministic for fixed `(labels, seed)`.
pub fn stratified_folds(labels: &[u8], config: &CVConfig) -> Result<Vec<usize>> {
    if config.n_folds < 2 {
        return Err(Error::Config(format!(
            "n_folds must be at least 2, got {}",
            config.n_folds
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    let minority = n_pos.min(n_neg);
    if minority == 0 {
        return Err(Error::Data("fold assignment needs both classes".into()));
    }
    if config.n_folds > minority {
        return Err(Error::Config(format!(
            "n_folds = {} exceeds the minority class count {minority}",
            config.n_folds
        )));
    }
    let mut rng = substream(config.seed, Purpose::FoldShuffle, 0);
    let mut assignment = vec![0usize; labels.len()];
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if config.shuffle {
            idx.shuffle(&mut rng);
        }
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % config.n_folds;
        }
    }
    Ok(assignment)
}

fn run_cv_with_labels(
    table: &CohortFeatureTable,
    labels: &[u8],
    pipeline_config: &PipelineConfig,
    cv_config: &CVConfig,
) -> Result<CVResult> {
    let assignment = stratified_folds(labels, cv_config)?;
    // Selection and standardization are refit inside every fold; the
    // held-out fold never touches them.
    let mut labeled = table.clone();
    labeled.labels = labels.to_vec();

    let mut pooled_scores = vec![f64::NAN; labels.len()];
    let mut fold_aucs = Vec::with_capacity(cv_config.n_folds);
    for fold in 0..cv_config.n_folds {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] == fold).collect();
        let pipeline = fit_pipeline(&labeled, &train, pipeline_config)?;
        let scores = score_pipeline(&pipeline, &labeled, &test)?;
        let test_labels: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        fold_aucs.push(auc_roc(&scores, &test_labels)?);
        for (&i, &s) in test.iter().zip(&scores) {
            pooled_scores[i] = s;
        }
    }
    let mean_auc = fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64;
    Ok(CVResult {
        fold_aucs,
        mean_auc,
        pooled_scores,
        pooled_labels: labels.to_vec(),
        fold_assignment: assignment,
    })
}

/// Stratified cross-validation of the full pipeline.
pub fn run_cv(
    table: &CohortFeatureTable,
    pipeline_config: &PipelineConfig,
    cv_config: &CVConfig,
) -> Result<CVResult> {
    run_cv_with_labels(table, &table.labels, pipeline_config, cv_config)
}

/// Label-permutation test of the mean cross-validated AUC.
///
/// Each replica shuffles the labels with its own indexed substream of
/// `seed` and reruns the entire cross-validated pipeline, per-fold feature
/// selection included. `b` counts null statistics `>=` the observed one.
pub fn permutation_test(
    table: &CohortFeatureTable,
    pipeline_config: &PipelineConfig,
    cv_config: &CVConfig,
    m: usize,
    seed: u64,
) -> Result<PermutationResult> {
    if m == 0 {
        return Err(Error::Config("permutation count must be positive".into()));
    }
    let observed = run_cv(table, pipeline_config, cv_config)?.mean_auc;

    let one_replica = |j: usize| -> Result<f64> {
        let mut rng = substream(seed, Purpose::Permutation, j as u64);
        let mut labels = table.labels.clone();
        labels.shuffle(&mut rng);
        Ok(run_cv_with_labels(table, &labels, pipeline_config, cv_config)?.mean_auc)
    };

    #[cfg(feature = "parallel")]
    let null_scores: Result<Vec<f64>> = {
        use rayon::prelude::*;
        (0..m).into_par_iter().map(one_replica).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let null_scores: Result<Vec<f64>> = (0..m).map(one_replica).collect();
    let null_scores = null_scores?;

    let b = null_scores.iter().filter(|&&s| s >= observed).count();
    Ok(PermutationResult {
        observed,
        null_scores,
        b,
        m,
        p: (b as f64 + 1.0) / (m as f64 + 1.0),
    })
}

/// Percentile bootstrap CI for the AUC of pooled cross-validated scores.
///
/// Participants are resampled with replacement; a resample that draws a
/// single class is redrawn from the same substream. The interval is the
/// 2.5th/97.5th percentile pair with linear interpolation.
pub fn bootstrap_ci(
    pooled_scores: &[f64],
    pooled_labels: &[u8],
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if n_resamples == 0 {
        return Err(Error::Config("bootstrap needs at least 1 resample".into()));
    }
    let point_auc = auc_roc(pooled_scores, pooled_labels)?;
    let n = pooled_scores.len();

    let one_resample = |j: usize| -> Result<f64> {
        let mut rng = substream(seed, Purpose::Bootstrap, j as u64);
        // Redraw single-class resamples; 1000 consecutive failures means
        // the cohort is too degenerate to bootstrap.
        for _ in 0..1000 {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let labels: Vec<u8> = idx.iter().map(|&i| pooled_labels[i]).collect();
            if labels.contains(&0) && labels.contains(&1) {
                let scores: Vec<f64> = idx.iter().map(|&i| pooled_scores[i]).collect();
                return auc_roc(&scores, &labels);
            }
        }
        Err(Error::Data(
            "bootstrap could not draw a two-class resample".into(),
        ))
    };

    #[cfg(feature = "parallel")]
    let aucs: Result<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n_resamples).into_par_iter().map(one_resample).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let aucs: Result<Vec<f64>> = (0..n_resamples).map(one_resample).collect();
    let mut aucs = aucs?;
    aucs.sort_by(|a, b| a.total_cmp(b));

    Ok(BootstrapResult {
        point_auc,
        ci_low: quantile(&aucs, 0.025),
        ci_high: quantile(&aucs, 0.975),
        n_resamples,
        seed,
    })
}

/// Rank features by the full-cohort ANOVA F-statistic, descending, ties
/// broken by name. Features with undefined statistics (constant columns,
/// too few valid values per class) are excluded.
pub fn rank_channels(table: &CohortFeatureTable) -> Vec<ChannelRank> {
    let rows: Vec<usize> = (0..table.n_participants()).collect();
    let mut ranked: Vec<ChannelRank> = (0..table.n_features())
        .filter_map(|col| {
            let (vals, mask) = table.column_for_rows(col, &rows);
            anova_f(&vals, &table.labels, &mask).map(|(f, p)| ChannelRank {
                feature: table.feature_names[col].clone(),
                f_stat: f,
                p_value: p,
            })
        })
        .collect();
    ranked.sort_by(|a, b| b.f_stat.total_cmp(&a.f_stat).then(a.feature.cmp(&b.feature)));
    ranked
}
