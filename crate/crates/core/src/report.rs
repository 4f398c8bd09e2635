//! Serializable evaluation reports.
//!
//! The evaluation report is a versioned JSON document. All nondeterministic
//! fields (wall clock) live inside the `timestamp` object so two runs with
//! the same configuration and seed differ in that one field only.

use serde::{Deserialize, Serialize};

use crate::eval::{BootstrapResult, CVResult, ChannelRank, PermutationResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Configuration echo embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportConfig {
    pub family: String,
    pub epsilon_factor: f64,
    pub max_frames: usize,
    pub top_k: usize,
    pub l2_strength: f64,
    pub folds: usize,
    pub shuffle: bool,
    pub seed: u64,
    pub permutations: usize,
    pub resamples: usize,
    pub software_version: String,
    /// The permutation test statistic: the mean of the fold AUCs.
    pub permutation_statistic: String,
    /// Hurst estimator identifier for the hurst family.
    pub hurst_estimator: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PermutationSummary {
    pub observed: f64,
    pub b: usize,
    pub m: usize,
    pub p: f64,
}

impl From<&PermutationResult> for PermutationSummary {
    fn from(r: &PermutationResult) -> Self {
        Self {
            observed: r.observed,
            b: r.b,
            m: r.m,
            p: r.p,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BootstrapSummary {
    pub point_auc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_resamples: usize,
}

impl From<&BootstrapResult> for BootstrapSummary {
    fn from(r: &BootstrapResult) -> Self {
        Self {
            point_auc: r.point_auc,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            n_resamples: r.n_resamples,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChannelRankEntry {
    pub feature: String,
    pub f_stat: f64,
    pub p_value: f64,
}

impl From<&ChannelRank> for ChannelRankEntry {
    fn from(r: &ChannelRank) -> Self {
        Self {
            feature: r.feature.clone(),
            f_stat: r.f_stat,
            p_value: r.p_value,
        }
    }
}

/// Wall-clock fields, quarantined so determinism checks can drop exactly
/// one key.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TimestampInfo {
    pub generated_at: String,
    pub wall_clock_seconds: f64,
}

/// Full evaluation report.
///
/// `pooled_scores`, `pooled_labels`, and `fold_assignment` extend the core
/// schema so downstream tools (the bootstrap command in particular) can
/// reuse the cross-validated predictions without refitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
    pub pooled_auc: f64,
    pub permutation: PermutationSummary,
    pub bootstrap: BootstrapSummary,
    pub channel_ranking: Vec<ChannelRankEntry>,
    pub pooled_scores: Vec<f64>,
    pub pooled_labels: Vec<u8>,
    pub fold_assignment: Vec<usize>,
    pub timestamp: TimestampInfo,
}

impl EvalReport {
    pub fn assemble(
        config: ReportConfig,
        cv: &CVResult,
        pooled_auc: f64,
        permutation: &PermutationResult,
        bootstrap: &BootstrapResult,
        ranking: &[ChannelRank],
        timestamp: TimestampInfo,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            fold_aucs: cv.fold_aucs.clone(),
            mean_auc: cv.mean_auc,
            pooled_auc,
            permutation: permutation.into(),
            bootstrap: bootstrap.into(),
            channel_ranking: ranking.iter().map(ChannelRankEntry::from).collect(),
            pooled_scores: cv.pooled_scores.clone(),
            pooled_labels: cv.pooled_labels.clone(),
            fold_assignment: cv.fold_assignment.clone(),
            timestamp,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Standalone permutation-test report for the dedicated command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub observed: f64,
    pub b: usize,
    pub m: usize,
    pub p: f64,
    pub null_scores: Vec<f64>,
    pub timestamp: TimestampInfo,
}

/// Standalone bootstrap report for the dedicated command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub schema_version: u32,
    pub point_auc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_resamples: usize,
    pub seed: u64,
    pub timestamp: TimestampInfo,
}
