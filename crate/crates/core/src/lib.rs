//! Nonlinear dynamical biomarkers from multivariate frame-level vocal
//! trajectories, with a built-in classification and statistical-validation
//! harness.
//!
//! The crate covers the full pipeline:
//!
//! - [`data`]: cohort, trajectory, and feature-table types plus their file
//!   formats (manifest CSV, numeric trajectory text, feature TSV).
//! - [`rqa`]: recurrence matrices, recurrence rate, and the diagonal-line
//!   determinism proxy — the quadratic kernels.
//! - [`baselines`]: static pooled summaries, sample entropy, AR(1)
//!   forecastability, rescaled-range Hurst exponent, and the Lyapunov-like
//!   instability proxy.
//! - [`pipeline`]: standardization, ANOVA top-k selection, and
//!   L2-regularized logistic regression, fit on training rows only.
//! - [`eval`]: stratified cross-validation, AUC-ROC, permutation testing,
//!   bootstrap confidence intervals, and channel ranking.
//! - [`synth`]: seeded synthetic cohorts with a class signal in the
//!   autocorrelation structure, for end-to-end verification.
//!
//! All randomness flows through [`rng`]: one master seed expands into
//! per-purpose, per-index substreams, so results are independent of thread
//! count and schedule.

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod rqa;
pub mod special;
pub mod stats;
pub mod svg;
pub mod synth;

pub use baselines::{
    ar1_forecastability, extract_all_features, extract_baseline_features, hurst_exponent,
    lyapunov_proxy, sample_entropy, static_pooled, AR1Fit, FeatureFamily, HurstEstimate,
    LyapunovProxy,
};
pub use data::{
    load_manifest, load_trajectory, subsample_frames, write_cohort, write_feature_table_tsv,
    write_trajectory, Cohort, CohortFeatureTable, LabelRecord, TrajectoryMatrix,
};
pub use error::{Error, Result};
pub use eval::{
    auc_roc, bootstrap_ci, permutation_test, rank_channels, run_cv, stratified_folds,
    BootstrapResult, CVConfig, CVResult, ChannelRank, PermutationResult,
};
pub use pipeline::{
    anova_f, fit_logistic, fit_pipeline, score_pipeline, AnovaSelector, DenseMatrix,
    FittedPipeline, LogisticModel, PipelineConfig, Standardizer,
};
pub use rqa::{
    determinism_proxy, extract_recurrence_features, recurrence_matrix, recurrence_rate,
    recurrence_stats, RecurrenceMatrix, RecurrenceParams, RecurrenceStats,
};
pub use synth::{expected_rr_gap, generate_cohort, SynthConfig};
