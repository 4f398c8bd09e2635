//! Command-line pipeline: synthesize cohorts, extract biomarker families,
//! evaluate them with cross-validation, permutation testing, and bootstrap
//! intervals, and rank channels.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 data/validation
//! error, 3 internal numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use vocaldyn::baselines::{extract_all_features, extract_baseline_features};
use vocaldyn::data::{
    load_manifest, read_feature_table_tsv, write_cohort, write_feature_table_tsv,
};
use vocaldyn::error::Error;
use vocaldyn::eval::{bootstrap_ci, permutation_test, rank_channels, run_cv, CVConfig};
use vocaldyn::pipeline::PipelineConfig;
use vocaldyn::report::{
    BootstrapReport, EvalReport, PermutationReport, ReportConfig, TimestampInfo, SCHEMA_VERSION,
};
use vocaldyn::svg::{permutation_histogram_svg, roc_svg};
use vocaldyn::synth::{generate_cohort, SynthConfig};
use vocaldyn::{CohortFeatureTable, FeatureFamily, RecurrenceParams};

const HURST_ESTIMATOR: &str = "rescaled_range_anis_lloyd";
const PERMUTATION_STATISTIC: &str = "mean_fold_auc";

#[derive(Parser)]
#[command(
    name = "vocaldyn",
    version,
    about = "Nonlinear dynamical biomarkers from vocal trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic cohort on disk (manifest + trajectories).
    Synth(SynthArgs),
    /// Extract a biomarker feature family to a TSV table.
    Extract(ExtractArgs),
    /// Cross-validated evaluation with permutation test and bootstrap CI.
    Evaluate(EvaluateArgs),
    /// Label-permutation test of the mean cross-validated AUC.
    Permtest(PermtestArgs),
    /// Bootstrap CI from the pooled scores of an evaluation report.
    Bootstrap(BootstrapArgs),
    /// Rank features by ANOVA F-statistic.
    RankChannels(RankArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for manifest.csv and trajectories/.
    #[arg(long)]
    out: PathBuf,
    /// Participants per class: class 0, then class 1.
    #[arg(long, num_args = 2, value_names = ["N0", "N1"], default_values = ["100", "42"])]
    n_per_class: Vec<usize>,
    #[arg(long, default_value_t = 1500)]
    frames: usize,
    #[arg(long, default_value_t = 74)]
    channels: usize,
    #[arg(long, default_value_t = 10)]
    n_informative: usize,
    #[arg(long, default_value_t = 0.25)]
    ar_shift: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_std: f64,
    /// Probability that a frame is dropped to NaN across all channels.
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct InputArgs {
    /// Cohort manifest (participant_id,path,label).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Root for the manifest's relative trajectory paths
    /// (default: the manifest's directory).
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Feature family: static, entropy, forecastability, hurst, lyapunov,
    /// determinism, recurrence, or all.
    #[arg(long, value_parser = parse_family_or_all)]
    family: Option<FamilyChoice>,
    /// Precomputed feature table TSV (alternative to --manifest/--family).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Recurrence threshold as a multiple of the channel standard deviation.
    #[arg(long, default_value_t = 0.2)]
    epsilon_factor: f64,
    /// Frame cap applied before per-channel extraction.
    #[arg(long, default_value_t = 2000)]
    max_frames: usize,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output TSV path; a JSON parameter sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 15)]
    top_k: usize,
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = 2000)]
    resamples: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Report JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional ROC curve SVG path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PermtestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 15)]
    top_k: usize,
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional null-distribution histogram SVG path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Evaluation report JSON with pooled scores and labels.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 2000)]
    resamples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output TSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Clone, Copy)]
enum FamilyChoice {
    One(FeatureFamily),
    All,
}

impl FamilyChoice {
    fn name(&self) -> String {
        match self {
            FamilyChoice::One(f) => f.name().to_string(),
            FamilyChoice::All => "all".to_string(),
        }
    }
}

fn parse_family_or_all(s: &str) -> Result<FamilyChoice, String> {
    if s == "all" {
        return Ok(FamilyChoice::All);
    }
    s.parse::<FeatureFamily>()
        .map(FamilyChoice::One)
        .map_err(|_| {
            format!(
                "unknown family `{s}` (expected one of static, entropy, forecastability, \
                 hurst, lyapunov, determinism, recurrence, all)"
            )
        })
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 1,
        Error::Io { .. } | Error::Data(_) => 2,
        Error::Numerical(_) => 3,
    }
}

fn now_timestamp(started: Instant) -> TimestampInfo {
    TimestampInfo {
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    }
}

fn install_thread_pool(threads: usize) -> Result<(), Error> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("could not configure {threads} threads: {e}")))
}

fn write_or_print(path: &Option<PathBuf>, contents: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            let text = format!("{}\n", contents.trim_end_matches('\n'));
            std::fs::write(p, text).map_err(|e| Error::io(p, e))
        }
        None => {
            println!("{}", contents.trim_end_matches('\n'));
            Ok(())
        }
    }
}

/// Load the feature table from either a precomputed TSV or a manifest plus
/// family. Returns the table and the family name for the config echo.
fn load_features(input: &InputArgs) -> Result<(CohortFeatureTable, String), Error> {
    let params = RecurrenceParams {
        epsilon_factor: input.epsilon_factor,
        max_frames: input.max_frames,
        ..Default::default()
    };
    params.validate()?;
    match (&input.features, &input.manifest) {
        (Some(path), None) => {
            let table = read_feature_table_tsv(path)?;
            Ok((table, "precomputed".to_string()))
        }
        (None, Some(manifest)) => {
            let family = input.family.ok_or_else(|| {
                Error::Config("--family is required with --manifest".into())
            })?;
            let root = input
                .data_root
                .clone()
                .unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).to_path_buf());
            let cohort = load_manifest(manifest, &root)?;
            let table = match family {
                FamilyChoice::All => extract_all_features(&cohort, &params)?,
                FamilyChoice::One(f) => extract_baseline_features(&cohort, f, &params)?,
            };
            Ok((table, family.name()))
        }
        (Some(_), Some(_)) => Err(Error::Config(
            "use either --features or --manifest, not both".into(),
        )),
        (None, None) => Err(Error::Config(
            "an input is required: --features TSV, or --manifest with --family".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn report_config(
    family: String,
    input: &InputArgs,
    top_k: usize,
    l2: f64,
    folds: usize,
    seed: u64,
    permutations: usize,
    resamples: usize,
) -> ReportConfig {
    ReportConfig {
        family,
        epsilon_factor: input.epsilon_factor,
        max_frames: input.max_frames,
        top_k,
        l2_strength: l2,
        folds,
        shuffle: true,
        seed,
        permutations,
        resamples,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        permutation_statistic: PERMUTATION_STATISTIC.to_string(),
        hurst_estimator: HURST_ESTIMATOR.to_string(),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Error> {
    let config = SynthConfig {
        n_per_class: (args.n_per_class[0], args.n_per_class[1]),
        frames: args.frames,
        channels: args.channels,
        n_informative: args.n_informative,
        ar_shift: args.ar_shift,
        noise_std: args.noise_std,
        missing_rate: args.missing_rate,
        seed: args.seed,
    };
    let cohort = generate_cohort(&config)?;
    let manifest = write_cohort(&cohort, &args.out)?;
    println!(
        "wrote {} participants ({} class 0, {} class 1), {} channels x {} frames",
        cohort.len(),
        config.n_per_class.0,
        config.n_per_class.1,
        config.channels,
        config.frames
    );
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn cmd_extract(args: &ExtractArgs) -> Result<(), Error> {
    install_thread_pool(args.threads)?;
    if args.input.features.is_some() {
        return Err(Error::Config(
            "extract reads a manifest, not a precomputed table".into(),
        ));
    }
    let (table, family) = load_features(&args.input)?;
    write_feature_table_tsv(&table, &args.out)?;
    let sidecar = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "family": family,
        "epsilon_factor": args.input.epsilon_factor,
        "max_frames": args.input.max_frames,
        "participants": table.n_participants(),
        "features": table.n_features(),
    });
    let sidecar_path = args.out.with_extension("meta.json");
    std::fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )
    .map_err(|e| Error::io(&sidecar_path, e))?;
    eprintln!(
        "wrote {} x {} feature table to {}",
        table.n_participants(),
        table.n_features(),
        args.out.display()
    );
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), Error> {
    let started = Instant::now();
    install_thread_pool(args.threads)?;
    let (table, family) = load_features(&args.input)?;
    let pipeline = PipelineConfig {
        top_k: args.top_k,
        l2_strength: args.l2,
    };
    let cv_config = CVConfig {
        n_folds: args.folds,
        shuffle: true,
        seed: args.seed,
    };
    let cv = run_cv(&table, &pipeline, &cv_config)?;
    let pooled_auc = cv.pooled_auc()?;
    let permutation =
        permutation_test(&table, &pipeline, &cv_config, args.permutations, args.seed)?;
    let bootstrap = bootstrap_ci(&cv.pooled_scores, &cv.pooled_labels, args.resamples, args.seed)?;
    let ranking = rank_channels(&table);
    let config = report_config(
        family,
        &args.input,
        args.top_k,
        args.l2,
        args.folds,
        args.seed,
        args.permutations,
        args.resamples,
    );
    let report = EvalReport::assemble(
        config,
        &cv,
        pooled_auc,
        &permutation,
        &bootstrap,
        &ranking,
        now_timestamp(started),
    );
    if let Some(svg_path) = &args.svg {
        let svg = roc_svg(&cv.pooled_scores, &cv.pooled_labels)?;
        std::fs::write(svg_path, svg).map_err(|e| Error::io(svg_path, e))?;
    }
    write_or_print(&args.out, &report.to_json_pretty())?;
    eprintln!(
        "mean CV AUC {:.3}, pooled AUC {:.3}, permutation p {:.4}, CI [{:.3}, {:.3}]",
        report.mean_auc,
        report.pooled_auc,
        report.permutation.p,
        report.bootstrap.ci_low,
        report.bootstrap.ci_high
    );
    Ok(())
}

fn cmd_permtest(args: &PermtestArgs) -> Result<(), Error> {
    let started = Instant::now();
    install_thread_pool(args.threads)?;
    let (table, family) = load_features(&args.input)?;
    let pipeline = PipelineConfig {
        top_k: args.top_k,
        l2_strength: args.l2,
    };
    let cv_config = CVConfig {
        n_folds: args.folds,
        shuffle: true,
        seed: args.seed,
    };
    let result = permutation_test(&table, &pipeline, &cv_config, args.permutations, args.seed)?;
    let config = report_config(
        family,
        &args.input,
        args.top_k,
        args.l2,
        args.folds,
        args.seed,
        args.permutations,
        0,
    );
    let report = PermutationReport {
        schema_version: SCHEMA_VERSION,
        config,
        observed: result.observed,
        b: result.b,
        m: result.m,
        p: result.p,
        null_scores: result.null_scores.clone(),
        timestamp: now_timestamp(started),
    };
    if let Some(svg_path) = &args.svg {
        let svg = permutation_histogram_svg(&result.null_scores, result.observed);
        std::fs::write(svg_path, svg).map_err(|e| Error::io(svg_path, e))?;
    }
    write_or_print(
        &args.out,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    eprintln!(
        "observed {:.3}, b = {}, m = {}, p = {:.4}",
        result.observed, result.b, result.m, result.p
    );
    Ok(())
}

fn cmd_bootstrap(args: &BootstrapArgs) -> Result<(), Error> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&args.report).map_err(|e| Error::io(&args.report, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: not valid JSON: {e}", args.report.display())))?;
    let scores: Vec<f64> = value
        .get("pooled_scores")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| {
            Error::Data(format!(
                "{}: report has no pooled_scores array",
                args.report.display()
            ))
        })?;
    let labels: Vec<u8> = value
        .get("pooled_labels")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| {
            Error::Data(format!(
                "{}: report has no pooled_labels array",
                args.report.display()
            ))
        })?;
    let result = bootstrap_ci(&scores, &labels, args.resamples, args.seed)?;
    let report = BootstrapReport {
        schema_version: SCHEMA_VERSION,
        point_auc: result.point_auc,
        ci_low: result.ci_low,
        ci_high: result.ci_high,
        n_resamples: result.n_resamples,
        seed: result.seed,
        timestamp: now_timestamp(started),
    };
    write_or_print(
        &args.out,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    eprintln!(
        "point AUC {:.3}, 95% CI [{:.3}, {:.3}] over {} resamples",
        result.point_auc, result.ci_low, result.ci_high, result.n_resamples
    );
    Ok(())
}

fn cmd_rank_channels(args: &RankArgs) -> Result<(), Error> {
    install_thread_pool(args.threads)?;
    let (table, _) = load_features(&args.input)?;
    let ranking = rank_channels(&table);
    let mut out = String::from("feature\tf_stat\tp_value\n");
    for row in &ranking {
        out.push_str(&format!("{}\t{}\t{}\n", row.feature, row.f_stat, row.p_value));
    }
    write_or_print(&args.out, out.trim_end())?;
    eprintln!("ranked {} of {} features", ranking.len(), table.n_features());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Permtest(args) => cmd_permtest(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::RankChannels(args) => cmd_rank_channels(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
