//! Browser demo bindings: generate a test series, inspect its recurrence
//! plot and dynamical biomarkers, and run the full cohort evaluation
//! pipeline on a small synthetic cohort — all client-side.
//!
//! The `demo` module is plain Rust (testable on any target); the exported
//! wrappers only translate errors into `JsValue` at the boundary.
//!
//! Build with `wasm-pack build --target web` (see www/index.html).

use wasm_bindgen::prelude::*;

pub mod demo {
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    use vocaldyn::baselines::{
        ar1_forecastability, extract_baseline_features, hurst_exponent, lyapunov_proxy,
        sample_entropy, DEFAULT_ENTROPY_M, DEFAULT_ENTROPY_R_FACTOR, DEFAULT_LYAPUNOV_DELTA,
    };
    use vocaldyn::eval::{permutation_test, run_cv, CVConfig};
    use vocaldyn::pipeline::PipelineConfig;
    use vocaldyn::rng::{substream, Purpose};
    use vocaldyn::rqa::{recurrence_matrix, recurrence_stats, RecurrenceParams};
    use vocaldyn::svg::roc_points;
    use vocaldyn::synth::{generate_cohort, SynthConfig};
    use vocaldyn::FeatureFamily;

    fn stringify(e: vocaldyn::Error) -> String {
        e.to_string()
    }

    /// Deterministic demo series. `kind`: "ar1", "sine", "logistic", "noise".
    pub fn generate_series(
        kind: &str,
        n: usize,
        param: f64,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        if !(2..=5000).contains(&n) {
            return Err("series length must be in 2..=5000".into());
        }
        let mut rng = substream(seed, Purpose::SynthParticipant, 0);
        let series = match kind {
            "ar1" => {
                let a = param.clamp(-0.99, 0.99);
                let innov = (1.0 - a * a).sqrt();
                let mut x = 0.0;
                let mut out = Vec::with_capacity(n);
                for t in 0..(200 + n) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = a * x + innov * z;
                    if t >= 200 {
                        out.push(x);
                    }
                }
                out
            }
            "sine" => {
                // param scales the additive noise level
                (0..n)
                    .map(|t| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (t as f64 * 0.15).sin() + param.max(0.0) * z
                    })
                    .collect()
            }
            "logistic" => {
                // chaotic logistic map, param is the growth rate r
                let r = param.clamp(2.5, 4.0);
                let mut x: f64 = 0.2 + 0.6 * rng.random::<f64>();
                (0..n)
                    .map(|_| {
                        x = r * x * (1.0 - x);
                        x
                    })
                    .collect()
            }
            "noise" => (0..n)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect(),
            other => return Err(format!("unknown series kind `{other}`")),
        };
        Ok(series)
    }

    /// Recurrence plot as a row-major 0/255 byte image of size n x n.
    pub fn recurrence_image(series: &[f64], epsilon_factor: f64) -> Result<Vec<u8>, String> {
        let params = RecurrenceParams {
            epsilon_factor,
            max_frames: series.len().max(2),
            ..Default::default()
        };
        params.validate().map_err(stringify)?;
        let stats = recurrence_stats(series, &params)
            .ok_or_else(|| "series needs at least 2 finite values".to_string())?;
        let finite: Vec<f64> = series.iter().copied().filter(|v| v.is_finite()).collect();
        let matrix = recurrence_matrix(&finite, stats.epsilon_value).map_err(stringify)?;
        let n = matrix.size();
        let mut bytes = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                bytes.push(if matrix.get(i, j) { 255 } else { 0 });
            }
        }
        Ok(bytes)
    }

    /// All per-series biomarkers as a JSON object string.
    pub fn series_biomarkers(series: &[f64], epsilon_factor: f64) -> Result<String, String> {
        let params = RecurrenceParams {
            epsilon_factor,
            max_frames: series.len().max(2),
            ..Default::default()
        };
        params.validate().map_err(stringify)?;
        let stats = recurrence_stats(series, &params)
            .ok_or_else(|| "series needs at least 2 finite values".to_string())?;
        let ar1 = ar1_forecastability(series);
        let report = serde_json::json!({
            "frames_used": stats.frames_used,
            "epsilon": stats.epsilon_value,
            "recurrence_rate": stats.recurrence_rate,
            "determinism": stats.determinism,
            "sample_entropy": sample_entropy(series, DEFAULT_ENTROPY_M, DEFAULT_ENTROPY_R_FACTOR),
            "hurst": hurst_exponent(series).map(|h| h.exponent),
            "lyapunov": lyapunov_proxy(series, DEFAULT_LYAPUNOV_DELTA).map(|p| p.lambda_star),
            "ar1_coefficient": ar1.as_ref().map(|f| f.coefficient),
            "ar1_lag1_autocorr": ar1.as_ref().map(|f| f.lag1_autocorr),
            "ar1_forecast_rmse": ar1.as_ref().map(|f| f.forecast_rmse),
        });
        Ok(report.to_string())
    }

    /// Synthesize a cohort, extract one feature family, and run the
    /// cross-validated evaluation plus an optional quick permutation test.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate_cohort(
        family: &str,
        n_class0: usize,
        n_class1: usize,
        frames: usize,
        channels: usize,
        n_informative: usize,
        ar_shift: f64,
        permutations: usize,
        seed: u64,
    ) -> Result<String, String> {
        if n_class0 * n_class1 == 0 || n_class0 + n_class1 > 600 {
            return Err("cohort size must be positive and at most 600".into());
        }
        if frames > 1000 || channels > 40 {
            return Err("demo limits: frames <= 1000, channels <= 40".into());
        }
        let family: FeatureFamily = family.parse().map_err(stringify)?;
        let config = SynthConfig {
            n_per_class: (n_class0, n_class1),
            frames,
            channels,
            n_informative,
            ar_shift,
            seed,
            ..Default::default()
        };
        let cohort = generate_cohort(&config).map_err(stringify)?;
        let table = extract_baseline_features(&cohort, family, &RecurrenceParams::default())
            .map_err(stringify)?;
        let pipeline = PipelineConfig::default();
        let cv_config = CVConfig {
            n_folds: 5,
            shuffle: true,
            seed,
        };
        let cv = run_cv(&table, &pipeline, &cv_config).map_err(stringify)?;
        let pooled_auc = cv.pooled_auc().map_err(stringify)?;
        let permutation = if permutations > 0 {
            let r = permutation_test(&table, &pipeline, &cv_config, permutations, seed)
                .map_err(stringify)?;
            serde_json::json!({"observed": r.observed, "b": r.b, "m": r.m, "p": r.p})
        } else {
            serde_json::Value::Null
        };
        let roc: Vec<[f64; 2]> = roc_points(&cv.pooled_scores, &cv.pooled_labels)
            .into_iter()
            .map(|(x, y)| [x, y])
            .collect();
        let report = serde_json::json!({
            "family": family.name(),
            "fold_aucs": cv.fold_aucs,
            "mean_auc": cv.mean_auc,
            "pooled_auc": pooled_auc,
            "roc": roc,
            "permutation": permutation,
        });
        Ok(report.to_string())
    }
}

fn to_js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

/// Deterministic demo series. `kind`: "ar1", "sine", "logistic", "noise".
#[wasm_bindgen]
pub fn generate_series(kind: &str, n: usize, param: f64, seed: u64) -> Result<Vec<f64>, JsValue> {
    demo::generate_series(kind, n, param, seed).map_err(to_js)
}

/// Recurrence plot as a flat n*n byte array (0 or 255), row-major.
#[wasm_bindgen]
pub fn recurrence_image(series: &[f64], epsilon_factor: f64) -> Result<Vec<u8>, JsValue> {
    demo::recurrence_image(series, epsilon_factor).map_err(to_js)
}

/// Per-series biomarkers as a JSON object string.
#[wasm_bindgen]
pub fn series_biomarkers(series: &[f64], epsilon_factor: f64) -> Result<String, JsValue> {
    demo::series_biomarkers(series, epsilon_factor).map_err(to_js)
}

/// Cohort evaluation summary as a JSON object string.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evaluate_cohort(
    family: &str,
    n_class0: usize,
    n_class1: usize,
    frames: usize,
    channels: usize,
    n_informative: usize,
    ar_shift: f64,
    permutations: usize,
    seed: u64,
) -> Result<String, JsValue> {
    demo::evaluate_cohort(
        family,
        n_class0,
        n_class1,
        frames,
        channels,
        n_informative,
        ar_shift,
        permutations,
        seed,
    )
    .map_err(to_js)
}
