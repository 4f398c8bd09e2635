//! Classification stack: z-score standardization, ANOVA F-statistic
//! feature selection, and L2-regularized logistic regression, always fit
//! on training rows only.
//!
//! The logistic fit is a deterministic full-batch Newton method with
//! Armijo backtracking and zero initialization, so repeated fits on
//! identical data are bitwise identical.

use crate::data::CohortFeatureTable;
use crate::error::{Error, Result};
use crate::special::f_survival;

/// Pipeline hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of features kept by ANOVA selection (clamped to the number
    /// of selectable columns).
    pub top_k: usize,
    /// L2 penalty weight on the non-bias coefficients.
    pub l2_strength: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            top_k: 15,
            l2_strength: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        if self.l2_strength.is_nan() || self.l2_strength < 0.0 {
            return Err(Error::Config(format!(
                "l2_strength must be nonnegative, got {}",
                self.l2_strength
            )));
        }
        Ok(())
    }
}

/// Small dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DenseMatrix {
    pub fn from_flat(data: Vec<f64>, rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Matrix with the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        DenseMatrix::from_flat(data, self.rows, cols.len())
    }
}

/// Per-column training means and standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Fit on the valid cells of the given training rows. Columns with no
    /// valid training cell get mean 0 / std 0 and standardize to 0.
    pub fn fit(table: &CohortFeatureTable, rows: &[usize]) -> Standardizer {
        assert!(rows.len() >= 2, "standardizer needs at least 2 rows");
        let f = table.n_features();
        let mut means = vec![0.0; f];
        let mut stds = vec![0.0; f];
        for col in 0..f {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|&&r| table.is_valid(r, col))
                .map(|&r| table.value(r, col))
                .collect();
            if vals.is_empty() {
                continue;
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
            means[col] = m;
            stds[col] = var.sqrt();
        }
        Standardizer { means, stds }
    }

    /// Z-score the given rows; invalid cells impute to 0 (the training
    /// mean) and zero-variance columns stay at 0.
    pub fn apply(&self, table: &CohortFeatureTable, rows: &[usize]) -> DenseMatrix {
        let f = table.n_features();
        assert_eq!(f, self.means.len());
        let mut data = Vec::with_capacity(rows.len() * f);
        for &r in rows {
            for col in 0..f {
                let z = match table.get(r, col) {
                    Some(v) => {
                        let s = if self.stds[col] == 0.0 { 1.0 } else { self.stds[col] };
                        (v - self.means[col]) / s
                    }
                    None => 0.0,
                };
                data.push(z);
            }
        }
        DenseMatrix::from_flat(data, rows.len(), f)
    }
}

/// One-way two-group ANOVA on the valid entries of a column.
///
/// Returns `(F, p)` with `p` from the F(1, n-2) upper tail, or `None` when
/// the statistic is undefined: fewer than 2 valid values in either class,
/// or zero within-group variance.
pub fn anova_f(column: &[f64], labels: &[u8], mask: &[bool]) -> Option<(f64, f64)> {
    assert_eq!(column.len(), labels.len());
    assert_eq!(column.len(), mask.len());
    let mut sum = [0.0f64; 2];
    let mut count = [0usize; 2];
    for i in 0..column.len() {
        if mask[i] {
            sum[labels[i] as usize] += column[i];
            count[labels[i] as usize] += 1;
        }
    }
    if count[0] < 2 || count[1] < 2 {
        return None;
    }
    let n = (count[0] + count[1]) as f64;
    let mean0 = sum[0] / count[0] as f64;
    let mean1 = sum[1] / count[1] as f64;
    let grand = (sum[0] + sum[1]) / n;
    let ssb = count[0] as f64 * (mean0 - grand) * (mean0 - grand)
        + count[1] as f64 * (mean1 - grand) * (mean1 - grand);
    let mut ssw = 0.0;
    for i in 0..column.len() {
        if mask[i] {
            let m = if labels[i] == 0 { mean0 } else { mean1 };
            ssw += (column[i] - m) * (column[i] - m);
        }
    }
    let msw = ssw / (n - 2.0);
    if msw == 0.0 {
        return None;
    }
    let f = ssb / msw;
    if !f.is_finite() {
        return None;
    }
    Some((f, f_survival(f, 1.0, n - 2.0)))
}

/// Top-k ANOVA selection state.
#[derive(Debug, Clone)]
pub struct AnovaSelector {
    pub k: usize,
    /// Per-column `(F, p)`, `None` where undefined or masked out.
    pub scores: Vec<Option<(f64, f64)>>,
    /// Selected column indices, descending F, ties broken by ascending
    /// column index. At most `k` entries.
    pub selected: Vec<usize>,
}

impl AnovaSelector {
    /// Score standardized training columns and keep the top `k` defined
    /// ones. Columns whose F is undefined are never selected.
    pub fn fit(
        z_train: &DenseMatrix,
        table: &CohortFeatureTable,
        rows: &[usize],
        labels: &[u8],
        k: usize,
    ) -> AnovaSelector {
        let f = z_train.cols();
        let mut scores = Vec::with_capacity(f);
        for col in 0..f {
            let column: Vec<f64> = (0..z_train.rows()).map(|i| z_train.get(i, col)).collect();
            let mask: Vec<bool> = rows.iter().map(|&r| table.is_valid(r, col)).collect();
            scores.push(anova_f(&column, labels, &mask));
        }
        let mut candidates: Vec<(usize, f64)> = scores
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|(f, _)| (i, f)))
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let selected = candidates.into_iter().take(k).map(|(i, _)| i).collect();
        AnovaSelector {
            k,
            scores,
            selected,
        }
    }
}

/// L2-regularized logistic regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_strength: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean negative log-likelihood plus `l2/(2n) * ||w||^2` (bias unpenalized).
pub fn logistic_loss(x: &DenseMatrix, y: &[u8], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = x.rows() as f64;
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let z: f64 = x.row(i).iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
        total += softplus(z) - yi as f64 * z;
    }
    total / n + l2 / (2.0 * n) * w.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient of [`logistic_loss`] in `(w, b)`.
pub fn logistic_gradient(
    x: &DenseMatrix,
    y: &[u8],
    w: &[f64],
    b: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = x.rows() as f64;
    let k = x.cols();
    let mut grad_w = vec![0.0; k];
    let mut grad_b = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let z: f64 = x.row(i).iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
        let diff = sigmoid(z) - yi as f64;
        for (g, a) in grad_w.iter_mut().zip(x.row(i)) {
            *g += diff * a;
        }
        grad_b += diff;
    }
    for (g, wv) in grad_w.iter_mut().zip(w) {
        *g = *g / n + l2 / n * wv;
    }
    (grad_w, grad_b / n)
}

/// Cholesky solve of `A d = rhs` for symmetric positive-definite `A`
/// (dense, dim x dim). `None` when the factorization breaks down.
fn cholesky_solve(a: &[f64], rhs: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for p in 0..j {
                s -= l[i * dim + p] * l[j * dim + p];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    // forward then backward substitution
    let mut out = rhs.to_vec();
    for i in 0..dim {
        for p in 0..i {
            out[i] -= l[i * dim + p] * out[p];
        }
        out[i] /= l[i * dim + i];
    }
    for i in (0..dim).rev() {
        for p in (i + 1)..dim {
            out[i] -= l[p * dim + i] * out[p];
        }
        out[i] /= l[i * dim + i];
    }
    Some(out)
}

/// Fit by full-batch Newton steps with Armijo backtracking, zero
/// initialization, gradient 2-norm tolerance 1e-6, at most 1000 iterations.
/// Returns the model and the per-iteration loss trace.
pub fn fit_logistic_with_trace(
    x: &DenseMatrix,
    y: &[u8],
    l2: f64,
) -> Result<(LogisticModel, Vec<f64>)> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::Data("logistic fit needs at least 2 rows".into()));
    }
    if y.len() != n {
        return Err(Error::Data("label length does not match rows".into()));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::Data("logistic fit needs both classes".into()));
    }
    let k = x.cols();
    let dim = k + 1; // weights then bias
    let mut w = vec![0.0; k];
    let mut b = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = vec![logistic_loss(x, y, &w, b, l2)];

    const TOL: f64 = 1e-6;
    const MAX_ITER: usize = 1000;
    const ARMIJO: f64 = 1e-4;

    for iter in 0..MAX_ITER {
        let (gw, gb) = logistic_gradient(x, y, &w, b, l2);
        let gnorm = (gw.iter().map(|v| v * v).sum::<f64>() + gb * gb).sqrt();
        if gnorm <= TOL {
            converged = true;
            iterations = iter;
            break;
        }

        // Hessian: X^T S X / n with the ridge term on the weight block.
        let nf = n as f64;
        let mut h = vec![0.0; dim * dim];
        for i in 0..n {
            let z: f64 = x.row(i).iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b;
            let p = sigmoid(z);
            let s = p * (1.0 - p);
            let row = x.row(i);
            for a in 0..k {
                for c in a..k {
                    h[a * dim + c] += s * row[a] * row[c];
                }
                h[a * dim + k] += s * row[a];
            }
            h[k * dim + k] += s;
        }
        for a in 0..dim {
            for c in a..dim {
                h[a * dim + c] /= nf;
                h[c * dim + a] = h[a * dim + c];
            }
        }
        for a in 0..k {
            h[a * dim + a] += l2 / nf;
        }

        let mut g = gw.clone();
        g.push(gb);
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        // Newton direction; steepest descent if the solve fails.
        let mut dir = cholesky_solve(&h, &neg_g, dim).unwrap_or_else(|| neg_g.clone());
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gv)| d * gv).sum();
        if slope >= 0.0 {
            dir = neg_g.clone();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }

        let base = *trace.last().unwrap();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let wt: Vec<f64> = w.iter().zip(&dir).map(|(v, d)| v + t * d).collect();
            let bt = b + t * dir[k];
            let lt = logistic_loss(x, y, &wt, bt, l2);
            if lt <= base + ARMIJO * t * slope {
                w = wt;
                b = bt;
                trace.push(lt);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations = iter + 1;
        if !accepted {
            // No further progress is possible at f64 resolution.
            break;
        }
    }
    if !converged && iterations == MAX_ITER {
        let (gw, gb) = logistic_gradient(x, y, &w, b, l2);
        let gnorm = (gw.iter().map(|v| v * v).sum::<f64>() + gb * gb).sqrt();
        converged = gnorm <= TOL;
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::Numerical("logistic weights diverged".into()));
    }
    Ok((
        LogisticModel {
            weights: w,
            bias: b,
            l2_strength: l2,
            converged,
            iterations,
        },
        trace,
    ))
}

/// See [`fit_logistic_with_trace`].
pub fn fit_logistic(x: &DenseMatrix, y: &[u8], l2: f64) -> Result<LogisticModel> {
    fit_logistic_with_trace(x, y, l2).map(|(m, _)| m)
}

impl LogisticModel {
    /// Model with zero weights; predicts 0.5 everywhere.
    pub fn zeros(k: usize, l2_strength: f64) -> LogisticModel {
        LogisticModel {
            weights: vec![0.0; k],
            bias: 0.0,
            l2_strength,
            converged: false,
            iterations: 0,
        }
    }

    /// `sigmoid(X w + b)` per row; stable for logits far beyond +-50.
    pub fn predict_proba(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.weights.len() {
            return Err(Error::Config(format!(
                "feature count {} does not match model width {}",
                x.cols(),
                self.weights.len()
            )));
        }
        Ok((0..x.rows())
            .map(|i| {
                let z: f64 = x
                    .row(i)
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, c)| a * c)
                    .sum::<f64>()
                    + self.bias;
                sigmoid(z)
            })
            .collect())
    }
}

/// Frozen pipeline: standardizer, selector, and model fit on one training
/// split. Scoring never mutates any of it.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub standardizer: Standardizer,
    pub selector: AnovaSelector,
    pub model: LogisticModel,
}

/// Fit standardize -> ANOVA top-k -> logistic on the given training rows.
pub fn fit_pipeline(
    table: &CohortFeatureTable,
    train_rows: &[usize],
    config: &PipelineConfig,
) -> Result<FittedPipeline> {
    config.validate()?;
    let labels: Vec<u8> = train_rows.iter().map(|&r| table.labels[r]).collect();
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::Data("training rows must contain both classes".into()));
    }
    let standardizer = Standardizer::fit(table, train_rows);
    let z_train = standardizer.apply(table, train_rows);
    let selector = AnovaSelector::fit(&z_train, table, train_rows, &labels, config.top_k);
    let x = z_train.select_columns(&selector.selected);
    let model = fit_logistic(&x, &labels, config.l2_strength)?;
    Ok(FittedPipeline {
        standardizer,
        selector,
        model,
    })
}

/// Score rows with a frozen pipeline.
pub fn score_pipeline(
    pipeline: &FittedPipeline,
    table: &CohortFeatureTable,
    rows: &[usize],
) -> Result<Vec<f64>> {
    let z = pipeline.standardizer.apply(table, rows);
    let x = z.select_columns(&pipeline.selector.selected);
    pipeline.model.predict_proba(&x)
}
