//! Bayesian bootstrap: posterior simulation of a statistic by reweighting
//! the data with uniform-Dirichlet weights rather than resampling rows.
//!
//! Each replicate draws one weight vector on the simplex and evaluates the
//! statistic on the weighted data. Replicate `i` uses RNG substream `i` of
//! the seed, so results are independent of evaluation order and any single
//! replicate can be reproduced in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::diagnostics::{compact_stat, hdi};
use crate::dist::dirichlet_uniform_weights;
use crate::error::{Error, Result};

/// Rows materialized per data row by the resampling adapter; the multinomial
/// counts approximate each weight to about 1/(rows * factor).
pub const RESAMPLE_FACTOR: usize = 1000;

/// Column-major data table; a plain vector is a single-column table.
///
/// All columns are nonempty and share one length.
#[derive(Debug, Clone)]
pub struct BootstrapData {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl BootstrapData {
    pub fn from_vector(values: Vec<f64>) -> Result<Self> {
        Self::from_columns(vec!["value".to_string()], vec![values])
    }

    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() || names.len() != columns.len() {
            return Err(Error::Data(
                "bootstrap data needs at least one named column, with one name per column".into(),
            ));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::Data("bootstrap data is empty".into()));
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Data(
                "bootstrap data columns have unequal lengths".into(),
            ));
        }
        Ok(Self { names, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }
}

/// Draws of a statistic under uniform-Dirichlet data weights.
///
/// `draws` keeps all `n_samples` replicates in substream order; replicates
/// where the statistic came back non-finite stay in place and are counted by
/// `n_missing`, so indices always line up with their substreams.
#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub statistic: String,
    /// One name per component of the statistic's value.
    pub names: Vec<String>,
    /// Replicate-major: `draws[i][j]` is component `j` of replicate `i`.
    pub draws: Vec<Vec<f64>>,
    pub n_samples: usize,
    pub n_missing: usize,
}

impl BootstrapResult {
    /// All draws of one component, in replicate order.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[j]).collect()
    }

    /// Finite draws of one component, in replicate order.
    pub fn finite_component(&self, j: usize) -> Vec<f64> {
        self.draws
            .iter()
            .map(|d| d[j])
            .filter(|v| v.is_finite())
            .collect()
    }

    /// Text summary: per component the draw mean, draw standard deviation and
    /// 95% highest-density interval, over finite draws only.
    pub fn summary_string(&self) -> String {
        let mut out = format!(
            "Bayesian bootstrap of {} ({} samples)\n",
            self.statistic, self.n_samples
        );
        let width = self.names.iter().map(|n| n.len()).max().unwrap_or(0) + 2;
        for j in 0..self.names.len() {
            let finite = self.finite_component(j);
            if finite.is_empty() {
                out.push_str(&format!(
                    "{:<width$}undefined for every drawn weighting\n",
                    self.names[j]
                ));
                continue;
            }
            let n = finite.len() as f64;
            let mean = finite.iter().sum::<f64>() / n;
            let sd = (finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            let (lo, hi) = hdi(&finite, 0.95).expect("nonempty finite draws");
            out.push_str(&format!(
                "{:<width$}{} +/- {}, 95% HDI: [{}, {}]\n",
                self.names[j],
                compact_stat(mean, 2),
                compact_stat(sd, 5),
                compact_stat(lo, 2),
                compact_stat(hi, 2),
            ));
        }
        if self.n_missing > 0 {
            out.push_str(&format!(
                "({} of {} samples discarded: statistic undefined for those weights)\n",
                self.n_missing, self.n_samples
            ));
        }
        out
    }
}

/// Weighted mean `sum(w_i * x_i) / sum(w_i)`; only weight ratios matter.
/// Computed anchored at the first value, so constant data comes back exactly
/// and large offsets do not cancel.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let anchor = values[0];
    let shifted: f64 = values
        .iter()
        .zip(weights)
        .map(|(x, w)| w * (x - anchor))
        .sum();
    anchor + shifted / weights.iter().sum::<f64>()
}

/// Weighted variance `sum(w_i * (x_i - mean_w)^2) / sum(w_i)`; only weight
/// ratios matter.
pub fn weighted_variance(values: &[f64], weights: &[f64]) -> f64 {
    let mean = weighted_mean(values, weights);
    let total: f64 = weights.iter().sum();
    values
        .iter()
        .zip(weights)
        .map(|(x, w)| w * (x - mean).powi(2))
        .sum::<f64>()
        / total
}

/// Weighted quantile: the smallest value whose cumulative weight reaches
/// `q * sum(w)`, walking the data in value order. `q` outside [0, 1] or any
/// non-finite value gives NaN.
pub fn weighted_quantile(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if !(0.0..=1.0).contains(&q) || values.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let target = q * weights.iter().sum::<f64>();
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i];
        if cum >= target {
            return values[i];
        }
    }
    values[*order.last().expect("nonempty data")]
}

/// Weighted least squares with an intercept: coefficients `[intercept, b_1,
/// ..., b_k]` minimizing `sum(w_i * (y_i - a - sum_j b_j x_ij)^2)`.
/// A singular normal system gives all-NaN coefficients.
pub fn weighted_ols(predictors: &[&[f64]], response: &[f64], weights: &[f64]) -> Vec<f64> {
    let k = predictors.len() + 1;
    let n = response.len();
    let x = |row: usize, col: usize| -> f64 {
        if col == 0 {
            1.0
        } else {
            predictors[col - 1][row]
        }
    };
    let mut xtwx = vec![vec![0.0; k]; k];
    let mut xtwy = vec![0.0; k];
    for i in 0..n {
        let w = weights[i];
        for a in 0..k {
            let xa = x(i, a);
            xtwy[a] += w * xa * response[i];
            for b in a..k {
                xtwx[a][b] += w * xa * x(i, b);
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            xtwx[a][b] = xtwx[b][a];
        }
    }
    solve_symmetric(xtwx, xtwy).unwrap_or_else(|| vec![f64::NAN; k])
}

/// Gaussian elimination with partial pivoting; None when the system is
/// singular to working precision.
fn solve_symmetric(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !scale.is_finite() || scale == 0.0 {
        return None;
    }
    for col in 0..k {
        let pivot = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut out = vec![0.0; k];
    for col in (0..k).rev() {
        let mut v = b[col];
        for c in col + 1..k {
            v -= a[col][c] * out[c];
        }
        out[col] = v / a[col][col];
    }
    if out.iter().all(|v| v.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Built-in weighted statistics reachable from the command line. The scalar
/// statistics read the first column; least squares takes every column but the
/// last as predictors and the last as the response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinStatistic {
    Mean,
    Variance,
    Quantile(f64),
    Ols,
}

impl BuiltinStatistic {
    pub fn label(&self) -> String {
        match self {
            BuiltinStatistic::Mean => "mean".to_string(),
            BuiltinStatistic::Variance => "variance".to_string(),
            BuiltinStatistic::Quantile(q) => format!("quantile({q})"),
            BuiltinStatistic::Ols => "least-squares coefficients".to_string(),
        }
    }
}

/// Bootstraps one of the built-in statistics.
pub fn bootstrap_builtin(
    data: &BootstrapData,
    stat: BuiltinStatistic,
    n_samples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if let BuiltinStatistic::Quantile(q) = stat {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Param(format!(
                "quantile level {q} is outside [0, 1]"
            )));
        }
    }
    let names = match stat {
        BuiltinStatistic::Mean => vec!["mean".to_string()],
        BuiltinStatistic::Variance => vec!["variance".to_string()],
        BuiltinStatistic::Quantile(_) => vec![stat.label()],
        BuiltinStatistic::Ols => {
            if data.columns.len() < 2 {
                return Err(Error::Data(
                    "least squares needs at least one predictor column and a response column"
                        .into(),
                ));
            }
            let mut names = vec!["Intercept".to_string()];
            names.extend(data.names[..data.names.len() - 1].iter().cloned());
            names
        }
    };
    let eval = move |data: &BootstrapData, w: &[f64]| -> Vec<f64> {
        match stat {
            BuiltinStatistic::Mean => vec![weighted_mean(&data.columns[0], w)],
            BuiltinStatistic::Variance => vec![weighted_variance(&data.columns[0], w)],
            BuiltinStatistic::Quantile(q) => vec![weighted_quantile(&data.columns[0], w, q)],
            BuiltinStatistic::Ols => {
                let predictors: Vec<&[f64]> = data.columns[..data.columns.len() - 1]
                    .iter()
                    .map(|c| c.as_slice())
                    .collect();
                let response = data.columns.last().expect("validated column count");
                weighted_ols(&predictors, response, w)
            }
        }
    };
    run(data, &stat.label(), Some(names), n_samples, seed, |_, w| {
        eval(data, w)
    })
}

/// Bootstraps a caller-supplied statistic that accepts explicit weights.
/// Vector-valued statistics must return the same length on every call.
pub fn bayes_bootstrap<F>(
    data: &BootstrapData,
    name: &str,
    statistic: F,
    n_samples: usize,
    seed: u64,
) -> Result<BootstrapResult>
where
    F: Fn(&BootstrapData, &[f64]) -> Vec<f64>,
{
    run(data, name, None, n_samples, seed, |_, w| statistic(data, w))
}

/// Bootstraps a statistic that cannot accept weights: every replicate hands
/// it a multinomial resample of `n_rows * RESAMPLE_FACTOR` rows drawn from
/// that replicate's weights.
pub fn bayes_bootstrap_resampled<F>(
    data: &BootstrapData,
    name: &str,
    statistic: F,
    n_samples: usize,
    seed: u64,
) -> Result<BootstrapResult>
where
    F: Fn(&BootstrapData) -> Vec<f64>,
{
    let mut resampled = BootstrapData {
        names: data.names.clone(),
        columns: vec![Vec::new(); data.columns.len()],
    };
    run(data, name, None, n_samples, seed, move |rng, w| {
        let counts = multinomial_counts(rng, w, data.n_rows() * RESAMPLE_FACTOR);
        for (col, source) in resampled.columns.iter_mut().zip(&data.columns) {
            col.clear();
            for (value, &count) in source.iter().zip(&counts) {
                col.extend(std::iter::repeat(*value).take(count));
            }
        }
        statistic(&resampled)
    })
}

fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One multinomial draw by conditional binomials: exact counts summing to
/// `total`, category by category.
fn multinomial_counts(rng: &mut ChaCha8Rng, weights: &[f64], total: usize) -> Vec<usize> {
    let mut counts = vec![0usize; weights.len()];
    let mut remaining = total as u64;
    let mut mass = 1.0f64;
    for (i, &w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == weights.len() - 1 {
            counts[i] = remaining as usize;
            break;
        }
        let p = if mass > 0.0 {
            (w / mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c = rand_distr::Binomial::new(remaining, p)
            .expect("p clamped to [0, 1]")
            .sample(rng);
        counts[i] = c as usize;
        remaining -= c;
        mass -= w;
    }
    counts
}

fn run<F>(
    data: &BootstrapData,
    label: &str,
    names: Option<Vec<String>>,
    n_samples: usize,
    seed: u64,
    mut eval: F,
) -> Result<BootstrapResult>
where
    F: FnMut(&mut ChaCha8Rng, &[f64]) -> Vec<f64>,
{
    if n_samples == 0 {
        return Err(Error::Param("bootstrap needs at least one sample".into()));
    }
    let n_rows = data.n_rows();
    let mut draws = Vec::with_capacity(n_samples);
    let mut n_missing = 0usize;
    for index in 0..n_samples {
        let mut rng = replicate_rng(seed, index);
        let weights = dirichlet_uniform_weights(n_rows, &mut rng);
        let value = eval(&mut rng, &weights);
        if value.is_empty() {
            return Err(Error::Input(format!(
                "statistic {label} returned no values"
            )));
        }
        if let Some(first) = draws.first() {
            let first: &Vec<f64> = first;
            if value.len() != first.len() {
                return Err(Error::Input(format!(
                    "statistic {label} returned {} values on one draw and {} on another",
                    first.len(),
                    value.len()
                )));
            }
        }
        if value.iter().any(|v| !v.is_finite()) {
            n_missing += 1;
        }
        draws.push(value);
    }
    let width = draws[0].len();
    let names = names.unwrap_or_else(|| {
        if width == 1 {
            vec![label.to_string()]
        } else {
            (1..=width).map(|j| format!("{label}[{j}]")).collect()
        }
    });
    Ok(BootstrapResult {
        statistic: label.to_string(),
        names,
        draws,
        n_samples,
        n_missing,
    })
}
