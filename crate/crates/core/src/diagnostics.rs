//! Convergence and precision diagnostics: split-R̂, effective sample size,
//! Monte Carlo standard errors, highest density intervals, and the fit
//! summary table.
//!
//! R̂ is computed over split half-chains, so within-chain drift registers as
//! disagreement even with a single chain. ESS follows the chain-averaged
//! autocorrelation estimator with Geyer's initial-monotone-positive
//! truncation; autocovariances are computed lag-on-demand so the cost scales
//! with the correlation length rather than the draw count. HDI is the
//! shortest window over sorted raw draws, ties broken toward the smallest
//! lower endpoint.

use crate::error::{Error, Result};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Sample standard deviation (n−1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_var(xs).sqrt()
}

/// Linear-interpolation quantile on a sorted slice (type-7 convention).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

const CONSTANT_EPS: f64 = 1e-30;

/// Potential scale reduction factor over split half-chains; NaN for
/// constant draws or fewer than four draws per chain.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    if chains.is_empty() {
        return f64::NAN;
    }
    let n = chains.iter().map(|c| c.len()).min().unwrap();
    if n < 4 {
        return f64::NAN;
    }
    let half = n / 2;
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        halves.push(&c[..half]);
        // Odd lengths drop the middle draw.
        halves.push(&c[n - half..n]);
    }
    let m = halves.len() as f64;
    let hn = half as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = halves.iter().map(|h| sample_var(h)).sum::<f64>() / m;
    if !(w > CONSTANT_EPS) {
        return f64::NAN;
    }
    let grand = mean(&means);
    let b = hn * means.iter().map(|mj| (mj - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let var_plus = (hn - 1.0) / hn * w + b / hn;
    (var_plus / w).sqrt()
}

/// Effective sample size from chain-averaged autocorrelations with Geyer
/// initial-monotone-positive truncation. Returns the raw estimate (it can
/// exceed the draw count for antithetic chains); NaN for constant draws.
pub fn ess(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    if m == 0 {
        return f64::NAN;
    }
    let n = chains.iter().map(|c| c.len()).min().unwrap();
    if n < 4 {
        return f64::NAN;
    }
    let total = (m * n) as f64;
    let nf = n as f64;
    // Center each chain once; autocovariances are computed per lag on demand.
    let centered: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| {
            let mu = mean(&c[..n]);
            c[..n].iter().map(|x| x - mu).collect()
        })
        .collect();
    let acov = |t: usize| -> f64 {
        // Chain-averaged biased autocovariance at lag t, scaled n/(n-1).
        centered
            .iter()
            .map(|c| {
                c[..n - t]
                    .iter()
                    .zip(&c[t..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / nf
            })
            .sum::<f64>()
            / m as f64
            * (nf / (nf - 1.0))
    };
    let s0 = acov(0);
    if !(s0 > CONSTANT_EPS) {
        return f64::NAN;
    }
    let var_plus = if m > 1 {
        let means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
        let grand = mean(&means);
        let b_over_n =
            means.iter().map(|mj| (mj - grand).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        s0 * (nf - 1.0) / nf + b_over_n
    } else {
        s0 * (nf - 1.0) / nf
    };
    let rho = |t: usize| 1.0 - (s0 - acov(t)) / var_plus;

    let mut sum_pairs = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho(2 * k) + rho(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum_pairs += pair;
        prev = pair;
        k += 1;
    }
    let tau = (2.0 * sum_pairs - 1.0).max(1.0 / total);
    total / tau
}

/// Highest density interval: the shortest window over sorted draws whose
/// endpoints are ⌈prob·n⌉ positions apart, ties broken toward the smallest
/// lower endpoint.
pub fn hdi(draws: &[f64], prob: f64) -> Result<(f64, f64)> {
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(Error::Argument(format!(
            "interval probability must be in (0,1], got {prob}"
        )));
    }
    if draws.len() < 2 {
        return Err(Error::Data(format!(
            "highest density interval needs at least 2 draws, got {}",
            draws.len()
        )));
    }
    if draws.iter().any(|d| !d.is_finite()) {
        return Err(Error::Data("draws contain non-finite values".to_string()));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let step = ((prob * n as f64).ceil() as usize).min(n - 1);
    let mut best = (sorted[0], sorted[step]);
    let mut width = best.1 - best.0;
    for i in 1..n - step {
        let w = sorted[i + step] - sorted[i];
        if w < width {
            width = w;
            best = (sorted[i], sorted[i + step]);
        }
    }
    Ok(best)
}

/// Circular mean of angles, in [0, 2π).
pub fn circular_mean(draws: &[f64]) -> f64 {
    let s: f64 = draws.iter().map(|t| t.sin()).sum();
    let c: f64 = draws.iter().map(|t| t.cos()).sum();
    s.atan2(c).rem_euclid(std::f64::consts::TAU)
}

/// Highest density arc for angular draws: rotates the draws so their
/// circular mean sits at π, takes the linear HDI, and rotates back. Both
/// endpoints are in [0, 2π); lo > hi means the arc crosses zero.
pub fn circular_hdi(draws: &[f64], prob: f64) -> Result<(f64, f64)> {
    let tau = std::f64::consts::TAU;
    let shift = std::f64::consts::PI - circular_mean(draws);
    let rotated: Vec<f64> = draws.iter().map(|t| (t + shift).rem_euclid(tau)).collect();
    let (lo, hi) = hdi(&rotated, prob)?;
    Ok(((lo - shift).rem_euclid(tau), (hi - shift).rem_euclid(tau)))
}

/// One row of the fit summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub se_mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q97_5: f64,
    pub n_eff: f64,
    pub rhat: f64,
    /// Raw ESS exceeded 1.5× the draw count; n_eff holds the capped value.
    pub n_eff_capped: bool,
}

/// Builds summary rows from (name, per-chain post-warmup draws) entries.
pub fn summary_rows(entries: &[(String, Vec<Vec<f64>>)]) -> Vec<SummaryRow> {
    entries
        .iter()
        .map(|(name, chains)| {
            let mut pooled: Vec<f64> = chains.iter().flatten().copied().collect();
            let total = pooled.len() as f64;
            let mn = mean(&pooled);
            let sd = if pooled.len() > 1 { sample_sd(&pooled) } else { 0.0 };
            pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let raw_ess = ess(chains);
            let cap = 1.5 * total;
            let n_eff_capped = raw_ess > cap;
            let n_eff = if n_eff_capped { cap } else { raw_ess };
            let se_mean = if n_eff.is_nan() { 0.0 } else { sd / n_eff.sqrt() };
            SummaryRow {
                name: name.clone(),
                mean: mn,
                se_mean,
                sd,
                q2_5: quantile(&pooled, 0.025),
                q25: quantile(&pooled, 0.25),
                q50: quantile(&pooled, 0.50),
                q75: quantile(&pooled, 0.75),
                q97_5: quantile(&pooled, 0.975),
                n_eff,
                rhat: split_rhat(chains),
                n_eff_capped,
            }
        })
        .collect()
}

/// Header block of the print output.
pub fn fit_header(kind: &str, chains: usize, iter: usize, warmup: usize) -> String {
    let per_chain = iter - warmup;
    format!(
        "Inference for model: {kind}.\n\
         {chains} chains, each with iter={iter}; warmup={warmup}; thin=1;\n\
         post-warmup draws per chain={per_chain}, total post-warmup draws={}.\n",
        per_chain * chains
    )
}

/// Renders one statistic at the given number of decimals, switching to
/// scientific notation for magnitudes that would otherwise flood a
/// fixed-point column.
pub fn compact_stat(x: f64, decimals: usize) -> String {
    if x.is_finite() && x.abs() >= 1e5 {
        format!("{x:.decimals$e}")
    } else {
        format!("{x:.decimals$}")
    }
}

fn table_cell(x: f64) -> String {
    compact_stat(x, 2)
}

/// Renders the aligned summary table (statistics at 2 decimals, n_eff as an
/// integer).
pub fn render_summary_table(rows: &[SummaryRow]) -> String {
    let headers = [
        "mean", "se_mean", "sd", "2.5%", "25%", "50%", "75%", "97.5%", "n_eff", "Rhat",
    ];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                table_cell(r.mean),
                table_cell(r.se_mean),
                table_cell(r.sd),
                table_cell(r.q2_5),
                table_cell(r.q25),
                table_cell(r.q50),
                table_cell(r.q75),
                table_cell(r.q97_5),
                format!("{:.0}", r.n_eff),
                format!("{:.2}", r.rhat),
            ]
        })
        .collect();
    let name_width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(j, h)| {
            cells
                .iter()
                .map(|row| row[j].len())
                .chain(std::iter::once(h.len()))
                .max()
                .unwrap()
        })
        .collect();
    let mut out = String::new();
    out.push_str(&" ".repeat(name_width));
    for (h, w) in headers.iter().zip(&widths) {
        out.push(' ');
        out.push_str(&format!("{h:>w$}", w = w));
    }
    out.push('\n');
    for (r, row) in rows.iter().zip(&cells) {
        out.push_str(&format!("{:<name_width$}", r.name, name_width = name_width));
        for (v, w) in row.iter().zip(&widths) {
            out.push(' ');
            out.push_str(&format!("{v:>w$}", w = w));
        }
        out.push('\n');
    }
    out
}
