//! Density estimates and fitted-model curves backing the plot layers.

use super::Bin;
use crate::diagnostics::quantile;
use crate::dist;
use crate::error::Result;
use crate::models::{Fit, ModelKind};
use std::f64::consts::TAU;

/// Silverman's bandwidth `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`, floored so
/// degenerate draws still yield a positive width.
pub fn silverman_bandwidth(draws: &[f64]) -> f64 {
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 {
        sd.min(iqr / 1.34)
    } else {
        sd
    };
    let h = 0.9 * spread * n.powf(-0.2);
    h.max(1e-9 * (1.0 + mean.abs()))
}

/// Gaussian kernel density over an evenly spaced grid spanning the draws
/// plus three bandwidths on each side.
pub fn gaussian_kde(draws: &[f64], points: usize) -> Vec<(f64, f64)> {
    let finite: Vec<f64> = draws.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || points < 2 {
        return Vec::new();
    }
    let h = silverman_bandwidth(&finite);
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let norm = 1.0 / (finite.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    (0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let y = finite
                .iter()
                .map(|&d| (-0.5 * ((x - d) / h).powi(2)).exp())
                .sum::<f64>()
                * norm;
            (x, y)
        })
        .collect()
}

/// Equal-width histogram normalized to integrate to one over finite draws.
pub fn histogram(draws: &[f64], bins: usize) -> Vec<Bin> {
    let finite: Vec<f64> = draws.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![Bin {
            lo: lo - 0.5,
            hi: hi + 0.5,
            density: 1.0,
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &finite {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = finite.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| Bin {
            lo: lo + width * i as f64,
            hi: lo + width * (i + 1) as f64,
            density: c as f64 / (n * width),
        })
        .collect()
}

pub(super) fn mean_of(fit: &Fit, name: &str) -> Result<f64> {
    let draws = fit.pooled_draws(name)?;
    Ok(draws.iter().sum::<f64>() / draws.len() as f64)
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(move |i| lo + step * i as f64)
}

fn padded_range(values: &[f64], pad: f64) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { hi - lo } else { 1.0 };
    (lo - pad * width, hi + pad * width)
}

fn curve(xs: impl Iterator<Item = f64>, lp: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    xs.map(|x| (x, lp(x).exp()))
        .filter(|(_, y)| y.is_finite())
        .collect()
}

const POINTS: usize = 200;
const FLOOR: f64 = 1e-12;

/// Analytic data-level density (or regression line, for the linear model) at
/// the pooled posterior means of the group parameters, one curve per data
/// series, evaluated over the span of the stored data.
pub fn fitted_curves(fit: &Fit) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    use crate::models::DataSnapshot::*;
    match (fit.kind(), fit.data()) {
        (ModelKind::TTest, TTest { y }) => {
            let (mu, sigma, nu) = (
                mean_of(fit, "mu")?,
                mean_of(fit, "sigma")?.max(FLOOR),
                mean_of(fit, "nu")?,
            );
            let (lo, hi) = padded_range(y, 0.15);
            Ok(vec![(
                "y".to_string(),
                curve(grid(lo, hi, POINTS), |x| {
                    dist::scaled_t_logpdf(x, nu, mu, sigma).unwrap_or(f64::NEG_INFINITY)
                }),
            )])
        }
        (ModelKind::ReactionTime, ReactionTime { t, .. }) => {
            let (mu, sigma, lambda) = (
                mean_of(fit, "mu_m")?,
                mean_of(fit, "mu_s")?.max(FLOOR),
                mean_of(fit, "mu_l")?.max(FLOOR),
            );
            let (lo, hi) = padded_range(t, 0.15);
            Ok(vec![("t".to_string(), emg_curve(lo, hi, mu, sigma, lambda))])
        }
        (ModelKind::SuccessRate, SuccessRate { .. }) => {
            let p = mean_of(fit, "p")?.clamp(FLOOR, 1.0 - FLOOR);
            let tau = mean_of(fit, "tau")?.clamp(FLOOR, 1e12);
            Ok(vec![(
                "p".to_string(),
                curve(grid(1e-3, 1.0 - 1e-3, POINTS), |x| {
                    dist::beta_lp(x, p * tau, (1.0 - p) * tau)
                }),
            )])
        }
        (ModelKind::Linear, Linear { x, .. }) => {
            let (a, b) = (mean_of(fit, "mu_a")?, mean_of(fit, "mu_b")?);
            let (lo, hi) = padded_range(x, 0.05);
            Ok(vec![(
                "y".to_string(),
                vec![(lo, a + b * lo), (hi, a + b * hi)],
            )])
        }
        (ModelKind::Color, Color { .. }) => {
            let mut out = Vec::with_capacity(6);
            for name in ["r", "g", "b"] {
                let mu = mean_of(fit, &format!("mu_{name}"))?;
                let sigma = mean_of(fit, &format!("sigma_{name}"))?.max(FLOOR);
                out.push((
                    name.to_string(),
                    curve(grid(0.0, 255.0, POINTS), |x| {
                        dist::truncnorm_logpdf(x, mu, sigma, 0.0, 255.0)
                            .unwrap_or(f64::NEG_INFINITY)
                    }),
                ));
            }
            let mu_h = super::circular_mean(&fit.pooled_draws("mu_h")?);
            let kappa = mean_of(fit, "kappa_h")?.clamp(FLOOR, 1e8);
            out.push((
                "h".to_string(),
                curve(grid(0.0, TAU, 256), |x| {
                    dist::vonmises_logpdf(x, mu_h, kappa).unwrap_or(f64::NEG_INFINITY)
                }),
            ));
            for name in ["s", "v"] {
                let mu = mean_of(fit, &format!("mu_{name}"))?;
                let sigma = mean_of(fit, &format!("sigma_{name}"))?.max(FLOOR);
                out.push((
                    name.to_string(),
                    curve(grid(0.0, 1.0, POINTS), |x| {
                        dist::truncnorm_logpdf(x, mu, sigma, 0.0, 1.0)
                            .unwrap_or(f64::NEG_INFINITY)
                    }),
                ));
            }
            Ok(out)
        }
        _ => unreachable!("snapshot kind always matches fit kind"),
    }
}

pub(super) fn emg_curve(lo: f64, hi: f64, mu: f64, sigma: f64, lambda: f64) -> Vec<(f64, f64)> {
    curve(grid(lo, hi, POINTS), |x| {
        dist::emg_logpdf(x, mu, sigma, lambda).unwrap_or(f64::NEG_INFINITY)
    })
}
