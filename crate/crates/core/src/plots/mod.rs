//! File-emitting visualization: traces, fit-vs-data panels, posterior-mean
//! and distribution overlays, difference histograms with HDI/rope bands, and
//! HSV color wheels, all written as standalone SVG 1.1 documents.
//!
//! Every plot is built in two steps: a scene builder assembles typed layers
//! (testable without parsing markup), and [`render_svg`] turns the scene
//! into deterministic SVG text. Numeric annotations reuse the diagnostics
//! and comparison code paths, so bands and vertical lines agree exactly with
//! the printed reports.

mod density;
mod svg;

pub use density::{gaussian_kde, histogram, silverman_bandwidth};
pub use svg::render_svg;

use std::f64::consts::{PI, TAU};
use std::path::Path;

use crate::compare::{self, compare_distributions, compare_means, mean_draws, Comparison};
use crate::diagnostics::hdi;
use crate::dist;
use crate::error::{Error, Result};
use crate::models::{hsv_to_rgb, rgb_to_hsv, DataSnapshot, Fit, Level, ModelKind};

const PALETTE: [&str; 8] = [
    "#3366cc", "#dc3912", "#ff9900", "#109618", "#990099", "#0099c6", "#dd4477", "#66aa00",
];
const DATA_FILL: &str = "#9ecae1";
const FIT_STROKE: &str = "#cc0000";
const HDI_FILL: &str = "#000000";
const ROPE_FILL: &str = "#999999";
const WARMUP_FILL: &str = "#e0e0e0";
const ANNOTATION: &str = "#333333";

fn palette(i: usize) -> String {
    PALETTE[i % PALETTE.len()].to_string()
}

/// A complete figure: a grid of panels rendered `cols` wide.
#[derive(Debug, Clone)]
pub struct Scene {
    pub title: String,
    pub cols: usize,
    pub panel_width: f64,
    pub panel_height: f64,
    pub panels: Vec<Panel>,
}

impl Scene {
    fn new(title: &str, cols: usize, panels: Vec<Panel>) -> Self {
        Scene {
            title: title.to_string(),
            cols,
            panel_width: 320.0,
            panel_height: 260.0,
            panels,
        }
    }

    fn wheel(title: &str, panel: Panel) -> Self {
        Scene {
            title: title.to_string(),
            cols: 1,
            panel_width: 380.0,
            panel_height: 380.0,
            panels: vec![panel],
        }
    }
}

/// One plot panel; `polar` panels hold wheel layers in unit-disc
/// coordinates, all other coordinates are data-space.
#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub polar: bool,
    pub legend: Vec<(String, String)>,
    pub layers: Vec<Layer>,
}

impl Panel {
    fn new(title: impl Into<String>, x_label: &str, y_label: &str) -> Self {
        Panel {
            title: title.into(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            polar: false,
            legend: Vec::new(),
            layers: Vec::new(),
        }
    }

    fn wheel(title: impl Into<String>) -> Self {
        Panel {
            title: title.into(),
            x_label: String::new(),
            y_label: String::new(),
            polar: true,
            legend: Vec::new(),
            layers: Vec::new(),
        }
    }
}

/// One histogram bar on the density scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// Drawing primitives; polar variants appear only in wheel panels.
#[derive(Debug, Clone)]
pub enum Layer {
    Histogram {
        bins: Vec<Bin>,
        color: String,
    },
    Line {
        points: Vec<(f64, f64)>,
        color: String,
        dashed: bool,
        width: f64,
    },
    /// `full_height` shades an x-region; otherwise a thin marker strip at
    /// the bottom of the panel (HDI, rope).
    Band {
        from: f64,
        to: f64,
        color: String,
        full_height: bool,
    },
    VLine {
        x: f64,
        color: String,
        dashed: bool,
    },
    Point {
        x: f64,
        y: f64,
        color: String,
        radius: f64,
    },
    /// Annular arc spanning `span` radians counterclockwise from `from`.
    PolarBand {
        from: f64,
        span: f64,
        inner: f64,
        outer: f64,
        color: String,
    },
    /// Radial line from the center to `radius` at `angle`.
    PolarLine {
        angle: f64,
        radius: f64,
        color: String,
        dashed: bool,
    },
}

/// Direction of the mean resultant vector, wrapped to [0, 2π).
pub fn circular_mean(draws: &[f64]) -> f64 {
    let (s, c) = draws
        .iter()
        .fold((0.0, 0.0), |(s, c), &d| (s + d.sin(), c + d.cos()));
    s.atan2(c).rem_euclid(TAU)
}

/// Highest-density arc of circular draws: rotate so the circular mean sits
/// at π, take the linear HDI, rotate back. Returned angles are in [0, 2π)
/// and the interval runs counterclockwise from the first to the second.
pub fn circular_hdi(draws: &[f64], prob: f64) -> Result<(f64, f64)> {
    let m = circular_mean(draws);
    let rotated: Vec<f64> = draws.iter().map(|d| (d - m + PI).rem_euclid(TAU)).collect();
    let (lo, hi) = hdi(&rotated, prob)?;
    Ok(((lo + m - PI).rem_euclid(TAU), (hi + m - PI).rem_euclid(TAU)))
}

/// Central interval of the von Mises distribution by outward quadrature
/// from the mode; κ below 1e-12 falls back to the uniform circle.
pub fn vonmises_interval(mu: f64, kappa: f64, prob: f64) -> (f64, f64) {
    let prob = prob.clamp(0.0, 1.0);
    if kappa < 1e-12 {
        let half = prob * PI;
        return ((mu - half).rem_euclid(TAU), (mu + half).rem_euclid(TAU));
    }
    let kappa = kappa.min(1e8);
    let reach = if kappa > 50.0 {
        (10.0 / kappa.sqrt()).min(PI)
    } else {
        PI
    };
    let n = 4000usize;
    let step = reach / n as f64;
    let density = |t: f64| {
        2.0 * dist::vonmises_logpdf(mu + t, mu, kappa)
            .map(f64::exp)
            .unwrap_or(0.0)
    };
    let mut cum = 0.0;
    let mut prev = density(0.0);
    let mut half = reach;
    for i in 1..=n {
        let t = step * i as f64;
        let next = density(t);
        let piece = 0.5 * (prev + next) * step;
        if cum + piece >= prob {
            let frac = (prob - cum) / piece;
            half = t - step + frac * step;
            break;
        }
        cum += piece;
        prev = next;
    }
    ((mu - half).rem_euclid(TAU), (mu + half).rem_euclid(TAU))
}

fn write_scene(scene: &Scene, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(scene))?;
    Ok(())
}

/// Per-parameter trace panels: one polyline per chain over every iteration,
/// warmup region shaded when the fit retains warmup draws.
pub fn trace_scene(fit: &Fit) -> Scene {
    let draws = fit.draws();
    let warmup = draws.n_warmup();
    let mut panels = Vec::new();
    for meta in fit.registry() {
        if meta.level != Level::Group {
            continue;
        }
        let param = draws
            .param_index(&meta.name)
            .expect("registry names are draw columns");
        let mut panel = Panel::new(&meta.name, "iteration", &meta.name);
        if warmup > 0 {
            panel.layers.push(Layer::Band {
                from: 1.0,
                to: warmup as f64,
                color: WARMUP_FILL.to_string(),
                full_height: true,
            });
        }
        for chain in 0..draws.n_chains() {
            let mut series = draws.chain_warmup(chain, param);
            series.extend(draws.chain_draws(chain, param));
            let points = series
                .iter()
                .enumerate()
                .map(|(i, v)| ((i + 1) as f64, *v))
                .collect();
            panel.layers.push(Layer::Line {
                points,
                color: palette(chain),
                dashed: false,
                width: 1.0,
            });
        }
        panels.push(panel);
    }
    let cols = if panels.len() > 1 { 2 } else { 1 };
    Scene::new("Trace", cols, panels)
}

pub fn plot_trace(fit: &Fit, path: &Path) -> Result<()> {
    write_scene(&trace_scene(fit), path)
}

fn fitted_line_layer(points: Vec<(f64, f64)>) -> Layer {
    Layer::Line {
        points,
        color: FIT_STROKE.to_string(),
        dashed: false,
        width: 2.0,
    }
}

fn observed_rates(r: &[f64], s: &[usize], n: usize) -> Vec<f64> {
    let mut hits = vec![0.0; n];
    let mut counts = vec![0.0; n];
    for (r, s) in r.iter().zip(s) {
        hits[s - 1] += r;
        counts[s - 1] += 1.0;
    }
    hits.iter().zip(&counts).map(|(h, c)| h / c).collect()
}

fn color_components(data: &DataSnapshot) -> Result<[Vec<f64>; 6]> {
    let DataSnapshot::Color { rows, hsv } = data else {
        unreachable!("color fits carry color snapshots");
    };
    let mut out: [Vec<f64>; 6] = Default::default();
    for row in rows {
        let (r, g, b, h, s, v) = if *hsv {
            let (r, g, b) = hsv_to_rgb(row[0], row[1], row[2])?;
            (r, g, b, row[0], row[1], row[2])
        } else {
            let (h, s, v) = rgb_to_hsv(row[0], row[1], row[2])?;
            (row[0], row[1], row[2], h, s, v)
        };
        for (slot, value) in out.iter_mut().zip([r, g, b, h, s, v]) {
            slot.push(value);
        }
    }
    Ok(out)
}

/// Fitted distribution against the stored data: group level by default, one
/// panel per subject for the hierarchical models when `subjects` is set.
pub fn fit_scene(fit: &Fit, subjects: bool) -> Result<Scene> {
    if subjects {
        return fit_subjects_scene(fit);
    }
    let curves = density::fitted_curves(fit)?;
    match fit.data() {
        DataSnapshot::TTest { y } => {
            let mut panel = Panel::new("y", "y", "density");
            panel.layers.push(Layer::Histogram {
                bins: histogram(y, 30),
                color: DATA_FILL.to_string(),
            });
            panel.layers.push(fitted_line_layer(curves[0].1.clone()));
            Ok(Scene::new("Model fit", 1, vec![panel]))
        }
        DataSnapshot::ReactionTime { t, .. } => {
            let mut panel = Panel::new("t", "t", "density");
            panel.layers.push(Layer::Histogram {
                bins: histogram(t, 30),
                color: DATA_FILL.to_string(),
            });
            panel.layers.push(fitted_line_layer(curves[0].1.clone()));
            Ok(Scene::new("Model fit", 1, vec![panel]))
        }
        DataSnapshot::SuccessRate { r, s } => {
            let n = fit.n_subjects().expect("hierarchical model");
            let rates = observed_rates(r, s, n);
            let mut panel = Panel::new("p", "p", "density");
            panel.layers.push(Layer::Histogram {
                bins: histogram(&rates, 20),
                color: DATA_FILL.to_string(),
            });
            panel.layers.push(fitted_line_layer(curves[0].1.clone()));
            Ok(Scene::new("Model fit", 1, vec![panel]))
        }
        DataSnapshot::Linear { x, y, .. } => {
            let mut panel = Panel::new("y", "x", "y");
            for (x, y) in x.iter().zip(y) {
                panel.layers.push(Layer::Point {
                    x: *x,
                    y: *y,
                    color: DATA_FILL.to_string(),
                    radius: 2.0,
                });
            }
            panel.layers.push(fitted_line_layer(curves[0].1.clone()));
            Ok(Scene::new("Model fit", 1, vec![panel]))
        }
        DataSnapshot::Color { .. } => {
            let components = color_components(fit.data())?;
            let panels = curves
                .into_iter()
                .zip(components)
                .map(|((name, curve), data)| {
                    let mut panel = Panel::new(&name, &name, "density");
                    panel.layers.push(Layer::Histogram {
                        bins: histogram(&data, 30),
                        color: DATA_FILL.to_string(),
                    });
                    panel.layers.push(fitted_line_layer(curve));
                    panel
                })
                .collect();
            Ok(Scene::new("Model fit", 3, panels))
        }
    }
}

fn fit_subjects_scene(fit: &Fit) -> Result<Scene> {
    let n = fit.n_subjects().ok_or_else(|| {
        Error::Unsupported(format!(
            "the {} model has no subject level to plot",
            fit.kind().name()
        ))
    })?;
    let cols = (n as f64).sqrt().ceil() as usize;
    let mut panels = Vec::with_capacity(n);
    match fit.data() {
        DataSnapshot::ReactionTime { t, s } => {
            for i in 1..=n {
                let own: Vec<f64> = t
                    .iter()
                    .zip(s)
                    .filter(|(_, s)| **s == i)
                    .map(|(t, _)| *t)
                    .collect();
                let mu = density::mean_of(fit, &format!("mu[{i}]"))?;
                let sigma = density::mean_of(fit, &format!("sigma[{i}]"))?.max(1e-12);
                let lambda = density::mean_of(fit, &format!("lambda[{i}]"))?.max(1e-12);
                let lo = own.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = own.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let pad = 0.15 * (hi - lo).max(1.0);
                let mut panel = Panel::new(format!("Subject {i}"), "t", "density");
                panel.layers.push(Layer::Histogram {
                    bins: histogram(&own, 20),
                    color: DATA_FILL.to_string(),
                });
                panel.layers.push(fitted_line_layer(density::emg_curve(
                    lo - pad,
                    hi + pad,
                    mu,
                    sigma,
                    lambda,
                )));
                panels.push(panel);
            }
        }
        DataSnapshot::SuccessRate { r, s } => {
            let rates = observed_rates(r, s, n);
            for i in 1..=n {
                let draws = fit.pooled_draws(&format!("p[{i}]"))?;
                let mut panel = Panel::new(format!("Subject {i}"), "p", "density");
                panel.layers.push(Layer::Line {
                    points: gaussian_kde(&draws, 200),
                    color: FIT_STROKE.to_string(),
                    dashed: false,
                    width: 2.0,
                });
                panel.layers.push(Layer::VLine {
                    x: rates[i - 1],
                    color: DATA_FILL.to_string(),
                    dashed: false,
                });
                panels.push(panel);
            }
        }
        DataSnapshot::Linear { x, y, s } => {
            for i in 1..=n {
                let own: Vec<(f64, f64)> = x
                    .iter()
                    .zip(y.iter().zip(s))
                    .filter(|(_, (_, s))| **s == i)
                    .map(|(x, (y, _))| (*x, *y))
                    .collect();
                let alpha = density::mean_of(fit, &format!("alpha[{i}]"))?;
                let beta = density::mean_of(fit, &format!("beta[{i}]"))?;
                let lo = own.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = own.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                let mut panel = Panel::new(format!("Subject {i}"), "x", "y");
                for (x, y) in own {
                    panel.layers.push(Layer::Point {
                        x,
                        y,
                        color: DATA_FILL.to_string(),
                        radius: 2.0,
                    });
                }
                panel.layers.push(fitted_line_layer(vec![
                    (lo, alpha + beta * lo),
                    (hi, alpha + beta * hi),
                ]));
                panels.push(panel);
            }
        }
        DataSnapshot::TTest { .. } | DataSnapshot::Color { .. } => {
            unreachable!("n_subjects is None for non-hierarchical models")
        }
    }
    Ok(Scene::new("Subject fits", cols, panels))
}

pub fn plot_fit(fit: &Fit, subjects: bool, path: &Path) -> Result<()> {
    write_scene(&fit_scene(fit, subjects)?, path)
}

fn same_kind(fits: &[&Fit]) -> Result<ModelKind> {
    let first = fits
        .first()
        .ok_or_else(|| Error::Comparison("no fits to plot".to_string()))?;
    if fits.iter().any(|f| f.kind() != first.kind()) {
        return Err(Error::Comparison(
            "fits are of different model kinds".to_string(),
        ));
    }
    Ok(first.kind())
}

fn series_cols(n_series: usize) -> usize {
    match n_series {
        0 | 1 => 1,
        2 => 2,
        _ => 3,
    }
}

/// Overlaid posterior densities of each fit's mean parameters, one panel per
/// series.
pub fn means_scene(fits: &[&Fit]) -> Result<Scene> {
    same_kind(fits)?;
    let per_fit: Vec<_> = fits.iter().map(|f| mean_draws(f)).collect();
    let n_series = per_fit[0].len();
    let mut panels = Vec::with_capacity(n_series);
    for si in 0..n_series {
        let name = per_fit[0][si].name.clone();
        let mut panel = Panel::new(&name, &name, "density");
        for (fi, series) in per_fit.iter().enumerate() {
            panel.layers.push(Layer::Line {
                points: gaussian_kde(&series[si].draws, 200),
                color: palette(fi),
                dashed: false,
                width: 1.6,
            });
            if fits.len() > 1 {
                panel.legend.push((format!("Group {}", fi + 1), palette(fi)));
            }
        }
        panels.push(panel);
    }
    Ok(Scene::new("Posterior means", series_cols(n_series), panels))
}

pub fn plot_means(fits: &[&Fit], path: &Path) -> Result<()> {
    write_scene(&means_scene(fits)?, path)
}

/// Overlaid fitted data-level curves (regression lines for the linear
/// model), one panel per series.
pub fn distributions_scene(fits: &[&Fit]) -> Result<Scene> {
    let kind = same_kind(fits)?;
    let per_fit: Vec<_> = fits
        .iter()
        .map(|f| density::fitted_curves(f))
        .collect::<Result<Vec<_>>>()?;
    let n_series = per_fit[0].len();
    let y_label = if kind == ModelKind::Linear {
        "y"
    } else {
        "density"
    };
    let mut panels = Vec::with_capacity(n_series);
    for si in 0..n_series {
        let name = per_fit[0][si].0.clone();
        let x_label = if kind == ModelKind::Linear { "x" } else { &name };
        let mut panel = Panel::new(&name, x_label, y_label);
        for (fi, curves) in per_fit.iter().enumerate() {
            panel.layers.push(Layer::Line {
                points: curves[si].1.clone(),
                color: palette(fi),
                dashed: false,
                width: 1.6,
            });
            if fits.len() > 1 {
                panel.legend.push((format!("Group {}", fi + 1), palette(fi)));
            }
        }
        panels.push(panel);
    }
    Ok(Scene::new(
        "Fitted distributions",
        series_cols(n_series),
        panels,
    ))
}

pub fn plot_distributions(fits: &[&Fit], path: &Path) -> Result<()> {
    write_scene(&distributions_scene(fits)?, path)
}

fn difference_panel(
    title: String,
    x_label: &str,
    draws: &[f64],
    hdi_low: f64,
    hdi_high: f64,
    rope: Option<f64>,
) -> Panel {
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let mut panel = Panel::new(title, x_label, "density");
    panel.layers.push(Layer::Histogram {
        bins: histogram(draws, 30),
        color: DATA_FILL.to_string(),
    });
    panel.layers.push(Layer::VLine {
        x: mean,
        color: ANNOTATION.to_string(),
        dashed: false,
    });
    panel.layers.push(Layer::Band {
        from: hdi_low,
        to: hdi_high,
        color: HDI_FILL.to_string(),
        full_height: false,
    });
    if let Some(r) = rope {
        panel.layers.push(Layer::Band {
            from: -r,
            to: r,
            color: ROPE_FILL.to_string(),
            full_height: false,
        });
    }
    panel
}

enum DiffSource {
    Means,
    Distributions { x: Option<f64> },
}

fn difference_scene(
    fits: &[&Fit],
    rope: Option<f64>,
    seed: u64,
    source: DiffSource,
) -> Result<Scene> {
    let cmp: Comparison = match source {
        DiffSource::Means => compare_means(fits, rope, seed)?,
        DiffSource::Distributions { x } => compare_distributions(fits, rope, seed, x)?,
    };
    let k = fits.len();
    let diagonal: Vec<Vec<compare::NamedDraws>> = if k > 2 {
        fits.iter()
            .enumerate()
            .map(|(i, f)| match source {
                DiffSource::Means => Ok(mean_draws(f)),
                DiffSource::Distributions { x } => {
                    let mut rng = compare::predictive_rng(seed, i);
                    compare::predictive_draws(f, &mut rng, x)
                }
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let multi_series = cmp.series.len() > 1;
    let title = match source {
        DiffSource::Means => "Mean differences",
        DiffSource::Distributions { .. } => "Distribution differences",
    };
    let mut panels = Vec::new();
    for (si, series) in cmp.series.iter().enumerate() {
        let x_label = "difference";
        if k == 2 {
            let r = &series.pairs[0].result;
            let panel_title = if multi_series {
                series.name.clone()
            } else {
                "Group 1 - Group 2".to_string()
            };
            panels.push(difference_panel(
                panel_title,
                x_label,
                &r.difference_draws,
                r.hdi_low,
                r.hdi_high,
                rope,
            ));
            continue;
        }
        for row in 0..k {
            for col in 0..k {
                if row == col {
                    let draws = &diagonal[row][si].draws;
                    let mut panel = Panel::new(format!("Group {}", row + 1), "", "density");
                    panel.layers.push(Layer::Line {
                        points: gaussian_kde(draws, 200),
                        color: palette(row),
                        dashed: false,
                        width: 1.6,
                    });
                    panels.push(panel);
                    continue;
                }
                let (a, b) = (row.min(col), row.max(col));
                let pair = series
                    .pairs
                    .iter()
                    .find(|p| p.a == a && p.b == b)
                    .expect("every ordered pair is present");
                let r = &pair.result;
                let (draws, lo, hi) = if row < col {
                    (r.difference_draws.clone(), r.hdi_low, r.hdi_high)
                } else {
                    (
                        r.difference_draws.iter().map(|d| -d).collect(),
                        -r.hdi_high,
                        -r.hdi_low,
                    )
                };
                panels.push(difference_panel(
                    format!("Group {} - Group {}", row + 1, col + 1),
                    x_label,
                    &draws,
                    lo,
                    hi,
                    rope,
                ));
            }
        }
    }
    let cols = if k == 2 {
        series_cols(cmp.series.len())
    } else {
        k
    };
    Ok(Scene::new(title, cols, panels))
}

/// Histogram of mean differences with HDI and rope strips; three or more
/// fits render the full matrix with per-group densities on the diagonal.
pub fn means_difference_scene(fits: &[&Fit], rope: Option<f64>, seed: u64) -> Result<Scene> {
    difference_scene(fits, rope, seed, DiffSource::Means)
}

pub fn plot_means_difference(
    fits: &[&Fit],
    rope: Option<f64>,
    seed: u64,
    path: &Path,
) -> Result<()> {
    write_scene(&means_difference_scene(fits, rope, seed)?, path)
}

/// Histogram of posterior-predictive differences with HDI and rope strips;
/// the linear model requires the predictor value `x`.
pub fn distributions_difference_scene(
    fits: &[&Fit],
    rope: Option<f64>,
    seed: u64,
    x: Option<f64>,
) -> Result<Scene> {
    difference_scene(fits, rope, seed, DiffSource::Distributions { x })
}

pub fn plot_distributions_difference(
    fits: &[&Fit],
    rope: Option<f64>,
    seed: u64,
    x: Option<f64>,
    path: &Path,
) -> Result<()> {
    write_scene(&distributions_difference_scene(fits, rope, seed, x)?, path)
}

fn require_color(fit: &Fit) -> Result<()> {
    if fit.kind() != ModelKind::Color {
        return Err(Error::Unsupported(format!(
            "color-wheel plots need a color fit, not {}",
            fit.kind().name()
        )));
    }
    Ok(())
}

fn posterior_mean_color(fit: &Fit) -> Result<String> {
    let h = circular_mean(&fit.pooled_draws("mu_h")?);
    let s = density::mean_of(fit, "mu_s")?.clamp(0.0, 1.0);
    let v = density::mean_of(fit, "mu_v")?.clamp(0.0, 1.0);
    let (r, g, b) = hsv_to_rgb(h.rem_euclid(TAU).min(TAU - 1e-12), s, v)?;
    Ok(format!(
        "#{:02x}{:02x}{:02x}",
        r.round() as u8,
        g.round() as u8,
        b.round() as u8
    ))
}

fn wheel_arc(panel: &mut Panel, from: f64, to: f64, color: &str) {
    let span = (to - from).rem_euclid(TAU);
    panel.layers.push(Layer::PolarBand {
        from,
        span,
        inner: 0.9,
        outer: 1.0,
        color: color.to_string(),
    });
}

fn wheel_mean_line(panel: &mut Panel, angle: f64) {
    panel.layers.push(Layer::PolarLine {
        angle,
        radius: 1.0,
        color: "#000000".to_string(),
        dashed: false,
    });
}

/// Color wheel of the data (hue angle, saturation radius) with the fitted
/// hue: mean as a radial line, central 95% of the fitted von Mises hue
/// distribution as an arc colored by the posterior mean color.
pub fn fit_hsv_scene(fit: &Fit) -> Result<Scene> {
    require_color(fit)?;
    let mut panel = Panel::wheel("Fit");
    let components = color_components(fit.data())?;
    let mu_h = circular_mean(&fit.pooled_draws("mu_h")?);
    let kappa = density::mean_of(fit, "kappa_h")?;
    let (lo, hi) = vonmises_interval(mu_h, kappa, 0.95);
    wheel_arc(&mut panel, lo, hi, &posterior_mean_color(fit)?);
    wheel_mean_line(&mut panel, mu_h);
    for i in 0..components[3].len() {
        let (h, s, v) = (components[3][i], components[4][i], components[5][i]);
        let (r, g, b) = hsv_to_rgb(h.rem_euclid(TAU).min(TAU - 1e-12), s, v)?;
        panel.layers.push(Layer::Point {
            x: s * h.cos(),
            y: s * h.sin(),
            color: format!(
                "#{:02x}{:02x}{:02x}",
                r.round() as u8,
                g.round() as u8,
                b.round() as u8
            ),
            radius: 2.5,
        });
    }
    Ok(Scene::wheel("HSV fit", panel))
}

pub fn plot_fit_hsv(fit: &Fit, path: &Path) -> Result<()> {
    write_scene(&fit_hsv_scene(fit)?, path)
}

/// Color wheel of the posterior hue mean: circular mean as a radial line,
/// circular 95% HDI of the `mu_h` draws as the arc.
pub fn means_hsv_scene(fit: &Fit) -> Result<Scene> {
    require_color(fit)?;
    let draws = fit.pooled_draws("mu_h")?;
    let (lo, hi) = circular_hdi(&draws, 0.95)?;
    let mut panel = Panel::wheel("Means");
    wheel_arc(&mut panel, lo, hi, &posterior_mean_color(fit)?);
    wheel_mean_line(&mut panel, circular_mean(&draws));
    Ok(Scene::wheel("HSV means", panel))
}

pub fn plot_means_hsv(fit: &Fit, path: &Path) -> Result<()> {
    write_scene(&means_hsv_scene(fit)?, path)
}

/// Color wheel of the posterior-predictive hue with caller annotations:
/// `points` are (hue, saturation) markers, `lines` are radial hue markers
/// (the first solid, later ones dashed).
pub fn distributions_hsv_scene(
    fit: &Fit,
    points: &[(f64, f64)],
    lines: &[f64],
    seed: u64,
) -> Result<Scene> {
    require_color(fit)?;
    let mut rng = compare::predictive_rng(seed, 0);
    let predictive = compare::predictive_draws(fit, &mut rng, None)?;
    let hue = predictive
        .iter()
        .find(|s| s.name == "h")
        .expect("color predictive draws include hue");
    let (lo, hi) = circular_hdi(&hue.draws, 0.95)?;
    let mut panel = Panel::wheel("Distribution");
    wheel_arc(&mut panel, lo, hi, &posterior_mean_color(fit)?);
    wheel_mean_line(&mut panel, circular_mean(&hue.draws));
    for (h, s) in points {
        panel.layers.push(Layer::Point {
            x: s * h.cos(),
            y: s * h.sin(),
            color: ANNOTATION.to_string(),
            radius: 3.0,
        });
    }
    for (i, angle) in lines.iter().enumerate() {
        panel.layers.push(Layer::PolarLine {
            angle: *angle,
            radius: 1.0,
            color: ANNOTATION.to_string(),
            dashed: i > 0,
        });
    }
    Ok(Scene::wheel("HSV distribution", panel))
}

pub fn plot_distributions_hsv(
    fit: &Fit,
    points: &[(f64, f64)],
    lines: &[f64],
    seed: u64,
    path: &Path,
) -> Result<()> {
    write_scene(&distributions_hsv_scene(fit, points, lines, seed)?, path)
}
