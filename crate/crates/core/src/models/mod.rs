//! The five psychological-data models: input validation, posterior
//! sampling, derived quantities, and the `Fit` container with its text
//! reports and draw-extraction operations.

mod color;
mod posterior;

pub use color::{hsv_to_rgb, rgb_to_hsv};
pub use posterior::{ColorComponent, Posterior};

use crate::diagnostics::{
    circular_hdi, circular_mean, compact_stat, fit_header, hdi, render_summary_table,
    summary_rows, SummaryRow,
};
use crate::error::{Error, Result};
use crate::prior::PriorMap;
use crate::sampler::{nuts_sample, Constraint, Draws, SamplerConfig};
use std::fmt;

/// Which of the five models a fit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    TTest,
    ReactionTime,
    SuccessRate,
    Linear,
    Color,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TTest => "ttest",
            ModelKind::ReactionTime => "reaction_time",
            ModelKind::SuccessRate => "success_rate",
            ModelKind::Linear => "linear",
            ModelKind::Color => "color",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "ttest" => Ok(ModelKind::TTest),
            "reaction_time" | "reaction-time" => Ok(ModelKind::ReactionTime),
            "success_rate" | "success-rate" => Ok(ModelKind::SuccessRate),
            "linear" => Ok(ModelKind::Linear),
            "color" => Ok(ModelKind::Color),
            other => Err(Error::Spec(format!("unknown model kind '{other}'"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a quantity sits in the model hierarchy. Derived levels mark
/// quantities recomputed from draws rather than sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Group,
    Subject(usize),
    DerivedGroup,
    DerivedSubject(usize),
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Group => write!(f, "group"),
            Level::Subject(i) => write!(f, "subject({i})"),
            Level::DerivedGroup => write!(f, "derived_group"),
            Level::DerivedSubject(i) => write!(f, "derived_subject({i})"),
        }
    }
}

impl Level {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let indexed = |prefix: &str| -> Option<Result<usize>> {
            text.strip_prefix(prefix)
                .and_then(|rest| rest.strip_suffix(')'))
                .map(|digits| {
                    digits
                        .parse::<usize>()
                        .map_err(|_| Error::Spec(format!("bad subject index in level '{text}'")))
                })
        };
        if text == "group" {
            Ok(Level::Group)
        } else if text == "derived_group" {
            Ok(Level::DerivedGroup)
        } else if let Some(i) = indexed("subject(") {
            Ok(Level::Subject(i?))
        } else if let Some(i) = indexed("derived_subject(") {
            Ok(Level::DerivedSubject(i?))
        } else {
            Err(Error::Spec(format!("unknown level '{text}'")))
        }
    }
}

/// Per-parameter registry entry: name, hierarchy level, and support.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMeta {
    pub name: String,
    pub level: Level,
    pub constraint: Constraint,
}

impl ParamMeta {
    pub fn group(name: &str, constraint: Constraint) -> Self {
        ParamMeta {
            name: name.to_string(),
            level: Level::Group,
            constraint,
        }
    }

    pub fn subject(name: String, index: usize, constraint: Constraint) -> Self {
        ParamMeta {
            name,
            level: Level::Subject(index),
            constraint,
        }
    }

    /// Parses the `name:level:constraint` form emitted by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.splitn(3, ':');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(name), Some(level), Some(constraint)) if !name.trim().is_empty() => {
                Ok(ParamMeta {
                    name: name.trim().to_string(),
                    level: Level::parse(level)?,
                    constraint: Constraint::parse(constraint)?,
                })
            }
            _ => Err(Error::Spec(format!("malformed parameter entry '{text}'"))),
        }
    }
}

impl fmt::Display for ParamMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.name, self.level, self.constraint)
    }
}

/// The input data a fit was built from, in original row order.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSnapshot {
    TTest { y: Vec<f64> },
    ReactionTime { t: Vec<f64>, s: Vec<usize> },
    SuccessRate { r: Vec<f64>, s: Vec<usize> },
    Linear { x: Vec<f64>, y: Vec<f64>, s: Vec<usize> },
    Color { rows: Vec<[f64; 3]>, hsv: bool },
}

impl DataSnapshot {
    pub fn kind(&self) -> ModelKind {
        match self {
            DataSnapshot::TTest { .. } => ModelKind::TTest,
            DataSnapshot::ReactionTime { .. } => ModelKind::ReactionTime,
            DataSnapshot::SuccessRate { .. } => ModelKind::SuccessRate,
            DataSnapshot::Linear { .. } => ModelKind::Linear,
            DataSnapshot::Color { .. } => ModelKind::Color,
        }
    }

    pub fn column_names(&self) -> Vec<&'static str> {
        match self {
            DataSnapshot::TTest { .. } => vec!["y"],
            DataSnapshot::ReactionTime { .. } => vec!["t", "s"],
            DataSnapshot::SuccessRate { .. } => vec!["r", "s"],
            DataSnapshot::Linear { .. } => vec!["x", "y", "s"],
            DataSnapshot::Color { hsv: false, .. } => vec!["r", "g", "b"],
            DataSnapshot::Color { hsv: true, .. } => vec!["h", "s", "v"],
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            DataSnapshot::TTest { y } => y.iter().map(|v| vec![*v]).collect(),
            DataSnapshot::ReactionTime { t, s } => t
                .iter()
                .zip(s)
                .map(|(t, s)| vec![*t, *s as f64])
                .collect(),
            DataSnapshot::SuccessRate { r, s } => r
                .iter()
                .zip(s)
                .map(|(r, s)| vec![*r, *s as f64])
                .collect(),
            DataSnapshot::Linear { x, y, s } => x
                .iter()
                .zip(y.iter().zip(s))
                .map(|(x, (y, s))| vec![*x, *y, *s as f64])
                .collect(),
            DataSnapshot::Color { rows, .. } => rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            DataSnapshot::TTest { y } => y.len(),
            DataSnapshot::ReactionTime { t, .. } => t.len(),
            DataSnapshot::SuccessRate { r, .. } => r.len(),
            DataSnapshot::Linear { x, .. } => x.len(),
            DataSnapshot::Color { rows, .. } => rows.len(),
        }
    }

    /// Rebuilds a snapshot from named columns (fit-file loading). Column
    /// names must match what `column_names` emits for the kind; for color
    /// fits they decide the color space.
    pub fn from_columns(kind: ModelKind, columns: &[String], rows: &[Vec<f64>]) -> Result<Self> {
        let col = |name: &str| -> Result<usize> {
            columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Data(format!("stored data lacks column '{name}'")))
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Data(format!(
                    "stored data row {} has {} fields, expected {}",
                    i + 1,
                    row.len(),
                    columns.len()
                )));
            }
        }
        let subjects = |idx: usize| -> Result<Vec<usize>> {
            rows.iter()
                .enumerate()
                .map(|(i, row)| {
                    let v = row[idx];
                    if v.fract() == 0.0 && v >= 1.0 && v <= usize::MAX as f64 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Data(format!(
                            "subject index at stored row {} must be a positive integer, got {v}",
                            i + 1
                        )))
                    }
                })
                .collect()
        };
        let numbers = |idx: usize| -> Vec<f64> { rows.iter().map(|row| row[idx]).collect() };
        match kind {
            ModelKind::TTest => Ok(DataSnapshot::TTest { y: numbers(col("y")?) }),
            ModelKind::ReactionTime => Ok(DataSnapshot::ReactionTime {
                t: numbers(col("t")?),
                s: subjects(col("s")?)?,
            }),
            ModelKind::SuccessRate => Ok(DataSnapshot::SuccessRate {
                r: numbers(col("r")?),
                s: subjects(col("s")?)?,
            }),
            ModelKind::Linear => Ok(DataSnapshot::Linear {
                x: numbers(col("x")?),
                y: numbers(col("y")?),
                s: subjects(col("s")?)?,
            }),
            ModelKind::Color => {
                let hsv = if columns == ["h", "s", "v"] {
                    true
                } else if columns == ["r", "g", "b"] {
                    false
                } else {
                    return Err(Error::Data(format!(
                        "color data columns must be r,g,b or h,s,v, got {}",
                        columns.join(",")
                    )));
                };
                let rows = rows.iter().map(|r| [r[0], r[1], r[2]]).collect();
                Ok(DataSnapshot::Color { rows, hsv })
            }
        }
    }
}

/// A named per-draw function of the sampled parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantity {
    pub name: String,
    pub level: Level,
    /// Post-warmup values, one vector per chain.
    pub chains: Vec<Vec<f64>>,
}

/// One (chain, iteration, parameter, value) record of the long-format draw
/// tables; chain and iteration are 1-based, iterations count post-warmup
/// draws only.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDraw {
    pub chain: usize,
    pub iteration: usize,
    pub name: String,
    pub value: f64,
}

/// A fitted model: draws, registry, derived quantities, and everything
/// needed to reproduce or persist the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    kind: ModelKind,
    data: DataSnapshot,
    priors: PriorMap,
    config: SamplerConfig,
    draws: Draws,
    registry: Vec<ParamMeta>,
    derived: Vec<DerivedQuantity>,
}

impl Fit {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn data(&self) -> &DataSnapshot {
        &self.data
    }

    pub fn priors(&self) -> &PriorMap {
        &self.priors
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn draws(&self) -> &Draws {
        &self.draws
    }

    /// Sampled-parameter registry in draw-column order.
    pub fn registry(&self) -> &[ParamMeta] {
        &self.registry
    }

    pub fn derived(&self) -> &[DerivedQuantity] {
        &self.derived
    }

    /// Number of subjects for hierarchical fits.
    pub fn n_subjects(&self) -> Option<usize> {
        match &self.data {
            DataSnapshot::ReactionTime { s, .. }
            | DataSnapshot::SuccessRate { s, .. }
            | DataSnapshot::Linear { s, .. } => s.iter().max().copied(),
            DataSnapshot::TTest { .. } | DataSnapshot::Color { .. } => None,
        }
    }

    /// Hierarchy level of a sampled or derived quantity.
    pub fn level_of(&self, name: &str) -> Result<Level> {
        if let Some(m) = self.registry.iter().find(|m| m.name == name) {
            return Ok(m.level);
        }
        self.derived
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.level)
            .ok_or_else(|| Error::Param(format!("unknown parameter '{name}'")))
    }

    /// Post-warmup draws of a sampled or derived quantity, one vector per
    /// chain.
    pub fn parameter_chains(&self, name: &str) -> Result<Vec<Vec<f64>>> {
        if let Ok(idx) = self.draws.param_index(name) {
            return Ok(self.draws.per_chain(idx));
        }
        self.derived
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.chains.clone())
            .ok_or_else(|| Error::Param(format!("unknown parameter '{name}'")))
    }

    /// Post-warmup draws pooled across chains, chain-major.
    pub fn pooled_draws(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.parameter_chains(name)?.into_iter().flatten().collect())
    }

    /// (name, per-chain draws) for every sampled parameter and derived
    /// quantity, in report order.
    pub fn summary_entries(&self) -> Vec<(String, Vec<Vec<f64>>)> {
        let mut out: Vec<(String, Vec<Vec<f64>>)> = self
            .registry
            .iter()
            .enumerate()
            .map(|(idx, m)| (m.name.clone(), self.draws.per_chain(idx)))
            .collect();
        out.extend(
            self.derived
                .iter()
                .map(|d| (d.name.clone(), d.chains.clone())),
        );
        out
    }

    /// One summary row per sampled parameter and derived quantity.
    pub fn summarize(&self) -> Vec<SummaryRow> {
        summary_rows(&self.summary_entries())
    }

    /// The full text report: run header plus the aligned summary table.
    pub fn print_string(&self) -> String {
        let iter = self.draws.n_warmup() + self.draws.n_samples();
        let mut out = fit_header(
            self.kind.name(),
            self.draws.n_chains(),
            iter,
            self.draws.n_warmup(),
        );
        out.push('\n');
        out.push_str(&render_summary_table(&self.summarize()));
        out
    }

    /// Short per-quantity summary: mean, Monte Carlo SE, and 95% HDI.
    pub fn summary_string(&self) -> String {
        let quantities: Vec<(String, String)> = match self.kind {
            ModelKind::Linear => vec![
                ("intercept (alpha):".to_string(), "mu_a".to_string()),
                ("slope (beta):".to_string(), "mu_b".to_string()),
                ("sigma:".to_string(), "mu_s".to_string()),
            ],
            _ => {
                let mut q: Vec<(String, String)> = self
                    .registry
                    .iter()
                    .filter(|m| m.level == Level::Group)
                    .map(|m| (format!("{}:", m.name), m.name.clone()))
                    .collect();
                q.extend(
                    self.derived
                        .iter()
                        .filter(|d| d.level == Level::DerivedGroup)
                        .map(|d| (format!("{}:", d.name), d.name.clone())),
                );
                q
            }
        };
        let width = quantities.iter().map(|(l, _)| l.len()).max().unwrap_or(0) + 2;
        let rows = self.summarize();
        let mut out = String::new();
        for (label, name) in quantities {
            let row = rows.iter().find(|r| r.name == name).expect("registered name");
            let pooled = self.pooled_draws(&name).expect("registered name");
            let circular = self
                .registry
                .iter()
                .any(|m| m.name == name && m.constraint == Constraint::Circular);
            let (mean, interval) = if circular {
                (circular_mean(&pooled), circular_hdi(&pooled, 0.95))
            } else {
                (row.mean, hdi(&pooled, 0.95))
            };
            let (lo, hi) = interval.unwrap_or((f64::NAN, f64::NAN));
            out.push_str(&format!(
                "{label:<width$}{} +/- {}, 95% HDI: [{}, {}]\n",
                compact_stat(mean, 2),
                compact_stat(row.se_mean, 5),
                compact_stat(lo, 2),
                compact_stat(hi, 2),
            ));
        }
        out
    }

    /// Long-format table of group-level draws (every parameter for
    /// non-hierarchical fits).
    pub fn get_parameters(&self) -> Vec<ParamDraw> {
        self.long_rows(|level| matches!(level, Level::Group | Level::DerivedGroup))
    }

    /// Long-format table of subject-level draws; hierarchical fits only.
    pub fn get_subject_parameters(&self) -> Result<Vec<ParamDraw>> {
        match self.kind {
            ModelKind::TTest | ModelKind::Color => Err(Error::Unsupported(format!(
                "{} fits have no subject-level parameters",
                self.kind
            ))),
            _ => Ok(self.long_rows(|level| {
                matches!(level, Level::Subject(_) | Level::DerivedSubject(_))
            })),
        }
    }

    fn long_rows(&self, keep: impl Fn(Level) -> bool) -> Vec<ParamDraw> {
        let mut out = Vec::new();
        for (name, chains) in self.summary_entries() {
            let level = self.level_of(&name).expect("entry is registered");
            if !keep(level) {
                continue;
            }
            for (c, chain) in chains.iter().enumerate() {
                for (i, v) in chain.iter().enumerate() {
                    out.push(ParamDraw {
                        chain: c + 1,
                        iteration: i + 1,
                        name: name.clone(),
                        value: *v,
                    });
                }
            }
        }
        out
    }

    /// Reassembles a fit from persisted parts, re-validating the data and
    /// recomputing derived quantities.
    pub fn rebuild(
        data: DataSnapshot,
        priors: PriorMap,
        config: SamplerConfig,
        draws: Draws,
    ) -> Result<Fit> {
        config.validate()?;
        if draws.n_chains() != config.chains
            || draws.n_warmup() != config.warmup
            || draws.n_samples() != config.iter - config.warmup
        {
            return Err(Error::Data(
                "stored draw shape disagrees with the stored run configuration".to_string(),
            ));
        }
        let registry = registry_for(&data, &priors)?;
        if registry.len() != draws.names().len() {
            return Err(Error::Data(format!(
                "stored draws have {} parameters, the model defines {}",
                draws.names().len(),
                registry.len()
            )));
        }
        for (m, (name, constraint)) in registry
            .iter()
            .zip(draws.names().iter().zip(draws.constraints()))
        {
            if m.name != *name || m.constraint != *constraint {
                return Err(Error::Data(format!(
                    "stored draw column '{name}' ({constraint}) does not match the model's \
                     '{}' ({})",
                    m.name, m.constraint
                )));
            }
        }
        let kind = data.kind();
        let derived = compute_derived(kind, &data, &draws)?;
        Ok(Fit {
            kind,
            data,
            priors,
            config,
            draws,
            registry,
            derived,
        })
    }
}

/// Fits the robust location model to a vector of real observations.
pub fn fit_ttest(y: &[f64], priors: &PriorMap, config: &SamplerConfig) -> Result<Fit> {
    let post = Posterior::ttest(y, priors)?;
    finish_fit(
        DataSnapshot::TTest { y: y.to_vec() },
        priors.clone(),
        config,
        post,
        |_| {},
    )
}

/// Fits the hierarchical reaction-time model to (time, subject) rows.
pub fn fit_reaction_time(
    t: &[f64],
    s: &[usize],
    priors: &PriorMap,
    config: &SamplerConfig,
) -> Result<Fit> {
    let post = Posterior::reaction_time(t, s, priors)?;
    let n = (post.parameters().len() - 6) / 3;
    finish_fit(
        DataSnapshot::ReactionTime {
            t: t.to_vec(),
            s: s.to_vec(),
        },
        priors.clone(),
        config,
        post,
        location_scale_map(n, &[(0, 3 * n, 3 * n + 3)]),
    )
}

/// Fits the hierarchical success-rate model to binary (result, subject)
/// rows.
pub fn fit_success_rate(
    r: &[f64],
    s: &[usize],
    priors: &PriorMap,
    config: &SamplerConfig,
) -> Result<Fit> {
    let post = Posterior::success_rate(r, s, priors)?;
    finish_fit(
        DataSnapshot::SuccessRate {
            r: r.to_vec(),
            s: s.to_vec(),
        },
        priors.clone(),
        config,
        post,
        |_| {},
    )
}

/// Fits the hierarchical linear model to (predictor, outcome, subject)
/// rows.
pub fn fit_linear(
    x: &[f64],
    y: &[f64],
    s: &[usize],
    priors: &PriorMap,
    config: &SamplerConfig,
) -> Result<Fit> {
    let post = Posterior::linear(x, y, s, priors)?;
    let n = (post.parameters().len() - 6) / 3;
    finish_fit(
        DataSnapshot::Linear {
            x: x.to_vec(),
            y: y.to_vec(),
            s: s.to_vec(),
        },
        priors.clone(),
        config,
        post,
        location_scale_map(n, &[(0, 3 * n, 3 * n + 3), (n, 3 * n + 1, 3 * n + 4)]),
    )
}

/// Maps standardized subject deviates back to their natural scale:
/// for each (block start, mean column, sd column), row[start+i] becomes
/// mean + sd · row[start+i] for i in 0..n.
fn location_scale_map(n: usize, blocks: &[(usize, usize, usize)]) -> impl Fn(&mut [f64]) {
    let blocks = blocks.to_vec();
    move |row: &mut [f64]| {
        for &(start, mean_col, sd_col) in &blocks {
            let (mean, sd) = (row[mean_col], row[sd_col]);
            for v in &mut row[start..start + n] {
                *v = mean + sd * *v;
            }
        }
    }
}

fn finish_fit(
    data: DataSnapshot,
    priors: PriorMap,
    config: &SamplerConfig,
    post: Posterior,
    map: impl Fn(&mut [f64]),
) -> Result<Fit> {
    let draws = nuts_sample(&post, config)?;
    let registry = post.parameters().to_vec();
    let names = registry.iter().map(|m| m.name.clone()).collect();
    let constraints = registry.iter().map(|m| m.constraint).collect();
    let draws = draws.transform_rows(names, constraints, map)?;
    let kind = data.kind();
    let derived = compute_derived(kind, &data, &draws)?;
    Ok(Fit {
        kind,
        data,
        priors,
        config: config.clone(),
        draws,
        registry,
        derived,
    })
}

/// Fits all six color components to three-column color rows. RGB inputs are
/// converted to HSV (and vice versa) so every component is always fitted;
/// each component runs as its own sampler with a distinct seed stream.
pub fn fit_color(
    rows: &[[f64; 3]],
    hsv: bool,
    priors: &PriorMap,
    config: &SamplerConfig,
) -> Result<Fit> {
    let valid_names: Vec<String> = ColorComponent::ALL
        .iter()
        .flat_map(|c| {
            let (a, b) = c.param_names();
            [a.to_string(), b.to_string()]
        })
        .collect();
    priors.validate_names(&valid_names)?;
    let columns = color_columns(rows, hsv)?;

    let mut registry = Vec::with_capacity(12);
    let mut component_draws = Vec::with_capacity(6);
    for (c, component) in ColorComponent::ALL.iter().enumerate() {
        let post = Posterior::color_component(&columns[c], *component, priors)?;
        registry.extend(post.parameters().to_vec());
        let cfg = SamplerConfig {
            seed: color_component_seed(config.seed, c),
            ..config.clone()
        };
        component_draws.push(nuts_sample(&post, &cfg)?);
    }

    let chains = component_draws[0].n_chains();
    let warmup = component_draws[0].n_warmup();
    let samples = component_draws[0].n_samples();
    let total = warmup + samples;
    let mut values = vec![Vec::with_capacity(total * 12); chains];
    let mut divergent = vec![vec![false; total]; chains];
    let mut depth_hit = vec![vec![false; total]; chains];
    for k in 0..chains {
        for i in 0..total {
            for (c, d) in component_draws.iter().enumerate() {
                values[k].push(d.value(k, i, 0));
                values[k].push(d.value(k, i, 1));
                divergent[k][i] |= d.is_divergent(k, i);
                depth_hit[k][i] |= d.is_depth_saturated(k, i);
                let _ = c;
            }
        }
    }
    let names = registry.iter().map(|m| m.name.clone()).collect();
    let constraints = registry.iter().map(|m| m.constraint).collect();
    let draws = Draws::from_parts(
        names,
        constraints,
        warmup,
        samples,
        values,
        divergent,
        depth_hit,
    )?;
    Ok(Fit {
        kind: ModelKind::Color,
        data: DataSnapshot::Color {
            rows: rows.to_vec(),
            hsv,
        },
        priors: priors.clone(),
        config: config.clone(),
        draws,
        registry,
        derived: Vec::new(),
    })
}

/// Seed for one color component's sampler, spread across seed space so
/// component streams never collide.
fn color_component_seed(seed: u64, component: usize) -> u64 {
    seed.wrapping_add(((component + 1) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Extracts the six per-component data vectors (r, g, b, h, s, v) from
/// color rows, converting between color spaces; errors carry the 1-based
/// offending row.
fn color_columns(rows: &[[f64; 3]], hsv: bool) -> Result<[Vec<f64>; 6]> {
    let mut columns: [Vec<f64>; 6] = Default::default();
    for (i, row) in rows.iter().enumerate() {
        let (rgb, hsv_row) = if hsv {
            let (r, g, b) = hsv_to_rgb(row[0], row[1], row[2])
                .map_err(|e| Error::Data(format!("row {}: {e}", i + 1)))?;
            ([r, g, b], *row)
        } else {
            let (h, s, v) = rgb_to_hsv(row[0], row[1], row[2])
                .map_err(|e| Error::Data(format!("row {}: {e}", i + 1)))?;
            (*row, [h, s, v])
        };
        for c in 0..3 {
            columns[c].push(rgb[c]);
            columns[3 + c].push(hsv_row[c]);
        }
    }
    Ok(columns)
}

/// Rebuilds the sampled-parameter registry (with prior-implied constraint
/// tightening) for a data snapshot, re-running input validation.
fn registry_for(data: &DataSnapshot, priors: &PriorMap) -> Result<Vec<ParamMeta>> {
    match data {
        DataSnapshot::TTest { y } => Ok(Posterior::ttest(y, priors)?.parameters().to_vec()),
        DataSnapshot::ReactionTime { t, s } => {
            Ok(Posterior::reaction_time(t, s, priors)?.parameters().to_vec())
        }
        DataSnapshot::SuccessRate { r, s } => {
            Ok(Posterior::success_rate(r, s, priors)?.parameters().to_vec())
        }
        DataSnapshot::Linear { x, y, s } => {
            Ok(Posterior::linear(x, y, s, priors)?.parameters().to_vec())
        }
        DataSnapshot::Color { rows, hsv } => {
            let columns = color_columns(rows, *hsv)?;
            let mut registry = Vec::with_capacity(12);
            for (c, component) in ColorComponent::ALL.iter().enumerate() {
                let post = Posterior::color_component(&columns[c], *component, priors)?;
                registry.extend(post.parameters().to_vec());
            }
            Ok(registry)
        }
    }
}

/// Derived quantities recomputed from draws: the reaction-time model's
/// expected response time rt = mu_m + 1/mu_l and its per-subject analogues
/// rt_subjects[i] = mu[i] + 1/lambda[i].
fn compute_derived(
    kind: ModelKind,
    data: &DataSnapshot,
    draws: &Draws,
) -> Result<Vec<DerivedQuantity>> {
    if kind != ModelKind::ReactionTime {
        return Ok(Vec::new());
    }
    let n = match data {
        DataSnapshot::ReactionTime { s, .. } => *s.iter().max().unwrap_or(&0),
        _ => return Err(Error::Data("reaction-time fit with foreign data".to_string())),
    };
    let rate_mean = |loc: usize, rate: usize| -> Vec<Vec<f64>> {
        (0..draws.n_chains())
            .map(|c| {
                draws
                    .chain_draws(c, loc)
                    .iter()
                    .zip(draws.chain_draws(c, rate))
                    .map(|(m, l)| m + 1.0 / l)
                    .collect()
            })
            .collect()
    };
    let mut out = vec![DerivedQuantity {
        name: "rt".to_string(),
        level: Level::DerivedGroup,
        chains: rate_mean(draws.param_index("mu_m")?, draws.param_index("mu_l")?),
    }];
    for i in 1..=n {
        out.push(DerivedQuantity {
            name: format!("rt_subjects[{i}]"),
            level: Level::DerivedSubject(i),
            chains: rate_mean(
                draws.param_index(&format!("mu[{i}]"))?,
                draws.param_index(&format!("lambda[{i}]"))?,
            ),
        });
    }
    Ok(out)
}
