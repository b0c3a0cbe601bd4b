//! ROPE/HDI comparison of fitted models: pairwise probabilities that one
//! group's mean (or posterior-predictive datum) is smaller, greater, or
//! practically equal, plus the multi-group largest/smallest roles table.
//!
//! Draws from independent fits carry no joint structure, so pairing is
//! defined operationally: every series is shuffled with its own
//! seed-derived substream, truncated to the shortest length, and differenced
//! index-wise. The substream layout is `(series << 32) | fit position` for
//! shuffles and `2^48 + fit position` for predictive generation, so reruns
//! with the same seed reproduce every count bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use std::f64::consts::{PI, TAU};

use crate::diagnostics::{compact_stat, hdi};
use crate::dist::{
    sample_emg, sample_normal, sample_scaled_t, sample_truncnorm, sample_vonmises,
};
use crate::error::{Error, Result};
use crate::models::{Fit, ModelKind};

/// One comparable series of draws from a single fit.
#[derive(Debug, Clone)]
pub struct NamedDraws {
    pub name: String,
    /// Circular series are differenced on the signed shortest arc.
    pub circular: bool,
    pub draws: Vec<f64>,
}

/// Draws of the parameters that represent each model's mean, pooled across
/// chains: t-test `mu`, reaction-time derived `rt`, success-rate group `p`,
/// linear `Intercept`/`Slope`, color one series per component.
pub fn mean_draws(fit: &Fit) -> Vec<NamedDraws> {
    let series = |name: &str, source: &str, circular: bool| NamedDraws {
        name: name.to_string(),
        circular,
        draws: fit.pooled_draws(source).expect("registered name"),
    };
    match fit.kind() {
        ModelKind::TTest => vec![series("mu", "mu", false)],
        ModelKind::ReactionTime => vec![series("rt", "rt", false)],
        ModelKind::SuccessRate => vec![series("p", "p", false)],
        ModelKind::Linear => vec![
            series("Intercept", "mu_a", false),
            series("Slope", "mu_b", false),
        ],
        ModelKind::Color => vec![
            series("r", "mu_r", false),
            series("g", "mu_g", false),
            series("b", "mu_b", false),
            series("h", "mu_h", true),
            series("s", "mu_s", false),
            series("v", "mu_v", false),
        ],
    }
}

fn shuffle_stream(series: usize, position: usize) -> u64 {
    ((series as u64) << 32) | position as u64
}

const PREDICTIVE_STREAM: u64 = 1 << 48;

/// RNG positioned on the predictive substream of the fit at `fit_position`,
/// shared with the distribution plots so both draw identical data.
pub(crate) fn predictive_rng(seed: u64, fit_position: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PREDICTIVE_STREAM + fit_position as u64);
    rng
}

/// Fisher–Yates shuffle of a copy of `xs` on the given substream.
fn shuffled(xs: &[f64], seed: u64, stream: u64) -> Vec<f64> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut v = xs.to_vec();
    v.shuffle(&mut rng);
    v
}

/// Signed shortest arc in (−π, π].
fn wrap_difference(d: f64) -> f64 {
    let w = d - TAU * (d / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Independently shuffles both series with substreams 0 and 1 of `seed`,
/// truncates to the shorter length, and subtracts index-wise.
pub fn pair_difference(a: &[f64], b: &[f64], seed: u64) -> Vec<f64> {
    let sa = shuffled(a, seed, shuffle_stream(0, 0));
    let sb = shuffled(b, seed, shuffle_stream(0, 1));
    sa.iter().zip(&sb).map(|(x, y)| x - y).collect()
}

/// Counted comparison of one pair of fits on their difference draws.
#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub p_smaller: f64,
    pub se_smaller: f64,
    pub p_greater: f64,
    pub se_greater: f64,
    pub p_equal: f64,
    pub se_equal: f64,
    pub hdi_low: f64,
    pub hdi_high: f64,
    pub rope: Option<f64>,
    pub n_pairs: usize,
    pub difference_draws: Vec<f64>,
}

impl ComparisonResult {
    /// Counts the rope partition over difference draws; without a rope the
    /// band degenerates to the point 0, so `p_equal` holds exact ties only.
    pub fn from_differences(difference_draws: Vec<f64>, rope: Option<f64>) -> Result<Self> {
        if difference_draws.is_empty() {
            return Err(Error::Comparison("no paired draws to compare".to_string()));
        }
        let band = rope.unwrap_or(0.0);
        let (mut smaller, mut greater) = (0usize, 0usize);
        for &d in &difference_draws {
            if d < -band {
                smaller += 1;
            } else if d > band {
                greater += 1;
            }
        }
        let n = difference_draws.len();
        let equal = n - smaller - greater;
        let prob = |count: usize| {
            let p = count as f64 / n as f64;
            (p, (p * (1.0 - p) / n as f64).sqrt())
        };
        let (p_smaller, se_smaller) = prob(smaller);
        let (p_greater, se_greater) = prob(greater);
        let (p_equal, se_equal) = prob(equal);
        let (hdi_low, hdi_high) = hdi(&difference_draws, 0.95)?;
        Ok(ComparisonResult {
            p_smaller,
            se_smaller,
            p_greater,
            se_greater,
            p_equal,
            se_equal,
            hdi_low,
            hdi_high,
            rope,
            n_pairs: n,
            difference_draws,
        })
    }
}

/// Per-group probabilities of holding the largest/smallest mean, plus the
/// shared rope-tie mass per role.
#[derive(Debug, Clone)]
pub struct RolesTable {
    pub largest: Vec<f64>,
    pub smallest: Vec<f64>,
    /// Probability that the group sits inside a rope tie for either extreme.
    pub equal: Vec<f64>,
    /// Fraction of draws whose largest (resp. smallest) role was undecided:
    /// together with the decided column the role accounts for every draw
    /// exactly once.
    pub tie_largest: f64,
    pub tie_smallest: f64,
    pub n_draws: usize,
}

/// Per aligned draw the extreme group claims its role outright when it beats
/// the runner-up by more than `rope`; otherwise the draw is a tie and every
/// group within `rope` of the extreme scores "equal".
pub fn roles_probabilities(groups: &[Vec<f64>], rope: f64) -> RolesTable {
    let g = groups.len();
    let n = groups.iter().map(Vec::len).min().unwrap_or(0);
    let mut largest = vec![0usize; g];
    let mut smallest = vec![0usize; g];
    let mut equal = vec![0usize; g];
    let (mut tie_largest, mut tie_smallest) = (0usize, 0usize);
    let mut in_tie = vec![false; g];
    for k in 0..n {
        in_tie.iter_mut().for_each(|t| *t = false);
        let values: Vec<f64> = groups.iter().map(|d| d[k]).collect();
        let arg_max = (0..g)
            .max_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("nonempty groups");
        let max = values[arg_max];
        let runner_up = (0..g)
            .filter(|&i| i != arg_max)
            .map(|i| values[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if max - runner_up > rope {
            largest[arg_max] += 1;
        } else {
            tie_largest += 1;
            for i in 0..g {
                if values[i] >= max - rope {
                    in_tie[i] = true;
                }
            }
        }
        let arg_min = (0..g)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("nonempty groups");
        let min = values[arg_min];
        let runner_up = (0..g)
            .filter(|&i| i != arg_min)
            .map(|i| values[i])
            .fold(f64::INFINITY, f64::min);
        if runner_up - min > rope {
            smallest[arg_min] += 1;
        } else {
            tie_smallest += 1;
            for i in 0..g {
                if values[i] <= min + rope {
                    in_tie[i] = true;
                }
            }
        }
        for i in 0..g {
            if in_tie[i] {
                equal[i] += 1;
            }
        }
    }
    let norm = |count: usize| count as f64 / n as f64;
    RolesTable {
        largest: largest.into_iter().map(norm).collect(),
        smallest: smallest.into_iter().map(norm).collect(),
        equal: equal.into_iter().map(norm).collect(),
        tie_largest: norm(tie_largest),
        tie_smallest: norm(tie_smallest),
        n_draws: n,
    }
}

/// One ordered pair of fits (0-based positions into the compared list).
#[derive(Debug, Clone)]
pub struct PairComparison {
    pub a: usize,
    pub b: usize,
    pub result: ComparisonResult,
}

/// All pairwise results for one named series, plus the roles table when more
/// than two fits are compared.
#[derive(Debug, Clone)]
pub struct SeriesComparison {
    pub name: String,
    pub circular: bool,
    pub pairs: Vec<PairComparison>,
    pub roles: Option<RolesTable>,
}

/// Full comparison across fits: one entry per series (single for most model
/// kinds, Intercept/Slope for linear means, six components for color).
#[derive(Debug, Clone)]
pub struct Comparison {
    pub n_fits: usize,
    pub rope: Option<f64>,
    pub series: Vec<SeriesComparison>,
}

fn validate_inputs(fits: &[&Fit], rope: Option<f64>) -> Result<()> {
    if fits.len() < 2 {
        return Err(Error::Comparison(format!(
            "need at least 2 fits, got {}",
            fits.len()
        )));
    }
    let kind = fits[0].kind();
    if let Some(other) = fits.iter().find(|f| f.kind() != kind) {
        return Err(Error::Comparison(format!(
            "cannot compare a {} fit with a {} fit",
            kind,
            other.kind()
        )));
    }
    if let Some(r) = rope {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Argument(format!(
                "rope must be a nonnegative finite value, got {r}"
            )));
        }
    }
    Ok(())
}

fn build_comparison(
    per_fit: Vec<Vec<NamedDraws>>,
    rope: Option<f64>,
    seed: u64,
) -> Result<Comparison> {
    let n_fits = per_fit.len();
    let n_series = per_fit[0].len();
    let mut series_out = Vec::with_capacity(n_series);
    for s in 0..n_series {
        let name = per_fit[0][s].name.clone();
        let circular = per_fit[0][s].circular;
        let mut aligned: Vec<Vec<f64>> = per_fit
            .iter()
            .enumerate()
            .map(|(i, series)| shuffled(&series[s].draws, seed, shuffle_stream(s, i)))
            .collect();
        let n = aligned.iter().map(Vec::len).min().unwrap_or(0);
        aligned.iter_mut().for_each(|d| d.truncate(n));
        let mut pairs = Vec::new();
        for i in 0..n_fits {
            for j in i + 1..n_fits {
                let diffs: Vec<f64> = (0..n)
                    .map(|k| {
                        let d = aligned[i][k] - aligned[j][k];
                        if circular {
                            wrap_difference(d)
                        } else {
                            d
                        }
                    })
                    .collect();
                pairs.push(PairComparison {
                    a: i,
                    b: j,
                    result: ComparisonResult::from_differences(diffs, rope)?,
                });
            }
        }
        let roles =
            (n_fits > 2).then(|| roles_probabilities(&aligned, rope.unwrap_or(0.0)));
        series_out.push(SeriesComparison {
            name,
            circular,
            pairs,
            roles,
        });
    }
    Ok(Comparison {
        n_fits,
        rope,
        series: series_out,
    })
}

/// Compares the mean parameters of two or more fits of the same kind.
pub fn compare_means(fits: &[&Fit], rope: Option<f64>, seed: u64) -> Result<Comparison> {
    validate_inputs(fits, rope)?;
    let per_fit: Vec<Vec<NamedDraws>> = fits.iter().map(|f| mean_draws(f)).collect();
    build_comparison(per_fit, rope, seed)
}

/// Compares posterior-predictive data: one simulated datum per posterior
/// draw, then the same counting machinery as [`compare_means`]. Linear fits
/// need the predictor value `x` to simulate at.
pub fn compare_distributions(
    fits: &[&Fit],
    rope: Option<f64>,
    seed: u64,
    x: Option<f64>,
) -> Result<Comparison> {
    validate_inputs(fits, rope)?;
    if fits[0].kind() == ModelKind::Linear && x.is_none() {
        return Err(Error::Argument(
            "comparing linear predictive distributions requires an x value".to_string(),
        ));
    }
    let mut per_fit = Vec::with_capacity(fits.len());
    for (i, fit) in fits.iter().enumerate() {
        let mut rng = predictive_rng(seed, i);
        per_fit.push(predictive_draws(fit, &mut rng, x)?);
    }
    build_comparison(per_fit, rope, seed)
}

/// One posterior-predictive datum per pooled posterior draw; new-subject
/// parameters are drawn from the group-level distributions first where the
/// model is hierarchical.
pub(crate) fn predictive_draws(
    fit: &Fit,
    rng: &mut ChaCha8Rng,
    x: Option<f64>,
) -> Result<Vec<NamedDraws>> {
    // Floor for scale/rate parameters a degenerate posterior can underflow
    // to exactly zero.
    let floor = |v: f64| v.max(1e-12);
    let pooled = |name: &str| fit.pooled_draws(name);
    let single = |name: &str, draws: Vec<f64>| {
        vec![NamedDraws {
            name: name.to_string(),
            circular: false,
            draws,
        }]
    };
    match fit.kind() {
        ModelKind::TTest => {
            let (mu, sigma, nu) = (pooled("mu")?, pooled("sigma")?, pooled("nu")?);
            let draws = (0..mu.len())
                .map(|k| sample_scaled_t(rng, nu[k], mu[k], sigma[k]))
                .collect();
            Ok(single("y", draws))
        }
        ModelKind::ReactionTime => {
            let (mu_m, mu_l, mu_s) = (pooled("mu_m")?, pooled("mu_l")?, pooled("mu_s")?);
            let (sigma_m, sigma_l, sigma_s) =
                (pooled("sigma_m")?, pooled("sigma_l")?, pooled("sigma_s")?);
            let draws = (0..mu_m.len())
                .map(|k| {
                    let mu_new = sample_normal(rng, mu_m[k], sigma_m[k]);
                    let lambda_new =
                        floor(sample_truncnorm(rng, mu_l[k], sigma_l[k], 0.0, f64::INFINITY));
                    let sigma_new =
                        floor(sample_truncnorm(rng, mu_s[k], sigma_s[k], 0.0, f64::INFINITY));
                    sample_emg(rng, mu_new, sigma_new, lambda_new)
                })
                .collect();
            Ok(single("rt", draws))
        }
        ModelKind::SuccessRate => {
            let (p, tau) = (pooled("p")?, pooled("tau")?);
            let draws = (0..p.len())
                .map(|k| {
                    let p_k = p[k].clamp(1e-12, 1.0 - 1e-12);
                    let tau_k = tau[k].clamp(1e-12, 1e12);
                    let beta = rand_distr::Beta::new(p_k * tau_k, (1.0 - p_k) * tau_k)
                        .expect("clamped beta parameters");
                    let p_new: f64 = beta.sample(rng);
                    f64::from(rng.gen::<f64>() < p_new)
                })
                .collect();
            Ok(single("y", draws))
        }
        ModelKind::Linear => {
            let x = x.expect("checked by the caller");
            let (mu_a, mu_b, mu_s) = (pooled("mu_a")?, pooled("mu_b")?, pooled("mu_s")?);
            let (sigma_a, sigma_b, sigma_s) =
                (pooled("sigma_a")?, pooled("sigma_b")?, pooled("sigma_s")?);
            let draws = (0..mu_a.len())
                .map(|k| {
                    let alpha_new = sample_normal(rng, mu_a[k], sigma_a[k]);
                    let beta_new = sample_normal(rng, mu_b[k], sigma_b[k]);
                    let sigma_new =
                        floor(sample_truncnorm(rng, mu_s[k], sigma_s[k], 0.0, f64::INFINITY));
                    sample_normal(rng, alpha_new + beta_new * x, sigma_new)
                })
                .collect();
            Ok(single("y", draws))
        }
        ModelKind::Color => {
            fn bounded(
                rng: &mut ChaCha8Rng,
                mu: &[f64],
                sigma: &[f64],
                hi: f64,
            ) -> Vec<f64> {
                (0..mu.len())
                    .map(|k| sample_truncnorm(rng, mu[k], sigma[k], 0.0, hi))
                    .collect()
            }
            let r = bounded(rng, &pooled("mu_r")?, &pooled("sigma_r")?, 255.0);
            let g = bounded(rng, &pooled("mu_g")?, &pooled("sigma_g")?, 255.0);
            let b = bounded(rng, &pooled("mu_b")?, &pooled("sigma_b")?, 255.0);
            let (mu_h, kappa_h) = (pooled("mu_h")?, pooled("kappa_h")?);
            let h: Vec<f64> = (0..mu_h.len())
                .map(|k| sample_vonmises(rng, mu_h[k], kappa_h[k].clamp(0.0, 1e8)))
                .collect();
            let s = bounded(rng, &pooled("mu_s")?, &pooled("sigma_s")?, 1.0);
            let v = bounded(rng, &pooled("mu_v")?, &pooled("sigma_v")?, 1.0);
            let series = |name: &str, circular: bool, draws: Vec<f64>| NamedDraws {
                name: name.to_string(),
                circular,
                draws,
            };
            Ok(vec![
                series("r", false, r),
                series("g", false, g),
                series("b", false, b),
                series("h", true, h),
                series("s", false, s),
                series("v", false, v),
            ])
        }
    }
}

fn render_pair_body(pair: &PairComparison, rope_present: bool) -> String {
    let (a, b) = (pair.a + 1, pair.b + 1);
    let r = &pair.result;
    let mut out = String::from("Probabilities:\n");
    out.push_str(&format!(
        "  - Group {a} < Group {b}: {:.2} +/- {:.5}\n",
        r.p_smaller, r.se_smaller
    ));
    out.push_str(&format!(
        "  - Group {a} > Group {b}: {:.2} +/- {:.5}\n",
        r.p_greater, r.se_greater
    ));
    if rope_present {
        out.push_str(&format!(
            "  - Equal: {:.2} +/- {:.5}\n",
            r.p_equal, r.se_equal
        ));
    }
    out.push_str("95% HDI:\n");
    out.push_str(&format!(
        "  - Group {a} - Group {b}: [{}, {}]",
        compact_stat(r.hdi_low, 2),
        compact_stat(r.hdi_high, 2)
    ));
    out
}

fn render_pair(pair: &PairComparison, rope_present: bool) -> String {
    format!(
        "---------- Group {} vs Group {} ----------\n{}",
        pair.a + 1,
        pair.b + 1,
        render_pair_body(pair, rope_present)
    )
}

fn render_roles(roles: &RolesTable) -> String {
    let mut out = String::from(
        "----------------------------------------\n\
         Probabilities that a certain group is\n\
         smallest/largest or equal to all others:\n\n",
    );
    let headers = ["largest", "smallest", "equal"];
    let cell_width = headers.iter().map(|h| h.len()).max().unwrap().max(6);
    let label_width = roles.largest.len().to_string().len();
    out.push_str(&" ".repeat(label_width));
    for h in headers {
        out.push_str(&format!(" {h:>cell_width$}"));
    }
    for g in 0..roles.largest.len() {
        out.push('\n');
        out.push_str(&format!("{:<label_width$}", g + 1));
        for value in [roles.largest[g], roles.smallest[g], roles.equal[g]] {
            out.push_str(&format!(" {:>cell_width$}", format!("{value:.4}")));
        }
    }
    out
}

impl Comparison {
    /// Text report: one block per pair (headed by the series name instead
    /// when a multi-series model is compared across exactly two fits), the
    /// roles table after the pairs of each series.
    pub fn render(&self) -> String {
        let multi_series = self.series.len() > 1;
        let rope_present = self.rope.is_some();
        let mut blocks: Vec<String> = Vec::new();
        for series in &self.series {
            if multi_series && self.n_fits == 2 {
                blocks.push(format!(
                    "---------- {} ----------\n{}",
                    series.name,
                    render_pair_body(&series.pairs[0], rope_present)
                ));
                continue;
            }
            if multi_series {
                blocks.push(format!("---------- {} ----------", series.name));
            }
            for pair in &series.pairs {
                blocks.push(render_pair(pair, rope_present));
            }
            if let Some(roles) = &series.roles {
                blocks.push(render_roles(roles));
            }
        }
        let mut out = blocks.join("\n\n");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DataSnapshot, Fit};
    use crate::prior::PriorMap;
    use crate::sampler::{Constraint, Draws, SamplerConfig};
    use approx::assert_relative_eq;

    fn config_for(chains: usize, samples: usize) -> SamplerConfig {
        SamplerConfig {
            iter: samples,
            warmup: 0,
            chains,
            seed: 1,
            ..SamplerConfig::default()
        }
    }

    /// Builds a fit whose post-warmup draws are exactly the given per-chain
    /// columns (one inner vector per parameter, shared across chains).
    fn synthetic_fit(
        data: DataSnapshot,
        names: &[&str],
        constraints: &[Constraint],
        chains: &[Vec<Vec<f64>>],
    ) -> Fit {
        let samples = chains[0][0].len();
        let dim = names.len();
        let values: Vec<Vec<f64>> = chains
            .iter()
            .map(|cols| {
                let mut rows = Vec::with_capacity(samples * dim);
                for k in 0..samples {
                    for col in cols {
                        rows.push(col[k]);
                    }
                }
                rows
            })
            .collect();
        let divergent = vec![vec![false; samples]; chains.len()];
        let depth = vec![vec![false; samples]; chains.len()];
        let draws = Draws::from_parts(
            names.iter().map(|n| n.to_string()).collect(),
            constraints.to_vec(),
            0,
            samples,
            values,
            divergent,
            depth,
        )
        .unwrap();
        Fit::rebuild(data, PriorMap::new(), config_for(chains.len(), samples), draws).unwrap()
    }

    fn ttest_fit(mu_chains: &[Vec<f64>]) -> Fit {
        let cols: Vec<Vec<Vec<f64>>> = mu_chains
            .iter()
            .map(|mu| {
                let n = mu.len();
                vec![mu.clone(), vec![1.0; n], vec![30.0; n]]
            })
            .collect();
        synthetic_fit(
            DataSnapshot::TTest { y: vec![0.0, 1.0] },
            &["mu", "sigma", "nu"],
            &[
                Constraint::Unbounded,
                Constraint::Positive,
                Constraint::LowerBounded(1.0),
            ],
            &cols,
        )
    }

    fn reaction_time_fit(mu_m: f64, mu_l: f64, spread: f64) -> Fit {
        let n = 400;
        let jitter: Vec<f64> = (0..n).map(|k| (k as f64).sin() * 1e-3).collect();
        let constant = |v: f64| vec![v; n];
        let wiggled = |v: f64| jitter.iter().map(|j| v + j).collect::<Vec<_>>();
        let cols = vec![vec![
            wiggled(mu_m),          // mu[1]
            constant(0.05),         // sigma[1]
            constant(mu_l),         // lambda[1]
            wiggled(mu_m),          // mu_m
            constant(mu_l),         // mu_l
            constant(0.05),         // mu_s
            constant(spread),       // sigma_m
            constant(spread),       // sigma_l
            constant(spread / 10.0), // sigma_s
        ]];
        synthetic_fit(
            DataSnapshot::ReactionTime {
                t: vec![0.3, 0.4],
                s: vec![1, 1],
            },
            &[
                "mu[1]", "sigma[1]", "lambda[1]", "mu_m", "mu_l", "mu_s", "sigma_m", "sigma_l",
                "sigma_s",
            ],
            &[
                Constraint::Unbounded,
                Constraint::Positive,
                Constraint::Positive,
                Constraint::Unbounded,
                Constraint::Unbounded,
                Constraint::Unbounded,
                Constraint::Positive,
                Constraint::Positive,
                Constraint::Positive,
            ],
            &cols,
        )
    }

    fn success_rate_fit(p: f64, tau: f64, n: usize) -> Fit {
        let cols = vec![vec![vec![p; n], vec![p; n], vec![tau; n]]];
        synthetic_fit(
            DataSnapshot::SuccessRate {
                r: vec![0.0, 1.0],
                s: vec![1, 1],
            },
            &["p[1]", "p", "tau"],
            &[
                Constraint::Interval(0.0, 1.0),
                Constraint::Interval(0.0, 1.0),
                Constraint::Positive,
            ],
            &cols,
        )
    }

    fn linear_fit(alpha: f64, beta: f64) -> Fit {
        let n = 200;
        let constant = |v: f64| vec![v; n];
        let cols = vec![vec![
            constant(alpha),
            constant(beta),
            constant(1.0),
            constant(alpha),
            constant(beta),
            constant(1.0),
            constant(0.1),
            constant(0.1),
            constant(0.01),
        ]];
        synthetic_fit(
            DataSnapshot::Linear {
                x: vec![1.0, 2.0],
                y: vec![1.0, 2.0],
                s: vec![1, 1],
            },
            &[
                "alpha[1]", "beta[1]", "sigma[1]", "mu_a", "mu_b", "mu_s", "sigma_a", "sigma_b",
                "sigma_s",
            ],
            &[
                Constraint::Unbounded,
                Constraint::Unbounded,
                Constraint::Positive,
                Constraint::Unbounded,
                Constraint::Unbounded,
                Constraint::Unbounded,
                Constraint::Positive,
                Constraint::Positive,
                Constraint::Positive,
            ],
            &cols,
        )
    }

    fn color_fit(hue: f64) -> Fit {
        let n = 300;
        let constant = |v: f64| vec![v; n];
        let hue_col: Vec<f64> = (0..n)
            .map(|k| (hue + (k as f64).sin() * 0.01).rem_euclid(TAU))
            .collect();
        let cols = vec![vec![
            constant(120.0),
            constant(10.0),
            constant(80.0),
            constant(10.0),
            constant(40.0),
            constant(10.0),
            hue_col,
            constant(500.0),
            constant(0.5),
            constant(0.1),
            constant(0.5),
            constant(0.1),
        ]];
        synthetic_fit(
            DataSnapshot::Color {
                rows: vec![[100.0, 80.0, 60.0], [110.0, 85.0, 70.0]],
                hsv: false,
            },
            &[
                "mu_r", "sigma_r", "mu_g", "sigma_g", "mu_b", "sigma_b", "mu_h", "kappa_h",
                "mu_s", "sigma_s", "mu_v", "sigma_v",
            ],
            &[
                Constraint::Interval(0.0, 255.0),
                Constraint::Interval(0.0, 255.0),
                Constraint::Interval(0.0, 255.0),
                Constraint::Interval(0.0, 255.0),
                Constraint::Interval(0.0, 255.0),
                Constraint::Interval(0.0, 255.0),
                Constraint::Circular,
                Constraint::Positive,
                Constraint::Interval(0.0, 1.0),
                Constraint::Interval(0.0, 1.0),
                Constraint::Interval(0.0, 1.0),
                Constraint::Interval(0.0, 1.0),
            ],
            &cols,
        )
    }

    #[test]
    fn pairing_matches_an_independent_shuffle() {
        let a = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0, 5.5, 3.5];
        let b = [2.7, 1.8, 2.8, 1.8, 2.9, 4.5, 0.5];
        let got = pair_difference(&a, &b, 99);
        // Independent route: hand-rolled Durstenfeld with the documented
        // 32-bit index sampling, on the same substreams.
        let oracle = |xs: &[f64], stream: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            rng.set_stream(stream);
            let mut v = xs.to_vec();
            for i in (1..v.len()).rev() {
                let j = rng.gen_range(0..(i + 1) as u32) as usize;
                v.swap(i, j);
            }
            v
        };
        let want: Vec<f64> = oracle(&a, 0)
            .iter()
            .zip(&oracle(&b, 1))
            .map(|(x, y)| x - y)
            .collect();
        assert_eq!(got.len(), 7);
        assert_eq!(got, want);
    }

    #[test]
    fn pairing_of_constants_and_of_a_vector_with_itself() {
        let ones = vec![1.0; 10];
        let zeros = vec![0.0; 7];
        let d = pair_difference(&ones, &zeros, 5);
        assert_eq!(d, vec![1.0; 7]);
        let xs: Vec<f64> = (0..50).map(|k| (k as f64 * 0.7).sin()).collect();
        let d = pair_difference(&xs, &xs, 11);
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        assert!(mean.abs() < 1e-12, "permutations of one vector share a mean");
    }

    #[test]
    fn counting_partitions_every_draw_exactly_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d: Vec<f64> = (0..977).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        for rope in [None, Some(0.0), Some(0.2), Some(5.0)] {
            let r = ComparisonResult::from_differences(d.clone(), rope).unwrap();
            let total = r.p_smaller + r.p_greater + r.p_equal;
            assert!((total - 1.0).abs() < 1e-12);
            assert_relative_eq!(
                r.se_greater,
                (r.p_greater * (1.0 - r.p_greater) / 977.0).sqrt(),
                epsilon = 1e-15
            );
            // Same pairing, reversed direction: probabilities swap exactly.
            let neg: Vec<f64> = d.iter().map(|v| -v).collect();
            let rev = ComparisonResult::from_differences(neg, rope).unwrap();
            assert_eq!(r.p_smaller, rev.p_greater);
            assert_eq!(r.p_greater, rev.p_smaller);
            assert_eq!(r.p_equal, rev.p_equal);
        }
    }

    #[test]
    fn equal_mass_grows_with_the_rope_and_counts_exact_ties_at_zero() {
        let d = vec![-0.3, -0.1, 0.0, 0.0, 0.05, 0.2, 0.7, -0.7];
        let mut last = -1.0;
        for rope in [0.0, 0.05, 0.1, 0.3, 0.8] {
            let r = ComparisonResult::from_differences(d.clone(), Some(rope)).unwrap();
            assert!(r.p_equal >= last);
            last = r.p_equal;
        }
        let at_zero = ComparisonResult::from_differences(d.clone(), Some(0.0)).unwrap();
        assert_eq!(at_zero.p_equal, 2.0 / 8.0);
        let absent = ComparisonResult::from_differences(d, None).unwrap();
        assert_eq!(absent.p_equal, at_zero.p_equal);
    }

    #[test]
    fn constant_fits_compare_exactly() {
        let a = ttest_fit(&[vec![1.0; 100]]);
        let b = ttest_fit(&[vec![0.0; 100]]);
        let cmp = compare_means(&[&a, &b], Some(0.5), 3).unwrap();
        let r = &cmp.series[0].pairs[0].result;
        assert_eq!(r.p_greater, 1.0);
        assert_eq!(r.p_smaller, 0.0);
        assert_eq!((r.hdi_low, r.hdi_high), (1.0, 1.0));
        // Identical tight posteriors: every paired difference inside the rope.
        let narrow: Vec<f64> = (0..100).map(|k| 0.02 + 0.0002 * k as f64).collect();
        let c = ttest_fit(&[narrow.clone()]);
        let d = ttest_fit(&[narrow]);
        let cmp = compare_means(&[&c, &d], Some(0.1), 3).unwrap();
        assert_eq!(cmp.series[0].pairs[0].result.p_equal, 1.0);
    }

    #[test]
    fn roles_match_a_brute_force_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let groups: Vec<Vec<f64>> = (0..4)
            .map(|g| {
                (0..60)
                    .map(|_| rng.gen::<f64>() * 2.0 + 0.3 * g as f64)
                    .collect()
            })
            .collect();
        let rope = 0.3;
        let table = roles_probabilities(&groups, rope);
        // Independent per-draw recount.
        let mut largest = [0.0; 4];
        let mut smallest = [0.0; 4];
        let mut equal = [0.0; 4];
        let (mut tie_l, mut tie_s) = (0.0, 0.0);
        for k in 0..60 {
            let v: Vec<f64> = groups.iter().map(|g| g[k]).collect();
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let near_max: Vec<usize> =
                (0..4).filter(|&i| v[i] >= max - rope).collect();
            let near_min: Vec<usize> =
                (0..4).filter(|&i| v[i] <= min + rope).collect();
            let mut tied = [false; 4];
            if near_max.len() == 1 {
                largest[near_max[0]] += 1.0;
            } else {
                tie_l += 1.0;
                near_max.iter().for_each(|&i| tied[i] = true);
            }
            if near_min.len() == 1 {
                smallest[near_min[0]] += 1.0;
            } else {
                tie_s += 1.0;
                near_min.iter().for_each(|&i| tied[i] = true);
            }
            for i in 0..4 {
                equal[i] += f64::from(tied[i]);
            }
        }
        for g in 0..4 {
            assert_eq!(table.largest[g], largest[g] / 60.0);
            assert_eq!(table.smallest[g], smallest[g] / 60.0);
            assert_eq!(table.equal[g], equal[g] / 60.0);
        }
        assert_eq!(table.tie_largest, tie_l / 60.0);
        assert_eq!(table.tie_smallest, tie_s / 60.0);
        let sum_largest: f64 = table.largest.iter().sum::<f64>() + table.tie_largest;
        let sum_smallest: f64 = table.smallest.iter().sum::<f64>() + table.tie_smallest;
        assert!((sum_largest - 1.0).abs() < 1e-12);
        assert!((sum_smallest - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roles_handle_clear_orders_and_rope_ties() {
        let groups = vec![vec![1.0; 10], vec![2.0; 10], vec![3.0; 10]];
        let t = roles_probabilities(&groups, 0.0);
        assert_eq!(t.largest, vec![0.0, 0.0, 1.0]);
        assert_eq!(t.smallest, vec![1.0, 0.0, 0.0]);
        assert_eq!(t.equal, vec![0.0; 3]);

        let groups = vec![vec![1.0; 10], vec![1.005; 10], vec![2.0; 10]];
        let t = roles_probabilities(&groups, 0.01);
        assert_eq!(t.smallest, vec![0.0; 3]);
        assert_eq!(t.equal, vec![1.0, 1.0, 0.0]);
        assert_eq!(t.largest, vec![0.0, 0.0, 1.0]);
        assert_eq!(t.tie_smallest, 1.0);
        assert_eq!(t.tie_largest, 0.0);
    }

    #[test]
    fn comparing_needs_two_fits_of_one_kind_and_a_sane_rope() {
        let a = ttest_fit(&[vec![1.0; 50]]);
        let err = compare_means(&[&a], None, 1).unwrap_err();
        assert!(matches!(err, Error::Comparison(_)), "{err}");
        let sr = success_rate_fit(0.7, 50.0, 50);
        let err = compare_means(&[&a, &sr], None, 1).unwrap_err();
        assert!(err.to_string().contains("ttest"), "{err}");
        let b = ttest_fit(&[vec![0.0; 50]]);
        for bad_rope in [-0.1, f64::NAN, f64::INFINITY] {
            let err = compare_means(&[&a, &b], Some(bad_rope), 1).unwrap_err();
            assert!(matches!(err, Error::Argument(_)), "{err}");
        }
    }

    #[test]
    fn mean_series_per_model_kind() {
        let tt = mean_draws(&ttest_fit(&[vec![5.0; 20]]));
        assert_eq!(tt.len(), 1);
        assert_eq!(tt[0].name, "mu");
        let rt = mean_draws(&reaction_time_fit(0.5, 8.0, 0.01));
        assert_eq!(rt.len(), 1);
        assert_eq!(rt[0].name, "rt");
        assert_relative_eq!(rt[0].draws[0], 0.5 + 1.0 / 8.0, epsilon = 2e-3);
        let sr = mean_draws(&success_rate_fit(0.7, 50.0, 20));
        assert_eq!(sr[0].name, "p");
        let lin = mean_draws(&linear_fit(8.0, -0.11));
        let names: Vec<&str> = lin.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["Intercept", "Slope"]);
        let col = mean_draws(&color_fit(0.1));
        let names: Vec<&str> = col.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["r", "g", "b", "h", "s", "v"]);
        assert!(col[3].circular && !col[0].circular);
    }

    #[test]
    fn linear_means_render_as_named_blocks() {
        let a = linear_fit(8.0, -0.11);
        let b = linear_fit(5.75, 0.12);
        let cmp = compare_means(&[&a, &b], None, 7).unwrap();
        let text = cmp.render();
        assert!(text.starts_with("---------- Intercept ----------\nProbabilities:\n"));
        assert!(text.contains("---------- Slope ----------"));
        assert!(!text.contains("Group 1 vs Group 2"), "{text}");
        assert!(text.contains("  - Group 1 - Group 2: ["));
        assert!(!text.contains("Equal:"), "no rope, no equal line");
        let intercept = &cmp.series[0].pairs[0].result;
        assert_eq!(intercept.p_greater, 1.0);
        assert_eq!((intercept.hdi_low, intercept.hdi_high), (2.25, 2.25));
    }

    #[test]
    fn render_matches_the_published_block_shape() {
        let result = ComparisonResult {
            p_smaller: 0.98,
            se_smaller: 0.00409,
            p_greater: 0.01,
            se_greater: 0.00304,
            p_equal: 0.01,
            se_equal: 0.00239,
            hdi_low: -0.17,
            hdi_high: -0.01,
            rope: Some(0.01),
            n_pairs: 4000,
            difference_draws: Vec::new(),
        };
        let cmp = Comparison {
            n_fits: 2,
            rope: Some(0.01),
            series: vec![SeriesComparison {
                name: "rt".to_string(),
                circular: false,
                pairs: vec![PairComparison { a: 0, b: 1, result }],
                roles: None,
            }],
        };
        assert_eq!(
            cmp.render(),
            "---------- Group 1 vs Group 2 ----------\n\
             Probabilities:\n  \
               - Group 1 < Group 2: 0.98 +/- 0.00409\n  \
               - Group 1 > Group 2: 0.01 +/- 0.00304\n  \
               - Equal: 0.01 +/- 0.00239\n\
             95% HDI:\n  \
               - Group 1 - Group 2: [-0.17, -0.01]\n"
        );
    }

    #[test]
    fn four_fits_give_six_ordered_pairs_and_a_roles_table() {
        let fits: Vec<Fit> = [1.0, 2.0, 3.0, 10.0]
            .iter()
            .map(|&m| ttest_fit(&[vec![m; 40]]))
            .collect();
        let refs: Vec<&Fit> = fits.iter().collect();
        let cmp = compare_means(&refs, None, 2).unwrap();
        let series = &cmp.series[0];
        let order: Vec<(usize, usize)> = series.pairs.iter().map(|p| (p.a, p.b)).collect();
        assert_eq!(order, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let roles = series.roles.as_ref().unwrap();
        assert_eq!(roles.largest, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(roles.smallest, vec![1.0, 0.0, 0.0, 0.0]);
        let text = cmp.render();
        assert!(text.contains("---------- Group 2 vs Group 4 ----------"));
        // Every HDI line names its own pair.
        assert!(text.contains("  - Group 2 - Group 4: ["));
        assert!(text.contains("  - Group 3 - Group 4: ["));
        assert!(text.ends_with(
            "----------------------------------------\n\
             Probabilities that a certain group is\n\
             smallest/largest or equal to all others:\n\n   \
             largest smallest    equal\n\
             1   0.0000   1.0000   0.0000\n\
             2   0.0000   0.0000   0.0000\n\
             3   0.0000   0.0000   0.0000\n\
             4   1.0000   0.0000   0.0000\n"
        ));
    }

    #[test]
    fn hue_differences_take_the_shortest_arc() {
        let a = color_fit(0.1);
        let b = color_fit(TAU - 0.1);
        let cmp = compare_means(&[&a, &b], Some(0.02), 5).unwrap();
        let hue = cmp
            .series
            .iter()
            .find(|s| s.name == "h")
            .expect("hue series");
        let r = &hue.pairs[0].result;
        // Across the wrap the arc is +0.2, not −(2π − 0.2).
        assert_eq!(r.p_greater, 1.0);
        assert!((r.hdi_low - 0.16).abs() < 0.05 && (r.hdi_high - 0.24).abs() < 0.05);
    }

    #[test]
    fn predictive_comparison_of_a_fit_with_itself_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mu: Vec<f64> = (0..1000)
            .map(|_| 5.0 + 0.1 * rng.gen::<f64>())
            .collect();
        let fit = ttest_fit(&[mu]);
        let cmp = compare_distributions(&[&fit, &fit], None, 41, None).unwrap();
        let r = &cmp.series[0].pairs[0].result;
        assert!(
            (0.45..=0.55).contains(&r.p_smaller),
            "p_smaller = {}",
            r.p_smaller
        );
    }

    #[test]
    fn success_rate_predictive_data_are_binary() {
        let a = success_rate_fit(0.9, 60.0, 300);
        let b = success_rate_fit(0.3, 60.0, 300);
        let cmp = compare_distributions(&[&a, &b], None, 13, None).unwrap();
        let r = &cmp.series[0].pairs[0].result;
        assert!(r
            .difference_draws
            .iter()
            .all(|d| [-1.0, 0.0, 1.0].contains(d)));
        assert!(r.p_greater > 0.3, "0.9-rate beats 0.3-rate often enough");
    }

    #[test]
    fn reaction_time_predictive_mean_tracks_the_derived_rt() {
        let fit = reaction_time_fit(0.5, 8.0, 1e-3);
        let rt_mean = {
            let draws = fit.pooled_draws("rt").unwrap();
            draws.iter().sum::<f64>() / draws.len() as f64
        };
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let pred = predictive_draws(&fit, &mut rng, None).unwrap().remove(0);
        let pred_mean = pred.draws.iter().sum::<f64>() / pred.draws.len() as f64;
        // Total-expectation check: with a near-degenerate hierarchy the
        // predictive mean is mu_m + E[1/lambda_new] ≈ mean of rt draws.
        assert!(
            (pred_mean - rt_mean).abs() < 0.025,
            "predictive {pred_mean} vs derived {rt_mean}"
        );
    }

    #[test]
    fn linear_predictive_needs_x_and_then_uses_it() {
        let a = linear_fit(2.0, 1.0);
        let b = linear_fit(2.0, -1.0);
        let err = compare_distributions(&[&a, &b], None, 3, None).unwrap_err();
        assert!(matches!(err, Error::Argument(_)), "{err}");
        let cmp = compare_distributions(&[&a, &b], None, 3, Some(10.0)).unwrap();
        let r = &cmp.series[0].pairs[0].result;
        // At x = 10 the lines sit at 12 vs −8, so differences center on 20.
        assert_eq!(r.p_greater, 1.0);
        let mean = r.difference_draws.iter().sum::<f64>() / r.n_pairs as f64;
        assert!((mean - 20.0).abs() < 0.6, "difference mean {mean}");
    }

    #[test]
    fn color_predictive_components_stay_on_their_supports() {
        let a = color_fit(0.3);
        let b = color_fit(0.5);
        let cmp = compare_distributions(&[&a, &b], Some(0.01), 9, None).unwrap();
        assert_eq!(cmp.series.len(), 6);
        let names: Vec<&str> = cmp.series.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["r", "g", "b", "h", "s", "v"]);
        let hue = &cmp.series[3].pairs[0].result;
        assert!(hue.p_smaller > 0.9, "0.3 sits below 0.5 on the short arc");
        for d in &cmp.series[0].pairs[0].result.difference_draws {
            assert!(d.abs() <= 255.0);
        }
        for d in &cmp.series[4].pairs[0].result.difference_draws {
            assert!(d.abs() <= 1.0);
        }
    }

    #[test]
    fn wrap_difference_stays_in_the_signed_half_circle() {
        assert_relative_eq!(wrap_difference(0.2), 0.2);
        assert_relative_eq!(wrap_difference(TAU - 0.2), -0.2, epsilon = 1e-12);
        assert_relative_eq!(wrap_difference(-TAU + 0.2), 0.2, epsilon = 1e-12);
        assert_relative_eq!(wrap_difference(PI), PI);
        assert_relative_eq!(wrap_difference(-PI), PI);
        assert_relative_eq!(wrap_difference(3.0 * PI), PI);
    }
}
