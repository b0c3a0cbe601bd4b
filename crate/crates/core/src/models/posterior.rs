//! Log-posterior densities with analytic gradients, evaluated on the
//! sampler's unconstrained scale.
//!
//! Subject-level location parameters (reaction-time μᵢ, linear αᵢ/βᵢ) are
//! sampled as standardized deviates (value = group mean + group sd · z) to
//! avoid funnel geometry; positive subject parameters are sampled on the log
//! scale with an untruncated normal hierarchical density, which keeps the
//! group location/scale interpretation while the transform enforces
//! positivity. Observations are canonicalized (sorted) at construction so
//! the accumulated log density is bitwise invariant under input row
//! permutations.

use crate::dist::special::{
    bessel_i1_over_i0, digamma, ln_bessel_i0, ln_normal_mass, std_normal_logpdf, LN_TWO_PI,
};
use crate::dist::{emg_grad, emg_lp, ln_beta, normal_lp, scaled_t_grad, scaled_t_lp};
use crate::error::{Error, Result};
use crate::prior::{PriorFamily, PriorMap, PriorSpec};
use crate::sampler::{Constraint, Target};

use super::{Level, ParamMeta};

/// One of the six independently fitted color components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorComponent {
    Red,
    Green,
    Blue,
    Hue,
    Saturation,
    Value,
}

impl ColorComponent {
    pub const ALL: [ColorComponent; 6] = [
        ColorComponent::Red,
        ColorComponent::Green,
        ColorComponent::Blue,
        ColorComponent::Hue,
        ColorComponent::Saturation,
        ColorComponent::Value,
    ];

    /// (location name, spread name) of the component's two parameters.
    pub fn param_names(self) -> (&'static str, &'static str) {
        match self {
            ColorComponent::Red => ("mu_r", "sigma_r"),
            ColorComponent::Green => ("mu_g", "sigma_g"),
            ColorComponent::Blue => ("mu_b", "sigma_b"),
            ColorComponent::Hue => ("mu_h", "kappa_h"),
            ColorComponent::Saturation => ("mu_s", "sigma_s"),
            ColorComponent::Value => ("mu_v", "sigma_v"),
        }
    }

    fn meta(self) -> Vec<ParamMeta> {
        let (loc, spread) = self.param_names();
        // Location parameters live on the component's own support, so the
        // default flat prior is proper in the location direction and
        // initialization starts mid-range.
        // The spread is bounded by the support width: past it the truncated
        // density is indistinguishable from uniform, and an unbounded flat
        // spread makes that plateau improper.
        let (loc_constraint, spread_constraint) = match self {
            ColorComponent::Hue => (Constraint::Circular, Constraint::Positive),
            ColorComponent::Red | ColorComponent::Green | ColorComponent::Blue => (
                Constraint::Interval(0.0, 255.0),
                Constraint::Interval(0.0, 255.0),
            ),
            ColorComponent::Saturation | ColorComponent::Value => (
                Constraint::Interval(0.0, 1.0),
                Constraint::Interval(0.0, 1.0),
            ),
        };
        vec![
            ParamMeta::group(loc, loc_constraint),
            ParamMeta::group(spread, spread_constraint),
        ]
    }
}

#[derive(Debug, Clone)]
enum Core {
    TTest {
        y: Vec<f64>,
    },
    ReactionTime {
        t: Vec<f64>,
        s: Vec<usize>,
        n: usize,
    },
    SuccessRate {
        successes: Vec<f64>,
        trials: Vec<f64>,
    },
    Linear {
        x: Vec<f64>,
        y: Vec<f64>,
        s: Vec<usize>,
        n: usize,
    },
    TruncNorm {
        data: Vec<f64>,
        lo: f64,
        hi: f64,
    },
    VonMises {
        data: Vec<f64>,
    },
}

/// A model's joint log density over its sampling coordinates, ready to hand
/// to the sampler.
#[derive(Debug, Clone)]
pub struct Posterior {
    core: Core,
    sampling_names: Vec<String>,
    meta: Vec<ParamMeta>,
    priors: Vec<Option<PriorSpec>>,
}

impl Posterior {
    /// Robust location model: y ~ scaled Student-t(ν, μ, σ), ν ≥ 1.
    pub fn ttest(y: &[f64], priors: &PriorMap) -> Result<Posterior> {
        if y.len() < 2 {
            return Err(Error::Data(format!(
                "need at least 2 observations, got {}",
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite observation at row {}", i + 1)));
        }
        if y.iter().all(|v| *v == y[0]) {
            return Err(Error::Data(
                "observations are constant; the scale parameter is not identified".to_string(),
            ));
        }
        let mut y = y.to_vec();
        y.sort_by(f64::total_cmp);
        let mut meta = vec![
            ParamMeta::group("mu", Constraint::Unbounded),
            ParamMeta::group("sigma", Constraint::Positive),
            ParamMeta::group("nu", Constraint::LowerBounded(1.0)),
        ];
        let priors = resolve_priors(&mut meta, priors)?;
        Ok(Posterior {
            core: Core::TTest { y },
            sampling_names: meta.iter().map(|m| m.name.clone()).collect(),
            meta,
            priors,
        })
    }

    /// Hierarchical exponentially-modified-Gaussian reaction-time model.
    pub fn reaction_time(t: &[f64], s: &[usize], priors: &PriorMap) -> Result<Posterior> {
        if t.len() != s.len() {
            return Err(Error::Data(format!(
                "time and subject vectors differ in length ({} vs {})",
                t.len(),
                s.len()
            )));
        }
        for (i, v) in t.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Data(format!(
                    "reaction time at row {} must be positive and finite, got {v}",
                    i + 1
                )));
            }
        }
        let n = validate_subjects(s)?;
        let mut obs: Vec<(usize, f64)> = s.iter().map(|v| v - 1).zip(t.iter().copied()).collect();
        obs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (s, t): (Vec<usize>, Vec<f64>) = obs.into_iter().unzip();

        let mut meta = Vec::with_capacity(3 * n + 6);
        let mut sampling_names = Vec::with_capacity(3 * n + 6);
        for i in 1..=n {
            meta.push(ParamMeta::subject(format!("mu[{i}]"), i, Constraint::Unbounded));
            sampling_names.push(format!("z_mu[{i}]"));
        }
        for i in 1..=n {
            meta.push(ParamMeta::subject(format!("sigma[{i}]"), i, Constraint::Positive));
            sampling_names.push(format!("sigma[{i}]"));
        }
        for i in 1..=n {
            meta.push(ParamMeta::subject(format!("lambda[{i}]"), i, Constraint::Positive));
            sampling_names.push(format!("lambda[{i}]"));
        }
        for (name, c) in [
            ("mu_m", Constraint::Unbounded),
            ("mu_l", Constraint::Unbounded),
            ("mu_s", Constraint::Unbounded),
            ("sigma_m", Constraint::Positive),
            ("sigma_l", Constraint::Positive),
            ("sigma_s", Constraint::Positive),
        ] {
            meta.push(ParamMeta::group(name, c));
            sampling_names.push(name.to_string());
        }
        let priors = resolve_priors(&mut meta, priors)?;
        Ok(Posterior {
            core: Core::ReactionTime { t, s, n },
            sampling_names,
            meta,
            priors,
        })
    }

    /// Hierarchical Bernoulli success-rate model with a reparameterized Beta
    /// population distribution, pᵢ ~ Beta(p·τ, (1−p)·τ).
    pub fn success_rate(r: &[f64], s: &[usize], priors: &PriorMap) -> Result<Posterior> {
        if r.len() != s.len() {
            return Err(Error::Data(format!(
                "result and subject vectors differ in length ({} vs {})",
                r.len(),
                s.len()
            )));
        }
        for (i, v) in r.iter().enumerate() {
            if !(*v == 0.0 || *v == 1.0) {
                return Err(Error::Data(format!(
                    "results must be 0 or 1, got {v} at row {}",
                    i + 1
                )));
            }
        }
        let n = validate_subjects(s)?;
        let mut successes = vec![0.0; n];
        let mut trials = vec![0.0; n];
        for (v, subj) in r.iter().zip(s) {
            successes[subj - 1] += v;
            trials[subj - 1] += 1.0;
        }
        let mut meta = Vec::with_capacity(n + 2);
        for i in 1..=n {
            meta.push(ParamMeta::subject(
                format!("p[{i}]"),
                i,
                Constraint::Interval(0.0, 1.0),
            ));
        }
        meta.push(ParamMeta::group("p", Constraint::Interval(0.0, 1.0)));
        meta.push(ParamMeta::group("tau", Constraint::Positive));
        let priors = resolve_priors(&mut meta, priors)?;
        Ok(Posterior {
            core: Core::SuccessRate { successes, trials },
            sampling_names: meta.iter().map(|m| m.name.clone()).collect(),
            meta,
            priors,
        })
    }

    /// Hierarchical per-subject linear regression with normal residuals.
    pub fn linear(x: &[f64], y: &[f64], s: &[usize], priors: &PriorMap) -> Result<Posterior> {
        if x.len() != y.len() || x.len() != s.len() {
            return Err(Error::Data(format!(
                "predictor, outcome and subject vectors differ in length ({}, {}, {})",
                x.len(),
                y.len(),
                s.len()
            )));
        }
        for (i, (xv, yv)) in x.iter().zip(y).enumerate() {
            if !(xv.is_finite() && yv.is_finite()) {
                return Err(Error::Data(format!("non-finite value at row {}", i + 1)));
            }
        }
        let n = validate_subjects(s)?;
        for subj in 1..=n {
            let mut xs: Vec<f64> = s
                .iter()
                .zip(x)
                .filter(|(sv, _)| **sv == subj)
                .map(|(_, xv)| *xv)
                .collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            if xs.len() < 2 {
                return Err(Error::Data(format!(
                    "subject {subj} needs at least 2 distinct predictor values"
                )));
            }
        }
        let mut obs: Vec<(usize, f64, f64)> = s
            .iter()
            .zip(x.iter().zip(y))
            .map(|(sv, (xv, yv))| (sv - 1, *xv, *yv))
            .collect();
        obs.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        let (s, rest): (Vec<usize>, Vec<(f64, f64)>) =
            obs.into_iter().map(|(a, b, c)| (a, (b, c))).unzip();
        let (x, y): (Vec<f64>, Vec<f64>) = rest.into_iter().unzip();

        let mut meta = Vec::with_capacity(3 * n + 6);
        let mut sampling_names = Vec::with_capacity(3 * n + 6);
        for i in 1..=n {
            meta.push(ParamMeta::subject(format!("alpha[{i}]"), i, Constraint::Unbounded));
            sampling_names.push(format!("z_alpha[{i}]"));
        }
        for i in 1..=n {
            meta.push(ParamMeta::subject(format!("beta[{i}]"), i, Constraint::Unbounded));
            sampling_names.push(format!("z_beta[{i}]"));
        }
        for i in 1..=n {
            meta.push(ParamMeta::subject(format!("sigma[{i}]"), i, Constraint::Positive));
            sampling_names.push(format!("sigma[{i}]"));
        }
        for (name, c) in [
            ("mu_a", Constraint::Unbounded),
            ("mu_b", Constraint::Unbounded),
            ("mu_s", Constraint::Unbounded),
            ("sigma_a", Constraint::Positive),
            ("sigma_b", Constraint::Positive),
            ("sigma_s", Constraint::Positive),
        ] {
            meta.push(ParamMeta::group(name, c));
            sampling_names.push(name.to_string());
        }
        let priors = resolve_priors(&mut meta, priors)?;
        Ok(Posterior {
            core: Core::Linear { x, y, s, n },
            sampling_names,
            meta,
            priors,
        })
    }

    /// One color component's 2-parameter density: truncated normal for
    /// R/G/B (on [0,255]) and S/V (on [0,1]), von Mises for hue.
    ///
    /// `priors` entries are matched against the component's own parameter
    /// names; entries for other components are ignored here.
    pub fn color_component(
        data: &[f64],
        component: ColorComponent,
        priors: &PriorMap,
    ) -> Result<Posterior> {
        let (lo, hi) = match component {
            ColorComponent::Red | ColorComponent::Green | ColorComponent::Blue => (0.0, 255.0),
            ColorComponent::Saturation | ColorComponent::Value => (0.0, 1.0),
            ColorComponent::Hue => (0.0, std::f64::consts::TAU),
        };
        for (i, v) in data.iter().enumerate() {
            let ok = if component == ColorComponent::Hue {
                v.is_finite() && *v >= lo && *v < hi
            } else {
                v.is_finite() && *v >= lo && *v <= hi
            };
            if !ok {
                return Err(Error::Data(format!(
                    "{} component out of range at row {}: {v}",
                    component.param_names().0,
                    i + 1
                )));
            }
        }
        if data.len() < 2 {
            return Err(Error::Data(format!(
                "need at least 2 observations, got {}",
                data.len()
            )));
        }
        let mut data = data.to_vec();
        data.sort_by(f64::total_cmp);
        let mut meta = component.meta();
        let component_priors = priors
            .iter()
            .filter(|(name, _)| meta.iter().any(|m| m.name == *name))
            .fold(PriorMap::new(), |mut m, (name, spec)| {
                m.insert(name, spec.clone()).expect("source map has unique names");
                m
            });
        let priors = resolve_priors(&mut meta, &component_priors)?;
        let core = if component == ColorComponent::Hue {
            Core::VonMises { data }
        } else {
            Core::TruncNorm { data, lo, hi }
        };
        Ok(Posterior {
            core,
            sampling_names: meta.iter().map(|m| m.name.clone()).collect(),
            meta,
            priors,
        })
    }

    /// Reported-parameter metadata in draw-column order (constraints include
    /// any prior-implied support tightening).
    pub fn parameters(&self) -> &[ParamMeta] {
        &self.meta
    }
}

impl Target for Posterior {
    fn dim(&self) -> usize {
        self.meta.len()
    }

    fn names(&self) -> Vec<String> {
        self.sampling_names.clone()
    }

    fn constraints(&self) -> Vec<Constraint> {
        self.meta.iter().map(|m| m.constraint).collect()
    }

    fn logp_grad(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.meta.len();
        let mut x = vec![0.0; dim];
        let mut dxdu = vec![0.0; dim];
        let mut lp = 0.0;
        for d in 0..dim {
            let (xv, log_jac, dlogjac) = self.meta[d].constraint.transform(u[d]);
            // Overflowed or underflowed coordinates would feed degenerate
            // values into the likelihood kernels.
            let underflowed =
                matches!(self.meta[d].constraint, Constraint::Positive) && xv == 0.0;
            if !xv.is_finite() || underflowed {
                grad.iter_mut().for_each(|g| *g = 0.0);
                return f64::NEG_INFINITY;
            }
            x[d] = xv;
            lp += log_jac;
            dxdu[d] = log_jac.exp();
            grad[d] = dlogjac;
        }
        let mut gx = vec![0.0; dim];
        lp += self.core.logp_grad(&x, &mut gx);
        for (d, prior) in self.priors.iter().enumerate() {
            if let Some(spec) = prior {
                let (plp, pd) = spec.log_contrib(x[d]);
                lp += plp;
                gx[d] += pd;
            }
        }
        if !lp.is_finite() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return f64::NEG_INFINITY;
        }
        for d in 0..dim {
            grad[d] += gx[d] * dxdu[d];
        }
        lp
    }
}

impl Core {
    fn logp_grad(&self, x: &[f64], gx: &mut [f64]) -> f64 {
        match self {
            Core::TTest { y } => {
                let (mu, sigma, nu) = (x[0], x[1], x[2]);
                let mut lp = 0.0;
                for &v in y {
                    lp += scaled_t_lp(v, nu, mu, sigma);
                    let [dnu, dmu, dsigma] = scaled_t_grad(v, nu, mu, sigma);
                    gx[0] += dmu;
                    gx[1] += dsigma;
                    gx[2] += dnu;
                }
                lp
            }
            Core::ReactionTime { t, s, n } => {
                let n = *n;
                let g = 3 * n;
                let (mu_m, mu_l, mu_s) = (x[g], x[g + 1], x[g + 2]);
                let (sigma_m, sigma_l, sigma_s) = (x[g + 3], x[g + 4], x[g + 5]);
                let mut lp = 0.0;
                for (&tv, &i) in t.iter().zip(s) {
                    let mu_i = mu_m + sigma_m * x[i];
                    lp += emg_lp(tv, mu_i, x[n + i], x[2 * n + i]);
                    let [dmu, dsigma, dlambda] = emg_grad(tv, mu_i, x[n + i], x[2 * n + i]);
                    gx[i] += dmu * sigma_m;
                    gx[g] += dmu;
                    gx[g + 3] += dmu * x[i];
                    gx[n + i] += dsigma;
                    gx[2 * n + i] += dlambda;
                }
                for i in 0..n {
                    lp += std_normal_logpdf(x[i]);
                    gx[i] -= x[i];
                    lp += normal_hierarchy(gx, x[n + i], mu_s, sigma_s, n + i, g + 2, g + 5);
                    lp += normal_hierarchy(gx, x[2 * n + i], mu_l, sigma_l, 2 * n + i, g + 1, g + 4);
                }
                lp
            }
            Core::SuccessRate { successes, trials } => {
                let n = successes.len();
                let (p, tau) = (x[n], x[n + 1]);
                let a = p * tau;
                let b = (1.0 - p) * tau;
                if !(a > 0.0 && b > 0.0) {
                    return f64::NEG_INFINITY;
                }
                for &pi in &x[..n] {
                    if !(pi > 0.0 && pi < 1.0) {
                        return f64::NEG_INFINITY;
                    }
                }
                let mut lp = -(n as f64) * ln_beta(a, b);
                let mut sum_ln_p = 0.0;
                let mut sum_ln_q = 0.0;
                for i in 0..n {
                    let pi = x[i];
                    let (lpi, lqi) = (pi.ln(), (1.0 - pi).ln());
                    lp += successes[i] * lpi + (trials[i] - successes[i]) * lqi;
                    lp += (a - 1.0) * lpi + (b - 1.0) * lqi;
                    gx[i] += (successes[i] + a - 1.0) / pi
                        - (trials[i] - successes[i] + b - 1.0) / (1.0 - pi);
                    sum_ln_p += lpi;
                    sum_ln_q += lqi;
                }
                let (da, db) = (digamma(a), digamma(b));
                gx[n] += tau * (sum_ln_p - sum_ln_q - n as f64 * (da - db));
                gx[n + 1] += p * sum_ln_p + (1.0 - p) * sum_ln_q
                    - n as f64 * (p * da + (1.0 - p) * db - digamma(tau));
                lp
            }
            Core::Linear { x: xs, y, s, n } => {
                let n = *n;
                let g = 3 * n;
                let (mu_a, mu_b, mu_s) = (x[g], x[g + 1], x[g + 2]);
                let (sigma_a, sigma_b, sigma_s) = (x[g + 3], x[g + 4], x[g + 5]);
                let mut lp = 0.0;
                for ((&xv, &yv), &i) in xs.iter().zip(y).zip(s) {
                    let alpha = mu_a + sigma_a * x[i];
                    let beta = mu_b + sigma_b * x[n + i];
                    let sigma = x[2 * n + i];
                    let r = yv - alpha - beta * xv;
                    lp += -0.5 * (r / sigma) * (r / sigma) - sigma.ln() - 0.5 * LN_TWO_PI;
                    let dalpha = r / (sigma * sigma);
                    let dbeta = dalpha * xv;
                    gx[i] += dalpha * sigma_a;
                    gx[g] += dalpha;
                    gx[g + 3] += dalpha * x[i];
                    gx[n + i] += dbeta * sigma_b;
                    gx[g + 1] += dbeta;
                    gx[g + 4] += dbeta * x[n + i];
                    gx[2 * n + i] += r * r / (sigma * sigma * sigma) - 1.0 / sigma;
                }
                for i in 0..n {
                    lp += std_normal_logpdf(x[i]) + std_normal_logpdf(x[n + i]);
                    gx[i] -= x[i];
                    gx[n + i] -= x[n + i];
                    lp += normal_hierarchy(gx, x[2 * n + i], mu_s, sigma_s, 2 * n + i, g + 2, g + 5);
                }
                lp
            }
            Core::TruncNorm { data, lo, hi } => {
                let (mu, sigma) = (x[0], x[1]);
                let n = data.len() as f64;
                let a = (lo - mu) / sigma;
                let b = (hi - mu) / sigma;
                let ln_mass = ln_normal_mass(a, b);
                let ra = (std_normal_logpdf(a) - ln_mass).exp();
                let rb = (std_normal_logpdf(b) - ln_mass).exp();
                let mut lp = -n * (sigma.ln() + 0.5 * LN_TWO_PI + ln_mass);
                for &v in data {
                    let z = (v - mu) / sigma;
                    lp += -0.5 * z * z;
                    gx[0] += z / sigma;
                    gx[1] += (z * z - 1.0) / sigma;
                }
                gx[0] -= n * (ra - rb) / sigma;
                gx[1] -= n * (a * ra - b * rb) / sigma;
                lp
            }
            Core::VonMises { data } => {
                let (mu, kappa) = (x[0], x[1]);
                let n = data.len() as f64;
                let ratio = bessel_i1_over_i0(kappa);
                let mut lp = -n * (LN_TWO_PI + ln_bessel_i0(kappa));
                for &t in data {
                    lp += kappa * (t - mu).cos();
                    gx[0] += kappa * (t - mu).sin();
                    gx[1] += (t - mu).cos();
                }
                gx[1] -= n * ratio;
                lp
            }
        }
    }
}

/// Adds the hierarchical normal density of one subject value and its
/// gradient contributions at (value_idx, mu_idx, sd_idx); returns the
/// log-density term.
fn normal_hierarchy(
    gx: &mut [f64],
    value: f64,
    mu: f64,
    sd: f64,
    value_idx: usize,
    mu_idx: usize,
    sd_idx: usize,
) -> f64 {
    let d = (value - mu) / (sd * sd);
    gx[value_idx] -= d;
    gx[mu_idx] += d;
    gx[sd_idx] += (value - mu).powi(2) / sd.powi(3) - 1.0 / sd;
    normal_lp(value, mu, sd)
}

/// Checks subject indices are contiguous 1..n and returns n.
pub(super) fn validate_subjects(s: &[usize]) -> Result<usize> {
    if s.is_empty() {
        return Err(Error::Data("no observations".to_string()));
    }
    let max = *s.iter().max().unwrap();
    if let Some(i) = s.iter().position(|v| *v == 0) {
        return Err(Error::Data(format!(
            "subject index 0 at row {} (indices are 1-based)",
            i + 1
        )));
    }
    let mut seen = vec![false; max];
    for v in s {
        seen[v - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|present| !present) {
        return Err(Error::Data(format!(
            "subject indices are not contiguous: index {} is missing below the maximum {max}",
            missing + 1
        )));
    }
    Ok(max)
}

/// Validates prior names against the group-level registry, tightens
/// parameter constraints where the prior implies hard support bounds, and
/// returns the per-coordinate prior list.
fn resolve_priors(meta: &mut [ParamMeta], priors: &PriorMap) -> Result<Vec<Option<PriorSpec>>> {
    let group_names: Vec<String> = meta
        .iter()
        .filter(|m| m.level == Level::Group)
        .map(|m| m.name.clone())
        .collect();
    priors.validate_names(&group_names)?;
    let mut out = vec![None; meta.len()];
    for (name, spec) in priors.iter() {
        let idx = meta.iter().position(|m| m.name == *name).unwrap();
        meta[idx].constraint = upgraded_constraint(meta[idx].constraint, spec, name)?;
        out[idx] = Some(spec.clone());
    }
    Ok(out)
}

fn upgraded_constraint(base: Constraint, spec: &PriorSpec, name: &str) -> Result<Constraint> {
    match spec.family() {
        PriorFamily::Uniform => {
            let (lo, hi) = (spec.params()[0], spec.params()[1]);
            let (blo, bhi) = match base {
                Constraint::Unbounded => (f64::NEG_INFINITY, f64::INFINITY),
                Constraint::Positive => (0.0, f64::INFINITY),
                Constraint::LowerBounded(l) => (l, f64::INFINITY),
                Constraint::Interval(a, b) => (a, b),
                Constraint::Circular => (0.0, std::f64::consts::TAU),
            };
            let lo = lo.max(blo);
            let hi = hi.min(bhi);
            if !(hi > lo) {
                return Err(Error::Spec(format!(
                    "uniform prior on {name} does not overlap the parameter's support"
                )));
            }
            Ok(Constraint::Interval(lo, hi))
        }
        PriorFamily::Gamma => Ok(match base {
            Constraint::Unbounded => Constraint::Positive,
            other => other,
        }),
        PriorFamily::Beta => match base {
            Constraint::Interval(a, b) if a >= 0.0 && b <= 1.0 => Ok(base),
            _ => Err(Error::Spec(format!(
                "beta prior on {name} requires a parameter constrained to [0,1]"
            ))),
        },
        PriorFamily::Flat | PriorFamily::Normal => Ok(base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{sample_emg, sample_normal};
    use crate::prior::PriorSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ttest_data() -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..20).map(|_| sample_normal(&mut rng, 60.0, 10.0)).collect()
    }

    fn reaction_time_data() -> (Vec<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut t = Vec::new();
        let mut s = Vec::new();
        for subject in 1..=3 {
            for _ in 0..10 {
                t.push(sample_emg(&mut rng, 0.5, 0.05, 10.0));
                s.push(subject);
            }
        }
        assert!(t.iter().all(|v| *v > 0.0));
        (t, s)
    }

    fn success_rate_data() -> (Vec<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut r = Vec::new();
        let mut s = Vec::new();
        for subject in 1..=3 {
            for _ in 0..10 {
                r.push(if rng.gen::<f64>() < 0.7 { 1.0 } else { 0.0 });
                s.push(subject);
            }
        }
        (r, s)
    }

    fn linear_data() -> (Vec<f64>, Vec<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut s = Vec::new();
        for subject in 1..=3 {
            for i in 1..=10 {
                x.push(i as f64);
                y.push(1.0 + 2.0 * i as f64 + sample_normal(&mut rng, 0.0, 0.5));
                s.push(subject);
            }
        }
        (x, y, s)
    }

    fn color_column(component: ColorComponent) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(15 + component as u64);
        let n = 20;
        match component {
            ColorComponent::Red | ColorComponent::Green | ColorComponent::Blue => {
                (0..n).map(|_| rng.gen_range(10.0..250.0)).collect()
            }
            ColorComponent::Hue => (0..n)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect(),
            ColorComponent::Saturation | ColorComponent::Value => {
                (0..n).map(|_| rng.gen_range(0.05..0.95)).collect()
            }
        }
    }

    /// Central-difference check of `logp_grad` at random unconstrained
    /// points.
    fn grad_matches_fd(post: &Posterior, seed: u64, points: usize) {
        let dim = post.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..points {
            let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mut grad = vec![0.0; dim];
            let lp = post.logp_grad(&u, &mut grad);
            assert!(lp.is_finite(), "log-density not finite at {u:?}");
            for d in 0..dim {
                let h = 1e-5 * u[d].abs().max(1.0);
                let mut up = u.clone();
                up[d] += h;
                let mut um = u.clone();
                um[d] -= h;
                let mut scratch = vec![0.0; dim];
                let fp = post.logp_grad(&up, &mut scratch);
                let fm = post.logp_grad(&um, &mut scratch);
                let fd = (fp - fm) / (2.0 * h);
                let scale = grad[d].abs().max(fd.abs()).max(1e-2);
                assert!(
                    ((grad[d] - fd) / scale).abs() < 2e-5,
                    "coordinate {d}: analytic {} vs central difference {fd} at {u:?}",
                    grad[d]
                );
            }
        }
    }

    #[test]
    fn ttest_gradient_matches_finite_differences() {
        let y = ttest_data();
        let post = Posterior::ttest(&y, &PriorMap::new()).unwrap();
        grad_matches_fd(&post, 21, 5);
    }

    #[test]
    fn ttest_gradient_with_priors_matches_finite_differences() {
        let y = ttest_data();
        let mut priors = PriorMap::new();
        priors.insert("mu", PriorSpec::parse("normal(50,30)").unwrap()).unwrap();
        priors.insert("sigma", PriorSpec::parse("uniform(1,40)").unwrap()).unwrap();
        priors.insert("nu", PriorSpec::parse("gamma(2,0.1)").unwrap()).unwrap();
        let post = Posterior::ttest(&y, &priors).unwrap();
        grad_matches_fd(&post, 22, 5);
    }

    #[test]
    fn reaction_time_gradient_matches_finite_differences() {
        let (t, s) = reaction_time_data();
        let post = Posterior::reaction_time(&t, &s, &PriorMap::new()).unwrap();
        grad_matches_fd(&post, 23, 5);
    }

    #[test]
    fn success_rate_gradient_matches_finite_differences() {
        let (r, s) = success_rate_data();
        let post = Posterior::success_rate(&r, &s, &PriorMap::new()).unwrap();
        grad_matches_fd(&post, 24, 5);
    }

    #[test]
    fn success_rate_gradient_with_priors_matches_finite_differences() {
        let (r, s) = success_rate_data();
        let mut priors = PriorMap::new();
        priors.insert("p", PriorSpec::parse("beta(2,2)").unwrap()).unwrap();
        priors.insert("tau", PriorSpec::parse("uniform(0,100)").unwrap()).unwrap();
        let post = Posterior::success_rate(&r, &s, &priors).unwrap();
        grad_matches_fd(&post, 25, 5);
    }

    #[test]
    fn linear_gradient_matches_finite_differences() {
        let (x, y, s) = linear_data();
        let post = Posterior::linear(&x, &y, &s, &PriorMap::new()).unwrap();
        grad_matches_fd(&post, 26, 5);
    }

    #[test]
    fn color_component_gradients_match_finite_differences() {
        for component in ColorComponent::ALL {
            let data = color_column(component);
            let post = Posterior::color_component(&data, component, &PriorMap::new()).unwrap();
            grad_matches_fd(&post, 27 + component as u64, 5);
        }
    }

    #[test]
    fn flat_priors_match_absent_priors() {
        let y = ttest_data();
        let bare = Posterior::ttest(&y, &PriorMap::new()).unwrap();
        let mut priors = PriorMap::new();
        for name in ["mu", "sigma", "nu"] {
            priors.insert(name, PriorSpec::flat()).unwrap();
        }
        let flat = Posterior::ttest(&y, &priors).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mut ga = vec![0.0; 3];
            let mut gb = vec![0.0; 3];
            assert_eq!(bare.logp_grad(&u, &mut ga), flat.logp_grad(&u, &mut gb));
            assert_eq!(ga, gb);
        }
    }

    #[test]
    fn log_density_is_invariant_to_input_row_order() {
        let (t, s) = reaction_time_data();
        let forward = Posterior::reaction_time(&t, &s, &PriorMap::new()).unwrap();
        let perm: Vec<usize> = (0..t.len()).rev().collect();
        let t2: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
        let s2: Vec<usize> = perm.iter().map(|&i| s[i]).collect();
        let reversed = Posterior::reaction_time(&t2, &s2, &PriorMap::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let dim = forward.dim();
        for _ in 0..10 {
            let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mut ga = vec![0.0; dim];
            let mut gb = vec![0.0; dim];
            assert_eq!(forward.logp_grad(&u, &mut ga), reversed.logp_grad(&u, &mut gb));
            assert_eq!(ga, gb);
        }
    }

    #[test]
    fn prior_upgrades_tighten_constraints() {
        let y = ttest_data();
        let mut priors = PriorMap::new();
        priors.insert("sigma", PriorSpec::parse("uniform(5,15)").unwrap()).unwrap();
        priors.insert("nu", PriorSpec::parse("uniform(0,30)").unwrap()).unwrap();
        let post = Posterior::ttest(&y, &priors).unwrap();
        let constraints = post.constraints();
        assert_eq!(constraints[1], Constraint::Interval(5.0, 15.0));
        assert_eq!(constraints[2], Constraint::Interval(1.0, 30.0));

        let mut priors = PriorMap::new();
        priors.insert("mu", PriorSpec::parse("gamma(2,1)").unwrap()).unwrap();
        let post = Posterior::ttest(&y, &priors).unwrap();
        assert_eq!(post.constraints()[0], Constraint::Positive);
    }

    #[test]
    fn beta_prior_requires_unit_interval_support() {
        let y = ttest_data();
        let mut priors = PriorMap::new();
        priors.insert("mu", PriorSpec::parse("beta(2,2)").unwrap()).unwrap();
        assert!(matches!(
            Posterior::ttest(&y, &priors),
            Err(Error::Spec(_))
        ));

        let (r, s) = success_rate_data();
        let mut priors = PriorMap::new();
        priors.insert("p", PriorSpec::parse("beta(1,1)").unwrap()).unwrap();
        let post = Posterior::success_rate(&r, &s, &priors).unwrap();
        let p_col = post.dim() - 2;
        assert_eq!(post.constraints()[p_col], Constraint::Interval(0.0, 1.0));
    }

    #[test]
    fn disjoint_uniform_prior_is_rejected() {
        let y = ttest_data();
        let mut priors = PriorMap::new();
        priors.insert("sigma", PriorSpec::parse("uniform(-5,-1)").unwrap()).unwrap();
        assert!(matches!(Posterior::ttest(&y, &priors), Err(Error::Spec(_))));
    }

    #[test]
    fn unknown_prior_name_is_rejected() {
        let y = ttest_data();
        let mut priors = PriorMap::new();
        priors.insert("lambda", PriorSpec::parse("normal(0,1)").unwrap()).unwrap();
        assert!(matches!(Posterior::ttest(&y, &priors), Err(Error::Param(_))));
    }

    #[test]
    fn extreme_unconstrained_points_stay_non_nan() {
        let (r, s) = success_rate_data();
        let post = Posterior::success_rate(&r, &s, &PriorMap::new()).unwrap();
        let dim = post.dim();
        let mut grad = vec![0.0; dim];
        for v in [-800.0, 800.0] {
            let u = vec![v; dim];
            let lp = post.logp_grad(&u, &mut grad);
            assert!(!lp.is_nan());
        }
    }

    #[test]
    fn validation_errors_name_the_offending_row() {
        assert!(matches!(Posterior::ttest(&[1.0], &PriorMap::new()), Err(Error::Data(_))));
        assert!(matches!(
            Posterior::ttest(&[2.0, 2.0, 2.0], &PriorMap::new()),
            Err(Error::Data(_))
        ));
        let err = Posterior::ttest(&[1.0, f64::NAN, 3.0], &PriorMap::new()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");

        let err = Posterior::reaction_time(&[0.4, -0.1], &[1, 1], &PriorMap::new()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(matches!(
            Posterior::reaction_time(&[0.4, 0.5], &[1], &PriorMap::new()),
            Err(Error::Data(_))
        ));

        let err = Posterior::success_rate(&[0.0, 1.0, 2.0], &[1, 1, 1], &PriorMap::new())
            .unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");

        let err = Posterior::reaction_time(&[0.4, 0.5], &[1, 3], &PriorMap::new()).unwrap_err();
        assert!(err.to_string().contains('2'), "{err}");
        assert!(matches!(
            Posterior::reaction_time(&[0.4, 0.5], &[0, 1], &PriorMap::new()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn linear_requires_two_distinct_predictor_values_per_subject() {
        let x = vec![1.0, 1.0, 1.0, 2.0];
        let y = vec![3.0, 3.1, 2.9, 5.0];
        let s = vec![1, 1, 2, 2];
        let err = Posterior::linear(&x, &y, &s, &PriorMap::new()).unwrap_err();
        assert!(err.to_string().contains("subject 1"), "{err}");
    }

    #[test]
    fn color_component_rejects_out_of_range_data() {
        let err = Posterior::color_component(&[10.0, 300.0], ColorComponent::Red, &PriorMap::new())
            .unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(Posterior::color_component(
            &[0.1, std::f64::consts::TAU],
            ColorComponent::Hue,
            &PriorMap::new()
        )
        .is_err());
        assert!(Posterior::color_component(
            &[0.1, 1.5],
            ColorComponent::Saturation,
            &PriorMap::new()
        )
        .is_err());
    }

    #[test]
    fn color_component_ignores_other_components_priors() {
        let data = color_column(ColorComponent::Red);
        let mut priors = PriorMap::new();
        priors.insert("mu_h", PriorSpec::parse("normal(3,1)").unwrap()).unwrap();
        priors.insert("mu_r", PriorSpec::parse("uniform(0,100)").unwrap()).unwrap();
        let post = Posterior::color_component(&data, ColorComponent::Red, &priors).unwrap();
        assert_eq!(post.constraints()[0], Constraint::Interval(0.0, 100.0));
    }
}
