//! Gradient-based MCMC engine: multinomial no-U-turn sampling with
//! dual-averaging step-size adaptation and windowed diagonal mass-matrix
//! estimation.
//!
//! Targets expose a log density and gradient on an unconstrained scale;
//! constraint transforms live in [`transform`] and models chain their
//! Jacobians through them. Chains are deterministic functions of
//! (target, config): each derives its RNG from (seed, chain index), so the
//! same inputs give bit-identical draws no matter how the chains are
//! scheduled across threads.

mod adapt;
mod nuts;
pub mod transform;

pub use transform::Constraint;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use adapt::{find_reasonable_epsilon, DualAveraging, RunningVariance, WarmupSchedule};
use nuts::{nuts_draw, State};

/// Distribution to sample, evaluated on the unconstrained scale.
///
/// `logp_grad` must be pure and return −∞ with a zeroed gradient for
/// numerically invalid points; `Sync` lets chains run concurrently.
pub trait Target: Sync {
    fn dim(&self) -> usize;
    fn names(&self) -> Vec<String>;
    fn constraints(&self) -> Vec<Constraint>;
    /// Writes the gradient into `grad` (length `dim`) and returns the log
    /// density, both at the unconstrained point `u`.
    fn logp_grad(&self, u: &[f64], grad: &mut [f64]) -> f64;
}

/// Sampler run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Total iterations per chain, warmup included.
    pub iter: usize,
    /// Warmup iterations per chain.
    pub warmup: usize,
    pub chains: usize,
    pub seed: u64,
    /// Dual-averaging acceptance target in (0, 1).
    pub target_accept: f64,
    /// Cap on tree doublings per transition.
    pub max_treedepth: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            iter: 2000,
            warmup: 1000,
            chains: 4,
            seed: 1,
            target_accept: 0.8,
            max_treedepth: 10,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iter == 0 {
            return Err(Error::Spec("iter must be positive".to_string()));
        }
        if self.warmup >= self.iter {
            return Err(Error::Spec(format!(
                "warmup ({}) must be smaller than iter ({})",
                self.warmup, self.iter
            )));
        }
        if self.chains == 0 {
            return Err(Error::Spec("chains must be positive".to_string()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Spec(format!(
                "target_accept must be in (0,1), got {}",
                self.target_accept
            )));
        }
        if self.max_treedepth == 0 {
            return Err(Error::Spec("max_treedepth must be positive".to_string()));
        }
        Ok(())
    }
}

/// Posterior draws on the constrained scale, warmup retained for trace
/// plots, with per-iteration divergence and depth-saturation flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    warmup: usize,
    samples: usize,
    /// Per chain, row-major (iteration × parameter); warmup rows first.
    values: Vec<Vec<f64>>,
    divergent: Vec<Vec<bool>>,
    depth_hit: Vec<Vec<bool>>,
}

impl Draws {
    /// Reassembles draws from stored parts (fit-file loading); validates
    /// shapes and constraint membership.
    pub fn from_parts(
        names: Vec<String>,
        constraints: Vec<Constraint>,
        warmup: usize,
        samples: usize,
        values: Vec<Vec<f64>>,
        divergent: Vec<Vec<bool>>,
        depth_hit: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if names.len() != constraints.len() {
            return Err(Error::Spec(
                "parameter names and constraints disagree in length".to_string(),
            ));
        }
        if samples == 0 {
            return Err(Error::Spec("no post-warmup draws".to_string()));
        }
        let iter = warmup + samples;
        let dim = names.len();
        if values.is_empty()
            || values.iter().any(|c| c.len() != iter * dim)
            || divergent.len() != values.len()
            || divergent.iter().any(|c| c.len() != iter)
            || depth_hit.len() != values.len()
            || depth_hit.iter().any(|c| c.len() != iter)
        {
            return Err(Error::Spec("draw matrix shape mismatch".to_string()));
        }
        Ok(Draws {
            names,
            constraints,
            warmup,
            samples,
            values,
            divergent,
            depth_hit,
        })
    }

    pub fn n_chains(&self) -> usize {
        self.values.len()
    }

    pub fn n_warmup(&self) -> usize {
        self.warmup
    }

    /// Post-warmup draws per chain.
    pub fn n_samples(&self) -> usize {
        self.samples
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn param_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Param(format!("unknown parameter '{name}'")))
    }

    /// Value at (chain, iteration, parameter); iteration counts from the
    /// start of warmup.
    pub fn value(&self, chain: usize, iteration: usize, param: usize) -> f64 {
        self.values[chain][iteration * self.names.len() + param]
    }

    /// Post-warmup draws of one parameter in one chain.
    pub fn chain_draws(&self, chain: usize, param: usize) -> Vec<f64> {
        (self.warmup..self.warmup + self.samples)
            .map(|i| self.value(chain, i, param))
            .collect()
    }

    /// Warmup draws of one parameter in one chain.
    pub fn chain_warmup(&self, chain: usize, param: usize) -> Vec<f64> {
        (0..self.warmup).map(|i| self.value(chain, i, param)).collect()
    }

    /// Post-warmup draws of one parameter, one vector per chain.
    pub fn per_chain(&self, param: usize) -> Vec<Vec<f64>> {
        (0..self.n_chains()).map(|c| self.chain_draws(c, param)).collect()
    }

    /// Post-warmup draws of one parameter pooled across chains, chain-major.
    pub fn pooled(&self, param: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_chains() * self.samples);
        for c in 0..self.n_chains() {
            out.extend(self.chain_draws(c, param));
        }
        out
    }

    pub fn is_divergent(&self, chain: usize, iteration: usize) -> bool {
        self.divergent[chain][iteration]
    }

    pub fn is_depth_saturated(&self, chain: usize, iteration: usize) -> bool {
        self.depth_hit[chain][iteration]
    }

    /// Post-warmup divergence count across chains.
    pub fn divergence_count(&self) -> usize {
        self.flag_count(&self.divergent)
    }

    /// Post-warmup depth-saturation count across chains.
    pub fn depth_saturation_count(&self) -> usize {
        self.flag_count(&self.depth_hit)
    }

    fn flag_count(&self, flags: &[Vec<bool>]) -> usize {
        flags
            .iter()
            .map(|c| c[self.warmup..].iter().filter(|&&f| f).count())
            .sum()
    }

    /// Renames columns and rewrites every row (warmup included) in place;
    /// used where a model's sampling coordinates differ from its reported
    /// parameters. The map must be a per-row bijection that preserves
    /// dimension.
    pub(crate) fn transform_rows(
        mut self,
        names: Vec<String>,
        constraints: Vec<Constraint>,
        map: impl Fn(&mut [f64]),
    ) -> Result<Self> {
        if names.len() != self.names.len() || constraints.len() != self.names.len() {
            return Err(Error::Spec(
                "row transform must preserve the parameter count".to_string(),
            ));
        }
        let dim = names.len();
        for chain in &mut self.values {
            for row in chain.chunks_mut(dim) {
                map(row);
            }
        }
        self.names = names;
        self.constraints = constraints;
        Ok(self)
    }
}

struct ChainOutput {
    values: Vec<f64>,
    divergent: Vec<bool>,
    depth_hit: Vec<bool>,
}

fn run_chain<T: Target + ?Sized>(
    target: &T,
    config: &SamplerConfig,
    chain_idx: usize,
) -> Result<ChainOutput> {
    let dim = target.dim();
    let constraints = target.constraints();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chain_idx as u64 + 1);

    let mut q = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut logp = f64::NEG_INFINITY;
    let mut initialized = false;
    for _ in 0..100 {
        for qi in q.iter_mut() {
            *qi = -2.0 + 4.0 * rng.gen::<f64>();
        }
        logp = target.logp_grad(&q, &mut grad);
        if logp.is_finite() && grad.iter().all(|g| g.is_finite()) {
            initialized = true;
            break;
        }
    }
    if !initialized {
        return Err(Error::Init(format!(
            "no finite log density found in 100 initialization attempts (chain {chain_idx})"
        )));
    }

    let mut inv_mass = vec![1.0; dim];
    let schedule = WarmupSchedule::new(config.warmup);
    let state0 = State {
        q: q.clone(),
        p: vec![0.0; dim],
        grad: grad.clone(),
        logp,
    };
    let mut eps = find_reasonable_epsilon(target, &state0, &inv_mass, &mut rng);
    let mut da = DualAveraging::new(eps, config.target_accept);
    let mut var_est = RunningVariance::new(dim);

    let mut values = Vec::with_capacity(config.iter * dim);
    let mut divergent = Vec::with_capacity(config.iter);
    let mut depth_hit = Vec::with_capacity(config.iter);

    for i in 0..config.iter {
        let (state, stats) = nuts_draw(
            target,
            q,
            grad,
            logp,
            eps,
            &inv_mass,
            config.max_treedepth,
            &mut rng,
        );
        q = state.q;
        grad = state.grad;
        logp = state.logp;
        for (d, c) in constraints.iter().enumerate() {
            values.push(c.wrap(c.constrain(q[d])));
        }
        divergent.push(stats.divergent);
        depth_hit.push(stats.depth_saturated);

        if i < config.warmup {
            da.update(stats.accept_stat());
            eps = da.current();
            if schedule.in_variance_phase(i) {
                var_est.add(&q);
            }
            if schedule.is_window_end(i) {
                inv_mass = var_est.regularized_variance();
                var_est.reset();
                let here = State {
                    q: q.clone(),
                    p: vec![0.0; dim],
                    grad: grad.clone(),
                    logp,
                };
                eps = find_reasonable_epsilon(target, &here, &inv_mass, &mut rng);
                da = DualAveraging::new(eps, config.target_accept);
            }
            if i + 1 == config.warmup {
                eps = da.adapted();
            }
        }
    }

    Ok(ChainOutput {
        values,
        divergent,
        depth_hit,
    })
}

/// Runs NUTS over all configured chains and assembles [`Draws`].
///
/// Chains run on their own threads but the output is a pure function of
/// (target, config).
pub fn nuts_sample<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<Draws> {
    config.validate()?;
    let dim = target.dim();
    if dim == 0 {
        return Err(Error::Spec("target has no parameters".to_string()));
    }
    let names = target.names();
    let constraints = target.constraints();
    if names.len() != dim || constraints.len() != dim {
        return Err(Error::Spec(
            "target names/constraints do not match its dimension".to_string(),
        ));
    }

    let outputs: Vec<Result<ChainOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.chains)
            .map(|c| scope.spawn(move || run_chain(target, config, c)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut values = Vec::with_capacity(config.chains);
    let mut divergent = Vec::with_capacity(config.chains);
    let mut depth_hit = Vec::with_capacity(config.chains);
    for out in outputs {
        let out = out?;
        values.push(out.values);
        divergent.push(out.divergent);
        depth_hit.push(out.depth_hit);
    }
    Draws::from_parts(
        names,
        constraints,
        config.warmup,
        config.iter - config.warmup,
        values,
        divergent,
        depth_hit,
    )
}
