//! Leapfrog integrator and the multinomial no-U-turn tree.
//!
//! One transition doubles a trajectory tree outward in a random direction
//! until the generalized U-turn criterion fires, a leaf diverges, or the
//! depth cap is reached. Candidate draws are selected multinomially by leaf
//! weight exp(−energy error) within each subtree, and each completed subtree
//! is merged into the running trajectory with a biased progressive swap that
//! favors fresh subtrees. The U-turn check uses summed momenta across the
//! span plus the two junction checks around every merge, so stale trajectory
//! halves cannot mask a turn at the seam.

use rand::Rng;
use rand_distr::StandardNormal;

use super::Target;
use crate::dist::special::ln_sum_exp;

/// Energy-error threshold beyond which a leaf is declared divergent.
pub(crate) const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// One phase-space point with its cached density and gradient.
#[derive(Clone)]
pub(crate) struct State {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub grad: Vec<f64>,
    pub logp: f64,
}

/// Kinetic energy 0.5 pᵀ M⁻¹ p with diagonal inverse mass.
pub(crate) fn kinetic(p: &[f64], inv_mass: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(inv_mass)
        .map(|(p, v)| v * p * p)
        .sum::<f64>()
}

// Gradient of the kinetic energy (the velocity), used by the U-turn checks.
fn p_sharp(p: &[f64], inv_mass: &[f64]) -> Vec<f64> {
    p.iter().zip(inv_mass).map(|(p, v)| v * p).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + b).collect()
}

// Both ends of the span must still be moving away from each other.
fn no_turn(p_sharp_a: &[f64], p_sharp_b: &[f64], rho: &[f64]) -> bool {
    dot(rho, p_sharp_a) > 0.0 && dot(rho, p_sharp_b) > 0.0
}

/// One leapfrog step of signed size `eps` from `s`.
pub(crate) fn leapfrog<T: Target + ?Sized>(
    target: &T,
    s: &State,
    eps: f64,
    inv_mass: &[f64],
) -> State {
    let mut p: Vec<f64> = s
        .p
        .iter()
        .zip(&s.grad)
        .map(|(p, g)| p + 0.5 * eps * g)
        .collect();
    let q: Vec<f64> = s
        .q
        .iter()
        .zip(&p)
        .zip(inv_mass)
        .map(|((q, p), v)| q + eps * v * p)
        .collect();
    let mut grad = vec![0.0; q.len()];
    let logp = target.logp_grad(&q, &mut grad);
    for (p, g) in p.iter_mut().zip(&grad) {
        *p += 0.5 * eps * g;
    }
    State { q, p, grad, logp }
}

/// Accounting for one transition, fed to adaptation and diagnostics.
pub(crate) struct DrawStats {
    /// Sum over evaluated leaves of min(1, exp(−energy error)).
    pub accept_sum: f64,
    pub n_leapfrog: usize,
    pub divergent: bool,
    /// Completed doublings.
    pub depth: usize,
    pub depth_saturated: bool,
}

impl DrawStats {
    /// Mean Metropolis-style acceptance statistic for dual averaging.
    pub fn accept_stat(&self) -> f64 {
        self.accept_sum / self.n_leapfrog.max(1) as f64
    }
}

struct Subtree {
    /// First and last leaves in integration order.
    first: State,
    last: State,
    chosen: State,
    log_sum_w: f64,
    /// Sum of leaf momenta.
    rho: Vec<f64>,
    turning: bool,
    divergent: bool,
}

#[allow(clippy::too_many_arguments)]
fn build_subtree<T: Target + ?Sized, R: Rng>(
    target: &T,
    from: &State,
    dir: f64,
    depth: usize,
    eps: f64,
    inv_mass: &[f64],
    h0: f64,
    rng: &mut R,
    stats: &mut DrawStats,
) -> Subtree {
    if depth == 0 {
        let s = leapfrog(target, from, dir * eps, inv_mass);
        stats.n_leapfrog += 1;
        let h = if s.logp.is_finite() {
            -s.logp + kinetic(&s.p, inv_mass)
        } else {
            f64::INFINITY
        };
        let delta = h - h0;
        // NaN energy counts as divergent.
        let divergent = !(delta <= DIVERGENCE_THRESHOLD);
        if delta.is_finite() {
            stats.accept_sum += (-delta).exp().min(1.0);
        }
        let log_w = if divergent { f64::NEG_INFINITY } else { -delta };
        let rho = s.p.clone();
        return Subtree {
            first: s.clone(),
            last: s.clone(),
            chosen: s,
            log_sum_w: log_w,
            rho,
            turning: false,
            divergent,
        };
    }
    let t1 = build_subtree(target, from, dir, depth - 1, eps, inv_mass, h0, rng, stats);
    if t1.turning || t1.divergent {
        return t1;
    }
    let t2 = build_subtree(target, &t1.last, dir, depth - 1, eps, inv_mass, h0, rng, stats);
    if t2.turning || t2.divergent {
        return Subtree {
            turning: t2.turning,
            divergent: t2.divergent,
            ..t1
        };
    }
    let log_sum_w = ln_sum_exp(t1.log_sum_w, t2.log_sum_w);
    let chosen = if (rng.gen::<f64>().ln()) < t2.log_sum_w - log_sum_w {
        t2.chosen
    } else {
        t1.chosen
    };
    let rho = add(&t1.rho, &t2.rho);
    let ps_first = p_sharp(&t1.first.p, inv_mass);
    let ps_last = p_sharp(&t2.last.p, inv_mass);
    let mut ok = no_turn(&ps_first, &ps_last, &rho);
    if ok {
        // Junction checks across the subtree seam.
        let rho1 = add(&t1.rho, &t2.first.p);
        ok = no_turn(&ps_first, &p_sharp(&t2.first.p, inv_mass), &rho1);
    }
    if ok {
        let rho2 = add(&t1.last.p, &t2.rho);
        ok = no_turn(&p_sharp(&t1.last.p, inv_mass), &ps_last, &rho2);
    }
    Subtree {
        first: t1.first,
        last: t2.last,
        chosen,
        log_sum_w,
        rho,
        turning: !ok,
        divergent: false,
    }
}

/// One NUTS transition from (q0, grad0, logp0); returns the selected state
/// and the transition statistics.
#[allow(clippy::too_many_arguments)]
pub(crate) fn nuts_draw<T: Target + ?Sized, R: Rng>(
    target: &T,
    q0: Vec<f64>,
    grad0: Vec<f64>,
    logp0: f64,
    eps: f64,
    inv_mass: &[f64],
    max_depth: usize,
    rng: &mut R,
) -> (State, DrawStats) {
    let p0: Vec<f64> = inv_mass
        .iter()
        .map(|v| {
            let z: f64 = rng.sample(StandardNormal);
            z / v.sqrt()
        })
        .collect();
    let h0 = -logp0 + kinetic(&p0, inv_mass);
    let init = State {
        q: q0,
        p: p0,
        grad: grad0,
        logp: logp0,
    };
    let mut earliest = init.clone();
    let mut latest = init.clone();
    let mut chosen = init.clone();
    let mut log_sum_w = 0.0;
    let mut rho = init.p.clone();
    let mut stats = DrawStats {
        accept_sum: 0.0,
        n_leapfrog: 0,
        divergent: false,
        depth: 0,
        depth_saturated: false,
    };
    let mut depth = 0;
    while depth < max_depth {
        let forward = rng.gen::<bool>();
        let dir = if forward { 1.0 } else { -1.0 };
        let start = if forward {
            latest.clone()
        } else {
            earliest.clone()
        };
        let sub = build_subtree(
            target, &start, dir, depth, eps, inv_mass, h0, rng, &mut stats,
        );
        if sub.divergent {
            stats.divergent = true;
            break;
        }
        if sub.turning {
            break;
        }
        // Biased progressive selection: a fresh subtree heavier than the
        // existing tree always wins.
        if (rng.gen::<f64>().ln()) < sub.log_sum_w - log_sum_w {
            chosen = sub.chosen.clone();
        }
        log_sum_w = ln_sum_exp(log_sum_w, sub.log_sum_w);
        let (attach_old, far_old) = if forward {
            (latest.clone(), earliest.clone())
        } else {
            (earliest.clone(), latest.clone())
        };
        let rho_old = rho.clone();
        rho = add(&rho, &sub.rho);
        if forward {
            latest = sub.last.clone();
        } else {
            earliest = sub.last.clone();
        }
        let ps_earliest = p_sharp(&earliest.p, inv_mass);
        let ps_latest = p_sharp(&latest.p, inv_mass);
        let mut ok = no_turn(&ps_earliest, &ps_latest, &rho);
        if ok {
            // Old tree plus the first fresh leaf.
            let rho1 = add(&rho_old, &sub.first.p);
            ok = no_turn(
                &p_sharp(&far_old.p, inv_mass),
                &p_sharp(&sub.first.p, inv_mass),
                &rho1,
            );
        }
        if ok {
            // Attachment leaf plus the fresh subtree.
            let rho2 = add(&attach_old.p, &sub.rho);
            ok = no_turn(
                &p_sharp(&attach_old.p, inv_mass),
                &p_sharp(&sub.last.p, inv_mass),
                &rho2,
            );
        }
        depth += 1;
        if !ok {
            break;
        }
    }
    stats.depth = depth;
    stats.depth_saturated = depth == max_depth && !stats.divergent;
    (chosen, stats)
}
