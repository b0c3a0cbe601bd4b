//! Warmup adaptation: dual-averaging step size, diagonal mass matrix from
//! expanding variance windows, and the initial step-size search.

use rand::Rng;
use rand_distr::StandardNormal;

use super::nuts::{kinetic, leapfrog, State};
use super::Target;

/// Nesterov dual averaging of ln ε toward a target acceptance statistic.
pub(crate) struct DualAveraging {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    count: usize,
    target: f64,
}

const DA_GAMMA: f64 = 0.05;
const DA_T0: f64 = 10.0;
const DA_KAPPA: f64 = 0.75;

impl DualAveraging {
    pub fn new(eps0: f64, target: f64) -> Self {
        DualAveraging {
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            count: 0,
            target,
        }
    }

    pub fn update(&mut self, accept_stat: f64) {
        self.count += 1;
        let n = self.count as f64;
        let eta = 1.0 / (n + DA_T0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_stat);
        self.log_eps = self.mu - n.sqrt() / DA_GAMMA * self.h_bar;
        let w = n.powf(-DA_KAPPA);
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar;
    }

    /// Step size to explore with on the next iteration.
    pub fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Smoothed step size to freeze after warmup.
    pub fn adapted(&self) -> f64 {
        if self.count == 0 {
            self.current()
        } else {
            self.log_eps_bar.exp()
        }
    }
}

/// Streaming mean/variance over unconstrained draws (Welford).
pub(crate) struct RunningVariance {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        RunningVariance {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn add(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for i in 0..x.len() {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    pub fn reset(&mut self) {
        self.n = 0;
        self.mean.iter_mut().for_each(|m| *m = 0.0);
        self.m2.iter_mut().for_each(|m| *m = 0.0);
    }

    /// Sample variance shrunk toward 1e-3, weighted n/(n+5); keeps the mass
    /// matrix positive and sane on short or degenerate windows.
    pub fn regularized_variance(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.m2
            .iter()
            .map(|m2| {
                let var = if self.n > 1 { m2 / (n - 1.0) } else { 0.0 };
                let v = n / (n + 5.0) * var + 1e-3 * (5.0 / (n + 5.0));
                if v > 0.0 && v.is_finite() {
                    v
                } else {
                    1e-3
                }
            })
            .collect()
    }
}

/// Warmup phase boundaries: a step-size-only opening buffer, doubling
/// variance-estimation windows, and a step-size-only closing buffer.
pub(crate) struct WarmupSchedule {
    init_buffer: usize,
    term_start: usize,
    /// Exclusive end iteration of each variance window.
    window_ends: Vec<usize>,
}

impl WarmupSchedule {
    pub fn new(warmup: usize) -> Self {
        // Too short for meaningful variance estimation: step size only.
        if warmup < 20 {
            return WarmupSchedule {
                init_buffer: warmup,
                term_start: warmup,
                window_ends: Vec::new(),
            };
        }
        let (init, term, base) = if warmup >= 150 {
            (75, 50, 25)
        } else {
            // Proportional shrink for short warmups.
            let init = (0.15 * warmup as f64) as usize;
            let term = (0.10 * warmup as f64) as usize;
            (init, term, warmup.saturating_sub(init + term))
        };
        let term_start = warmup - term.min(warmup);
        let mut window_ends = Vec::new();
        if base > 0 && init < term_start {
            let mut start = init;
            let mut size = base;
            loop {
                let mut end = start + size;
                if end + 2 * size > term_start || end > term_start {
                    end = term_start;
                }
                window_ends.push(end);
                if end >= term_start {
                    break;
                }
                start = end;
                size *= 2;
            }
        }
        WarmupSchedule {
            init_buffer: init,
            term_start,
            window_ends,
        }
    }

    /// Whether iteration `i` contributes to the variance estimate.
    pub fn in_variance_phase(&self, i: usize) -> bool {
        !self.window_ends.is_empty() && i >= self.init_buffer && i < self.term_start
    }

    /// Whether iteration `i` closes a variance window (mass-matrix update
    /// happens after this iteration's draw).
    pub fn is_window_end(&self, i: usize) -> bool {
        self.window_ends.contains(&(i + 1))
    }
}

/// Doubles or halves ε from 1 until the one-step acceptance probability
/// crosses 1/2, using a single fixed momentum draw.
pub(crate) fn find_reasonable_epsilon<T: Target + ?Sized, R: Rng>(
    target: &T,
    s0: &State,
    inv_mass: &[f64],
    rng: &mut R,
) -> f64 {
    let p: Vec<f64> = inv_mass
        .iter()
        .map(|v| {
            let z: f64 = rng.sample(StandardNormal);
            z / v.sqrt()
        })
        .collect();
    let start = State {
        q: s0.q.clone(),
        p,
        grad: s0.grad.clone(),
        logp: s0.logp,
    };
    let h0 = -start.logp + kinetic(&start.p, inv_mass);
    let log_ratio = |eps: f64| -> f64 {
        let s = leapfrog(target, &start, eps, inv_mass);
        if !s.logp.is_finite() {
            return f64::NEG_INFINITY;
        }
        h0 - (-s.logp + kinetic(&s.p, inv_mass))
    };
    let mut eps = 1.0;
    let half_ln = (0.5_f64).ln();
    let up = log_ratio(eps) > half_ln;
    for _ in 0..100 {
        let lr = log_ratio(eps);
        if up {
            if lr <= half_ln {
                break;
            }
            eps *= 2.0;
        } else {
            if lr > half_ln {
                break;
            }
            eps *= 0.5;
        }
        if !(1e-10..=1e7).contains(&eps) {
            break;
        }
    }
    eps.clamp(1e-10, 1e7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dual_averaging_converges_on_a_synthetic_response() {
        // Acceptance falls with ε as exp(-ε/ε*); dual averaging should home
        // in on the ε whose acceptance equals the 0.8 target.
        let eps_star = 0.37;
        let accept = |eps: f64| (-eps / eps_star).exp();
        let mut da = DualAveraging::new(1.0, 0.8);
        for _ in 0..600 {
            da.update(accept(da.current()));
        }
        let solved = da.adapted();
        assert_relative_eq!(accept(solved), 0.8, max_relative = 0.05);
    }

    #[test]
    fn running_variance_matches_two_pass() {
        let xs = [
            [1.0, -2.0],
            [0.5, 0.0],
            [2.5, 1.0],
            [-1.0, 4.0],
            [0.25, -3.5],
        ];
        let mut rv = RunningVariance::new(2);
        for x in &xs {
            rv.add(x);
        }
        for d in 0..2 {
            let mean: f64 = xs.iter().map(|x| x[d]).sum::<f64>() / xs.len() as f64;
            let var: f64 = xs.iter().map(|x| (x[d] - mean).powi(2)).sum::<f64>()
                / (xs.len() - 1) as f64;
            let n = xs.len() as f64;
            let expected = n / (n + 5.0) * var + 1e-3 * 5.0 / (n + 5.0);
            assert_relative_eq!(rv.regularized_variance()[d], expected, epsilon = 1e-12);
        }
        rv.reset();
        assert_eq!(rv.regularized_variance(), vec![1e-3, 1e-3]);
    }

    #[test]
    fn warmup_schedule_standard_windows() {
        let s = WarmupSchedule::new(1000);
        assert_eq!(s.init_buffer, 75);
        assert_eq!(s.term_start, 950);
        assert_eq!(s.window_ends, vec![100, 150, 250, 450, 950]);
        assert!(!s.in_variance_phase(74));
        assert!(s.in_variance_phase(75));
        assert!(s.in_variance_phase(949));
        assert!(!s.in_variance_phase(950));
        assert!(s.is_window_end(99));
        assert!(!s.is_window_end(100));
        assert!(s.is_window_end(949));
    }

    #[test]
    fn warmup_schedule_short_and_degenerate() {
        let s = WarmupSchedule::new(100);
        // 15/10 split with one merged window covering the rest.
        assert_eq!(s.init_buffer, 15);
        assert_eq!(s.term_start, 90);
        assert_eq!(*s.window_ends.last().unwrap(), 90);
        let s = WarmupSchedule::new(0);
        assert!(s.window_ends.is_empty());
        assert!(!s.in_variance_phase(0));
        let s = WarmupSchedule::new(1);
        assert!(!s.in_variance_phase(0));
    }

    #[test]
    fn window_ends_partition_the_variance_phase() {
        for warmup in [150, 300, 777, 1000, 5000] {
            let s = WarmupSchedule::new(warmup);
            let mut prev = s.init_buffer;
            for &end in &s.window_ends {
                assert!(end > prev, "warmup {warmup}: window [{prev},{end})");
                prev = end;
            }
            assert_eq!(prev, s.term_start, "warmup {warmup}");
        }
    }
}
