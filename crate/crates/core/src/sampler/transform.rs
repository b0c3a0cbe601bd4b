//! Constraint transforms between the sampler's unconstrained scale and each
//! parameter's support.
//!
//! All transforms are smooth monotone bijections (circular is the identity;
//! wrapping happens when draws are recorded). Each returns the constrained
//! value, the log-Jacobian of the map, and the derivative of that
//! log-Jacobian with respect to the unconstrained value, so targets can chain
//! gradients without re-deriving the calculus per model.

use crate::dist::special::{log1p_exp, logistic};
use crate::error::{Error, Result};

/// Support of one sampled parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Unbounded,
    /// (0, ∞) via exp.
    Positive,
    /// (lo, ∞) via lo + exp.
    LowerBounded(f64),
    /// (lo, hi) via scaled logistic.
    Interval(f64, f64),
    /// Angle; sampled unconstrained against a periodic density, reported in
    /// [0, 2π).
    Circular,
}

impl Constraint {
    /// Maps an unconstrained value to (constrained, log_jacobian, dlogjac_du).
    pub fn transform(self, u: f64) -> (f64, f64, f64) {
        match self {
            Constraint::Unbounded | Constraint::Circular => (u, 0.0, 0.0),
            Constraint::Positive => (u.exp(), u, 1.0),
            Constraint::LowerBounded(lo) => (lo + u.exp(), u, 1.0),
            Constraint::Interval(lo, hi) => {
                let s = logistic(u);
                // ln s + ln(1-s) written through log1p_exp so both tails stay
                // finite; d/du = 1 - 2s.
                let log_jac = (hi - lo).ln() - log1p_exp(u) - log1p_exp(-u);
                (lo + (hi - lo) * s, log_jac, 1.0 - 2.0 * s)
            }
        }
    }

    /// The constrained value alone.
    pub fn constrain(self, u: f64) -> f64 {
        self.transform(u).0
    }

    /// Wraps a constrained value into the reported support; only circular
    /// parameters change.
    pub fn wrap(self, x: f64) -> f64 {
        match self {
            Constraint::Circular => x.rem_euclid(2.0 * std::f64::consts::PI),
            _ => x,
        }
    }

    /// Whether a reported draw lies in the support. The lower-bounded
    /// support is closed: lo + exp(u) rounds to exactly lo once exp(u)
    /// drops below the bound's ulp, and the bound itself is a valid value.
    pub fn contains(self, x: f64) -> bool {
        match self {
            Constraint::Unbounded => x.is_finite(),
            Constraint::Positive => x > 0.0,
            Constraint::LowerBounded(lo) => x >= lo,
            Constraint::Interval(lo, hi) => x >= lo && x <= hi,
            Constraint::Circular => (0.0..2.0 * std::f64::consts::PI).contains(&x),
        }
    }

    /// Parses the textual form produced by [`Display`](std::fmt::Display).
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "unbounded" => return Ok(Constraint::Unbounded),
            "positive" => return Ok(Constraint::Positive),
            "circular" => return Ok(Constraint::Circular),
            _ => {}
        }
        let parse_args = |inner: &str| -> Result<Vec<f64>> {
            inner
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Spec(format!("malformed constraint '{text}'")))
                })
                .collect()
        };
        if let Some(inner) = text.strip_prefix("lower(").and_then(|r| r.strip_suffix(')')) {
            let args = parse_args(inner)?;
            if args.len() == 1 {
                return Ok(Constraint::LowerBounded(args[0]));
            }
        } else if let Some(inner) = text
            .strip_prefix("interval(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let args = parse_args(inner)?;
            if args.len() == 2 && args[0] < args[1] {
                return Ok(Constraint::Interval(args[0], args[1]));
            }
        }
        Err(Error::Spec(format!("malformed constraint '{text}'")))
    }
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Constraint::Unbounded => write!(f, "unbounded"),
            Constraint::Positive => write!(f, "positive"),
            Constraint::LowerBounded(lo) => write!(f, "lower({lo})"),
            Constraint::Interval(lo, hi) => write!(f, "interval({lo},{hi})"),
            Constraint::Circular => write!(f, "circular"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn transform_spot_values() {
        assert_eq!(Constraint::Unbounded.transform(3.7), (3.7, 0.0, 0.0));
        let (x, lj, dj) = Constraint::Positive.transform(0.0);
        assert_eq!((x, lj, dj), (1.0, 0.0, 1.0));
        let (x, lj, dj) = Constraint::Interval(0.0, 1.0).transform(0.0);
        assert_eq!(x, 0.5);
        assert_relative_eq!(lj, 0.25_f64.ln(), epsilon = 1e-15);
        assert_eq!(dj, 0.0);
        let (x, lj, _) = Constraint::LowerBounded(1.0).transform(0.0);
        assert_eq!(x, 2.0);
        assert_eq!(lj, 0.0);
        assert_eq!(Constraint::Circular.transform(-1.0), (-1.0, 0.0, 0.0));
    }

    #[test]
    fn log_jacobian_matches_derivative_of_map() {
        // exp(log_jacobian) must equal dx/du for every monotone transform.
        let constraints = [
            Constraint::Unbounded,
            Constraint::Positive,
            Constraint::LowerBounded(1.0),
            Constraint::Interval(-2.0, 5.0),
            Constraint::Circular,
        ];
        let h = 1e-6;
        for c in constraints {
            for &u in &[-3.0, -0.7, 0.0, 0.9, 2.5] {
                let (_, lj, dj) = c.transform(u);
                let dxdu = (c.constrain(u + h) - c.constrain(u - h)) / (2.0 * h);
                assert_relative_eq!(lj.exp(), dxdu, max_relative = 1e-8);
                let fd_lj = {
                    let (_, lj_hi, _) = c.transform(u + h);
                    let (_, lj_lo, _) = c.transform(u - h);
                    (lj_hi - lj_lo) / (2.0 * h)
                };
                assert_relative_eq!(dj, fd_lj, epsilon = 1e-8, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn interval_tails_stay_finite() {
        let c = Constraint::Interval(0.0, 1.0);
        let (x, lj, dj) = c.transform(-700.0);
        assert!(x >= 0.0 && x < 1e-300);
        assert!(lj.is_finite() && lj < -600.0);
        assert_relative_eq!(dj, 1.0, epsilon = 1e-12);
        let (x, _, dj) = c.transform(700.0);
        assert!(x <= 1.0);
        assert_relative_eq!(dj, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn constrained_values_satisfy_support() {
        for &u in &[-40.0, -1.0, 0.0, 2.0, 40.0] {
            assert!(Constraint::Positive.contains(Constraint::Positive.constrain(u)));
            let c = Constraint::Interval(2.0, 3.0);
            assert!(c.contains(c.constrain(u)));
            let c = Constraint::LowerBounded(1.0);
            assert!(c.contains(c.constrain(u)));
            let c = Constraint::Circular;
            assert!(c.contains(c.wrap(c.constrain(u))));
        }
    }

    #[test]
    fn circular_wrap_reduces_modulo_two_pi() {
        let c = Constraint::Circular;
        let tau = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(c.wrap(tau + 1.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.wrap(-1.0), tau - 1.0, epsilon = 1e-12);
        assert_eq!(Constraint::Positive.wrap(5.0), 5.0);
    }

    #[test]
    fn display_parse_round_trip() {
        let cases = [
            Constraint::Unbounded,
            Constraint::Positive,
            Constraint::LowerBounded(1.0),
            Constraint::Interval(0.0, 255.0),
            Constraint::Interval(-1.5, 2.25),
            Constraint::Circular,
        ];
        for c in cases {
            assert_eq!(Constraint::parse(&c.to_string()).unwrap(), c);
        }
        assert!(Constraint::parse("interval(3,1)").is_err());
        assert!(Constraint::parse("banana").is_err());
    }
}
