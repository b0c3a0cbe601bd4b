//! Prior specifications attachable to named model parameters.
//!
//! A [`PriorSpec`] is a family tag plus parameters; a [`PriorMap`] binds specs
//! to parameter names. Models ask each bound prior for its log-density
//! contribution and derivative on the constrained scale. The default (no
//! entry) is the flat improper prior: a literal zero contribution, with
//! support handled entirely by the sampler's constraint transforms. A uniform
//! prior additionally narrows the parameter's support to its interval, and a
//! gamma prior restricts an otherwise unbounded parameter to the positive
//! half-line; both upgrades happen in the model layer when it builds its
//! constraint list.

use crate::dist;
use crate::error::{Error, Result};

/// Prior family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorFamily {
    Flat,
    Uniform,
    Normal,
    Gamma,
    Beta,
}

impl PriorFamily {
    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::Flat => "flat",
            PriorFamily::Uniform => "uniform",
            PriorFamily::Normal => "normal",
            PriorFamily::Gamma => "gamma",
            PriorFamily::Beta => "beta",
        }
    }
}

/// A validated prior: family plus parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    family: PriorFamily,
    params: Vec<f64>,
}

impl PriorSpec {
    /// The default improper prior: zero log-density contribution everywhere
    /// on the parameter's constrained support.
    pub fn flat() -> Self {
        PriorSpec {
            family: PriorFamily::Flat,
            params: Vec::new(),
        }
    }

    /// Builds a validated prior from a family name and parameters.
    ///
    /// Parameter meanings: uniform (lo, hi), normal (mean, sd),
    /// gamma (shape, rate), beta (a, b).
    pub fn new(family: &str, params: &[f64]) -> Result<Self> {
        let family = match family {
            "flat" => PriorFamily::Flat,
            "uniform" => PriorFamily::Uniform,
            "normal" => PriorFamily::Normal,
            "gamma" => PriorFamily::Gamma,
            "beta" => PriorFamily::Beta,
            other => {
                return Err(Error::Spec(format!(
                    "unknown prior family '{other}' (expected flat, uniform, normal, gamma, or beta)"
                )))
            }
        };
        let arity = if family == PriorFamily::Flat { 0 } else { 2 };
        if params.len() != arity {
            return Err(Error::Param(format!(
                "{} prior takes {} parameter(s), got {}",
                family.name(),
                arity,
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Param(format!(
                "{} prior parameters must be finite",
                family.name()
            )));
        }
        match family {
            PriorFamily::Uniform => {
                if params[0] >= params[1] {
                    return Err(Error::Spec(format!(
                        "uniform prior needs lo < hi, got [{}, {}]",
                        params[0], params[1]
                    )));
                }
            }
            PriorFamily::Normal => {
                if params[1] <= 0.0 {
                    return Err(Error::Param(format!(
                        "normal prior sd must be positive, got {}",
                        params[1]
                    )));
                }
            }
            PriorFamily::Gamma | PriorFamily::Beta => {
                if params[0] <= 0.0 || params[1] <= 0.0 {
                    return Err(Error::Param(format!(
                        "{} prior parameters must be positive, got ({}, {})",
                        family.name(),
                        params[0],
                        params[1]
                    )));
                }
            }
            PriorFamily::Flat => {}
        }
        Ok(PriorSpec {
            family,
            params: params.to_vec(),
        })
    }

    /// Parses the textual form produced by [`Display`](std::fmt::Display):
    /// `flat` or `family(a,b)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if !text.contains('(') {
            return PriorSpec::new(text, &[]);
        }
        let open = text.find('(').unwrap();
        if !text.ends_with(')') {
            return Err(Error::Spec(format!(
                "malformed prior '{text}' (expected family(a,b))"
            )));
        }
        let family = &text[..open];
        let inner = &text[open + 1..text.len() - 1];
        let params = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::Param(format!("invalid prior parameter '{}' in '{text}'", s.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?
        };
        PriorSpec::new(family, &params)
    }

    pub fn family(&self) -> PriorFamily {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn is_flat(&self) -> bool {
        self.family == PriorFamily::Flat
    }

    /// Log-density contribution and its derivative with respect to the
    /// parameter value, both on the constrained scale. Values outside a
    /// proper prior's support yield (−∞, 0) rather than an error.
    pub fn log_contrib(&self, value: f64) -> (f64, f64) {
        match self.family {
            PriorFamily::Flat => (0.0, 0.0),
            PriorFamily::Uniform => {
                let (lo, hi) = (self.params[0], self.params[1]);
                if value < lo || value > hi {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (-(hi - lo).ln(), 0.0)
                }
            }
            PriorFamily::Normal => {
                let (mu, sd) = (self.params[0], self.params[1]);
                (
                    dist::normal_lp(value, mu, sd),
                    -(value - mu) / (sd * sd),
                )
            }
            PriorFamily::Gamma => {
                let (shape, rate) = (self.params[0], self.params[1]);
                if value <= 0.0 {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (
                        dist::gamma_lp(value, shape, rate),
                        (shape - 1.0) / value - rate,
                    )
                }
            }
            PriorFamily::Beta => {
                let (a, b) = (self.params[0], self.params[1]);
                if value <= 0.0 || value >= 1.0 {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (
                        dist::beta_lp(value, a, b),
                        (a - 1.0) / value - (b - 1.0) / (1.0 - value),
                    )
                }
            }
        }
    }
}

impl std::fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.params.is_empty() {
            write!(f, "{}", self.family.name())
        } else {
            let parts: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "{}({})", self.family.name(), parts.join(","))
        }
    }
}

/// Named prior assignments for one model fit; at most one entry per name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorMap {
    entries: Vec<(String, PriorSpec)>,
}

impl PriorMap {
    pub fn new() -> Self {
        PriorMap::default()
    }

    /// Adds an entry; a second entry for the same name is rejected.
    pub fn insert(&mut self, name: &str, spec: PriorSpec) -> Result<()> {
        if self.entries.iter().any(|(n, _)| n == name) {
            return Err(Error::Param(format!("duplicate prior for parameter '{name}'")));
        }
        self.entries.push((name.to_string(), spec));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&PriorSpec> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PriorSpec)> {
        self.entries.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Checks every entry names a parameter the model actually has.
    pub fn validate_names(&self, valid: &[String]) -> Result<()> {
        for (name, _) in &self.entries {
            if !valid.iter().any(|v| v == name) {
                return Err(Error::Param(format!(
                    "prior names unknown parameter '{}'; expected one of: {}",
                    name,
                    valid.join(", ")
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn make_prior_accepts_documented_examples() {
        let b = PriorSpec::new("beta", &[1.0, 1.0]).unwrap();
        assert_eq!(b.family(), PriorFamily::Beta);
        let n = PriorSpec::new("normal", &[60.0, 30.0]).unwrap();
        assert_eq!(n.params(), &[60.0, 30.0]);
        assert!(PriorSpec::new("flat", &[]).unwrap().is_flat());
    }

    #[test]
    fn make_prior_rejects_bad_input() {
        assert!(matches!(
            PriorSpec::new("uniform", &[5.0, 0.0]),
            Err(Error::Spec(_))
        ));
        assert!(matches!(
            PriorSpec::new("cauchy", &[0.0, 1.0]),
            Err(Error::Spec(_))
        ));
        assert!(matches!(
            PriorSpec::new("normal", &[0.0, -1.0]),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            PriorSpec::new("gamma", &[0.0, 1.0]),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            PriorSpec::new("beta", &[1.0]),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            PriorSpec::new("flat", &[1.0]),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            PriorSpec::new("normal", &[f64::NAN, 1.0]),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn flat_contributes_exactly_zero() {
        let flat = PriorSpec::flat();
        for &v in &[-1e6, -0.5, 0.0, 3.7, 1e12] {
            assert_eq!(flat.log_contrib(v), (0.0, 0.0));
        }
    }

    #[test]
    fn uniform_contrib_constant_inside_support() {
        let u = PriorSpec::new("uniform", &[0.0, 120.0]).unwrap();
        let (lp, d) = u.log_contrib(60.0);
        assert_relative_eq!(lp, -(120.0_f64.ln()), epsilon = 1e-15);
        assert_eq!(d, 0.0);
        assert_eq!(u.log_contrib(-0.1).0, f64::NEG_INFINITY);
        assert_eq!(u.log_contrib(120.1).0, f64::NEG_INFINITY);
    }

    #[test]
    fn normal_contrib_known_derivative() {
        let n = PriorSpec::new("normal", &[60.0, 30.0]).unwrap();
        let (lp, d) = n.log_contrib(90.0);
        assert_relative_eq!(lp, dist::normal_lp(90.0, 60.0, 30.0), epsilon = 1e-15);
        assert_relative_eq!(d, -30.0 / 900.0, epsilon = 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cases = vec![
            (PriorSpec::new("normal", &[2.0, 1.5]).unwrap(), vec![0.3, 2.0, 5.5]),
            (PriorSpec::new("gamma", &[3.0, 2.0]).unwrap(), vec![0.4, 1.5, 6.0]),
            (PriorSpec::new("beta", &[2.0, 5.0]).unwrap(), vec![0.1, 0.3, 0.8]),
            (PriorSpec::new("uniform", &[-1.0, 4.0]).unwrap(), vec![0.0, 2.0]),
        ];
        for (spec, points) in cases {
            for v in points {
                let h = 1e-6;
                let fd = (spec.log_contrib(v + h).0 - spec.log_contrib(v - h).0) / (2.0 * h);
                let (_, d) = spec.log_contrib(v);
                let scale = d.abs().max(fd.abs()).max(1e-3);
                assert!(
                    (d - fd).abs() / scale < 1e-6,
                    "{spec}: derivative {d} vs finite difference {fd} at {v}"
                );
            }
        }
    }

    #[test]
    fn out_of_support_values_give_neg_infinity() {
        let g = PriorSpec::new("gamma", &[2.0, 1.0]).unwrap();
        assert_eq!(g.log_contrib(0.0).0, f64::NEG_INFINITY);
        let b = PriorSpec::new("beta", &[2.0, 2.0]).unwrap();
        assert_eq!(b.log_contrib(1.0).0, f64::NEG_INFINITY);
    }

    #[test]
    fn display_parse_round_trip() {
        let specs = vec![
            PriorSpec::flat(),
            PriorSpec::new("uniform", &[0.0, 120.0]).unwrap(),
            PriorSpec::new("normal", &[0.000123456789012345, 7.5]).unwrap(),
            PriorSpec::new("gamma", &[2.0, 0.1]).unwrap(),
            PriorSpec::new("beta", &[1.0, 1.0]).unwrap(),
        ];
        for spec in specs {
            let text = spec.to_string();
            let parsed = PriorSpec::parse(&text).unwrap();
            assert_eq!(parsed, spec, "round trip through '{text}'");
        }
        assert!(PriorSpec::parse("normal(1,2").is_err());
        assert!(PriorSpec::parse("normal(a,2)").is_err());
    }

    #[test]
    fn prior_map_rejects_duplicates_and_unknown_names() {
        let mut map = PriorMap::new();
        map.insert("mu", PriorSpec::new("normal", &[0.0, 1.0]).unwrap())
            .unwrap();
        assert!(map.insert("mu", PriorSpec::flat()).is_err());
        map.insert("sigma", PriorSpec::flat()).unwrap();
        assert_eq!(map.len(), 2);
        assert!(map.get("mu").is_some());
        assert!(map.get("nu").is_none());

        let valid = vec!["mu".to_string(), "sigma".to_string(), "nu".to_string()];
        map.validate_names(&valid).unwrap();
        let mut bad = PriorMap::new();
        bad.insert("bogus", PriorSpec::flat()).unwrap();
        assert!(bad.validate_names(&valid).is_err());
    }
}
