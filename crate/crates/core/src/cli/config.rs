//! Flat `key = value` configuration with per-suite defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::CouplingParams;

/// Validated configuration of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub suite: String,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    /// Field degree `N`.
    pub degree: usize,
    /// Measure grid size `M`.
    pub m: usize,
    pub n_samples: usize,
    pub dt: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    pub xi: f64,
    /// Size of the single-parameter perturbations in the invariance suite.
    pub delta: f64,
    /// Samples per `eps` in the inverse-map sweep.
    pub sweep_samples: usize,
    /// Paths of the bracket check.
    pub bracket_paths: usize,
    /// Extra invariance tuple: overrides of `(alpha, chi, beta, c)` at pure gravity.
    pub coupling: BTreeMap<String, f64>,
}

const KEYS: [&str; 14] = [
    "n", "m", "n_samples", "dt", "t", "xi", "delta", "sweep_samples", "bracket_paths", "alpha", "chi", "beta", "c", "seed",
];

impl ExperimentConfig {
    /// Defaults at the scale used by the acceptance runs.
    pub fn defaults(suite: &str, seed: u64, out: PathBuf) -> Result<Self> {
        if !super::SUITES.contains(&suite) {
            return Err(Error::UnknownSuite(suite.to_string()));
        }
        let pg = CouplingParams::pure_gravity();
        let (degree, m, n_samples) = match suite {
            "identities" => (16, 256, 100),
            "gmc" => (64, 256, 10_000),
            "loewner" => (16, 256, 100),
            "invariance" => (64, 512, 100_000),
            "dirichlet" => (64, 512, 20_000),
            "dynamics" => (64, 256, 10_000),
            _ => (64, 256, 20_000),
        };
        Ok(ExperimentConfig {
            suite: suite.to_string(),
            seed,
            out,
            degree,
            m,
            n_samples,
            dt: 1e-3,
            horizon: 0.5,
            xi: pg.xi,
            delta: 0.1,
            sweep_samples: 1000,
            bracket_paths: 1000,
            coupling: BTreeMap::new(),
        })
    }

    /// Apply `key = value` pairs in order; later pairs win.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        for (k, v) in pairs {
            let key = k.trim().to_ascii_lowercase();
            let v = v.trim();
            match key.as_str() {
                "n" => self.degree = parse(&key, v)?,
                "m" => self.m = parse(&key, v)?,
                "n_samples" => self.n_samples = parse(&key, v)?,
                "dt" => self.dt = parse(&key, v)?,
                "t" => self.horizon = parse(&key, v)?,
                "xi" => self.xi = parse(&key, v)?,
                "delta" => self.delta = parse(&key, v)?,
                "sweep_samples" => self.sweep_samples = parse(&key, v)?,
                "bracket_paths" => self.bracket_paths = parse(&key, v)?,
                "seed" => self.seed = parse(&key, v)?,
                "alpha" | "chi" | "beta" | "c" => {
                    self.coupling.insert(key.clone(), parse(&key, v)?);
                }
                _ => return Err(Error::Config(format!("unknown key `{k}`; expected one of {}", KEYS.join(", ")))),
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return bad(format!("xi = {} must lie in (0, 1)", self.xi));
        }
        if self.degree == 0 || 4 * self.degree > self.m {
            return bad(format!("need 1 <= N <= M/4, got N = {}, M = {}", self.degree, self.m));
        }
        if self.n_samples < 100 {
            return bad(format!("n_samples = {} is below 100", self.n_samples));
        }
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.dt <= self.horizon) {
            return bad(format!("need 0 < dt <= T, got dt = {}, T = {}", self.dt, self.horizon));
        }
        if !(self.delta.is_finite() && self.delta != 0.0) {
            return bad("delta must be finite and nonzero".into());
        }
        if self.sweep_samples < 100 || self.bracket_paths < 100 {
            return bad("sweep_samples and bracket_paths must be at least 100".into());
        }
        if self.coupling.values().any(|v| !v.is_finite()) {
            return bad("coupling overrides must be finite".into());
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("cannot parse `{v}` for `{key}`")))
}

/// Split `key=value`.
pub fn split_pair(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Config(format!("expected key=value, got `{s}`")))
}

/// Pairs of a config file: one `key = value` per line, `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(&str, &str)>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(split_pair)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(suite: &str) -> ExperimentConfig {
        ExperimentConfig::defaults(suite, 1, PathBuf::from("out")).unwrap()
    }

    #[test]
    fn overrides_apply_in_order() {
        let mut c = cfg("gmc");
        c.apply([("n", "8"), ("M", "64"), ("n", "16"), ("alpha", "-1.5")]).unwrap();
        assert_eq!((c.degree, c.m), (16, 64));
        assert_eq!(c.coupling["alpha"], -1.5);
    }

    #[test]
    fn validation_rules() {
        for (k, v) in [("xi", "1.0"), ("xi", "0"), ("n", "65"), ("n_samples", "99"), ("dt", "-1"), ("bogus", "1")] {
            let mut c = cfg("gmc");
            assert!(c.apply([(k, v)]).is_err(), "{k}={v}");
        }
        let mut c = cfg("gmc");
        assert!(c.apply([("n", "x")]).is_err());
        assert!(ExperimentConfig::defaults("nope", 0, PathBuf::new()).is_err());
    }

    #[test]
    fn file_format() {
        let text = "# comment\n n = 8 \nm=64 # trailing\n\n";
        assert_eq!(parse_file(text).unwrap(), vec![("n", "8"), ("m", "64")]);
        assert!(parse_file("n 8").is_err());
    }

    #[test]
    fn defaults_are_valid() {
        for s in super::super::SUITES {
            cfg(s).validate().unwrap();
        }
    }
}
