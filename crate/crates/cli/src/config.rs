//! Experiment configuration and the flat `key=value` config format.
//!
//! Every key may carry a comma-separated list; a sweep runs the Cartesian
//! product of all lists. Recognized keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `method` | `tadl1`, `radl0` or `radl1` |
//! | `problem` | `lcqp`, `spca` or `lcqm` |
//! | `param` (alias `M`, `s`) | curvature target or SPCA sparsity |
//! | `seed` | instance seed |
//! | `rho`, `eta` | relative tolerances |
//! | `n` | SPCA order |
//! | `lambda0`, `gamma` | adaptive stepsize settings |
//! | `max_outer`, `max_total_inner` | iteration budgets |
//! | `out`, `format` | output path and `csv`/`json` |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aidal_core::aidal::{DEFAULT_MAX_OUTER, DEFAULT_MAX_TOTAL_INNER};
use aidal_core::benchmarks::Family;
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Fixed stepsize `1/(2m)`, `(chi, theta) = (1/6, 1/2)`.
    Tadl1,
    /// Adaptive stepsize, `(chi, theta) = (1, 0)`, heuristic potential.
    Radl0,
    /// Adaptive stepsize, `(chi, theta) = (1/6, 1/2)`.
    Radl1,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tadl1 => "tadl1",
            Method::Radl0 => "radl0",
            Method::Radl1 => "radl1",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tadl1" => Ok(Method::Tadl1),
            "radl0" => Ok(Method::Radl0),
            "radl1" => Ok(Method::Radl1),
            other => Err(anyhow!("unknown method '{other}' (expected tadl1, radl0 or radl1)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(anyhow!("unknown output format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub problem: Family,
    /// `M` for `lcqp`/`lcqm`, `s` for `spca`.
    pub param: f64,
    pub rho: f64,
    pub eta: f64,
    pub seed: u64,
    /// SPCA order.
    pub n: Option<usize>,
    pub lambda0: f64,
    pub gamma: f64,
    pub max_outer: usize,
    pub max_total_inner: usize,
}

impl ExperimentConfig {
    pub fn new(method: Method, problem: Family, param: f64, seed: u64) -> Self {
        let (rho, eta) = problem.default_tolerances();
        Self {
            method,
            problem,
            param,
            rho,
            eta,
            seed,
            n: None,
            lambda0: 10.0,
            gamma: 2.0,
            max_outer: DEFAULT_MAX_OUTER,
            max_total_inner: DEFAULT_MAX_TOTAL_INNER,
        }
    }
}

/// Parsed config file: each key maps to one or more raw values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, Vec<String>>,
}

const KEYS: &[&str] = &[
    "method",
    "problem",
    "param",
    "seed",
    "rho",
    "eta",
    "n",
    "lambda0",
    "gamma",
    "max_outer",
    "max_total_inner",
    "out",
    "format",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    match key {
        "M" | "s" => Some("param"),
        k => KEYS.iter().find(|known| **known == k).copied(),
    }
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key=value, got '{line}'", lineno + 1))?;
            let values: Vec<String> =
                value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            kv.set(key.trim(), values).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(kv)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Sets (or overrides) a key.
    pub fn set(&mut self, key: &str, values: Vec<String>) -> Result<()> {
        let key = canonical_key(key).ok_or_else(|| anyhow!("unknown key '{key}'"))?;
        self.entries.insert(key.to_string(), values);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[String]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    fn single(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some([v]) => Ok(Some(v.as_str())),
            Some(vs) => bail!("key '{key}' takes a single value, got {}", vs.len()),
        }
    }

    pub fn out_path(&self) -> Result<Option<PathBuf>> {
        Ok(self.single("out")?.map(PathBuf::from))
    }

    pub fn format(&self) -> Result<Option<OutputFormat>> {
        self.single("format")?.map(str::parse).transpose()
    }

    /// Expands the Cartesian product of all listed values into configs, in
    /// the order method, problem, param, seed.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        fn list<T: FromStr>(kv: &KeyValues, key: &str) -> Result<Option<Vec<T>>>
        where
            T::Err: fmt::Display,
        {
            kv.get(key)
                .map(|vs| {
                    vs.iter()
                        .map(|v| v.parse::<T>().map_err(|e| anyhow!("invalid value '{v}' for '{key}': {e}")))
                        .collect()
                })
                .transpose()
        }
        let methods: Vec<Method> = list(self, "method")?.ok_or_else(|| anyhow!("missing key 'method'"))?;
        let problems: Vec<Family> = list(self, "problem")?.ok_or_else(|| anyhow!("missing key 'problem'"))?;
        let params: Vec<f64> = list(self, "param")?.ok_or_else(|| anyhow!("missing key 'param' (or 'M'/'s')"))?;
        let seeds: Vec<u64> = list(self, "seed")?.unwrap_or_else(|| vec![0]);
        let scalar = |key: &str| -> Result<Option<f64>> {
            self.single(key)?
                .map(|v| v.parse::<f64>().map_err(|e| anyhow!("invalid value for '{key}': {e}")))
                .transpose()
        };
        let count = |key: &str| -> Result<Option<usize>> {
            self.single(key)?
                .map(|v| v.parse::<usize>().map_err(|e| anyhow!("invalid value for '{key}': {e}")))
                .transpose()
        };
        let (rho, eta) = (scalar("rho")?, scalar("eta")?);
        let (lambda0, gamma) = (scalar("lambda0")?, scalar("gamma")?);
        let (n, max_outer, max_total_inner) = (count("n")?, count("max_outer")?, count("max_total_inner")?);

        let mut out = Vec::new();
        for &method in &methods {
            for &problem in &problems {
                for &param in &params {
                    for &seed in &seeds {
                        let mut cfg = ExperimentConfig::new(method, problem, param, seed);
                        cfg.rho = rho.unwrap_or(cfg.rho);
                        cfg.eta = eta.unwrap_or(cfg.eta);
                        cfg.lambda0 = lambda0.unwrap_or(cfg.lambda0);
                        cfg.gamma = gamma.unwrap_or(cfg.gamma);
                        cfg.n = n;
                        cfg.max_outer = max_outer.unwrap_or(cfg.max_outer);
                        cfg.max_total_inner = max_total_inner.unwrap_or(cfg.max_total_inner);
                        out.push(cfg);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_aliases() {
        let kv =
            KeyValues::parse("method = tadl1, radl0\nproblem=lcqp\nM=1e2,1e3 # sizes\nseed=1,2\nrho=1e-4\n").unwrap();
        let cfgs = kv.expand().unwrap();
        assert_eq!(cfgs.len(), 8);
        assert_eq!(cfgs[0].method, Method::Tadl1);
        assert_eq!(cfgs[0].param, 100.0);
        assert_eq!(cfgs[1].seed, 2);
        assert_eq!(cfgs[7].method, Method::Radl0);
        assert!(cfgs.iter().all(|c| c.rho == 1e-4 && c.eta == 1e-3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KeyValues::parse("method tadl1").is_err());
        assert!(KeyValues::parse("colour=red").is_err());
        assert!(KeyValues::parse("method=foo\nproblem=lcqp\nparam=1").unwrap().expand().is_err());
        assert!(KeyValues::parse("problem=lcqp\nparam=1").unwrap().expand().is_err());
    }

    #[test]
    fn empty_list_expands_to_nothing() {
        let kv = KeyValues::parse("method=\nproblem=lcqp\nparam=1").unwrap();
        assert!(kv.expand().unwrap().is_empty());
    }

    #[test]
    fn spca_defaults() {
        let cfg = ExperimentConfig::new(Method::Radl0, Family::Spca, 5.0, 1);
        assert_eq!((cfg.rho, cfg.eta), (1e-4, 1e-4));
        assert_eq!(cfg.lambda0, 10.0);
    }
}
