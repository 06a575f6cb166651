//! Plain-text instance descriptors.
//!
//! An instance is stored as the inputs of its generator, one `key=value`
//! pair per line, and regenerated on load:
//!
//! ```text
//! family=lcqp
//! seed=42
//! param=100
//! ```
//!
//! `param` is the curvature target `M` for `lcqp`/`lcqm` and the sparsity
//! `s` for `spca`. The optional key `n` sets the SPCA order. Blank lines and
//! lines starting with `#` are ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{gen_lcqm, gen_lcqp, gen_spca, SPCA_DEFAULT_N};
use crate::error::BenchmarkError;
use crate::problem::ConstrainedProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lcqp,
    Spca,
    Lcqm,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Lcqp => "lcqp",
            Family::Spca => "spca",
            Family::Lcqm => "lcqm",
        }
    }

    /// Default `(rho, eta)` of the relative stopping test.
    pub fn default_tolerances(self) -> (f64, f64) {
        match self {
            Family::Spca => (1e-4, 1e-4),
            Family::Lcqp | Family::Lcqm => (1e-3, 1e-3),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = BenchmarkError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lcqp" => Ok(Family::Lcqp),
            "spca" => Ok(Family::Spca),
            "lcqm" => Ok(Family::Lcqm),
            other => Err(BenchmarkError::Parameter(format!("unknown problem family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub seed: u64,
    pub param: f64,
    /// SPCA order; ignored by the other families.
    pub n: Option<usize>,
}

/// A generated problem with its starting point.
pub struct GeneratedInstance {
    pub spec: InstanceSpec,
    pub problem: ConstrainedProblem,
    pub z0: Vec<f64>,
    /// Relative-interior feasible point, when the generator constructs one.
    pub slater_point: Option<Vec<f64>>,
}

impl InstanceSpec {
    pub fn new(family: Family, seed: u64, param: f64) -> Self {
        Self { family, seed, param, n: None }
    }

    fn sparsity(&self) -> Result<usize, BenchmarkError> {
        if self.param >= 1.0 && self.param.fract() == 0.0 && self.param.is_finite() {
            Ok(self.param as usize)
        } else {
            Err(BenchmarkError::Parameter(format!("SPCA sparsity must be a positive integer, got {}", self.param)))
        }
    }

    pub fn generate(&self) -> Result<GeneratedInstance, BenchmarkError> {
        let (problem, z0, slater_point) = match self.family {
            Family::Lcqp => {
                let (p, inst) = gen_lcqp(self.seed, self.param)?;
                (p, inst.z0, Some(inst.slater_point))
            }
            Family::Spca => {
                let (p, inst) = gen_spca(self.seed, self.sparsity()?, self.n.unwrap_or(SPCA_DEFAULT_N))?;
                (p, inst.z0, None)
            }
            Family::Lcqm => {
                let (p, inst) = gen_lcqm(self.seed, self.param)?;
                (p, inst.z0, Some(inst.slater_point))
            }
        };
        Ok(GeneratedInstance { spec: self.clone(), problem, z0, slater_point })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("family={}\nseed={}\nparam={}\n", self.family, self.seed, self.param);
        if let Some(n) = self.n {
            out.push_str(&format!("n={n}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, BenchmarkError> {
        let bad = |msg: String| BenchmarkError::Parameter(msg);
        let (mut family, mut seed, mut param, mut n) = (None, None, None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
            let value = value.trim();
            match key.trim() {
                "family" => family = Some(value.parse::<Family>()?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?),
                "param" => param = Some(value.parse::<f64>().map_err(|e| bad(format!("param: {e}")))?),
                "n" => n = Some(value.parse::<usize>().map_err(|e| bad(format!("n: {e}")))?),
                other => return Err(bad(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        Ok(Self {
            family: family.ok_or_else(|| bad("missing key 'family'".into()))?,
            seed: seed.ok_or_else(|| bad("missing key 'seed'".into()))?,
            param: param.ok_or_else(|| bad("missing key 'param'".into()))?,
            n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let spec = InstanceSpec { family: Family::Spca, seed: 9, param: 5.0, n: Some(20) };
        assert_eq!(InstanceSpec::from_text(&spec.to_text()).unwrap(), spec);
        let spec = InstanceSpec::new(Family::Lcqp, 1, 1e6);
        assert_eq!(InstanceSpec::from_text(&spec.to_text()).unwrap(), spec);
    }

    #[test]
    fn parse_errors() {
        assert!(InstanceSpec::from_text("family=lcqp\nseed=1\n").is_err());
        assert!(InstanceSpec::from_text("family=foo\nseed=1\nparam=2\n").is_err());
        assert!(InstanceSpec::from_text("family=lcqp\nseed=1\nparam=2\nwhat=3\n").is_err());
        assert!(InstanceSpec::from_text("# comment\n\nfamily=lcqm\nseed=1\nparam=2\n").is_ok());
    }

    #[test]
    fn regeneration_is_deterministic() {
        let spec = InstanceSpec::new(Family::Lcqp, 17, 100.0);
        let a = spec.generate().unwrap();
        let b = InstanceSpec::from_text(&spec.to_text()).unwrap().generate().unwrap();
        assert_eq!(a.z0, b.z0);
        assert_eq!(a.problem.constraint.rhs(), b.problem.constraint.rhs());
    }
}
