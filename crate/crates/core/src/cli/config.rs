use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::manufactured::EquationTag;
use crate::stability::ProblemSpec;

pub const MAX_NX: usize = 4096;
pub const MAX_NT: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    VerifyCarleman,
    StabilityHolder,
    StabilityLog,
    Convergence,
    CoeffCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::VerifyCarleman => "verify-carleman",
            Command::StabilityHolder => "stability-holder",
            Command::StabilityLog => "stability-log",
            Command::Convergence => "convergence",
            Command::CoeffCheck => "coeff-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    /// Perturbation amplitude applied to the base data.
    pub epsilon: f64,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self { epsilon: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleSource {
    /// Closed-form catalog fields and their sources.
    Manufactured,
    /// Difference of two nonlinear solutions, zero sources.
    Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlemanSection {
    pub bundle: BundleSource,
    pub case: String,
    pub tag: EquationTag,
    pub epsilon: f64,
    pub s_list: Vec<f64>,
    pub lambda_list: Vec<f64>,
}

impl Default for CarlemanSection {
    fn default() -> Self {
        Self {
            bundle: BundleSource::Manufactured,
            case: "decay-bubble".into(),
            tag: EquationTag::LinearHjb,
            epsilon: 1e-2,
            s_list: vec![2.0, 4.0, 8.0, 16.0],
            lambda_list: vec![2.0],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub t0: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon_ladder: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRef {
    pub id: String,
    pub tag: EquationTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    /// Empty means the whole catalog for the problem coefficient.
    pub cases: Vec<CaseRef>,
    pub space_n_x: Vec<usize>,
    pub space_n_t: usize,
    pub time_n_t: Vec<usize>,
    pub time_n_x: usize,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            cases: vec![],
            space_n_x: vec![64, 128, 256],
            space_n_t: 512,
            time_n_t: vec![128, 256, 512],
            time_n_x: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffCheckSection {
    /// Grids for the operator-identity residual.
    pub n_x: Vec<usize>,
    /// Random points per catalog case for the source cross-check.
    pub samples: usize,
}

impl Default for CoeffCheckSection {
    fn default() -> Self {
        Self {
            n_x: vec![32, 64, 128],
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the command line when present.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub carleman: CarlemanSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub coeff_check: CoeffCheckSection,
}

pub const DEFAULT_HOLDER_LADDER: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const DEFAULT_LOG_LADDER: [f64; 4] = [5e-3, 5e-4, 5e-5, 5e-6];

fn field(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn cap(name: &str, n: usize, max: usize) -> Result<(), CliError> {
    if n > max {
        return Err(field(name, format!("{n} exceeds the cap {max}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Command-specific checks; core validation runs again inside each operation.
    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(field(
                    "command",
                    format!("config says `{}`, command line says `{}`", c.name(), command.name()),
                ));
            }
        }
        cap("problem.n_x", self.problem.n_x, MAX_NX)?;
        cap("problem.n_t", self.problem.n_t, MAX_NT)?;
        self.problem.validate()?;
        match command {
            Command::Solve => {
                if !self.solve.epsilon.is_finite() {
                    return Err(field("solve.epsilon", "must be finite"));
                }
            }
            Command::VerifyCarleman => {
                let c = &self.carleman;
                if c.s_list.is_empty() {
                    return Err(field("carleman.s_list", "must be non-empty"));
                }
                if c.lambda_list.is_empty() {
                    return Err(field("carleman.lambda_list", "must be non-empty"));
                }
                if c.s_list.iter().chain(&c.lambda_list).any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(field("carleman.s_list", "s and lambda values must be positive"));
                }
            }
            Command::StabilityHolder => {
                if self.stability.t0.is_none() {
                    return Err(field("stability.t0", "missing required field"));
                }
            }
            Command::StabilityLog => {
                if self.stability.alpha.is_none() {
                    return Err(field("stability.alpha", "missing required field"));
                }
            }
            Command::Convergence => {
                let c = &self.convergence;
                for &n in &c.space_n_x {
                    cap("convergence.space_n_x", n, MAX_NX)?;
                }
                for &n in &c.time_n_t {
                    cap("convergence.time_n_t", n, MAX_NT)?;
                }
                cap("convergence.space_n_t", c.space_n_t, MAX_NT)?;
                cap("convergence.time_n_x", c.time_n_x, MAX_NX)?;
            }
            Command::CoeffCheck => {
                for &n in &self.coeff_check.n_x {
                    cap("coeff_check.n_x", n, MAX_NX)?;
                }
            }
        }
        Ok(())
    }

    pub fn holder_ladder(&self) -> Vec<f64> {
        self.stability
            .epsilon_ladder
            .clone()
            .unwrap_or_else(|| DEFAULT_HOLDER_LADDER.to_vec())
    }

    pub fn log_ladder(&self) -> Vec<f64> {
        self.stability
            .epsilon_ladder
            .clone()
            .unwrap_or_else(|| DEFAULT_LOG_LADDER.to_vec())
    }
}

fn canonical(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => {
            let sorted: BTreeMap<String, serde_json::Value> =
                map.into_iter().map(|(k, v)| (k, canonical(v))).collect();
            serde_json::Value::Object(sorted.into_iter().collect())
        }
        serde_json::Value::Array(items) => {
            serde_json::Value::Array(items.into_iter().map(canonical).collect())
        }
        other => other,
    }
}

/// SHA-256 of the config as compact JSON with sorted keys, so formatting,
/// comments and key order in the TOML do not change the hash.
pub fn config_hash(text: &str) -> Result<String, CliError> {
    let tree: toml::Value = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let json = serde_json::to_value(tree).map_err(|e| CliError::Parse(e.to_string()))?;
    let bytes = serde_json::to_vec(&canonical(json)).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(format!("{:x}", Sha256::digest(bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.problem, ProblemSpec::default());
        assert!(c.validate(Command::Solve).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::parse("bogus = 1"), Err(CliError::Parse(_))));
        assert!(RunConfig::parse("[problem]\nnx = 4").is_err());
    }

    #[test]
    fn missing_t0_names_the_field() {
        let c = RunConfig::parse("").unwrap();
        let e = c.validate(Command::StabilityHolder).unwrap_err();
        assert!(e.to_string().contains("stability.t0"));
    }

    #[test]
    fn grid_caps() {
        let c = RunConfig::parse("[problem]\nn_x = 5000").unwrap();
        assert!(c.validate(Command::Solve).unwrap_err().to_string().contains("problem.n_x"));
    }

    #[test]
    fn command_must_agree() {
        let c = RunConfig::parse("command = \"solve\"").unwrap();
        assert!(c.validate(Command::Convergence).is_err());
        assert!(c.validate(Command::Solve).is_ok());
    }

    #[test]
    fn hash_ignores_layout() {
        let a = config_hash("seed = 3\n[problem]\nn_x = 32\nn_t = 16\n").unwrap();
        let b = config_hash("# comment\n[problem]\nn_t = 16\nn_x = 32\n\nseed_unused = 0\n").unwrap();
        let c = config_hash("[problem]\nn_t = 16\nn_x = 32\n\n[other]\n").unwrap();
        let a2 = config_hash("seed=3 # same\n\n[problem]\nn_t = 16\nn_x   =   32\n").unwrap();
        assert_eq!(a, a2);
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_eq!(a.len(), 64);
    }
}
