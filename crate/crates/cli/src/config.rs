//! Experiment configuration files.
//!
//! One experiment per TOML document. Keys:
//!
//! | key | meaning |
//! |---|---|
//! | `experiment` | run label, default `"experiment"` |
//! | `model` | `"circuit"`, `"noninteracting"` or `"single_cue"` |
//! | `cue_dim` | matrix size for `single_cue` |
//! | `dimension`, `linear_size`, `local_dim`, `boundary` | lattice for `circuit`; `noninteracting` uses `local_dim` and `linear_size^dimension` sites |
//! | `ordering`, `ordering_seed` | `"brickwork"`, `"staircase"` or `"random"` for `circuit` |
//! | `bonds`, `gate_order` | explicit circuit instead of `ordering` |
//! | `t_list` | times for the form factor |
//! | `n_samples`, `master_seed`, `workers`, `bins`, `output_dir` | ensemble settings |

use std::path::PathBuf;

use floquet_core::circuit::{
    standard_orderings, validate, Bond, Boundary, CircuitSpec, FloquetModel, OrderingKind,
    MAX_DENSE_DIM,
};
use floquet_core::rng::derive_stream;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Circuit,
    Noninteracting,
    SingleCue,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: String,
    pub model: ModelKind,
    pub cue_dim: Option<usize>,
    pub dimension: Option<usize>,
    pub linear_size: Option<usize>,
    pub local_dim: Option<usize>,
    pub boundary: Option<Boundary>,
    pub ordering: Option<OrderingKind>,
    pub ordering_seed: Option<u64>,
    pub bonds: Option<Vec<Bond>>,
    pub gate_order: Option<Vec<usize>>,
    pub t_list: Vec<i64>,
    pub n_samples: usize,
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub bins: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn default_experiment() -> String {
    "experiment".into()
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.n_samples < 2 {
            return Err(invalid("n_samples must be >= 2"));
        }
        if self.t_list.is_empty() {
            return Err(invalid("t_list must be non-empty"));
        }
        if self.bins == Some(0) {
            return Err(invalid("bins must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be >= 1"));
        }
        if self.experiment.is_empty()
            || !self.experiment.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(invalid("experiment must be a non-empty [A-Za-z0-9_-] label"));
        }
        let model = self.model()?;
        let n = model.hilbert_dim().map_err(|e| invalid(e.to_string()))?;
        if n > MAX_DENSE_DIM {
            return Err(invalid(format!("Hilbert space dimension {n} exceeds {MAX_DENSE_DIM}")));
        }
        Ok(())
    }

    fn require<T: Copy>(&self, v: Option<T>, key: &str) -> Result<T, ConfigError> {
        v.ok_or_else(|| invalid(format!("`{key}` is required for this model")))
    }

    fn forbid<T>(&self, v: &Option<T>, key: &str) -> Result<(), ConfigError> {
        if v.is_some() {
            return Err(invalid(format!("`{key}` does not apply to this model")));
        }
        Ok(())
    }

    /// The circuit described by the lattice keys, for `model = "circuit"`.
    pub fn circuit_spec(&self) -> Result<CircuitSpec, ConfigError> {
        let dimension = self.require(self.dimension, "dimension")?;
        let linear_size = self.require(self.linear_size, "linear_size")?;
        let local_dim = self.require(self.local_dim, "local_dim")?;
        let boundary = self.require(self.boundary, "boundary")?;
        let dim = u32::try_from(dimension)
            .ok()
            .and_then(|d| linear_size.checked_pow(d))
            .and_then(|sites| u32::try_from(sites).ok())
            .and_then(|sites| local_dim.checked_pow(sites));
        if !dim.is_some_and(|n| n <= MAX_DENSE_DIM) {
            return Err(invalid(format!("Hilbert space dimension q^(L^D) must be <= {MAX_DENSE_DIM}")));
        }
        let spec = match (&self.ordering, &self.bonds) {
            (Some(kind), None) => {
                self.forbid(&self.gate_order, "gate_order")?;
                let seed = derive_stream(self.ordering_seed.unwrap_or(0), 0);
                standard_orderings(*kind, dimension, linear_size, local_dim, boundary, seed)
                    .map_err(|e| invalid(e.to_string()))?
            }
            (None, Some(bonds)) => {
                self.forbid(&self.ordering_seed, "ordering_seed")?;
                let spec = CircuitSpec {
                    dimension,
                    linear_size,
                    local_dim,
                    boundary,
                    bonds: bonds.clone(),
                    gate_order: self.gate_order.clone().unwrap_or_default(),
                };
                if self.gate_order.is_none() {
                    spec.with_substep_order()
                } else {
                    spec
                }
            }
            _ => return Err(invalid("give exactly one of `ordering` or `bonds`")),
        };
        let violations = validate(&spec);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(invalid(msgs.join("; ")));
        }
        Ok(spec)
    }

    pub fn model(&self) -> Result<FloquetModel, ConfigError> {
        match self.model {
            ModelKind::SingleCue => {
                for (v, k) in [
                    (self.dimension, "dimension"),
                    (self.linear_size, "linear_size"),
                    (self.local_dim, "local_dim"),
                ] {
                    self.forbid(&v, k)?;
                }
                self.forbid(&self.ordering, "ordering")?;
                self.forbid(&self.bonds, "bonds")?;
                let dim = self.require(self.cue_dim, "cue_dim")?;
                Ok(FloquetModel::SingleCue { dim })
            }
            ModelKind::Noninteracting => {
                self.forbid(&self.cue_dim, "cue_dim")?;
                self.forbid(&self.ordering, "ordering")?;
                self.forbid(&self.bonds, "bonds")?;
                let local_dim = self.require(self.local_dim, "local_dim")?;
                let linear_size = self.require(self.linear_size, "linear_size")?;
                let sites = u32::try_from(self.dimension.unwrap_or(1))
                    .ok()
                    .and_then(|d| linear_size.checked_pow(d))
                    .ok_or_else(|| invalid("lattice too large"))?;
                Ok(FloquetModel::Noninteracting { local_dim, sites })
            }
            ModelKind::Circuit => {
                self.forbid(&self.cue_dim, "cue_dim")?;
                Ok(FloquetModel::Circuit(self.circuit_spec()?))
            }
        }
    }
}

/// Parses a standalone circuit description (the serialised [`CircuitSpec`]).
/// Structural validity is checked separately by [`validate`].
pub fn parse_circuit_spec(text: &str) -> Result<CircuitSpec, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// Serialises a circuit in the format read by [`parse_circuit_spec`].
pub fn circuit_spec_to_toml(spec: &CircuitSpec) -> String {
    toml::to_string(spec).expect("circuit specs always serialise")
}
