use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::fail::CliError;

/// A `re,im` pair; serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair(pub [f64; 2]);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let parse = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        match parts.as_slice() {
            [re] => Ok(Pair([parse(re)?, 0.0])),
            [re, im] => Ok(Pair([parse(re)?, parse(im)?])),
            _ => Err(format!("expected `re,im`, got {s:?}")),
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0[0], self.0[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelKind {
    /// Farthest-impurity XX chain (`m = 1`, `t = 1`).
    Xx,
    /// Same chain as `xx`.
    Farthest,
    /// Adjacent impurities, `n = 2m`, with the `β` metric family.
    Nearest,
    /// Arbitrary chain; the metric comes from its eigenvectors.
    Chain,
    Identity,
    Diagonal,
    /// Metric read from `metric_file`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PredicateKind {
    None,
    UnitDisk,
    Conds,
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyKind {
    All,
    Connected,
    ParitySymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Preset {
    EtaMin,
    EtaMax,
    /// Seeded random `η_A ⊗ η_B`.
    Tensor,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Run parameters. Every field can come from the command line or from a JSON
/// object with the same (snake_case) keys; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Impurity site.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Impurity potential as `re,im`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<Pair>,
    /// Uniform hopping as `re,im`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<Pair>,
    /// Individual hoppings, `re,im;re,im;...`.
    #[arg(long, global = true, value_delimiter = ';', allow_hyphen_values = true)]
    pub hoppings: Option<Vec<Pair>>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub onsite: Option<Vec<f64>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Diagonal of the metric for `--model diagonal`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub diagonal: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub metric_file: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub predicate: Option<PredicateKind>,
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyKind>,

    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Subsystem dimensions `dim_A,dim_B`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Qubits per side `q_A,q_B`; dimensions `2^q`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,

    /// `Im γ` range `start,stop` for phase scans.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub im_gamma: Option<Pair>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true)]
    pub tol_residual: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub cap_n: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set here replace those of `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let mut merged = to_map(&base);
        for (k, v) in to_map(&self) {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
        serde_json::from_value(Value::Object(merged)).expect("merged config has the same schema")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// SHA-256 of the canonical JSON of everything that can affect results
    /// (`out` and `jobs` excluded), with the seed resolved.
    pub fn hash(&self) -> String {
        let mut map = to_map(self);
        map.remove("out");
        map.remove("jobs");
        map.insert("seed".into(), Value::from(self.seed()));
        let text = serde_json::to_string(&Value::Object(map)).expect("config serialization");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("tol_rank", self.tol_rank), ("tol_residual", self.tol_residual), ("alpha", self.alpha)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::validation(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.jobs == Some(0) {
            return Err(CliError::validation("jobs must be at least 1"));
        }
        if self.dims.is_some() && self.qubits.is_some() {
            return Err(CliError::validation("give either dims or qubits, not both"));
        }
        for v in [&self.dims, &self.qubits].into_iter().flatten() {
            if v.len() != 2 {
                return Err(CliError::validation("dims and qubits take exactly two values"));
            }
        }
        let pairs = self.gamma.iter().chain(&self.t).chain(&self.im_gamma).chain(self.hoppings.iter().flatten());
        let reals = self.onsite.iter().flatten().chain(self.diagonal.iter().flatten()).chain(&self.beta);
        if pairs.flat_map(|p| p.0).chain(reals.copied()).any(|x| !x.is_finite()) {
            return Err(CliError::validation("parameters must be finite"));
        }
        Ok(())
    }
}

fn to_map(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    match serde_json::to_value(cfg).expect("config serialization") {
        Value::Object(map) => map,
        _ => unreachable!("RunConfig serializes to an object"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RunConfig {
            n: Some(4),
            seed: Some(9),
            gamma: Some(Pair([0.0, 0.5])),
            ..Default::default()
        };
        let flags = RunConfig {
            n: Some(6),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.n, Some(6));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.gamma, Some(Pair([0.0, 0.5])));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig {
            n: Some(4),
            out: Some("x".into()),
            jobs: Some(2),
            ..Default::default()
        };
        let b = RunConfig {
            n: Some(4),
            ..Default::default()
        };
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = RunConfig {
            n: Some(5),
            ..Default::default()
        };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n": 4, "gama": [0, 1]}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"model": "nearest", "gamma": [0, 0.5], "predicate": "unit_disk"}"#).unwrap();
        assert_eq!(cfg.model, Some(ModelKind::Nearest));
        assert_eq!(cfg.predicate, Some(PredicateKind::UnitDisk));
    }

    #[test]
    fn pair_parsing() {
        assert_eq!("0.5".parse::<Pair>().unwrap(), Pair([0.5, 0.0]));
        assert_eq!("-1, 2e-3".parse::<Pair>().unwrap(), Pair([-1.0, 2e-3]));
        assert!("1,2,3".parse::<Pair>().is_err());
    }
}
