//! JSON problem definitions.
//!
//! ```json
//! {
//!   "problems": [
//!     {
//!       "id": "lookback",
//!       "map": { "linear": { "head_coeffs": [0.3333333333333333],
//!                            "tail_coeff": 0.16666666666666666,
//!                            "tail_ratio": 0.5, "offset": 1.0 } },
//!       "initial": { "prefix": [], "tail": 0.0 },
//!       "tolerance": 1e-6,
//!       "mode": "solve",
//!       "q": 0.8
//!     }
//!   ]
//! }
//! ```

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result as CoreResult;
use crate::maps::{embed_finite, FiniteArityMap, LinearSeqMap, MapRef, SupHalfMap};
use crate::sequences::BoundedSeq;
use crate::solver::MAX_STEPS;

/// Longest accepted initial prefix.
pub const MAX_PREFIX: usize = 10_000;
/// Largest accepted truncation length.
pub const MAX_TRUNCATION: usize = 1_000;
/// Largest accepted arity for finite-arity rules.
pub const MAX_ARITY: usize = 1_000;

const DEFAULT_K_MAX: usize = 100;
const DEFAULT_N_MAX: usize = 20;
const DEFAULT_Q0: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problems: Vec<ProblemConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub id: String,
    pub map: MapConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub tolerance: f64,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    /// Fixed weight ratio for the sup-metric certificate of a linear map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    Linear(LinearConfig),
    SupHalf {},
    Presic(PresicConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub head_coeffs: Vec<f64>,
    #[serde(default)]
    pub tail_coeff: f64,
    #[serde(default)]
    pub tail_ratio: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresicConfig {
    pub arity: usize,
    pub rule: RuleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleConfig {
    /// `offset + Σ weights[i] x_i`.
    Affine { weights: Vec<f64>, offset: f64 },
    /// `offset + scale · max_i x_i`.
    ScaledMax { scale: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub prefix: Vec<f64>,
    #[serde(default)]
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Certify,
    Solve,
    Trace,
    Secelean,
    Truncate,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Certify => "certify",
            Mode::Solve => "solve",
            Mode::Trace => "trace",
            Mode::Secelean => "secelean",
            Mode::Truncate => "truncate",
            Mode::Compare => "compare",
        }
    }
}

impl ConfigFile {
    /// Parses and validates a configuration.
    pub fn from_json_slice(bytes: &[u8]) -> Result<Self, String> {
        let cfg: ConfigFile = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self, String> {
        Self::from_json_slice(s.as_bytes())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config values serialize")
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for p in &self.problems {
            p.validate()?;
            if !seen.insert(p.id.as_str()) {
                return Err(format!("duplicate problem id {:?}", p.id));
            }
        }
        Ok(())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<(), String> {
        let ctx = |msg: String| format!("problem {:?}: {msg}", self.id);
        if !valid_id(&self.id) {
            return Err(ctx(
                "id must be 1-128 characters from [A-Za-z0-9_.-] and not start with '.'".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(ctx(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.initial.prefix.len() > MAX_PREFIX {
            return Err(ctx(format!("initial prefix longer than {MAX_PREFIX}")));
        }
        if let Some(k) = self.k_max {
            if k == 0 || k > MAX_STEPS {
                return Err(ctx(format!("k_max must be in 1..={MAX_STEPS}")));
            }
        }
        if let Some(n) = self.n_max {
            if n == 0 || n > MAX_TRUNCATION {
                return Err(ctx(format!("n_max must be in 1..={MAX_TRUNCATION}")));
            }
        }
        if let Some(b) = self.base {
            if !b.is_finite() {
                return Err(ctx("base must be finite".into()));
            }
        }
        if let Some(q0) = self.q0 {
            if !(q0 > 0.0 && q0 < 1.0) {
                return Err(ctx(format!("q0 must lie in (0, 1), got {q0}")));
            }
        }
        if let Some(q) = self.q {
            if !(q > 0.0 && q < 1.0) {
                return Err(ctx(format!("q must lie in (0, 1), got {q}")));
            }
            if !matches!(self.map, MapConfig::Linear(_)) {
                return Err(ctx("q is only accepted for linear maps".into()));
            }
        }
        if let MapConfig::Presic(p) = &self.map {
            if p.arity == 0 || p.arity > MAX_ARITY {
                return Err(ctx(format!("arity must be in 1..={MAX_ARITY}")));
            }
            if let RuleConfig::Affine { weights, .. } = &p.rule {
                if weights.len() != p.arity {
                    return Err(ctx(format!(
                        "affine rule has {} weights for arity {}",
                        weights.len(),
                        p.arity
                    )));
                }
            }
        }
        if let MapConfig::Linear(l) = &self.map {
            if l.head_coeffs.len() > MAX_PREFIX {
                return Err(ctx(format!("more than {MAX_PREFIX} head coefficients")));
            }
        }
        self.build_map().map_err(|e| ctx(e.to_string()))?;
        self.initial_seq().map_err(|e| ctx(e.to_string()))?;
        Ok(())
    }

    pub fn build_map(&self) -> CoreResult<MapRef> {
        Ok(match &self.map {
            MapConfig::Linear(l) => Arc::new(LinearSeqMap::new(
                l.head_coeffs.clone(),
                l.tail_coeff,
                l.tail_ratio,
                l.offset,
            )?),
            MapConfig::SupHalf {} => Arc::new(SupHalfMap),
            MapConfig::Presic(p) => {
                let g = match &p.rule {
                    RuleConfig::Affine { weights, offset } => {
                        FiniteArityMap::affine(weights.clone(), *offset)?
                    }
                    RuleConfig::ScaledMax { scale, offset } => {
                        FiniteArityMap::scaled_max(p.arity, *scale, *offset)?
                    }
                };
                Arc::new(embed_finite(g))
            }
        })
    }

    pub fn initial_seq(&self) -> CoreResult<BoundedSeq> {
        BoundedSeq::new(self.initial.prefix.clone(), self.initial.tail)
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(DEFAULT_K_MAX)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.unwrap_or(DEFAULT_N_MAX)
    }

    pub fn base(&self) -> f64 {
        self.base.unwrap_or(0.0)
    }

    pub fn q0(&self) -> f64 {
        self.q0.unwrap_or(DEFAULT_Q0)
    }
}
