//! Model configuration files (JSON or TOML).
//!
//! ```json
//! {
//!   "m": 2,
//!   "lambda_circ": [1.0, 2.0],
//!   "beta": 1.0,
//!   "claims": [{ "exp": { "mu": 1.0 } }],
//!   "regimes": [{ "drift": { "r": 0.0 } }, { "drift": { "r": 1.0 } }, { "drift": { "r": 2.0 } }]
//! }
//! ```
//!
//! A single claim law is broadcast to all `m` clients.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::claims::ClaimDistribution;
use crate::error::{Result, RuinError};
use crate::model::{LevyRegime, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: usize,
    pub lambda_circ: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub claims: Vec<ClaimDistribution>,
    pub regimes: Vec<LevyRegime>,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> RuinError {
    RuinError::Config(format!("{field}: {msg}"))
}

impl ModelConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| RuinError::Config(e.to_string()))
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| RuinError::Config(e.to_string()))
    }

    /// Reads a file, choosing the format by extension (`.toml`, otherwise JSON).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| RuinError::Config(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the fields and builds the model.
    pub fn build(&self) -> Result<ModelSpec> {
        let m = self.m;
        if self.lambda_circ.len() != m {
            return Err(field_err(
                "lambda_circ",
                format!("expected {m} entries, got {}", self.lambda_circ.len()),
            ));
        }
        for (i, l) in self.lambda_circ.iter().enumerate() {
            if !(*l > 0.0 && l.is_finite()) {
                return Err(field_err(&format!("lambda_circ[{i}]"), format!("{l} must be positive")));
            }
        }
        if let Some(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(field_err("beta", format!("{b} must be nonnegative")));
            }
        }
        let claims = match self.claims.len() {
            1 => vec![self.claims[0].clone(); m],
            n if n == m => self.claims.clone(),
            n => {
                return Err(field_err("claims", format!("expected 1 or {m} entries, got {n}")));
            }
        };
        for (i, c) in claims.iter().enumerate() {
            c.validate().map_err(|e| field_err(&format!("claims[{i}]"), e))?;
        }
        if self.regimes.len() != m + 1 {
            return Err(field_err(
                "regimes",
                format!("expected {} entries, got {}", m + 1, self.regimes.len()),
            ));
        }
        for (i, r) in self.regimes.iter().enumerate() {
            r.validate().map_err(|e| field_err(&format!("regimes[{i}]"), e))?;
        }
        ModelSpec::new(self.lambda_circ.clone(), claims, self.regimes.clone())
            .map_err(|e| RuinError::Config(e.to_string()))
    }

    /// Killing rate from the file, or `fallback` when absent.
    pub fn beta_or(&self, fallback: f64) -> f64 {
        self.beta.unwrap_or(fallback)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JSON: &str = r#"{
        "m": 2,
        "lambda_circ": [1.0, 2.0],
        "beta": 1.0,
        "claims": [{ "exp": { "mu": 1.0 } }],
        "regimes": [{ "drift": { "r": 0.0 } }, { "drift": { "r": 1.0 } }, { "drift": { "r": 2.0 } }]
    }"#;

    #[test]
    fn json_round_trip_and_broadcast() {
        let cfg = ModelConfig::from_json_str(JSON).unwrap();
        let model = cfg.build().unwrap();
        assert_eq!(model.m(), 2);
        assert_eq!(model.claims().len(), 2);
        assert_eq!(cfg.beta_or(5.0), 1.0);
        let again = ModelConfig::from_json_str(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn toml_form() {
        let text = r#"
            m = 1
            lambda_circ = [1.0]
            claims = [{ lomax = { c = 1.0, eps = 1.5 } }]
            regimes = [{ drift = { r = 0.0 } }, { brownian = { r = 1.0, sigma2 = 0.5 } }]
        "#;
        let cfg = ModelConfig::from_toml_str(text).unwrap();
        assert!(cfg.beta.is_none());
        let model = cfg.build().unwrap();
        assert!(!model.is_drift_only());
    }

    #[test]
    fn errors_name_the_field() {
        let mut cfg = ModelConfig::from_json_str(JSON).unwrap();
        cfg.lambda_circ = vec![1.0];
        assert!(cfg.build().unwrap_err().to_string().contains("lambda_circ"));
        let mut cfg = ModelConfig::from_json_str(JSON).unwrap();
        cfg.regimes.pop();
        assert!(cfg.build().unwrap_err().to_string().contains("regimes"));
        let mut cfg = ModelConfig::from_json_str(JSON).unwrap();
        cfg.claims = vec![ClaimDistribution::Exponential { mu: -1.0 }];
        assert!(cfg.build().unwrap_err().to_string().contains("claims[0]"));
        let mut cfg = ModelConfig::from_json_str(JSON).unwrap();
        cfg.beta = Some(-1.0);
        assert!(cfg.build().unwrap_err().to_string().contains("beta"));
        let err = ModelConfig::from_json_str(r#"{"m": 1, "bogus": 2}"#).unwrap_err();
        assert!(matches!(err, RuinError::Config(_)));
    }
}
