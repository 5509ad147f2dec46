//! Experiment configuration: a single JSON document with mandatory seeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::adversary::{Family, FamilyParams};
use crate::error::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DISPERSION_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "runs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    OnlineFullInfo,
    OnlinePrivate,
    Bandit,
    PrivateBatch,
    DispersionAudit,
    RademacherAudit,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::OnlineFullInfo,
        Pipeline::OnlinePrivate,
        Pipeline::Bandit,
        Pipeline::PrivateBatch,
        Pipeline::DispersionAudit,
        Pipeline::RademacherAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::OnlineFullInfo => "online_full_info",
            Pipeline::OnlinePrivate => "online_private",
            Pipeline::Bandit => "bandit",
            Pipeline::PrivateBatch => "private_batch",
            Pipeline::DispersionAudit => "dispersion_audit",
            Pipeline::RademacherAudit => "rademacher_audit",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Pipeline::ALL.into_iter().find(|p| p.name() == s)
    }

    fn learner(self) -> Option<&'static str> {
        match self {
            Pipeline::OnlineFullInfo | Pipeline::OnlinePrivate => Some("ewf"),
            Pipeline::Bandit => Some("exp3"),
            Pipeline::PrivateBatch => Some("exp_mech"),
            _ => None,
        }
    }
}

/// Raw configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: String,
    pub seeds: Vec<u64>,
    #[serde(default = "default_family")]
    pub family: String,
    /// Rounds, or sample size for batch pipelines.
    #[serde(rename = "T")]
    pub rounds: usize,
    #[serde(default)]
    pub instance: FamilyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<String>,
    /// Radius the forecaster is tuned with; defaults to `1/(kappa' sqrt T)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    /// Number of bandit arms.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sigma: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_sizes: Option<Vec<usize>>,
    /// Radii at which dispersion profiles are measured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ws: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn default_family() -> String {
    "knapsack".into()
}

fn default_zeta() -> f64 {
    0.05
}

/// A configuration that passed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub raw: RunConfig,
    pub pipeline: Pipeline,
    pub family: Family,
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Pulls the field name out of serde's "missing field `x`" style messages.
fn serde_field(msg: &str) -> String {
    for prefix in ["missing field `", "unknown field `", "duplicate field `"] {
        if let Some(rest) = msg.strip_prefix(prefix) {
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "<document>".into()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Validated> {
        let raw: RunConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            cfg_err(&serde_field(&msg), msg)
        })?;
        raw.validate()
    }

    pub fn from_file(path: &Path) -> Result<Validated> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(self) -> Result<Validated> {
        let pipeline = Pipeline::parse(&self.pipeline).ok_or_else(|| {
            let names: Vec<&str> = Pipeline::ALL.iter().map(|p| p.name()).collect();
            cfg_err(
                "pipeline",
                format!(
                    "unknown pipeline `{}`; expected one of {}",
                    self.pipeline,
                    names.join(", ")
                ),
            )
        })?;
        let family: Family = self
            .family
            .parse()
            .map_err(|_| cfg_err("family", format!("unknown family `{}`", self.family)))?;
        if self.seeds.is_empty() {
            return Err(cfg_err("seeds", "at least one seed is required"));
        }
        if self.rounds == 0 {
            return Err(cfg_err("T", "must be at least 1"));
        }
        let p = &self.instance;
        if p.n == 0 {
            return Err(cfg_err("instance.n", "must be at least 1"));
        }
        if !(p.kappa >= 1.0 && p.kappa.is_finite()) {
            return Err(cfg_err("instance.kappa", "must be finite and at least 1"));
        }
        if !(p.b > 0.0 && p.b.is_finite()) {
            return Err(cfg_err("instance.b", "must be positive"));
        }
        if !(p.max_size >= 1.0) {
            return Err(cfg_err("instance.max_size", "must be at least 1"));
        }
        if !(p.max_value > 0.0 && p.kappa * p.max_value >= 1.0) {
            return Err(cfg_err(
                "instance.max_value",
                "need max_value > 0 and kappa * max_value >= 1",
            ));
        }
        if !(0.0..=1.0).contains(&p.edge_prob) {
            return Err(cfg_err("instance.edge_prob", "must lie in [0, 1]"));
        }
        if let Some(l) = &self.learner {
            match pipeline.learner() {
                Some(expected) if expected == l => {}
                Some(expected) => {
                    return Err(cfg_err(
                        "learner",
                        format!("pipeline {} runs `{expected}`, not `{l}`", pipeline.name()),
                    ))
                }
                None => {
                    return Err(cfg_err(
                        "learner",
                        format!("pipeline {} takes no learner", pipeline.name()),
                    ))
                }
            }
        }
        if let Some(w) = self.w {
            if !(w > 0.0 && w.is_finite()) {
                return Err(cfg_err("w", "must be positive"));
            }
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(cfg_err("zeta", "must lie in (0, 1)"));
        }
        match pipeline {
            Pipeline::OnlinePrivate => {
                match self.epsilon {
                    Some(e) if e > 0.0 && e < 1.0 => {}
                    _ => return Err(cfg_err("epsilon", "online_private needs epsilon in (0, 1)")),
                }
                match self.delta {
                    Some(d) if d > 0.0 && d < 1.0 => {}
                    _ => return Err(cfg_err("delta", "online_private needs delta in (0, 1)")),
                }
            }
            Pipeline::PrivateBatch => match self.epsilon {
                Some(e) if e > 0.0 && e.is_finite() => {}
                _ => return Err(cfg_err("epsilon", "private_batch needs a positive epsilon")),
            },
            _ => {}
        }
        if let Some(k) = self.arms {
            if k < 2 {
                return Err(cfg_err("K", "need at least two arms"));
            }
        }
        if self.n_sigma == Some(0) {
            return Err(cfg_err("n_sigma", "must be at least 1"));
        }
        if let Some(s) = &self.sample_sizes {
            if s.is_empty() || s.contains(&0) {
                return Err(cfg_err("sample_sizes", "need a nonempty list of positive sizes"));
            }
        }
        if let Some(ws) = &self.ws {
            if ws.is_empty() || ws.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                return Err(cfg_err("ws", "need a nonempty list of positive radii"));
            }
        }
        Ok(Validated {
            raw: self,
            pipeline,
            family,
        })
    }
}

impl Validated {
    /// Directory the run writes to: `output_dir`, else the environment
    /// default, else `runs/`, joined with the run name.
    pub fn run_dir(&self) -> PathBuf {
        let base = self
            .raw
            .output_dir
            .clone()
            .or_else(|| std::env::var(OUT_DIR_ENV).ok())
            .unwrap_or_else(|| DEFAULT_OUT_DIR.into());
        let name = self.raw.name.clone().unwrap_or_else(|| self.pipeline.name().into());
        Path::new(&base).join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"pipeline": "online_full_info", "seeds": [1], "family": "knapsack", "T": 100, "learner": "ewf"}"#;

    #[test]
    fn minimal_config_parses() {
        let v = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(v.pipeline, Pipeline::OnlineFullInfo);
        assert_eq!(v.family, Family::Knapsack);
        assert_eq!(v.raw.instance, FamilyParams::default());
    }

    fn field_of(text: &str) -> String {
        match RunConfig::from_json(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(r#"{"pipeline": "nope", "seeds": [1], "T": 10}"#), "pipeline");
        assert_eq!(field_of(r#"{"pipeline": "bandit", "T": 10}"#), "seeds");
        assert_eq!(field_of(r#"{"pipeline": "bandit", "seeds": [], "T": 10}"#), "seeds");
        assert_eq!(
            field_of(r#"{"pipeline": "bandit", "seeds": [1], "T": 10, "colour": 1}"#),
            "colour"
        );
        assert_eq!(
            field_of(r#"{"pipeline": "bandit", "seeds": [1], "T": 10, "family": "tsp"}"#),
            "family"
        );
        assert_eq!(
            field_of(r#"{"pipeline": "bandit", "seeds": [1], "T": 10, "learner": "ewf"}"#),
            "learner"
        );
        assert_eq!(
            field_of(r#"{"pipeline": "online_private", "seeds": [1], "T": 10, "epsilon": 0.5}"#),
            "delta"
        );
        assert_eq!(
            field_of(r#"{"pipeline": "bandit", "seeds": [1], "T": 10, "instance": {"kappa": 0.5}}"#),
            "instance.kappa"
        );
        assert_eq!(field_of("{"), "<document>");
    }

    #[test]
    fn run_dir_prefers_explicit_output() {
        let v = RunConfig::from_json(
            r#"{"pipeline": "bandit", "seeds": [1], "T": 10, "output_dir": "/tmp/x", "name": "r1"}"#,
        )
        .unwrap();
        assert_eq!(v.run_dir(), PathBuf::from("/tmp/x/r1"));
    }
}
