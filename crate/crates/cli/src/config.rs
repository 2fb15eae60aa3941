//! Run configuration: one JSON document per run.

use std::collections::BTreeMap;
use std::path::Path;

use condldp::empirics::{EventSet, Method, DEFAULT_EPSILON, DEFAULT_RADIUS};
use condldp::{Grid, JointModel, Region};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Axis-aligned grid: bounds and point count per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, CliError> {
        Grid::from_bounds(&self.lower, &self.upper, &self.points).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalSpec {
    pub n: u64,
    pub replicas: usize,
}

/// File names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub tilt: String,
    pub report: String,
    pub sweep_csv: String,
    pub marginal_rate: String,
    pub free_energy: String,
    pub conditional_rate: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            tilt: "tilt.json".into(),
            report: "report.json".into(),
            sweep_csv: "sweep.csv".into(),
            marginal_rate: "marginal_rate.csv".into(),
            free_energy: "free_energy.csv".into(),
            conditional_rate: "conditional_rate.csv".into(),
        }
    }
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_duality_tolerance() -> f64 {
    5e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub event: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Grid for `Ψ_{x₀}`; defaults to a symmetric grid through 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<GridSpec>,
    pub ns: Vec<u64>,
    pub replicas: usize,
    pub seed: u64,
    pub method: Method,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_duality_tolerance")]
    pub duality_tolerance: f64,
    /// Smallest `n` whose sandwich verdict must pass; defaults to all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich_from_n: Option<u64>,
    /// Declared limit `inf I_B(A)`; when set, verdicts use it in place of the
    /// computed infima.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// SHA-256 of the compact JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("configs serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn model(&self) -> Result<JointModel, CliError> {
        JointModel::from_spec(&self.model.name, &self.model.params).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn event(&self) -> Result<EventSet, CliError> {
        EventSet::new(self.event.clone()).map_err(|e| CliError::Config(format!("event: {e}")))
    }

    pub fn grid(&self) -> Result<Option<Grid>, CliError> {
        self.grid.as_ref().map(GridSpec::build).transpose()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let model = self.model()?;
        if self.x0.len() != model.x_dim() {
            return bad(format!(
                "x0 has {} coordinates, model {} needs {}",
                self.x0.len(),
                model.name(),
                model.x_dim()
            ));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return bad("x0 must be finite".into());
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta must be positive, got {d}"));
            }
        }
        self.event()?;
        if self.ns.is_empty() {
            return bad("ns must not be empty".into());
        }
        if self.ns[0] == 0 || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return bad("ns must be positive and strictly increasing".into());
        }
        if self.replicas < condldp::empirics::MIN_REPLICAS {
            return bad(format!(
                "replicas must be at least {}",
                condldp::empirics::MIN_REPLICAS
            ));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("radius", self.radius),
            ("duality_tolerance", self.duality_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(r) = self.expected_rate {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("expected_rate must be finite and non-negative, got {r}"));
            }
        }
        if let Some(g) = self.grid()? {
            if g.dim() != model.dim() {
                return bad(format!(
                    "grid has {} axes, model {} lives in {} dimensions",
                    g.dim(),
                    model.name(),
                    model.dim()
                ));
            }
        }
        if let Some(lg) = &self.lambda_grid {
            let g = lg.build()?;
            if g.dim() != model.y_dim() {
                return bad(format!("lambda_grid needs {} axes", model.y_dim()));
            }
        }
        if let Some(c) = &self.canonical {
            if c.n == 0 || c.replicas < condldp::empirics::MIN_REPLICAS {
                return bad("canonical needs n > 0 and enough replicas".into());
            }
        }
        Ok(())
    }
}
