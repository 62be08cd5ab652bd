//! Run configuration and its TOML file form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use eig_agents::BackendConfig;
use eig_core::control::{CalibrationConfig, CommitRule};
use eig_core::RoleId;

use crate::activation::ActivationMap;
use crate::error::{Result, RuntimeError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Heuristic,
    Random,
    Learned,
}

impl ControllerKind {
    pub fn token(self) -> &'static str {
        match self {
            ControllerKind::Heuristic => "heuristic",
            ControllerKind::Random => "random",
            ControllerKind::Learned => "learned",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = RuntimeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heuristic" => Ok(ControllerKind::Heuristic),
            "random" => Ok(ControllerKind::Random),
            "learned" => Ok(ControllerKind::Learned),
            other => Err(RuntimeError::Config(format!("unknown controller `{other}`"))),
        }
    }
}

/// Role visiting order inside a round of the sequential variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleOrder {
    #[default]
    Canonical,
    Reverse,
    /// Canonical order rotated left by `round mod 5`.
    Cyclic,
}

impl RoleOrder {
    pub const ALL: [RoleOrder; 3] = [RoleOrder::Canonical, RoleOrder::Reverse, RoleOrder::Cyclic];

    pub fn token(self) -> &'static str {
        match self {
            RoleOrder::Canonical => "canonical",
            RoleOrder::Reverse => "reverse",
            RoleOrder::Cyclic => "cyclic",
        }
    }

    /// Orders the given roles, which must already be in canonical order.
    pub fn arrange(self, roles: &[RoleId], round: u32) -> Vec<RoleId> {
        match self {
            RoleOrder::Canonical => roles.to_vec(),
            RoleOrder::Reverse => roles.iter().rev().copied().collect(),
            RoleOrder::Cyclic => {
                let shift = round as usize % RoleId::ALL.len();
                let rotated = RoleId::ALL.iter().cycle().skip(shift).take(RoleId::ALL.len());
                rotated.filter(|r| roles.contains(r)).copied().collect()
            }
        }
    }
}

/// Accepts either one threshold for every round or a per-round list.
fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Gamma {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match Gamma::deserialize(d)? {
        Gamma::One(g) => vec![g],
        Gamma::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t_max: u32,
    /// Commit thresholds by round; the last entry covers later rounds.
    #[serde(deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    pub controller: ControllerKind,
    pub seed: u64,
    pub calibration: CalibrationConfig,
    pub commit_rule: CommitRule,
    pub activation: ActivationMap,
    pub sequential: bool,
    pub role_order: RoleOrder,
    /// Restricts the episode to these roles when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roles: Option<Vec<RoleId>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_max: 6,
            gamma: vec![0.5],
            controller: ControllerKind::Heuristic,
            seed: 0,
            calibration: CalibrationConfig::default(),
            commit_rule: CommitRule::default(),
            activation: ActivationMap::default(),
            sequential: false,
            role_order: RoleOrder::Canonical,
            roles: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RuntimeError::Config(m));
        if self.t_max < 1 {
            return bad("t_max must be at least 1".into());
        }
        if self.gamma.is_empty() {
            return bad("gamma needs at least one threshold".into());
        }
        if let Some(g) = self.gamma.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
            return bad(format!("gamma {g} outside (0, 1)"));
        }
        if matches!(&self.roles, Some(r) if r.is_empty()) {
            return bad("roles must not be empty".into());
        }
        self.calibration.validate().map_err(|e| RuntimeError::Config(e.to_string()))
    }

    pub fn gamma_at(&self, round: u32) -> f64 {
        let i = (round.max(1) as usize - 1).min(self.gamma.len() - 1);
        self.gamma[i]
    }

    /// Whether the role takes part in this episode at all.
    pub fn allows(&self, role: RoleId) -> bool {
        self.roles.as_ref().is_none_or(|r| r.contains(&role))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub trace_dir: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    /// Scripted-agent file; without one the template agent is used.
    pub script: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeSection {
    pub t_max: u32,
    #[serde(deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    pub controller: ControllerKind,
    pub seed: u64,
    pub sequential: bool,
    pub role_order: RoleOrder,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roles: Option<Vec<RoleId>>,
}

impl Default for RuntimeSection {
    fn default() -> Self {
        let d = RunConfig::default();
        RuntimeSection {
            t_max: d.t_max,
            gamma: d.gamma,
            controller: d.controller,
            seed: d.seed,
            sequential: d.sequential,
            role_order: d.role_order,
            roles: d.roles,
        }
    }
}

/// The configuration file: `[runtime]`, `[calibration]`, `[commit]`,
/// `[activation]`, `[backend]` and `[paths]`. Every section is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub runtime: RuntimeSection,
    pub calibration: CalibrationConfig,
    pub commit: CommitRule,
    pub activation: ActivationMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendConfig>,
    pub paths: PathsSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| RuntimeError::Config(e.message().to_string()))?;
        file.run_config().validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RuntimeError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| RuntimeError::Config(format!("{}: {e}", path.display())))
    }

    pub fn run_config(&self) -> RunConfig {
        let r = &self.runtime;
        RunConfig {
            t_max: r.t_max,
            gamma: r.gamma.clone(),
            controller: r.controller,
            seed: r.seed,
            calibration: self.calibration,
            commit_rule: self.commit,
            activation: self.activation.clone(),
            sequential: r.sequential,
            role_order: r.role_order,
            roles: r.roles.clone(),
        }
    }
}
