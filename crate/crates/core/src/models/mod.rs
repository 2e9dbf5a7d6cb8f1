//! Shipped handover model and its named scenarios.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{compile, ModelError};
use crate::system::SystemDef;

pub const HANDOVER_MODEL: &str = include_str!("../../models/handover.smm");
pub const SHIPPED_SCENARIOS: &str = include_str!("../../models/scenarios.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    Full,
    ICSLTest,
    InitiatorSideTest,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::Full,
        Architecture::ICSLTest,
        Architecture::InitiatorSideTest,
    ];

    /// Name of the `system` declaration in the model.
    pub fn system_name(self) -> &'static str {
        match self {
            Architecture::Full => "Full",
            Architecture::ICSLTest => "ICSLTest",
            Architecture::InitiatorSideTest => "InitiatorSideTest",
        }
    }

    pub fn from_system_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.system_name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum RbcMode {
    Silent,
    SenderInitiator,
    SenderBoth,
}

impl TryFrom<u32> for RbcMode {
    type Error = String;

    fn try_from(v: u32) -> Result<Self, String> {
        match v {
            0 => Ok(RbcMode::Silent),
            1 => Ok(RbcMode::SenderInitiator),
            2 => Ok(RbcMode::SenderBoth),
            _ => Err(format!("rbc_mode must be 0, 1 or 2, got {v}")),
        }
    }
}

impl From<RbcMode> for u32 {
    fn from(m: RbcMode) -> u32 {
        m as u32
    }
}

/// Timer values are in Timer rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    #[serde(rename = "max_connectTimer")]
    pub max_connect_timer: u32,
    #[serde(rename = "max_initTimer")]
    pub max_init_timer: u32,
    #[serde(rename = "max_sendTimer")]
    pub max_send_timer: u32,
    #[serde(rename = "max_receiveTimer")]
    pub max_receive_timer: u32,
    /// Tolerated consecutive message losses.
    #[serde(rename = "N")]
    pub n: u32,
    /// Maximum accepted travel delay.
    #[serde(rename = "K")]
    pub k: u32,
    /// Messages per RBC slot.
    pub nmax: u32,
    pub rbc_mode: RbcMode,
    pub er_delay_max: u32,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams::desk()
    }
}

impl ScenarioParams {
    /// Small timers that keep the full architecture exhaustively explorable.
    pub fn desk() -> Self {
        ScenarioParams {
            max_connect_timer: 6,
            max_init_timer: 6,
            max_send_timer: 2,
            max_receive_timer: 5,
            n: 1,
            k: 3,
            nmax: 1,
            rbc_mode: RbcMode::Silent,
            er_delay_max: 1,
        }
    }

    /// Large timer values, for random walks only.
    pub fn full_scale() -> Self {
        ScenarioParams {
            max_connect_timer: 20,
            max_init_timer: 20,
            max_send_timer: 5,
            max_receive_timer: 15,
            ..Self::desk()
        }
    }

    /// Constant bindings, named as in the model.
    pub fn constants(&self) -> [(&'static str, i64); 9] {
        [
            ("max_connectTimer", self.max_connect_timer as i64),
            ("max_initTimer", self.max_init_timer as i64),
            ("max_sendTimer", self.max_send_timer as i64),
            ("max_receiveTimer", self.max_receive_timer as i64),
            ("N", self.n as i64),
            ("K", self.k as i64),
            ("nmax", self.nmax as i64),
            ("rbc_mode", u32::from(self.rbc_mode) as i64),
            ("er_delay_max", self.er_delay_max as i64),
        ]
    }

    /// Rejects values outside the kernel's range; returns warnings for
    /// settings that are legal but cannot keep a line alive.
    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        for (name, v) in self.constants() {
            if v > i32::MAX as i64 {
                return Err(ScenarioError::Invalid(format!("{name} = {v} is out of range")));
            }
        }
        let mut warnings = Vec::new();
        if self.max_send_timer >= self.max_receive_timer {
            warnings.push(format!(
                "max_sendTimer ({}) is not below max_receiveTimer ({}): life-signs cannot keep the line alive",
                self.max_send_timer, self.max_receive_timer
            ));
        }
        Ok(warnings)
    }
}

#[derive(Clone, Debug, Error)]
pub enum ScenarioError {
    #[error("scenario file: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("no scenario `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scenario {
    /// System declaration the parameters apply to.
    pub system: String,
    pub name: String,
    pub params: ScenarioParams,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.system, self.name)
    }
}

/// Reads a scenario file: tables `[<system>.<name>]` whose keys are exactly
/// the parameter names. Scenarios come out sorted by system, then name.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, ScenarioError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for (system, entries) in table {
        let entries = entries
            .as_table()
            .ok_or_else(|| ScenarioError::Parse(format!("`{system}` must be a table of scenarios")))?;
        for (name, value) in entries {
            let params: ScenarioParams = value
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| ScenarioError::Parse(format!("{system}.{name}: {}", e.message())))?;
            params.validate()?;
            out.push(Scenario {
                system: system.clone(),
                name: name.clone(),
                params,
            });
        }
    }
    Ok(out)
}

/// Finds a scenario by `name` or `system.name`.
pub fn find_scenario<'a>(scenarios: &'a [Scenario], key: &str) -> Result<&'a Scenario, ScenarioError> {
    scenarios
        .iter()
        .find(|s| s.to_string() == key)
        .or_else(|| {
            let mut by_name = scenarios.iter().filter(|s| s.name == key);
            match (by_name.next(), by_name.next()) {
                (Some(s), None) => Some(s),
                _ => None,
            }
        })
        .ok_or_else(|| ScenarioError::Unknown(key.to_string()))
}

pub fn shipped_scenarios() -> Vec<Scenario> {
    parse_scenarios(SHIPPED_SCENARIOS).expect("shipped scenario file is valid")
}

/// Scenarios small enough for exhaustive exploration.
pub fn desk_scenarios() -> Vec<Scenario> {
    shipped_scenarios()
        .into_iter()
        .filter(|s| !s.name.starts_with("full_scale"))
        .collect()
}

/// Compiles `system` from `model` and binds the scenario constants.
pub fn instantiate(model: &str, system: &str, p: &ScenarioParams) -> Result<SystemDef, ScenarioError> {
    p.validate()?;
    let mut def = compile(model, Some(system))?;
    for (name, v) in p.constants() {
        def.set_constant(name, v);
    }
    Ok(def)
}

/// A closed handover system for the given architecture and parameters.
pub fn build_scenario(arch: Architecture, p: &ScenarioParams) -> Result<SystemDef, ScenarioError> {
    instantiate(HANDOVER_MODEL, arch.system_name(), p)
}

pub const PING_PONG_MODEL: &str = include_str!("../../models/ping_pong.smm");

/// Models that ship with the crate, by name.
pub const SHIPPED_MODELS: [(&str, &str); 2] = [("handover", HANDOVER_MODEL), ("ping_pong", PING_PONG_MODEL)];

pub fn shipped_model(name: &str) -> Option<&'static str> {
    SHIPPED_MODELS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// A shipped model, optionally bound to one of the shipped scenarios.
pub fn open_shipped(model: &str, scenario: Option<&str>) -> Result<SystemDef, ScenarioError> {
    let text = shipped_model(model).ok_or_else(|| ScenarioError::Unknown(format!("model {model}")))?;
    match scenario {
        Some(key) if model == "handover" => {
            let all = shipped_scenarios();
            let s = find_scenario(&all, key)?;
            instantiate(text, &s.system, &s.params)
        }
        Some(key) => Err(ScenarioError::Unknown(key.to_string())),
        None => Ok(compile(text, None)?),
    }
}
