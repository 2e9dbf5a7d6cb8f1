//! JSON bodies printed by `--json` and returned by the service.

use std::collections::BTreeMap;

use csmbench::dsl::Diagnostic;
use csmbench::lts::{Equivalence, StateFlags};
use csmbench::session::EnabledSteps;
use csmbench::view::{StateView, StatsView, TraceView};
use schemars::{schema_for, JsonSchema, Schema};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct DiagnosticView {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl From<&Diagnostic> for DiagnosticView {
    fn from(d: &Diagnostic) -> Self {
        DiagnosticView {
            line: d.line,
            col: d.col,
            message: d.message.clone(),
        }
    }
}

/// Any failed verb or request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ErrorReport {
    pub error: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<DiagnosticView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SystemSummary {
    pub name: String,
    pub machines: usize,
    pub instances: usize,
    pub rules: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CheckReport {
    pub ok: bool,
    pub systems: Vec<SystemSummary>,
    pub diagnostics: Vec<DiagnosticView>,
    /// Static errors, per system.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ExploreReport {
    pub system: String,
    pub scenario: Option<String>,
    pub stats: StatsView,
    /// Steps that could not be applied, e.g. sends into a full pool.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct MonitorReport {
    pub monitor: String,
    /// One of holds, violated, witness, unknown, unreachable.
    pub verdict: String,
    pub stats: StatsView,
    pub trace: Option<TraceView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct VerifyReport {
    pub system: String,
    pub scenario: Option<String>,
    pub results: Vec<MonitorReport>,
}

/// Result of a verb whose main product is a text artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ArtifactReport {
    pub kind: String,
    /// File written with `-o`.
    pub output: Option<String>,
    /// The artifact itself when no file was written.
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub facts: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CompareReport {
    pub left: String,
    pub right: String,
    pub equivalence: Equivalence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct WeakTracesReport {
    pub states: usize,
    pub transitions: usize,
    pub output: Option<String>,
    pub text: Option<String>,
    pub flags: BTreeMap<u32, StateFlags>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ServeReport {
    pub address: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ScenarioEntry {
    pub model: String,
    pub system: String,
    /// `<system>.<name>`; absent when the model is used as written.
    pub scenario: Option<String>,
    /// Small enough to explore exhaustively.
    pub desk: bool,
    pub params: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct NewSession {
    /// Shipped model name; ignored when `source` is given.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub scenario: Option<String>,
    /// Model text to load instead of a shipped model.
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub system: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SessionState {
    pub id: String,
    pub version: u64,
    pub trace_length: usize,
    pub state: StateView,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct StepRequest {
    pub index: usize,
    pub version: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct AutoRequest {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct AutoReport {
    pub fired: usize,
    pub session: SessionState,
}

/// Published schemas, by file stem.
pub fn schemas() -> Vec<(&'static str, Schema)> {
    vec![
        ("error", schema_for!(ErrorReport)),
        ("check", schema_for!(CheckReport)),
        ("explore", schema_for!(ExploreReport)),
        ("verify", schema_for!(VerifyReport)),
        ("artifact", schema_for!(ArtifactReport)),
        ("compare", schema_for!(CompareReport)),
        ("weaktraces", schema_for!(WeakTracesReport)),
        ("serve", schema_for!(ServeReport)),
        ("scenarios", schema_for!(Vec<ScenarioEntry>)),
        ("new_session", schema_for!(NewSession)),
        ("session_state", schema_for!(SessionState)),
        ("steps", schema_for!(EnabledSteps)),
        ("step_request", schema_for!(StepRequest)),
        ("auto_request", schema_for!(AutoRequest)),
        ("auto", schema_for!(AutoReport)),
        ("trace", schema_for!(TraceView)),
    ]
}
