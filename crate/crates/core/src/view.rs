//! JSON views of configurations, steps and traces shared by the CLI, the
//! HTTP service and the browser demo.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::explorer::{Stats, Trace};
use crate::kernel::{Event, GlobalState, StepKind, StepRecord, Ty, ValidatedSystem};
use crate::render::{chart_from_trace, render_text, ChartFilter, SequenceChart};
use crate::system::{Action, TransitionRule};

/// Serializes with object keys in sorted order.
pub fn canonical_json<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("views serialize to JSON");
    serde_json::to_string(&sorted(value)).expect("JSON values serialize")
}

// Re-inserting in key order also works when serde_json preserves insertion
// order (another crate in the build may enable that feature).
fn sorted(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Source-like text of a rule, e.g. `go: S -> T { m(v) [v > 0] / n := v; X.ack }`.
pub fn rule_source(r: &TransitionRule) -> String {
    let mut body = Vec::new();
    if let Some(t) = &r.trigger {
        body.push(if t.params.is_empty() {
            t.signal.clone()
        } else {
            format!("{}({})", t.signal, t.params.join(", "))
        });
    }
    if let Some(g) = &r.guard {
        body.push(format!("[{g}]"));
    }
    if !r.actions.is_empty() {
        let acts: Vec<String> = r
            .actions
            .iter()
            .map(|a| match a {
                Action::Assign { var, value } => format!("{var} := {value}"),
                Action::Send { target, signal, args } if args.is_empty() => format!("{target}.{signal}"),
                Action::Send { target, signal, args } => {
                    let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                    format!("{target}.{signal}({})", args.join(", "))
                }
            })
            .collect();
        body.push(format!("/ {}", acts.join("; ")));
    }
    if body.is_empty() {
        format!("{}: {} -> {} {{ }}", r.label, r.source, r.target)
    } else {
        format!("{}: {} -> {} {{ {} }}", r.label, r.source, r.target, body.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct EventView {
    pub signal: String,
    pub args: Vec<i32>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct VarView {
    pub name: String,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct InstanceState {
    pub name: String,
    pub machine: String,
    pub state: String,
    pub vars: Vec<VarView>,
    /// Oldest event first.
    pub pool: Vec<EventView>,
    pub capacity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct StateView {
    pub system: String,
    pub instances: Vec<InstanceState>,
}

impl StateView {
    pub fn new(sys: &ValidatedSystem, g: &GlobalState) -> Self {
        let instances = sys
            .views(g)
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let m = v.machine();
                InstanceState {
                    name: sys.instance_name(i).to_string(),
                    machine: m.name.clone(),
                    state: v.state_name().to_string(),
                    vars: m
                        .vars
                        .iter()
                        .zip(v.vars)
                        .map(|(d, &x)| VarView {
                            name: d.name.clone(),
                            value: match d.ty {
                                Ty::Bool => Value::Bool(x != 0),
                                Ty::Int => Value::Int(x),
                            },
                        })
                        .collect(),
                    pool: v.pool().iter().map(|e| event_view(sys, i, e)).collect(),
                    capacity: sys.instances[i].capacity,
                }
            })
            .collect();
        StateView {
            system: sys.name().to_string(),
            instances,
        }
    }
}

fn event_view(sys: &ValidatedSystem, instance: usize, e: &Event) -> EventView {
    EventView {
        signal: sys.machine_of(instance).signals[e.signal].name.clone(),
        args: e.args.clone(),
        text: sys.describe_event(instance, e),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SendView {
    pub target: String,
    pub event: EventView,
}

/// A step with enough text for a person to choose it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct StepView {
    pub instance: String,
    /// Rule label; absent for a discard.
    pub rule: Option<String>,
    pub discard: bool,
    /// One-line summary.
    pub text: String,
    /// The rule as written in the model; absent for a discard.
    pub source: Option<String>,
    pub consumed: Option<EventView>,
    pub sends: Vec<SendView>,
}

impl StepView {
    pub fn new(sys: &ValidatedSystem, s: &StepRecord) -> Self {
        let m = sys.machine_of(s.instance);
        let (rule, source) = match &s.kind {
            StepKind::Fire { rule, .. } => (Some(m.rules[*rule].label.clone()), Some(rule_source(&m.rules[*rule].def))),
            StepKind::Discard(_) => (None, None),
        };
        StepView {
            instance: sys.instance_name(s.instance).to_string(),
            rule,
            discard: s.is_discard(),
            text: sys.describe_step(s),
            source,
            consumed: s.consumed().map(|e| event_view(sys, s.instance, e)),
            sends: s
                .sends()
                .iter()
                .map(|e| SendView {
                    target: sys.instance_name(e.target).to_string(),
                    event: event_view(sys, e.target, &e.event),
                })
                .collect(),
        }
    }

    /// Whether `s` is the step this view names.
    pub fn names(&self, sys: &ValidatedSystem, s: &StepRecord) -> bool {
        if sys.instance_name(s.instance) != self.instance {
            return false;
        }
        match (&s.kind, &self.rule) {
            (StepKind::Fire { rule, .. }, Some(label)) => sys.rule_label(s.instance, *rule) == label,
            (StepKind::Discard(_), None) => true,
            _ => false,
        }
    }
}

/// A trace as steps from the initial configuration, with its chart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct TraceView {
    pub system: String,
    pub length: usize,
    pub steps: Vec<StepView>,
    pub chart: SequenceChart,
    /// Chart in the text dialect.
    pub text: String,
}

impl TraceView {
    pub fn new(sys: &ValidatedSystem, t: &Trace) -> Self {
        let chart = chart_from_trace(sys, t, &ChartFilter::all());
        TraceView {
            system: sys.name().to_string(),
            length: t.len(),
            steps: t.steps.iter().map(|s| StepView::new(sys, s)).collect(),
            text: render_text(&chart),
            chart,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct TraceReplayError {
    /// Index of the first step that is not enabled.
    pub step: usize,
    pub message: String,
}

/// Rebuilds a trace from step names, firing each against the configuration
/// the previous one produced.
pub fn replay(sys: &ValidatedSystem, steps: &[StepView]) -> Result<Trace, TraceReplayError> {
    let mut t = Trace::new(sys.initial_state());
    for (k, v) in steps.iter().enumerate() {
        let succ = sys
            .successors(t.last_state())
            .into_iter()
            .find(|s| v.names(sys, &s.step))
            .ok_or_else(|| TraceReplayError {
                step: k,
                message: format!("`{}` is not enabled", v.text),
            })?;
        let next = succ.result.map_err(|e| TraceReplayError {
            step: k,
            message: e.to_string(),
        })?;
        t.push(succ.step, next);
    }
    Ok(t)
}

/// Exploration summary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct StatsView {
    pub states: usize,
    pub transitions: usize,
    pub depth: usize,
    pub exhausted: bool,
}

impl From<Stats> for StatsView {
    fn from(s: Stats) -> Self {
        StatsView {
            states: s.states,
            transitions: s.transitions,
            depth: s.depth,
            exhausted: s.exhausted,
        }
    }
}
