//! Message sequence charts from traces, and graph text for LTSs.

use std::collections::BTreeSet;
use std::fmt::Write;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::explorer::Trace;
use crate::kernel::{format_signal, StepKind, ValidatedSystem};
use crate::lts::Lts;

/// Restricts a chart to some instances and signals; `None` keeps everything.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ChartFilter {
    pub instances: Option<BTreeSet<String>>,
    pub signals: Option<BTreeSet<String>>,
}

impl ChartFilter {
    pub fn all() -> Self {
        Self::default()
    }

    fn instance(&self, name: &str) -> bool {
        self.instances.as_ref().is_none_or(|s| s.contains(name))
    }

    fn signal(&self, name: &str) -> bool {
        self.signals.as_ref().is_none_or(|s| s.contains(name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartEvent {
    Message {
        step: usize,
        from: String,
        to: String,
        signal: String,
        text: String,
    },
    StateChange {
        step: usize,
        instance: String,
        from: String,
        to: String,
    },
    Discard {
        step: usize,
        instance: String,
        signal: String,
        text: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SequenceChart {
    pub lifelines: Vec<String>,
    pub events: Vec<ChartEvent>,
}

impl SequenceChart {
    pub fn messages(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, ChartEvent::Message { .. }))
            .count()
    }
}

/// One arrow per send, a note per control-state change and per discard,
/// in step order.
pub fn chart_from_trace(sys: &ValidatedSystem, t: &Trace, filter: &ChartFilter) -> SequenceChart {
    let lifelines: Vec<String> = sys
        .instances
        .iter()
        .map(|i| i.name.clone())
        .filter(|n| filter.instance(n))
        .collect();
    let mut events = Vec::new();
    for (k, step) in t.steps.iter().enumerate() {
        let me = sys.instance_name(step.instance);
        match &step.kind {
            StepKind::Fire { sends, .. } => {
                for e in sends {
                    let to = sys.instance_name(e.target);
                    let signal = &sys.machine_of(e.target).signals[e.event.signal].name;
                    if filter.instance(me) && filter.instance(to) && filter.signal(signal) {
                        events.push(ChartEvent::Message {
                            step: k,
                            from: me.to_string(),
                            to: to.to_string(),
                            signal: signal.clone(),
                            text: format_signal(signal, &e.event.args),
                        });
                    }
                }
                let before = sys.view(&t.states[k], step.instance).state_name();
                let after = sys.view(&t.states[k + 1], step.instance).state_name();
                if before != after && filter.instance(me) {
                    events.push(ChartEvent::StateChange {
                        step: k,
                        instance: me.to_string(),
                        from: before.to_string(),
                        to: after.to_string(),
                    });
                }
            }
            StepKind::Discard(e) => {
                let signal = &sys.machine_of(step.instance).signals[e.signal].name;
                if filter.instance(me) && filter.signal(signal) {
                    events.push(ChartEvent::Discard {
                        step: k,
                        instance: me.to_string(),
                        signal: signal.clone(),
                        text: format_signal(signal, &e.args),
                    });
                }
            }
        }
    }
    SequenceChart { lifelines, events }
}

/// PlantUML-style sequence diagram text.
pub fn render_text(c: &SequenceChart) -> String {
    let mut out = String::from("@startuml\n");
    for l in &c.lifelines {
        writeln!(out, "participant {l}").unwrap();
    }
    for e in &c.events {
        match e {
            ChartEvent::Message { from, to, text, .. } => writeln!(out, "{from} -> {to} : {text}"),
            ChartEvent::StateChange { instance, from, to, .. } => {
                writeln!(out, "note over {instance} : {from} to {to}")
            }
            ChartEvent::Discard { instance, text, .. } => writeln!(out, "note over {instance} : discard {text}"),
        }
        .unwrap();
    }
    out.push_str("@enduml\n");
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz text: states in id order, the initial one drawn doubled, edges
/// in stored order.
pub fn render_dot(l: &Lts) -> String {
    let mut out = String::from("digraph lts {\n  node [shape=circle];\n");
    for s in 0..l.states {
        if s as u32 == l.initial {
            writeln!(out, "  {s} [peripheries=2];").unwrap();
        } else {
            writeln!(out, "  {s};").unwrap();
        }
    }
    for (a, lab, b) in &l.transitions {
        writeln!(out, "  {a} -> {b} [label=\"{}\"];", dot_escape(lab)).unwrap();
    }
    out.push_str("}\n");
    out
}
