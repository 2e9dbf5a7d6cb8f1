//! Labelled transition systems: construction from explored spaces, `.aut`
//! files, hiding, strong bisimulation and weak-trace automata.

mod aut;
mod bisim;
mod weak;

use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explorer::StateSpace;
use crate::kernel::{StepKind, StepRecord, ValidatedSystem};

pub use aut::{read_aut, write_aut, AutError};
pub use bisim::{equiv_strong, minimize_strong, Equivalence, Side, Witness};
pub use weak::{weak_traces, StateFlags, WeakTraces};

/// The internal action.
pub const TAU: &str = "i";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Lts {
    pub states: usize,
    pub initial: u32,
    pub transitions: Vec<(u32, String, u32)>,
}

impl Lts {
    pub fn labels(&self) -> std::collections::BTreeSet<&str> {
        self.transitions.iter().map(|(_, l, _)| l.as_str()).collect()
    }

    /// Outgoing transitions per state, in stored order.
    pub fn successors(&self) -> Vec<Vec<(&str, u32)>> {
        let mut out = vec![Vec::new(); self.states];
        for (a, l, b) in &self.transitions {
            out[*a as usize].push((l.as_str(), *b));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// `Instance.rule` for firings, `discard(Instance.signal)` for discards.
    RuleLabels,
    /// The communication performed by the step: the consumed event, then the
    /// emitted ones, as `recv(I.sig(args));send(J.sig(args))`. Steps that
    /// neither consume nor send are internal.
    CommActions,
    /// Maps rule labels (as produced by `RuleLabels`) to output labels;
    /// unmapped steps become internal.
    Custom(BTreeMap<String, String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("the state space is partial (exploration hit a limit); refusing to build an LTS from it")]
    PartialSpace,
}

pub fn rule_label(sys: &ValidatedSystem, s: &StepRecord) -> String {
    let name = sys.instance_name(s.instance);
    match &s.kind {
        StepKind::Fire { rule, .. } => format!("{name}.{}", sys.rule_label(s.instance, *rule)),
        StepKind::Discard(e) => format!(
            "discard({name}.{})",
            sys.machine_of(s.instance).signals[e.signal].name
        ),
    }
}

pub fn comm_label(sys: &ValidatedSystem, s: &StepRecord) -> String {
    let name = sys.instance_name(s.instance);
    match &s.kind {
        StepKind::Discard(_) => rule_label(sys, s),
        StepKind::Fire { consumed, sends, .. } => {
            let mut parts = Vec::new();
            if let Some(e) = consumed {
                parts.push(format!("recv({name}.{})", sys.describe_event(s.instance, e)));
            }
            parts.extend(sends.iter().map(|e| format!("send({})", sys.emission_text(e))));
            if parts.is_empty() {
                TAU.to_string()
            } else {
                parts.join(";")
            }
        }
    }
}

pub fn step_label(sys: &ValidatedSystem, s: &StepRecord, scheme: &LabelScheme) -> String {
    match scheme {
        LabelScheme::RuleLabels => rule_label(sys, s),
        LabelScheme::CommActions => comm_label(sys, s),
        LabelScheme::Custom(map) => map
            .get(&rule_label(sys, s))
            .cloned()
            .unwrap_or_else(|| TAU.to_string()),
    }
}

/// One LTS transition per explored transition, same state ids.
pub fn to_lts(sys: &ValidatedSystem, space: &StateSpace, scheme: &LabelScheme) -> Result<Lts, LtsError> {
    if !space.stats.exhausted {
        return Err(LtsError::PartialSpace);
    }
    let transitions = space
        .transitions
        .iter()
        .map(|&(a, id, b)| (a, step_label(sys, &space.step_record(sys, a, id), scheme), b))
        .collect();
    Ok(Lts {
        states: space.len(),
        initial: space.initial(),
        transitions,
    })
}

/// Renames every label failing `keep` to the internal action.
pub fn hide(l: &Lts, keep: impl Fn(&str) -> bool) -> Lts {
    Lts {
        states: l.states,
        initial: l.initial,
        transitions: l
            .transitions
            .iter()
            .map(|(a, lab, b)| {
                let lab = if lab != TAU && keep(lab) { lab.clone() } else { TAU.to_string() };
                (*a, lab, *b)
            })
            .collect(),
    }
}
