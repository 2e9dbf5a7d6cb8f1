//! Source emitters for external tools: a single classical-B machine and an
//! LNT module with one process per instance.

mod b;
mod lnt;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{BinOp, Expr, UnOp};
use crate::kernel::{Ty, ValidatedSystem};
use crate::system::Action;

pub use b::emit_b;
pub use lnt::emit_lnt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitterConfig {
    /// Joins an instance name to the names it owns.
    pub separator: String,
    /// Suffix of the per-instance event pool variable.
    pub pool_variable: String,
    /// Suffix of the per-instance control state variable.
    pub state_variable: String,
    /// B type of integer variables.
    pub b_int_type: String,
    /// Joins sender and receiver in LNT gate names.
    pub gate_infix: String,
}

impl Default for EmitterConfig {
    fn default() -> Self {
        EmitterConfig {
            separator: "_".into(),
            pool_variable: "buffer".into(),
            state_variable: "statemachine_STATE".into(),
            b_int_type: "INT".into(),
            gate_infix: "_TO_".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("generated name `{name}` is used for both {first} and {second}")]
    NameClash { name: String, first: String, second: String },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// Generated identifiers with what they stand for; refuses duplicates.
#[derive(Default)]
struct Names(BTreeMap<String, String>);

impl Names {
    fn claim(&mut self, name: &str, what: impl Into<String>) -> Result<(), EmitError> {
        let what = what.into();
        match self.0.get(name) {
            Some(first) => Err(EmitError::NameClash {
                name: name.to_string(),
                first: first.clone(),
                second: what,
            }),
            None => {
                self.0.insert(name.to_string(), what);
                Ok(())
            }
        }
    }
}

/// One resolved send.
struct Send {
    target: usize,
    signal: usize,
    args: Vec<Expr>,
}

/// Net effect of a rule's actions over the pre-state: every assignment is
/// substituted forward, so final values and send arguments only mention
/// variables as they were before the step.
struct Effect {
    assigns: Vec<(usize, Expr)>,
    sends: Vec<Send>,
}

fn substitute(e: &Expr, env: &HashMap<&str, Expr>) -> Expr {
    match e {
        Expr::Var(n) => env.get(n.as_str()).cloned().unwrap_or_else(|| e.clone()),
        Expr::Unary(op, a) => Expr::unary(*op, substitute(a, env)),
        Expr::Binary(op, a, b) => Expr::binary(*op, substitute(a, env), substitute(b, env)),
        _ => e.clone(),
    }
}

fn resolve_send(sys: &ValidatedSystem, target: &str, signal: &str) -> Result<(usize, usize), EmitError> {
    let t = sys
        .instance_index(target)
        .ok_or_else(|| EmitError::Unsupported(format!("send to unknown instance `{target}`")))?;
    let s = sys
        .machine_of(t)
        .signal_index(signal)
        .ok_or_else(|| EmitError::Unsupported(format!("`{target}` has no signal `{signal}`")))?;
    Ok((t, s))
}

fn net_effect(sys: &ValidatedSystem, inst: usize, actions: &[Action]) -> Result<Effect, EmitError> {
    let m = sys.machine_of(inst);
    let mut env: HashMap<&str, Expr> = HashMap::new();
    let mut sends = Vec::new();
    for a in actions {
        match a {
            Action::Assign { var, value } => {
                let v = substitute(value, &env);
                env.insert(var.as_str(), v);
            }
            Action::Send { target, signal, args } => {
                let (target, signal) = resolve_send(sys, target, signal)?;
                sends.push(Send {
                    target,
                    signal,
                    args: args.iter().map(|e| substitute(e, &env)).collect(),
                });
            }
        }
    }
    let mut assigns: Vec<(usize, Expr)> = env
        .into_iter()
        .map(|(v, e)| {
            m.var_index(v)
                .map(|i| (i, e))
                .ok_or_else(|| EmitError::Unsupported(format!("assignment to unknown variable `{v}`")))
        })
        .collect::<Result<_, _>>()?;
    assigns.sort_by_key(|(i, _)| *i);
    Ok(Effect { assigns, sends })
}

/// Whether an expression denotes a truth value.
fn is_bool(e: &Expr, var_ty: &dyn Fn(&str) -> Ty) -> bool {
    match e {
        Expr::Bool(_) => true,
        Expr::Var(n) => var_ty(n) == Ty::Bool,
        Expr::Unary(UnOp::Not, _) => true,
        Expr::Binary(op, _, _) => op.is_comparison() || matches!(op, BinOp::And | BinOp::Or),
        _ => false,
    }
}

/// Declared parameter names of a signal, or positional ones.
fn signal_params(sys: &ValidatedSystem, inst: usize, signal: usize) -> Vec<String> {
    let m = sys.machine_of(inst);
    let sig = &m.signals[signal];
    sys.def
        .machine(&m.name)
        .and_then(|d| d.signal(&sig.name))
        .map(|s| s.params.clone())
        .unwrap_or_else(|| (1..=sig.arity).map(|k| format!("a{k}")).collect())
}

/// (state, signal) pairs whose head may be dropped: the state has no
/// unconditional completion rule (which would preempt the pool) and no rule
/// for the signal has an unconditional guard.
fn discard_pairs(sys: &ValidatedSystem, inst: usize) -> Vec<(usize, usize)> {
    let m = sys.machine_of(inst);
    let unconditional = |r: &usize| m.rules[*r].def.guard.as_ref().is_none_or(Expr::is_trivially_true);
    let mut out = Vec::new();
    for (s, per_signal) in m.triggered.iter().enumerate() {
        if m.completion[s].iter().any(unconditional) {
            continue;
        }
        for (sig, rs) in per_signal.iter().enumerate() {
            if !rs.iter().any(unconditional) {
                out.push((s, sig));
            }
        }
    }
    out
}

/// Number of B operations the system requires: one per rule plus one per
/// discardable (state, signal) pair.
pub fn expected_b_operations(sys: &ValidatedSystem) -> usize {
    (0..sys.instances.len())
        .map(|i| sys.machine_of(i).rules.len() + discard_pairs(sys, i).len())
        .sum()
}

/// Rule label, B operation and LNT branch, one line per step kind.
pub fn emit_report(sys: &ValidatedSystem, cfg: &EmitterConfig) -> String {
    let mut rows: Vec<[String; 3]> = Vec::new();
    for (i, inst) in sys.instances.iter().enumerate() {
        let m = sys.machine_of(i);
        let name = &inst.name;
        for r in &m.rules {
            let rule = format!("{name}.{}", r.label);
            rows.push([rule.clone(), b::rule_operation(name, &r.label, cfg), format!("{name} / {rule}")]);
        }
        for (s, sig) in discard_pairs(sys, i) {
            let what = format!("discard({name}.{}) in {}", m.signals[sig].name, m.states[s]);
            let op = b::discard_operation(name, &m.states[s], &m.signals[sig].name, cfg);
            rows.push([what.clone(), op, format!("{name} / {what}")]);
        }
    }
    let header = ["step".to_string(), "B operation".to_string(), "LNT process / branch".to_string()];
    let w0 = rows.iter().chain([&header]).map(|r| r[0].len()).max().unwrap_or(0);
    let w1 = rows.iter().chain([&header]).map(|r| r[1].len()).max().unwrap_or(0);
    let mut out = format!(
        "{} cross-reference: {} B operations, {} LNT processes\n\n",
        sys.name(),
        rows.len(),
        sys.instances.len()
    );
    for r in [header].iter().chain(&rows) {
        writeln!(out, "{:w0$}  {:w1$}  {}", r[0], r[1], r[2]).unwrap();
    }
    out
}
