use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::expr::{BinOp, Expr, UnOp, VALUE_BOUND};
use crate::system::{Action, MachineDef, SystemDef, TransitionRule};

use super::eval::{CAction, CExpr};

/// Problems found while loading a system. `UnreachableState` is only ever
/// reported as a warning.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StaticError {
    #[error("system declares no instances")]
    NoInstances,
    #[error("duplicate instance `{0}`")]
    DuplicateInstance(String),
    #[error("duplicate machine `{0}`")]
    DuplicateMachine(String),
    #[error("instance `{instance}` refers to unknown machine `{machine}`")]
    UnknownMachine { instance: String, machine: String },
    #[error("instance `{0}` has zero pool capacity")]
    ZeroCapacity(String),
    #[error("{machine}: duplicate {what} `{name}`")]
    Duplicate {
        machine: String,
        what: &'static str,
        name: String,
    },
    #[error("{machine}: expected exactly one initial state, found {found}")]
    InitialState { machine: String, found: usize },
    #[error("{machine}.{rule}: unknown state `{state}`")]
    UnknownState {
        machine: String,
        rule: String,
        state: String,
    },
    #[error("{machine}.{rule}: trigger `{signal}` is not a declared signal")]
    UnknownTrigger {
        machine: String,
        rule: String,
        signal: String,
    },
    #[error("{machine}.{rule}: send target `{target}` is not a declared instance")]
    UnknownTarget {
        machine: String,
        rule: String,
        target: String,
    },
    #[error("{machine}.{rule}: instance `{target}` does not accept signal `{signal}`")]
    UnknownTargetSignal {
        machine: String,
        rule: String,
        target: String,
        signal: String,
    },
    #[error("{machine}.{rule}: arity mismatch for `{signal}`: declared {expected}, used with {found}")]
    ArityMismatch {
        machine: String,
        rule: String,
        signal: String,
        expected: usize,
        found: usize,
    },
    #[error("{machine}.{context}: unbound name `{name}`")]
    UnboundName {
        machine: String,
        context: String,
        name: String,
    },
    #[error("{machine}.{context}: assignment to undeclared variable `{var}`")]
    UnknownVar {
        machine: String,
        context: String,
        var: String,
    },
    #[error("{machine}.{context}: type error: {detail}")]
    Type {
        machine: String,
        context: String,
        detail: String,
    },
    #[error("{machine}.{var}: initial value is not constant: {detail}")]
    InitValue {
        machine: String,
        var: String,
        detail: String,
    },
    #[error("constant `{0}` exceeds the value bound")]
    ConstantRange(String),
    #[error("{machine}: state `{state}` is unreachable in the rule graph")]
    UnreachableState { machine: String, state: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bool,
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub name: String,
    pub ty: Ty,
    pub init: i32,
}

#[derive(Clone, Debug)]
pub struct SignalInfo {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug)]
pub struct RuleInfo {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub trigger: Option<usize>,
    pub(crate) guard: Option<CExpr>,
    pub(crate) actions: Vec<CAction>,
    /// The rule as written, for explanations and emitters.
    pub def: TransitionRule,
}

#[derive(Clone, Debug)]
pub struct MachineInfo {
    pub name: String,
    pub signals: Vec<SignalInfo>,
    pub vars: Vec<VarInfo>,
    pub states: Vec<String>,
    pub initial: usize,
    pub rules: Vec<RuleInfo>,
    /// Triggerless rule indices per state.
    pub(crate) completion: Vec<Vec<usize>>,
    /// Triggered rule indices per state, per signal.
    pub(crate) triggered: Vec<Vec<Vec<usize>>>,
}

impl MachineInfo {
    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s.name == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn rule_index(&self, label: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.label == label)
    }
}

#[derive(Clone, Debug)]
pub struct InstanceInfo {
    pub name: String,
    pub machine: usize,
    pub capacity: usize,
}

/// A system that passed static checks; immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct ValidatedSystem {
    pub def: SystemDef,
    pub machines: Vec<MachineInfo>,
    pub instances: Vec<InstanceInfo>,
    pub warnings: Vec<StaticError>,
}

impl ValidatedSystem {
    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.name == name)
    }

    pub fn machine_of(&self, instance: usize) -> &MachineInfo {
        &self.machines[self.instances[instance].machine]
    }

    pub fn instance_name(&self, instance: usize) -> &str {
        &self.instances[instance].name
    }
}

/// Validates a system definition; all static errors are collected and the
/// load either fully succeeds or fails.
pub fn load_system(def: &SystemDef) -> Result<ValidatedSystem, Vec<StaticError>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    if def.instances.is_empty() {
        errors.push(StaticError::NoInstances);
    }
    let consts: HashMap<&str, i64> = def
        .constants
        .iter()
        .map(|(n, v)| (n.as_str(), *v))
        .collect();
    for (name, v) in &def.constants {
        if v.abs() > VALUE_BOUND {
            errors.push(StaticError::ConstantRange(name.clone()));
        }
    }

    let mut machine_names = HashSet::new();
    for m in &def.machines {
        if !machine_names.insert(m.name.as_str()) {
            errors.push(StaticError::DuplicateMachine(m.name.clone()));
        }
    }

    let mut instance_names = HashSet::new();
    let mut instances = Vec::new();
    let mut used_machines: Vec<usize> = Vec::new();
    for inst in &def.instances {
        if !instance_names.insert(inst.name.as_str()) {
            errors.push(StaticError::DuplicateInstance(inst.name.clone()));
        }
        if inst.capacity == 0 {
            errors.push(StaticError::ZeroCapacity(inst.name.clone()));
        }
        match def.machines.iter().position(|m| m.name == inst.machine) {
            Some(mi) => {
                let slot = match used_machines.iter().position(|&u| u == mi) {
                    Some(s) => s,
                    None => {
                        used_machines.push(mi);
                        used_machines.len() - 1
                    }
                };
                instances.push(InstanceInfo {
                    name: inst.name.clone(),
                    machine: slot,
                    capacity: inst.capacity,
                });
            }
            None => errors.push(StaticError::UnknownMachine {
                instance: inst.name.clone(),
                machine: inst.machine.clone(),
            }),
        }
    }

    // Signal tables of every instance, needed to check sends.
    let instance_signals: HashMap<&str, &MachineDef> = def
        .instances
        .iter()
        .filter_map(|i| def.machine(&i.machine).map(|m| (i.name.as_str(), m)))
        .collect();

    let mut machines = Vec::new();
    for &mi in &used_machines {
        let m = &def.machines[mi];
        match compile_machine(m, &consts, def, &instance_signals, &mut warnings) {
            Ok(info) => machines.push(info),
            Err(mut errs) => errors.append(&mut errs),
        }
    }

    if errors.is_empty() {
        Ok(ValidatedSystem {
            def: def.clone(),
            machines,
            instances,
            warnings,
        })
    } else {
        Err(errors)
    }
}

struct Scope<'a> {
    machine: &'a MachineDef,
    vars: &'a [VarInfo],
    params: &'a [String],
    consts: &'a HashMap<&'a str, i64>,
    context: String,
}

impl Scope<'_> {
    fn err_type(&self, detail: String) -> StaticError {
        StaticError::Type {
            machine: self.machine.name.clone(),
            context: self.context.clone(),
            detail,
        }
    }

    fn compile(&self, e: &Expr) -> Result<(CExpr, Ty), StaticError> {
        let unbound = |name: &str| StaticError::UnboundName {
            machine: self.machine.name.clone(),
            context: self.context.clone(),
            name: name.to_string(),
        };
        Ok(match e {
            Expr::Int(v) => {
                if v.abs() > VALUE_BOUND {
                    return Err(self.err_type(format!("literal {v} out of range")));
                }
                (CExpr::Lit(*v), Ty::Int)
            }
            Expr::Bool(b) => (CExpr::Lit(*b as i64), Ty::Bool),
            Expr::Var(n) => {
                let i = self
                    .vars
                    .iter()
                    .position(|v| &v.name == n)
                    .ok_or_else(|| unbound(n))?;
                (CExpr::Var(i), self.vars[i].ty)
            }
            Expr::Param(n) => {
                let i = self
                    .params
                    .iter()
                    .position(|p| p == n)
                    .ok_or_else(|| unbound(n))?;
                (CExpr::Param(i), Ty::Int)
            }
            Expr::Const(n) => {
                let v = self.consts.get(n.as_str()).ok_or_else(|| unbound(n))?;
                (CExpr::Lit(*v), Ty::Int)
            }
            Expr::Unary(op, inner) => {
                let (c, t) = self.compile(inner)?;
                let want = match op {
                    UnOp::Neg => Ty::Int,
                    UnOp::Not => Ty::Bool,
                };
                if t != want {
                    return Err(self.err_type(format!("operand of {op:?} must be {want:?}")));
                }
                (CExpr::Un(*op, Box::new(c)), want)
            }
            Expr::Binary(op, a, b) => {
                let (ca, ta) = self.compile(a)?;
                let (cb, tb) = self.compile(b)?;
                let result = match op {
                    BinOp::And | BinOp::Or => {
                        if ta != Ty::Bool || tb != Ty::Bool {
                            return Err(self.err_type(format!("`{}` needs boolean operands", op.symbol())));
                        }
                        Ty::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if ta != tb {
                            return Err(self.err_type(format!("`{}` compares {ta:?} with {tb:?}", op.symbol())));
                        }
                        Ty::Bool
                    }
                    _ => {
                        if ta != Ty::Int || tb != Ty::Int {
                            return Err(self.err_type(format!("`{}` needs integer operands", op.symbol())));
                        }
                        if op.is_comparison() {
                            Ty::Bool
                        } else {
                            Ty::Int
                        }
                    }
                };
                (CExpr::Bin(*op, Box::new(ca), Box::new(cb)), result)
            }
        })
    }
}

fn compile_machine(
    m: &MachineDef,
    consts: &HashMap<&str, i64>,
    def: &SystemDef,
    instance_machines: &HashMap<&str, &MachineDef>,
    warnings: &mut Vec<StaticError>,
) -> Result<MachineInfo, Vec<StaticError>> {
    let mut errors = Vec::new();
    let dup = |what: &'static str, name: &str| StaticError::Duplicate {
        machine: m.name.clone(),
        what,
        name: name.to_string(),
    };

    let mut seen = HashSet::new();
    for s in &m.states {
        if !seen.insert(s.as_str()) {
            errors.push(dup("state", s));
        }
    }
    let mut seen = HashSet::new();
    for s in &m.signals {
        if !seen.insert(s.name.as_str()) {
            errors.push(dup("signal", &s.name));
        }
    }
    let mut seen = HashSet::new();
    for r in &m.rules {
        if !seen.insert(r.label.as_str()) {
            errors.push(dup("rule", &r.label));
        }
    }
    let initial = match m.initial.as_slice() {
        [one] => match m.states.iter().position(|s| s == one) {
            Some(i) => i,
            None => {
                errors.push(StaticError::UnknownState {
                    machine: m.name.clone(),
                    rule: "<initial>".into(),
                    state: one.clone(),
                });
                0
            }
        },
        other => {
            errors.push(StaticError::InitialState {
                machine: m.name.clone(),
                found: other.len(),
            });
            0
        }
    };

    // Variables: initial values are constant expressions over literals and
    // constants, folded here.
    let mut vars: Vec<VarInfo> = Vec::new();
    let mut seen = HashSet::new();
    for v in &m.vars {
        if !seen.insert(v.name.as_str()) {
            errors.push(dup("variable", &v.name));
        }
        let scope = Scope {
            machine: m,
            vars: &[],
            params: &[],
            consts,
            context: v.name.clone(),
        };
        match scope.compile(&v.init) {
            Ok((c, ty)) => match c.eval(&[], &[]) {
                Ok(val) => vars.push(VarInfo {
                    name: v.name.clone(),
                    ty,
                    init: val as i32,
                }),
                Err(e) => errors.push(StaticError::InitValue {
                    machine: m.name.clone(),
                    var: v.name.clone(),
                    detail: e.to_string(),
                }),
            },
            Err(e) => errors.push(StaticError::InitValue {
                machine: m.name.clone(),
                var: v.name.clone(),
                detail: e.to_string(),
            }),
        }
    }

    let nstates = m.states.len();
    let mut completion = vec![Vec::new(); nstates];
    let mut triggered = vec![vec![Vec::new(); m.signals.len()]; nstates];
    let mut rules = Vec::new();

    for (ri, r) in m.rules.iter().enumerate() {
        let state_idx = |s: &str, errors: &mut Vec<StaticError>| {
            let i = m.states.iter().position(|x| x == s);
            if i.is_none() {
                errors.push(StaticError::UnknownState {
                    machine: m.name.clone(),
                    rule: r.label.clone(),
                    state: s.to_string(),
                });
            }
            i
        };
        let source = state_idx(&r.source, &mut errors);
        let target = state_idx(&r.target, &mut errors);

        let mut params: Vec<String> = Vec::new();
        let trigger = match &r.trigger {
            None => None,
            Some(t) => match m.signals.iter().position(|s| s.name == t.signal) {
                Some(si) => {
                    if m.signals[si].arity() != t.params.len() {
                        errors.push(StaticError::ArityMismatch {
                            machine: m.name.clone(),
                            rule: r.label.clone(),
                            signal: t.signal.clone(),
                            expected: m.signals[si].arity(),
                            found: t.params.len(),
                        });
                    }
                    let mut seen = HashSet::new();
                    for p in &t.params {
                        if !seen.insert(p.as_str()) {
                            errors.push(dup("trigger parameter", p));
                        }
                    }
                    params = t.params.clone();
                    Some(si)
                }
                None => {
                    errors.push(StaticError::UnknownTrigger {
                        machine: m.name.clone(),
                        rule: r.label.clone(),
                        signal: t.signal.clone(),
                    });
                    None
                }
            },
        };

        let scope = Scope {
            machine: m,
            vars: &vars,
            params: &params,
            consts,
            context: r.label.clone(),
        };
        let guard = match &r.guard {
            None => None,
            Some(g) => match scope.compile(g) {
                Ok((c, Ty::Bool)) => Some(c),
                Ok((_, Ty::Int)) => {
                    errors.push(scope.err_type("guard must be boolean".into()));
                    None
                }
                Err(e) => {
                    errors.push(e);
                    None
                }
            },
        };

        let mut actions = Vec::new();
        for a in &r.actions {
            match a {
                Action::Assign { var, value } => {
                    let Some(vi) = vars.iter().position(|v| &v.name == var) else {
                        errors.push(StaticError::UnknownVar {
                            machine: m.name.clone(),
                            context: r.label.clone(),
                            var: var.clone(),
                        });
                        continue;
                    };
                    match scope.compile(value) {
                        Ok((c, ty)) if ty == vars[vi].ty => actions.push(CAction::Assign(vi, c)),
                        Ok((_, ty)) => errors.push(scope.err_type(format!(
                            "assigning {ty:?} to `{var}` of type {:?}",
                            vars[vi].ty
                        ))),
                        Err(e) => errors.push(e),
                    }
                }
                Action::Send {
                    target,
                    signal,
                    args,
                } => {
                    let Some(ti) = def.instances.iter().position(|i| &i.name == target) else {
                        errors.push(StaticError::UnknownTarget {
                            machine: m.name.clone(),
                            rule: r.label.clone(),
                            target: target.clone(),
                        });
                        continue;
                    };
                    let Some(tm) = instance_machines.get(target.as_str()) else {
                        // Unknown machine already reported at instance level.
                        continue;
                    };
                    let Some(si) = tm.signals.iter().position(|s| &s.name == signal) else {
                        errors.push(StaticError::UnknownTargetSignal {
                            machine: m.name.clone(),
                            rule: r.label.clone(),
                            target: target.clone(),
                            signal: signal.clone(),
                        });
                        continue;
                    };
                    if tm.signals[si].arity() != args.len() {
                        errors.push(StaticError::ArityMismatch {
                            machine: m.name.clone(),
                            rule: r.label.clone(),
                            signal: format!("{target}.{signal}"),
                            expected: tm.signals[si].arity(),
                            found: args.len(),
                        });
                        continue;
                    }
                    let mut cargs = Vec::new();
                    for arg in args {
                        match scope.compile(arg) {
                            Ok((c, Ty::Int)) => cargs.push(c),
                            Ok((_, Ty::Bool)) => errors.push(scope.err_type(format!(
                                "argument of `{target}.{signal}` must be an integer"
                            ))),
                            Err(e) => errors.push(e),
                        }
                    }
                    actions.push(CAction::Send {
                        target: ti,
                        signal: si,
                        args: cargs,
                    });
                }
            }
        }

        if let (Some(s), Some(t)) = (source, target) {
            match trigger {
                None if r.trigger.is_none() => completion[s].push(ri),
                Some(si) => triggered[s][si].push(ri),
                None => {}
            }
            rules.push(RuleInfo {
                label: r.label.clone(),
                source: s,
                target: t,
                trigger,
                guard,
                actions,
                def: r.clone(),
            });
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    // Reachability over the rule graph, ignoring guards.
    let mut reached = vec![false; nstates];
    let mut queue = VecDeque::from([initial]);
    reached[initial] = true;
    while let Some(s) = queue.pop_front() {
        for r in rules.iter().filter(|r| r.source == s) {
            if !reached[r.target] {
                reached[r.target] = true;
                queue.push_back(r.target);
            }
        }
    }
    for (i, ok) in reached.iter().enumerate() {
        if !ok {
            warnings.push(StaticError::UnreachableState {
                machine: m.name.clone(),
                state: m.states[i].clone(),
            });
        }
    }

    Ok(MachineInfo {
        name: m.name.clone(),
        signals: m
            .signals
            .iter()
            .map(|s| SignalInfo {
                name: s.name.clone(),
                arity: s.arity(),
            })
            .collect(),
        vars,
        states: m.states.clone(),
        initial,
        rules,
        completion,
        triggered,
    })
}
