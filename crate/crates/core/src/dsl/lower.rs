use std::collections::HashSet;

use crate::expr::Expr;
use crate::system::{
    Action, InstanceDef, MachineDef, SignalDecl, SystemDef, TransitionRule, Trigger, VarDecl,
    DEFAULT_POOL_CAPACITY,
};

use super::ast::*;
use super::Diagnostic;

struct Names<'a> {
    params: &'a [String],
    vars: &'a HashSet<&'a str>,
    consts: &'a HashSet<&'a str>,
}

fn resolve(e: &AExpr, names: &Names<'_>, diags: &mut Vec<Diagnostic>) -> Expr {
    match e {
        AExpr::Int(v) => Expr::Int(*v),
        AExpr::Bool(b) => Expr::Bool(*b),
        AExpr::Name(n, pos) => {
            if names.params.iter().any(|p| p == n) {
                Expr::Param(n.clone())
            } else if names.vars.contains(n.as_str()) {
                Expr::Var(n.clone())
            } else if names.consts.contains(n.as_str()) {
                Expr::Const(n.clone())
            } else {
                diags.push(Diagnostic::new(*pos, format!("unknown name `{n}`")));
                Expr::Int(0)
            }
        }
        AExpr::Unary(op, a) => Expr::unary(*op, resolve(a, names, diags)),
        AExpr::Binary(op, a, b) => {
            Expr::binary(*op, resolve(a, names, diags), resolve(b, names, diags))
        }
    }
}

/// Resolves names and produces a system definition. `system` picks one of
/// the declared systems; it may be omitted when the model declares exactly
/// one. Constants stay symbolic. Only classes instantiated by the system
/// are lowered.
pub fn lower(m: &SourceModel, system: Option<&str>) -> Result<SystemDef, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let sys = match system {
        Some(name) => m.systems.iter().find(|s| s.name == name),
        None if m.systems.len() == 1 => m.systems.first(),
        None => None,
    };
    let Some(sys) = sys else {
        let msg = match system {
            Some(name) => format!("no system named `{name}`"),
            None if m.systems.is_empty() => "model declares no system".to_string(),
            None => "model declares several systems; one must be selected".to_string(),
        };
        return Err(vec![Diagnostic::new(Pos { line: 1, col: 1 }, msg)]);
    };

    let consts: HashSet<&str> = m.consts.iter().map(|c| c.name.as_str()).collect();
    let mut seen = HashSet::new();
    for c in &m.consts {
        if !seen.insert(c.name.as_str()) {
            diags.push(Diagnostic::new(c.pos, format!("constant `{}` declared twice", c.name)));
        }
    }
    let instances: HashSet<&str> = sys.instances.iter().map(|i| i.name.as_str()).collect();

    // Classes the selected system does not instantiate are left out, so a
    // model may hold several architectures whose classes address different
    // instance sets.
    let used: HashSet<&str> = sys.instances.iter().map(|i| i.class.as_str()).collect();
    let mut machines = Vec::new();
    for c in m.classes.iter().filter(|c| used.contains(c.name.as_str())) {
        let vars: HashSet<&str> = c.vars.iter().map(|v| v.name.as_str()).collect();
        let no_vars = HashSet::new();
        let mut md = MachineDef::new(&c.name);
        md.signals = c
            .signals
            .iter()
            .map(|s| SignalDecl {
                name: s.name.clone(),
                params: s.params.clone(),
            })
            .collect();
        for v in &c.vars {
            let names = Names {
                params: &[],
                vars: &no_vars,
                consts: &consts,
            };
            md.vars.push(VarDecl {
                name: v.name.clone(),
                init: resolve(&v.init, &names, &mut diags),
            });
        }
        md.states = c.states.iter().map(|s| s.name.clone()).collect();
        md.initial = c
            .states
            .iter()
            .filter(|s| s.initial)
            .map(|s| s.name.clone())
            .collect();
        for (k, r) in c.rules.iter().enumerate() {
            let params: Vec<String> = r.trigger.as_ref().map_or(Vec::new(), |t| t.params.clone());
            let names = Names {
                params: &params,
                vars: &vars,
                consts: &consts,
            };
            let guard = r.guard.as_ref().map(|g| resolve(g, &names, &mut diags));
            let mut actions = Vec::new();
            for a in &r.actions {
                match a {
                    ActionDecl::Assign { var, value, pos } => {
                        if !vars.contains(var.as_str()) {
                            diags.push(Diagnostic::new(
                                *pos,
                                format!("`{var}` is not a variable of class `{}`", c.name),
                            ));
                        }
                        actions.push(Action::Assign {
                            var: var.clone(),
                            value: resolve(value, &names, &mut diags),
                        });
                    }
                    ActionDecl::Send {
                        target,
                        signal,
                        args,
                        pos,
                    } => {
                        if !instances.contains(target.as_str()) {
                            diags.push(Diagnostic::new(
                                *pos,
                                format!("send target `{target}` is not an instance of system `{}`", sys.name),
                            ));
                        }
                        actions.push(Action::Send {
                            target: target.clone(),
                            signal: signal.clone(),
                            args: args.iter().map(|a| resolve(a, &names, &mut diags)).collect(),
                        });
                    }
                }
            }
            md.rules.push(TransitionRule {
                label: r.label.clone().unwrap_or_else(|| format!("rule{}", k + 1)),
                source: r.source.clone(),
                target: r.target.clone(),
                trigger: r.trigger.as_ref().map(|t| Trigger {
                    signal: t.signal.clone(),
                    params: t.params.clone(),
                }),
                guard,
                actions,
            });
        }
        machines.push(md);
    }

    let mut inst_defs = Vec::new();
    for i in &sys.instances {
        if !m.classes.iter().any(|c| c.name == i.class) {
            diags.push(Diagnostic::new(i.pos, format!("unknown class `{}`", i.class)));
        }
        inst_defs.push(InstanceDef {
            name: i.name.clone(),
            machine: i.class.clone(),
            capacity: i.capacity.unwrap_or(DEFAULT_POOL_CAPACITY),
        });
    }

    if diags.is_empty() {
        Ok(SystemDef {
            name: sys.name.clone(),
            machines,
            instances: inst_defs,
            constants: m.consts.iter().map(|c| (c.name.clone(), c.value)).collect(),
        })
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(diags)
    }
}
