use std::fmt::Write;

use crate::expr::Expr;

use super::ast::*;

/// Converts a source expression into a kernel expression with every name
/// treated as a variable; used for printing only.
fn display_expr(e: &AExpr) -> Expr {
    match e {
        AExpr::Int(v) => Expr::Int(*v),
        AExpr::Bool(b) => Expr::Bool(*b),
        AExpr::Name(n, _) => Expr::Var(n.clone()),
        AExpr::Unary(op, a) => Expr::unary(*op, display_expr(a)),
        AExpr::Binary(op, a, b) => Expr::binary(*op, display_expr(a), display_expr(b)),
    }
}

pub fn print_expr(e: &AExpr) -> String {
    display_expr(e).to_string()
}

fn print_list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

pub fn print_rule(r: &RuleDecl) -> String {
    let mut out = String::new();
    if let Some(l) = &r.label {
        write!(out, "{l}: ").unwrap();
    }
    write!(out, "{} -> {} {{", r.source, r.target).unwrap();
    if let Some(t) = &r.trigger {
        write!(out, " {}", t.signal).unwrap();
        if !t.params.is_empty() {
            write!(out, "({})", t.params.join(", ")).unwrap();
        }
    }
    if let Some(g) = &r.guard {
        write!(out, " [{}]", print_expr(g)).unwrap();
    }
    if !r.actions.is_empty() {
        let acts: Vec<String> = r
            .actions
            .iter()
            .map(|a| match a {
                ActionDecl::Assign { var, value, .. } => format!("{var} := {}", print_expr(value)),
                ActionDecl::Send {
                    target,
                    signal,
                    args,
                    ..
                } if args.is_empty() => format!("{target}.{signal}"),
                ActionDecl::Send {
                    target,
                    signal,
                    args,
                    ..
                } => format!("{target}.{signal}({})", print_list(args, print_expr)),
            })
            .collect();
        write!(out, " / {}", acts.join("; ")).unwrap();
    }
    out.push_str(" }");
    out
}

/// Canonical text: constants, then classes, then systems, one blank line
/// between top-level items.
pub fn print_model(m: &SourceModel) -> String {
    let mut blocks = Vec::new();
    if !m.consts.is_empty() {
        let mut b = String::new();
        for c in &m.consts {
            writeln!(b, "const {} = {};", c.name, c.value).unwrap();
        }
        blocks.push(b);
    }
    for c in &m.classes {
        let mut b = String::new();
        writeln!(b, "class {} {{", c.name).unwrap();
        if !c.signals.is_empty() {
            let sigs = print_list(&c.signals, |s| {
                if s.params.is_empty() {
                    s.name.clone()
                } else {
                    format!("{}({})", s.name, s.params.join(", "))
                }
            });
            writeln!(b, "  signals {sigs};").unwrap();
        }
        if !c.vars.is_empty() {
            let vars = print_list(&c.vars, |v| format!("{} := {}", v.name, print_expr(&v.init)));
            writeln!(b, "  vars {vars};").unwrap();
        }
        if !c.states.is_empty() {
            let states = print_list(&c.states, |s| {
                if s.initial {
                    format!("initial {}", s.name)
                } else {
                    s.name.clone()
                }
            });
            writeln!(b, "  states {states};").unwrap();
        }
        if !c.rules.is_empty() {
            b.push_str("  transitions\n");
            for r in &c.rules {
                writeln!(b, "    {}", print_rule(r)).unwrap();
            }
        }
        b.push_str("}\n");
        blocks.push(b);
    }
    for s in &m.systems {
        let mut b = String::new();
        writeln!(b, "system {} {{", s.name).unwrap();
        for i in &s.instances {
            match i.capacity {
                Some(c) => writeln!(b, "  {}: {} capacity {c};", i.name, i.class).unwrap(),
                None => writeln!(b, "  {}: {};", i.name, i.class).unwrap(),
            }
        }
        b.push_str("}\n");
        blocks.push(b);
    }
    blocks.join("\n")
}
