use std::collections::HashMap;
use std::fmt::Write;

use super::{discard_pairs, is_bool, net_effect, signal_params, EmitError, EmitterConfig, Names, Send};
use crate::expr::{BinOp, Expr};
use crate::kernel::{Ty, ValidatedSystem};

pub(super) fn rule_operation(inst: &str, label: &str, cfg: &EmitterConfig) -> String {
    format!("{inst}{s}{label}", s = cfg.separator)
}

pub(super) fn discard_operation(inst: &str, state: &str, signal: &str, cfg: &EmitterConfig) -> String {
    format!("{inst}{s}discard{s}{state}{s}{signal}", s = cfg.separator)
}

/// Expression context of one instance; `params` maps trigger parameters to
/// operation-local names.
struct Ctx<'a> {
    sys: &'a ValidatedSystem,
    cfg: &'a EmitterConfig,
    inst: usize,
    params: HashMap<String, String>,
}

impl Ctx<'_> {
    fn prefix(&self, name: &str) -> String {
        format!("{}{}{name}", self.sys.instance_name(self.inst), self.cfg.separator)
    }

    fn var_ty(&self, n: &str) -> Ty {
        let m = self.sys.machine_of(self.inst);
        m.var_index(n).map_or(Ty::Int, |i| m.vars[i].ty)
    }

    fn is_bool(&self, e: &Expr) -> bool {
        is_bool(e, &|n| self.var_ty(n))
    }

    fn int(&self, e: &Expr) -> String {
        if self.is_bool(e) {
            return format!("B2I({})", self.boolval(e));
        }
        match e {
            Expr::Int(v) if *v < 0 => format!("({v})"),
            Expr::Int(v) => v.to_string(),
            Expr::Var(n) => self.prefix(n),
            Expr::Param(n) => self.params[n].clone(),
            Expr::Const(n) => n.clone(),
            Expr::Unary(_, a) => format!("(-{})", self.int(a)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.int(a), self.int(b));
                match op {
                    BinOp::Mod => format!("EMOD({a}, {b})"),
                    BinOp::Min => format!("min({{{a}, {b}}})"),
                    BinOp::Max => format!("max({{{a}, {b}}})"),
                    _ => format!("({a} {} {b})", op.symbol()),
                }
            }
            Expr::Bool(_) => unreachable!("boolean literals are handled above"),
        }
    }

    fn pred(&self, e: &Expr) -> String {
        if !self.is_bool(e) {
            return format!("({} /= 0)", self.int(e));
        }
        match e {
            Expr::Bool(true) => "(1 = 1)".into(),
            Expr::Bool(false) => "(1 = 0)".into(),
            Expr::Var(n) => format!("({} = TRUE)", self.prefix(n)),
            Expr::Unary(_, a) => format!("not{}", self.pred(a)),
            Expr::Binary(BinOp::And, a, b) => format!("({} & {})", self.pred(a), self.pred(b)),
            Expr::Binary(BinOp::Or, a, b) => format!("({} or {})", self.pred(a), self.pred(b)),
            Expr::Binary(op, a, b) if self.is_bool(a) && self.is_bool(b) => {
                format!("({} {} {})", self.boolval(a), op.symbol(), self.boolval(b))
            }
            Expr::Binary(op, a, b) => format!("({} {} {})", self.int(a), op.symbol(), self.int(b)),
            _ => unreachable!("non-boolean expressions are handled above"),
        }
    }

    fn boolval(&self, e: &Expr) -> String {
        match e {
            Expr::Bool(true) => "TRUE".into(),
            Expr::Bool(false) => "FALSE".into(),
            Expr::Var(n) if self.var_ty(n) == Ty::Bool => self.prefix(n),
            _ => format!("bool{}", self.pred(e)),
        }
    }
}

struct Emitter<'a> {
    sys: &'a ValidatedSystem,
    cfg: &'a EmitterConfig,
    names: Names,
}

impl<'a> Emitter<'a> {
    fn ctx(&self, inst: usize, params: HashMap<String, String>) -> Ctx<'a> {
        Ctx {
            sys: self.sys,
            cfg: self.cfg,
            inst,
            params,
        }
    }

    fn own(&self, inst: usize, suffix: &str) -> String {
        format!("{}{}{suffix}", self.sys.instance_name(inst), self.cfg.separator)
    }

    fn state_var(&self, inst: usize) -> String {
        self.own(inst, &self.cfg.state_variable)
    }

    fn buffer(&self, inst: usize) -> String {
        self.own(inst, &self.cfg.pool_variable)
    }

    fn has_pool(&self, inst: usize) -> bool {
        !self.sys.machine_of(inst).signals.is_empty()
    }

    /// Claims operation-local names, which must not shadow globals.
    fn locals(&self, op: &str, names: &[String]) -> Result<Vec<String>, EmitError> {
        let mut seen = Names::default();
        names
            .iter()
            .map(|n| {
                let local = format!("p{}{n}", self.cfg.separator);
                if let Some(what) = self.names.0.get(&local) {
                    return Err(EmitError::NameClash {
                        name: local,
                        first: what.clone(),
                        second: format!("a parameter of operation {op}"),
                    });
                }
                seen.claim(&local, format!("a parameter of operation {op}"))?;
                Ok(local)
            })
            .collect()
    }

    fn claim_globals(&mut self) -> Result<(), EmitError> {
        let sys = self.sys;
        let mut claims: Vec<(String, String)> = vec![(sys.name().to_string(), "the machine".into())];
        for name in ["EMOD", "B2I"] {
            claims.push((name.into(), "a definition".into()));
        }
        for (c, _) in &sys.def.constants {
            claims.push((c.clone(), format!("constant {c}")));
        }
        for (i, inst) in sys.instances.iter().enumerate() {
            let m = sys.machine_of(i);
            let n = &inst.name;
            claims.push((self.own(i, "STATES"), format!("the state set of {n}")));
            claims.push((self.state_var(i), format!("the control state of {n}")));
            for s in &m.states {
                claims.push((self.own(i, s), format!("state {n}.{s}")));
            }
            if self.has_pool(i) {
                claims.push((self.own(i, "SIGNALS"), format!("the signal set of {n}")));
                claims.push((self.buffer(i), format!("the event pool of {n}")));
                for s in &m.signals {
                    claims.push((self.signal(i, &s.name), format!("signal {n}.{}", s.name)));
                }
            }
            for v in &m.vars {
                claims.push((self.own(i, &v.name), format!("variable {n}.{}", v.name)));
            }
            for r in &m.rules {
                claims.push((rule_operation(n, &r.label, self.cfg), format!("rule {n}.{}", r.label)));
            }
            for (s, sig) in discard_pairs(sys, i) {
                let op = discard_operation(n, &m.states[s], &m.signals[sig].name, self.cfg);
                claims.push((op, format!("discard of {n}.{} in {}", m.signals[sig].name, m.states[s])));
            }
        }
        for (name, what) in claims {
            self.names.claim(&name, what)?;
        }
        Ok(())
    }

    /// Signal constants carry their own infix, so a rule and a signal may
    /// share a name.
    fn signal(&self, inst: usize, name: &str) -> String {
        self.own(inst, &format!("sig{}{name}", self.cfg.separator))
    }

    fn event(&self, target: usize, signal: usize, args: &[String]) -> String {
        let sig = &self.sys.machine_of(target).signals[signal].name;
        format!("({} |-> [{}])", self.signal(target, sig), args.join(", "))
    }

    /// `not (g1 or g2 ..)` over the completion rules of `state`, if any.
    fn no_completion(&self, inst: usize, state: usize) -> Option<String> {
        let m = self.sys.machine_of(inst);
        let rules = &m.completion[state];
        if rules.is_empty() {
            return None;
        }
        let ctx = self.ctx(inst, HashMap::new());
        let gs: Vec<String> = rules
            .iter()
            .map(|&r| m.rules[r].def.guard.as_ref().map_or("(1 = 1)".into(), |g| ctx.pred(g)))
            .collect();
        Some(format!("not({})", gs.join(" or ")))
    }

    fn head_guards(&self, inst: usize, state: usize, signal: usize, locals: &[String]) -> Vec<String> {
        let mut out = vec![format!(
            "{} = {}",
            self.state_var(inst),
            self.own(inst, &self.sys.machine_of(inst).states[state])
        )];
        out.extend(self.no_completion(inst, state));
        out.push(format!("{} /= []", self.buffer(inst)));
        out.push(format!("first({}) = {}", self.buffer(inst), self.event(inst, signal, locals)));
        out
    }

    fn operation(&self, out: &mut String, name: &str, locals: &[String], guards: &[String], body: &[String]) {
        writeln!(out, "  {name} =").unwrap();
        if locals.is_empty() {
            writeln!(out, "    SELECT").unwrap();
        } else {
            writeln!(out, "    ANY {} WHERE", locals.join(", ")).unwrap();
        }
        let typing = locals.iter().map(|l| format!("{l} : {}", self.cfg.b_int_type));
        let all: Vec<String> = typing.chain(guards.iter().cloned()).collect();
        writeln!(out, "      {}", all.join(" &\n      ")).unwrap();
        writeln!(out, "    THEN").unwrap();
        writeln!(out, "      {}", body.join(" ||\n      ")).unwrap();
        write!(out, "    END").unwrap();
    }

    fn rule(&self, out: &mut String, inst: usize, ri: usize) -> Result<(), EmitError> {
        let m = self.sys.machine_of(inst);
        let rule = &m.rules[ri];
        let op = rule_operation(self.sys.instance_name(inst), &rule.label, self.cfg);
        let params: Vec<String> = rule.def.trigger.as_ref().map_or(Vec::new(), |t| t.params.clone());
        let locals = self.locals(&op, &params)?;
        let ctx = self.ctx(inst, params.iter().cloned().zip(locals.iter().cloned()).collect());

        let mut guards = match rule.trigger {
            Some(sig) => self.head_guards(inst, rule.source, sig, &locals),
            None => vec![format!("{} = {}", self.state_var(inst), self.own(inst, &m.states[rule.source]))],
        };
        if let Some(g) = &rule.def.guard {
            guards.push(ctx.pred(g));
        }

        let effect = net_effect(self.sys, inst, &rule.def.actions)?;
        let mut body = vec![format!("{} := {}", self.state_var(inst), self.own(inst, &m.states[rule.target]))];
        for (v, e) in &effect.assigns {
            let value = match m.vars[*v].ty {
                Ty::Bool => ctx.boolval(e),
                Ty::Int => ctx.int(e),
            };
            body.push(format!("{} := {value}", self.own(inst, &m.vars[*v].name)));
        }
        body.extend(self.buffer_updates(&ctx, inst, rule.trigger.is_some(), &effect.sends));
        self.operation(out, &op, &locals, &guards, &body);
        Ok(())
    }

    /// One substitution per touched pool: the owner's head is dropped when
    /// consumed, and each target gets its events appended in send order.
    fn buffer_updates(&self, ctx: &Ctx<'_>, inst: usize, pop: bool, sends: &[Send]) -> Vec<String> {
        let mut targets: Vec<usize> = sends.iter().map(|s| s.target).collect();
        if pop {
            targets.push(inst);
        }
        targets.sort_unstable();
        targets.dedup();
        targets
            .into_iter()
            .map(|t| {
                let buf = self.buffer(t);
                let base = if pop && t == inst { format!("tail({buf})") } else { buf.clone() };
                let events: Vec<String> = sends
                    .iter()
                    .filter(|s| s.target == t)
                    .map(|s| {
                        let args: Vec<String> = s.args.iter().map(|a| ctx.int(a)).collect();
                        self.event(t, s.signal, &args)
                    })
                    .collect();
                if events.is_empty() {
                    format!("{buf} := {base}")
                } else {
                    format!("{buf} := {base} ^ [{}]", events.join(", "))
                }
            })
            .collect()
    }

    fn discard(&self, out: &mut String, inst: usize, state: usize, signal: usize) -> Result<(), EmitError> {
        let m = self.sys.machine_of(inst);
        let inst_name = self.sys.instance_name(inst);
        let op = discard_operation(inst_name, &m.states[state], &m.signals[signal].name, self.cfg);
        let locals = self.locals(&op, &signal_params(self.sys, inst, signal))?;
        let mut guards = self.head_guards(inst, state, signal, &locals);
        let mut blocked = Vec::new();
        for &ri in &m.triggered[state][signal] {
            let rule = &m.rules[ri];
            let Some(g) = &rule.def.guard else { continue };
            let names = rule.def.trigger.as_ref().map_or(Vec::new(), |t| t.params.clone());
            let ctx = self.ctx(inst, names.into_iter().zip(locals.iter().cloned()).collect());
            blocked.push(ctx.pred(g));
        }
        if !blocked.is_empty() {
            guards.push(format!("not({})", blocked.join(" or ")));
        }
        let buf = self.buffer(inst);
        self.operation(out, &op, &locals, &guards, &[format!("{buf} := tail({buf})")]);
        Ok(())
    }

    fn emit(&mut self) -> Result<String, EmitError> {
        self.claim_globals()?;
        let sys = self.sys;
        let n = sys.instances.len();
        let mut out = format!("MACHINE {}\n\nSETS\n", sys.name());
        let mut sets = Vec::new();
        for i in 0..n {
            let m = sys.machine_of(i);
            let states: Vec<String> = m.states.iter().map(|s| self.own(i, s)).collect();
            sets.push(format!("  {} = {{{}}}", self.own(i, "STATES"), states.join(", ")));
            if self.has_pool(i) {
                let sigs: Vec<String> = m.signals.iter().map(|s| self.signal(i, &s.name)).collect();
                sets.push(format!("  {} = {{{}}}", self.own(i, "SIGNALS"), sigs.join(", ")));
            }
        }
        writeln!(out, "{}\n", sets.join(";\n")).unwrap();

        if !sys.def.constants.is_empty() {
            let names: Vec<&str> = sys.def.constants.iter().map(|(c, _)| c.as_str()).collect();
            let props: Vec<String> = sys.def.constants.iter().map(|(c, v)| format!("{c} = {v}")).collect();
            writeln!(out, "CONSTANTS\n  {}\n", names.join(", ")).unwrap();
            writeln!(out, "PROPERTIES\n  {}\n", props.join(" &\n  ")).unwrap();
        }

        out.push_str("DEFINITIONS\n");
        out.push_str("  EMOD(a, b) == ((a - b * (a / b)) + b) mod b;\n");
        out.push_str("  B2I(x) == {FALSE |-> 0, TRUE |-> 1}(x)\n\n");

        let mut vars = Vec::new();
        let mut invariant = Vec::new();
        let mut init = Vec::new();
        for (i, inst) in sys.instances.iter().enumerate() {
            let m = sys.machine_of(i);
            vars.push(self.state_var(i));
            invariant.push(format!("{} : {}", self.state_var(i), self.own(i, "STATES")));
            init.push(format!("{} := {}", self.state_var(i), self.own(i, &m.states[m.initial])));
            for v in &m.vars {
                let name = self.own(i, &v.name);
                let (ty, value) = match v.ty {
                    Ty::Bool => ("BOOL".to_string(), if v.init != 0 { "TRUE" } else { "FALSE" }.to_string()),
                    Ty::Int => (self.cfg.b_int_type.clone(), v.init.to_string()),
                };
                invariant.push(format!("{name} : {ty}"));
                init.push(format!("{name} := {value}"));
                vars.push(name);
            }
            if self.has_pool(i) {
                let buf = self.buffer(i);
                invariant.push(format!(
                    "{buf} : seq({} * seq({}))",
                    self.own(i, "SIGNALS"),
                    self.cfg.b_int_type
                ));
                invariant.push(format!("size({buf}) <= {}", inst.capacity));
                init.push(format!("{buf} := []"));
                vars.push(buf);
            }
        }
        writeln!(out, "VARIABLES\n  {}\n", vars.join(",\n  ")).unwrap();
        writeln!(out, "INVARIANT\n  {}\n", invariant.join(" &\n  ")).unwrap();
        writeln!(out, "INITIALISATION\n  {}\n", init.join(" ||\n  ")).unwrap();

        let mut ops = Vec::new();
        for i in 0..n {
            let m = sys.machine_of(i);
            for ri in 0..m.rules.len() {
                let mut s = String::new();
                self.rule(&mut s, i, ri)?;
                ops.push(s);
            }
            for (state, sig) in discard_pairs(sys, i) {
                let mut s = String::new();
                self.discard(&mut s, i, state, sig)?;
                ops.push(s);
            }
        }
        if !ops.is_empty() {
            writeln!(out, "OPERATIONS\n{}\n", ops.join(";\n\n")).unwrap();
        }
        out.push_str("END\n");
        Ok(out)
    }
}

/// The whole system as one B machine: per-instance control state, variables
/// and event pool as prefixed machine variables, one operation per rule and
/// one per discardable (state, signal) pair.
pub fn emit_b(sys: &ValidatedSystem, cfg: &EmitterConfig) -> Result<String, EmitError> {
    Emitter {
        sys,
        cfg,
        names: Names::default(),
    }
    .emit()
}
