use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use super::{discard_pairs, is_bool, signal_params, EmitError, EmitterConfig, Names};
use crate::expr::{BinOp, Expr};
use crate::kernel::{Ty, ValidatedSystem};
use crate::system::Action;

/// Process-local names that generated code relies on.
const RESERVED_LOCALS: [&str; 3] = ["state", "pool", "e"];

struct Ctx<'a> {
    sys: &'a ValidatedSystem,
    inst: usize,
    params: HashMap<String, String>,
}

impl Ctx<'_> {
    fn var_ty(&self, n: &str) -> Ty {
        let m = self.sys.machine_of(self.inst);
        m.var_index(n).map_or(Ty::Int, |i| m.vars[i].ty)
    }

    fn is_bool(&self, e: &Expr) -> bool {
        is_bool(e, &|n| self.var_ty(n))
    }

    fn int(&self, e: &Expr) -> String {
        if self.is_bool(e) {
            return format!("B2I ({})", self.boolean(e));
        }
        match e {
            Expr::Int(v) if *v < 0 => format!("({v})"),
            Expr::Int(v) => v.to_string(),
            Expr::Var(n) => n.clone(),
            Expr::Param(n) => self.params.get(n).cloned().unwrap_or_else(|| n.clone()),
            Expr::Const(n) => format!("{n} ()"),
            Expr::Unary(_, a) => format!("(-{})", self.int(a)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.int(a), self.int(b));
                match op {
                    BinOp::Mod => format!("EMOD ({a}, {b})"),
                    BinOp::Min => format!("MIN ({a}, {b})"),
                    BinOp::Max => format!("MAX ({a}, {b})"),
                    _ => format!("({a} {} {b})", op.symbol()),
                }
            }
            Expr::Bool(_) => unreachable!("boolean literals are handled above"),
        }
    }

    fn boolean(&self, e: &Expr) -> String {
        if !self.is_bool(e) {
            return format!("({} != 0)", self.int(e));
        }
        match e {
            Expr::Bool(b) => b.to_string(),
            Expr::Var(n) => n.clone(),
            Expr::Unary(_, a) => format!("not {}", self.boolean(a)),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Eq => "==",
                    BinOp::Ne => "!=",
                    other => other.symbol(),
                };
                let both_bool = self.is_bool(a) && self.is_bool(b);
                let (a, b) = if both_bool || matches!(op, BinOp::And | BinOp::Or) {
                    (self.boolean(a), self.boolean(b))
                } else {
                    (self.int(a), self.int(b))
                };
                format!("({a} {sym} {b})")
            }
            _ => unreachable!("non-boolean expressions are handled above"),
        }
    }
}

struct Emitter<'a> {
    sys: &'a ValidatedSystem,
    cfg: &'a EmitterConfig,
    /// (sender, receiver) pairs with a gate, in order.
    links: BTreeSet<(usize, usize)>,
}

impl<'a> Emitter<'a> {
    fn own(&self, inst: usize, suffix: &str) -> String {
        format!("{}{}{suffix}", self.sys.instance_name(inst), self.cfg.separator)
    }

    fn gate(&self, from: usize, to: usize) -> String {
        format!(
            "{}{}{}",
            self.sys.instance_name(from),
            self.cfg.gate_infix,
            self.sys.instance_name(to)
        )
    }

    fn state_type(&self, inst: usize) -> String {
        self.own(inst, "State")
    }

    fn constructor(&self, inst: usize, signal: usize) -> String {
        self.own(inst, &self.sys.machine_of(inst).signals[signal].name)
    }

    fn gates_of(&self, inst: usize) -> Vec<String> {
        self.links
            .iter()
            .filter(|(a, b)| *a == inst || *b == inst)
            .map(|&(a, b)| self.gate(a, b))
            .collect()
    }

    fn check_names(&self) -> Result<(), EmitError> {
        let sys = self.sys;
        let mut names = Names::default();
        names.claim(sys.name(), "the module")?;
        for (n, what) in [
            ("Event", "the event type"),
            ("Pool", "the pool type"),
            ("EventChannel", "the channel"),
            ("MAIN", "the root process"),
            ("ENQUEUE", "a function"),
            ("EMOD", "a function"),
            ("B2I", "a function"),
            ("MIN", "a function"),
            ("MAX", "a function"),
        ] {
            names.claim(n, what)?;
        }
        for (c, _) in &sys.def.constants {
            names.claim(c, format!("constant {c}"))?;
        }
        for (i, inst) in sys.instances.iter().enumerate() {
            let m = sys.machine_of(i);
            let n = &inst.name;
            names.claim(n, format!("the process of {n}"))?;
            names.claim(&self.state_type(i), format!("the state type of {n}"))?;
            for s in &m.states {
                names.claim(&self.own(i, s), format!("state {n}.{s}"))?;
            }
            for (k, s) in m.signals.iter().enumerate() {
                names.claim(&self.constructor(i, k), format!("signal {n}.{}", s.name))?;
            }
            let mut locals = Names::default();
            for r in RESERVED_LOCALS {
                locals.claim(r, "a generated local")?;
            }
            for v in &m.vars {
                locals.claim(&v.name, format!("variable {n}.{}", v.name))?;
            }
            for r in &m.rules {
                let mut params = Names::default();
                for p in r.def.trigger.iter().flat_map(|t| &t.params) {
                    if let Some(what) = locals.0.get(p) {
                        return Err(EmitError::NameClash {
                            name: p.clone(),
                            first: what.clone(),
                            second: format!("a parameter of {n}.{}", r.label),
                        });
                    }
                    params.claim(p, format!("a parameter of {n}.{}", r.label))?;
                }
            }
        }
        for &(a, b) in &self.links {
            names.claim(&self.gate(a, b), "a gate")?;
        }
        Ok(())
    }

    fn no_completion(&self, inst: usize, state: usize) -> Option<String> {
        let m = self.sys.machine_of(inst);
        let rules = &m.completion[state];
        if rules.is_empty() {
            return None;
        }
        let ctx = Ctx {
            sys: self.sys,
            inst,
            params: HashMap::new(),
        };
        let gs: Vec<String> = rules
            .iter()
            .map(|&r| m.rules[r].def.guard.as_ref().map_or("true".into(), |g| ctx.boolean(g)))
            .collect();
        Some(format!("not ({})", gs.join(" or ")))
    }

    /// Actions in written order; a send becomes a synchronization, or a
    /// local enqueue when an instance addresses itself.
    fn actions(&self, ctx: &Ctx<'_>, actions: &[Action]) -> Vec<String> {
        let sys = self.sys;
        actions
            .iter()
            .map(|a| match a {
                Action::Assign { var, value } => {
                    let v = if ctx.var_ty(var) == Ty::Bool { ctx.boolean(value) } else { ctx.int(value) };
                    format!("{var} := {v}")
                }
                Action::Send { target, signal, args } => {
                    let t = sys.instance_index(target).expect("validated send target");
                    let s = sys.machine_of(t).signal_index(signal).expect("validated signal");
                    let args: Vec<String> = args.iter().map(|e| ctx.int(e)).collect();
                    let ev = if args.is_empty() {
                        self.constructor(t, s)
                    } else {
                        format!("{} ({})", self.constructor(t, s), args.join(", "))
                    };
                    if t == ctx.inst {
                        format!("pool := ENQUEUE (pool, {ev})")
                    } else {
                        format!("{} ({ev})", self.gate(ctx.inst, t))
                    }
                }
            })
            .collect()
    }

    /// `if <cond> then <body> else stop end if` at `indent`.
    fn guarded(out: &mut String, indent: &str, cond: &str, body: &[String]) {
        writeln!(out, "{indent}if {cond} then").unwrap();
        for (k, line) in body.iter().enumerate() {
            let sep = if k + 1 < body.len() { ";" } else { "" };
            writeln!(out, "{indent}   {line}{sep}").unwrap();
        }
        writeln!(out, "{indent}else\n{indent}   stop\n{indent}end if").unwrap();
    }

    /// A branch that inspects the pool head.
    #[allow(clippy::too_many_arguments)]
    fn head_branch(
        &self,
        out: &mut String,
        inst: usize,
        state: usize,
        signal: usize,
        locals: &[String],
        guard: Option<String>,
        body: &[String],
    ) {
        let m = self.sys.machine_of(inst);
        let mut cond = vec![format!("(state == {})", self.own(inst, &m.states[state]))];
        cond.extend(self.no_completion(inst, state));
        cond.push("(pool != nil)".into());
        writeln!(out, "            if {} then", cond.join(" and ")).unwrap();
        writeln!(out, "               case head (pool) in").unwrap();
        if !locals.is_empty() {
            writeln!(out, "                  var {}: Int in", locals.join(", ")).unwrap();
        }
        let pattern = if locals.is_empty() {
            self.constructor(inst, signal)
        } else {
            format!("{} ({})", self.constructor(inst, signal), locals.join(", "))
        };
        let guard = guard.map_or(String::new(), |g| format!(" where {g}"));
        writeln!(out, "                  {pattern}{guard} ->").unwrap();
        for (k, line) in body.iter().enumerate() {
            let sep = if k + 1 < body.len() { ";" } else { "" };
            writeln!(out, "                     {line}{sep}").unwrap();
        }
        writeln!(out, "               |  any -> stop").unwrap();
        writeln!(out, "               end case").unwrap();
        writeln!(out, "            else\n               stop\n            end if").unwrap();
    }

    fn process(&self, out: &mut String, inst: usize) {
        let sys = self.sys;
        let m = sys.machine_of(inst);
        let name = sys.instance_name(inst);
        let gates = self.gates_of(inst);
        if gates.is_empty() {
            writeln!(out, "process {name} is").unwrap();
        } else {
            writeln!(out, "process {name} [{}: EventChannel] is", gates.join(", ")).unwrap();
        }
        let mut decls = vec![format!("state: {}", self.state_type(inst)), "pool: Pool".into(), "e: Event".into()];
        let mut init = vec![format!("state := {}", self.own(inst, &m.states[m.initial])), "pool := nil".into()];
        for v in &m.vars {
            let (ty, val) = match v.ty {
                Ty::Bool => ("Bool", (v.init != 0).to_string()),
                Ty::Int => ("Int", v.init.to_string()),
            };
            decls.push(format!("{}: {ty}", v.name));
            init.push(format!("{} := {val}", v.name));
        }
        writeln!(out, "   var {} in", decls.join(", ")).unwrap();
        for line in &init {
            writeln!(out, "      {line};").unwrap();
        }
        writeln!(out, "      loop").unwrap();

        let mut branches: Vec<String> = Vec::new();
        for &(from, to) in &self.links {
            if to == inst {
                branches.push(format!(
                    "            -- accept\n            {} (?e); pool := ENQUEUE (pool, e)\n",
                    self.gate(from, to)
                ));
            }
        }
        for r in &m.rules {
            let mut b = format!("            -- {name}.{}\n", r.label);
            let params: Vec<String> = r.def.trigger.as_ref().map_or(Vec::new(), |t| t.params.clone());
            let ctx = Ctx {
                sys,
                inst,
                params: HashMap::new(),
            };
            let mut body = vec!["i".to_string()];
            if r.trigger.is_some() {
                body.push("pool := tail (pool)".into());
            }
            body.extend(self.actions(&ctx, &r.def.actions));
            body.push(format!("state := {}", self.own(inst, &m.states[r.target])));
            match r.trigger {
                Some(sig) => {
                    let guard = r.def.guard.as_ref().map(|g| ctx.boolean(g));
                    self.head_branch(&mut b, inst, r.source, sig, &params, guard, &body);
                }
                None => {
                    let mut cond = format!("(state == {})", self.own(inst, &m.states[r.source]));
                    if let Some(g) = &r.def.guard {
                        cond = format!("{cond} and {}", ctx.boolean(g));
                    }
                    Self::guarded(&mut b, "            ", &cond, &body);
                }
            }
            branches.push(b);
        }
        for (state, sig) in discard_pairs(sys, inst) {
            let signal = &m.signals[sig].name;
            let mut b = format!("            -- discard({name}.{signal}) in {}\n", m.states[state]);
            let locals = signal_params(sys, inst, sig);
            let blocked: Vec<String> = m.triggered[state][sig]
                .iter()
                .filter_map(|&ri| {
                    let rule = &m.rules[ri];
                    let g = rule.def.guard.as_ref()?;
                    let names = rule.def.trigger.as_ref().map_or(Vec::new(), |t| t.params.clone());
                    let ctx = Ctx {
                        sys,
                        inst,
                        params: names.into_iter().zip(locals.iter().cloned()).collect(),
                    };
                    Some(ctx.boolean(g))
                })
                .collect();
            let guard = (!blocked.is_empty()).then(|| format!("not ({})", blocked.join(" or ")));
            let body = ["i".to_string(), "pool := tail (pool)".to_string()];
            self.head_branch(&mut b, inst, state, sig, &locals, guard, &body);
            branches.push(b);
        }

        if branches.is_empty() {
            writeln!(out, "         stop").unwrap();
        } else {
            writeln!(out, "         select").unwrap();
            out.push_str(&branches.join("         []\n"));
            writeln!(out, "         end select").unwrap();
        }
        writeln!(out, "      end loop\n   end var\nend process\n").unwrap();
    }

    fn emit(&self) -> Result<String, EmitError> {
        self.check_names()?;
        let sys = self.sys;
        let mut out = format!("module {} is\n\n", sys.name());

        let mut constructors = Vec::new();
        for i in 0..sys.instances.len() {
            let m = sys.machine_of(i);
            let states: Vec<String> = m.states.iter().map(|s| self.own(i, s)).collect();
            writeln!(
                out,
                "type {} is\n   {}\n   with \"==\", \"!=\"\nend type\n",
                self.state_type(i),
                states.join(", ")
            )
            .unwrap();
            for k in 0..m.signals.len() {
                let params = signal_params(sys, i, k);
                constructors.push(if params.is_empty() {
                    self.constructor(i, k)
                } else {
                    format!("{} ({}: Int)", self.constructor(i, k), params.join(", "))
                });
            }
        }
        if constructors.is_empty() {
            constructors.push("NO_EVENT".into());
        }
        writeln!(
            out,
            "type Event is\n   {}\n   with \"==\", \"!=\"\nend type\n",
            constructors.join(",\n   ")
        )
        .unwrap();
        out.push_str("type Pool is\n   list of Event\n   with \"==\", \"!=\", \"head\", \"tail\"\nend type\n\n");
        out.push_str("channel EventChannel is\n   (Event)\nend channel\n\n");
        out.push_str(LNT_FUNCTIONS);
        for (c, v) in &sys.def.constants {
            let v = if *v < 0 { format!("({v})") } else { v.to_string() };
            writeln!(out, "function {c}: Int is\n   return {v}\nend function\n").unwrap();
        }

        for i in 0..sys.instances.len() {
            self.process(&mut out, i);
        }

        let all: Vec<String> = self.links.iter().map(|&(a, b)| self.gate(a, b)).collect();
        if all.is_empty() {
            out.push_str("process MAIN is\n");
        } else {
            writeln!(out, "process MAIN [{}: EventChannel] is", all.join(", ")).unwrap();
        }
        let branches: Vec<String> = (0..sys.instances.len())
            .map(|i| {
                let gates = self.gates_of(i);
                let name = sys.instance_name(i);
                if gates.is_empty() {
                    format!("      {name}")
                } else {
                    format!("      {g} -> {name} [{g}]", g = gates.join(", "))
                }
            })
            .collect();
        writeln!(out, "   par\n{}\n   end par\nend process\n", branches.join("\n   ||\n")).unwrap();
        out.push_str("end module\n");
        Ok(out)
    }
}

const LNT_FUNCTIONS: &str = "\
function ENQUEUE (p: Pool, x: Event): Pool is
   case p in
      var h: Event, t: Pool in
      nil -> return cons (x, nil)
   |  cons (h, t) -> return cons (h, ENQUEUE (t, x))
   end case
end function

-- Euclidean remainder, never negative.
function EMOD (a, b: Int): Int is
   var r: Int in
      r := a rem b;
      if r < 0 then
         r := r + abs (b)
      end if;
      return r
   end var
end function

function B2I (b: Bool): Int is
   if b then
      return 1
   else
      return 0
   end if
end function

function MIN (a, b: Int): Int is
   if a <= b then
      return a
   else
      return b
   end if
end function

function MAX (a, b: Int): Int is
   if a >= b then
      return a
   else
      return b
   end if
end function

";

/// The system as an LNT module: one process per instance holding a FIFO
/// pool that always accepts incoming events, a gate per communicating
/// (sender, receiver) pair, and a root parallel composition.
pub fn emit_lnt(sys: &ValidatedSystem, cfg: &EmitterConfig) -> Result<String, EmitError> {
    let mut links = BTreeSet::new();
    for (i, _) in sys.instances.iter().enumerate() {
        for r in &sys.machine_of(i).rules {
            for a in &r.def.actions {
                if let Action::Send { target, .. } = a {
                    let t = sys
                        .instance_index(target)
                        .ok_or_else(|| EmitError::Unsupported(format!("send to unknown instance `{target}`")))?;
                    if t != i {
                        links.insert((i, t));
                    }
                }
            }
        }
    }
    Emitter { sys, cfg, links }.emit()
}
