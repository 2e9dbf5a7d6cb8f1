//! Predicates over steps and configurations, and the monitor language.
//!
//! ```text
//! monitor = "deadlock"
//!         | "reach" "(" pred ")" [ "after" "(" pred ")" ]
//!         | "never" "(" pred ")" [ "after" "(" pred ")" ]
//!         | "order" "(" pattern "," pattern ")" [ "reset" "(" pred ")" ]
//!         | "delay" "(" pattern "," pattern "," INT ")" [ "clock" "(" pred ")" ] [ "reset" "(" pred ")" ]
//! pred    = conj { "|" conj } ;   conj = unary { "&" unary } ;
//! unary   = "!" unary | "(" pred ")" | atom ;
//! atom    = "true" | "false" | INST "@" STATE | INST "." VAR cmp ["-"] INT
//!         | "send" "(" (INST | "*") "." (SIGNAL | "*") ")"
//!         | "fire" "(" INST "." RULE ")" | "discard" "(" INST [ "." SIGNAL ] ")" ;
//! pattern = INST "." SIGNAL [ "(" arg { "," arg } ")" ] ;   arg = "_" | ["-"] INT | "$" | "$+" ;
//! ```
//!
//! Configuration atoms are evaluated on the state reached by a step; step
//! atoms (`send`, `fire`, `discard`) on the step itself, and are false in the
//! initial configuration.

use std::fmt;

use thiserror::Error;

use crate::expr::BinOp;
use crate::kernel::{Emission, InstanceView, StepKind, StepRecord, ValidatedSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pred {
    True,
    False,
    InState { inst: usize, state: usize },
    VarCmp { inst: usize, var: usize, op: BinOp, value: i64 },
    Send { target: Option<usize>, signal: Option<String> },
    Fire { inst: usize, rule: usize },
    Discard { inst: usize, signal: Option<usize> },
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
}

impl Pred {
    pub fn holds(&self, sys: &ValidatedSystem, step: Option<&StepRecord>, dst: &[InstanceView<'_>]) -> bool {
        match self {
            Pred::True => true,
            Pred::False => false,
            Pred::InState { inst, state } => dst[*inst].control == *state,
            Pred::VarCmp { inst, var, op, value } => {
                let v = dst[*inst].vars[*var] as i64;
                match op {
                    BinOp::Eq => v == *value,
                    BinOp::Ne => v != *value,
                    BinOp::Lt => v < *value,
                    BinOp::Le => v <= *value,
                    BinOp::Gt => v > *value,
                    BinOp::Ge => v >= *value,
                    _ => false,
                }
            }
            Pred::Send { target, signal } => step.is_some_and(|s| {
                s.sends().iter().any(|e| {
                    target.is_none_or(|t| t == e.target)
                        && signal.as_ref().is_none_or(|name| {
                            sys.machine_of(e.target).signals[e.event.signal].name == *name
                        })
                })
            }),
            Pred::Fire { inst, rule } => step.is_some_and(|s| {
                s.instance == *inst && matches!(s.kind, StepKind::Fire { rule: r, .. } if r == *rule)
            }),
            Pred::Discard { inst, signal } => step.is_some_and(|s| {
                s.instance == *inst
                    && matches!(&s.kind, StepKind::Discard(e) if signal.is_none_or(|sig| sig == e.signal))
            }),
            Pred::Not(p) => !p.holds(sys, step, dst),
            Pred::And(a, b) => a.holds(sys, step, dst) && b.holds(sys, step, dst),
            Pred::Or(a, b) => a.holds(sys, step, dst) || b.holds(sys, step, dst),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgSpec {
    Any,
    Lit(i64),
    /// Captures the payload.
    Payload,
    /// Captures the payload and requires it to be positive.
    PositivePayload,
}

/// Matches emissions `Target.Signal(args)` and extracts a payload argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MsgPattern {
    pub target: usize,
    pub signal: usize,
    pub args: Vec<ArgSpec>,
}

impl MsgPattern {
    /// `None` if the emission does not match; otherwise the captured payload
    /// (0 if the pattern captures nothing).
    pub fn matches(&self, e: &Emission) -> Option<i32> {
        if e.target != self.target || e.event.signal != self.signal {
            return None;
        }
        let mut payload = 0;
        for (spec, &v) in self.args.iter().zip(&e.event.args) {
            match spec {
                ArgSpec::Any => {}
                ArgSpec::Lit(x) if *x == v as i64 => {}
                ArgSpec::Lit(_) => return None,
                ArgSpec::Payload => payload = v,
                ArgSpec::PositivePayload if v > 0 => payload = v,
                ArgSpec::PositivePayload => return None,
            }
        }
        Some(payload)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Monitor {
    /// Some reachable configuration has no enabled step.
    Deadlock,
    /// Some path reaches `pred`, strictly after `after` held (if given).
    Reach { pred: Pred, after: Option<Pred> },
    /// No path reaches `pred` strictly after `after` held (if given).
    Never { pred: Pred, after: Option<Pred> },
    /// Payloads matched by `deliver` arrive exactly in the order matched by
    /// `send`, without duplicates, until `reset` holds.
    Order { send: MsgPattern, deliver: MsgPattern, reset: Option<Pred> },
    /// Every sent message is delivered before `bound` clock ticks have
    /// elapsed, until `reset` holds.
    BoundedDelay {
        send: MsgPattern,
        deliver: MsgPattern,
        bound: u32,
        clock: Pred,
        reset: Option<Pred>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("monitor `{text}`, offset {offset}: {message}")]
pub struct MonitorParseError {
    pub text: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum T {
    Id(String),
    Int(i64),
    Sym(&'static str),
    End,
}

impl fmt::Display for T {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            T::Id(s) => write!(f, "`{s}`"),
            T::Int(v) => write!(f, "`{v}`"),
            T::Sym(s) => write!(f, "`{s}`"),
            T::End => f.write_str("end of text"),
        }
    }
}

const SYMS: &[&str] = &[
    "$+", "!=", "/=", "<=", ">=", "@", ".", "(", ")", ",", "!", "&", "|", "$", "*", "=", "<", ">", "-",
];

struct MonParser<'a> {
    sys: &'a ValidatedSystem,
    text: &'a str,
    toks: Vec<(T, usize)>,
    at: usize,
}

fn tokenize(text: &str) -> Result<Vec<(T, usize)>, (usize, String)> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((T::Id(text[s..i].to_string()), s));
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let v = text[s..i].parse().map_err(|_| (s, "integer too large".to_string()))?;
            out.push((T::Int(v), s));
        } else if let Some(sym) = SYMS.iter().find(|s| text[i..].starts_with(**s)) {
            out.push((T::Sym(sym), i));
            i += sym.len();
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err((i, format!("unexpected character `{ch}`")));
        }
    }
    out.push((T::End, text.len()));
    Ok(out)
}

/// Parses a monitor specification, resolving names against `sys`.
pub fn parse_monitor(sys: &ValidatedSystem, text: &str) -> Result<Monitor, MonitorParseError> {
    let toks = tokenize(text).map_err(|(offset, message)| MonitorParseError {
        text: text.to_string(),
        offset,
        message,
    })?;
    let mut p = MonParser { sys, text, toks, at: 0 };
    let m = p.monitor()?;
    if p.peek() != &T::End {
        return Err(p.err(format!("unexpected {}", p.peek())));
    }
    Ok(m)
}

type MResult<T> = Result<T, MonitorParseError>;

impl MonParser<'_> {
    fn peek(&self) -> &T {
        &self.toks[self.at].0
    }

    fn bump(&mut self) -> T {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, message: String) -> MonitorParseError {
        MonitorParseError {
            text: self.text.to_string(),
            offset: self.toks[self.at].1,
            message,
        }
    }

    /// Error located at the token just consumed (a name that failed to
    /// resolve).
    fn err_prev(&self, message: String) -> MonitorParseError {
        MonitorParseError {
            text: self.text.to_string(),
            offset: self.toks[self.at.saturating_sub(1)].1,
            message,
        }
    }

    fn is(&self, s: &str) -> bool {
        matches!(self.peek(), T::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), T::Id(x) if x == w)
    }

    fn expect(&mut self, s: &str) -> MResult<()> {
        if self.is(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> MResult<String> {
        match self.bump() {
            T::Id(s) => Ok(s),
            t => {
                self.at -= 1;
                Err(self.err(format!("expected a name, found {t}")))
            }
        }
    }

    fn int(&mut self) -> MResult<i64> {
        let neg = if self.is("-") {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            T::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            t => Err(self.err(format!("expected an integer, found {t}"))),
        }
    }

    fn instance(&mut self) -> MResult<usize> {
        let name = self.ident()?;
        self.sys.instance_index(&name).ok_or_else(|| {
            self.at -= 1;
            self.err(format!("unknown instance `{name}`"))
        })
    }

    fn clause(&mut self, word: &str) -> MResult<Option<Pred>> {
        if self.is_word(word) {
            self.bump();
            self.expect("(")?;
            let p = self.pred()?;
            self.expect(")")?;
            Ok(Some(p))
        } else {
            Ok(None)
        }
    }

    fn monitor(&mut self) -> MResult<Monitor> {
        let word = self.ident()?;
        match word.as_str() {
            "deadlock" => Ok(Monitor::Deadlock),
            "reach" | "never" => {
                self.expect("(")?;
                let pred = self.pred()?;
                self.expect(")")?;
                let after = self.clause("after")?;
                Ok(if word == "reach" {
                    Monitor::Reach { pred, after }
                } else {
                    Monitor::Never { pred, after }
                })
            }
            "order" => {
                self.expect("(")?;
                let send = self.pattern()?;
                self.expect(",")?;
                let deliver = self.pattern()?;
                self.expect(")")?;
                let reset = self.clause("reset")?;
                Ok(Monitor::Order { send, deliver, reset })
            }
            "delay" => {
                self.expect("(")?;
                let send = self.pattern()?;
                self.expect(",")?;
                let deliver = self.pattern()?;
                self.expect(",")?;
                let bound = self.int()?;
                if bound < 0 {
                    return Err(self.err("delay bound must be non-negative".into()));
                }
                self.expect(")")?;
                let clock = match self.clause("clock")? {
                    Some(c) => c,
                    None => self.default_clock()?,
                };
                let reset = self.clause("reset")?;
                Ok(Monitor::BoundedDelay {
                    send,
                    deliver,
                    bound: bound as u32,
                    clock,
                    reset,
                })
            }
            _ => {
                self.at -= 1;
                Err(self.err(format!(
                    "unknown monitor `{word}` (expected deadlock, reach, never, order or delay)"
                )))
            }
        }
    }

    /// Rounds of the system's `Timer` instance.
    fn default_clock(&self) -> MResult<Pred> {
        let inst = self
            .sys
            .instance_index("Timer")
            .ok_or_else(|| self.err("no `Timer` instance; give an explicit clock(...)".into()))?;
        let rule = self
            .sys
            .machine_of(inst)
            .rule_index("round")
            .ok_or_else(|| self.err("`Timer` has no rule `round`; give an explicit clock(...)".into()))?;
        Ok(Pred::Fire { inst, rule })
    }

    fn pattern(&mut self) -> MResult<MsgPattern> {
        let target = self.instance()?;
        self.expect(".")?;
        let name = self.ident()?;
        let m = self.sys.machine_of(target);
        let signal = m.signal_index(&name).ok_or_else(|| {
            self.err_prev(format!("instance `{}` has no signal `{name}`", self.sys.instance_name(target)))
        })?;
        let mut args = Vec::new();
        if self.is("(") {
            self.bump();
            loop {
                let spec = if self.is("$+") {
                    self.bump();
                    ArgSpec::PositivePayload
                } else if self.is("$") {
                    self.bump();
                    ArgSpec::Payload
                } else if self.is_word("_") {
                    self.bump();
                    ArgSpec::Any
                } else {
                    ArgSpec::Lit(self.int()?)
                };
                args.push(spec);
                if self.is(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(")")?;
        }
        let arity = m.signals[signal].arity;
        if !args.is_empty() && args.len() != arity {
            return Err(self.err(format!("signal `{name}` takes {arity} argument(s)")));
        }
        Ok(MsgPattern { target, signal, args })
    }

    fn pred(&mut self) -> MResult<Pred> {
        let mut lhs = self.conj()?;
        while self.is("|") {
            self.bump();
            lhs = Pred::Or(Box::new(lhs), Box::new(self.conj()?));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> MResult<Pred> {
        let mut lhs = self.unary()?;
        while self.is("&") {
            self.bump();
            lhs = Pred::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> MResult<Pred> {
        if self.is("!") {
            self.bump();
            return Ok(Pred::Not(Box::new(self.unary()?)));
        }
        if self.is("(") {
            self.bump();
            let p = self.pred()?;
            self.expect(")")?;
            return Ok(p);
        }
        self.atom()
    }

    fn atom(&mut self) -> MResult<Pred> {
        if self.is_word("true") {
            self.bump();
            return Ok(Pred::True);
        }
        if self.is_word("false") {
            self.bump();
            return Ok(Pred::False);
        }
        if self.is_word("send") {
            self.bump();
            self.expect("(")?;
            let target = if self.is("*") {
                self.bump();
                None
            } else {
                Some(self.instance()?)
            };
            self.expect(".")?;
            let signal = if self.is("*") {
                self.bump();
                None
            } else {
                Some(self.ident()?)
            };
            if let (Some(t), Some(s)) = (target, &signal) {
                if self.sys.machine_of(t).signal_index(s).is_none() {
                    return Err(self.err_prev(format!("instance `{}` has no signal `{s}`", self.sys.instance_name(t))));
                }
            }
            self.expect(")")?;
            return Ok(Pred::Send { target, signal });
        }
        if self.is_word("fire") {
            self.bump();
            self.expect("(")?;
            let inst = self.instance()?;
            self.expect(".")?;
            let label = self.ident()?;
            let rule = self.sys.machine_of(inst).rule_index(&label).ok_or_else(|| {
                self.err_prev(format!("instance `{}` has no rule `{label}`", self.sys.instance_name(inst)))
            })?;
            self.expect(")")?;
            return Ok(Pred::Fire { inst, rule });
        }
        if self.is_word("discard") {
            self.bump();
            self.expect("(")?;
            let inst = self.instance()?;
            let signal = if self.is(".") {
                self.bump();
                let name = self.ident()?;
                Some(self.sys.machine_of(inst).signal_index(&name).ok_or_else(|| {
                    self.err_prev(format!("instance `{}` has no signal `{name}`", self.sys.instance_name(inst)))
                })?)
            } else {
                None
            };
            self.expect(")")?;
            return Ok(Pred::Discard { inst, signal });
        }
        let inst = self.instance()?;
        let m = self.sys.machine_of(inst);
        if self.is("@") {
            self.bump();
            let name = self.ident()?;
            let state = m
                .state_index(&name)
                .ok_or_else(|| self.err_prev(format!("`{}` has no state `{name}`", self.sys.instance_name(inst))))?;
            return Ok(Pred::InState { inst, state });
        }
        self.expect(".")?;
        let name = self.ident()?;
        let var = m
            .var_index(&name)
            .ok_or_else(|| self.err_prev(format!("`{}` has no variable `{name}`", self.sys.instance_name(inst))))?;
        let op = match self.bump() {
            T::Sym("=") => BinOp::Eq,
            T::Sym("!=") | T::Sym("/=") => BinOp::Ne,
            T::Sym("<") => BinOp::Lt,
            T::Sym("<=") => BinOp::Le,
            T::Sym(">") => BinOp::Gt,
            T::Sym(">=") => BinOp::Ge,
            t => {
                self.at -= 1;
                return Err(self.err(format!("expected a comparison, found {t}")));
            }
        };
        let value = self.int()?;
        Ok(Pred::VarCmp { inst, var, op, value })
    }
}
