use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{CAction, EvalError};
use super::state::{format_signal, Event, GlobalState, InstanceView};
use super::validate::ValidatedSystem;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Emission {
    pub target: usize,
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    Fire {
        rule: usize,
        consumed: Option<Event>,
        sends: Vec<Emission>,
    },
    Discard(Event),
}

/// One atomic system step: a rule firing or an implicit discard.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepRecord {
    pub instance: usize,
    pub kind: StepKind,
}

/// Compact identity of a step. From a given state at most one step has a
/// given id, since rule firing is deterministic once the head event is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StepId {
    pub instance: u16,
    /// `None` for a discard.
    pub rule: Option<u16>,
}

impl StepRecord {
    pub fn id(&self) -> StepId {
        StepId {
            instance: self.instance as u16,
            rule: match &self.kind {
                StepKind::Fire { rule, .. } => Some(*rule as u16),
                StepKind::Discard(_) => None,
            },
        }
    }

    pub fn sends(&self) -> &[Emission] {
        match &self.kind {
            StepKind::Fire { sends, .. } => sends,
            StepKind::Discard(_) => &[],
        }
    }

    pub fn consumed(&self) -> Option<&Event> {
        match &self.kind {
            StepKind::Fire { consumed, .. } => consumed.as_ref(),
            StepKind::Discard(e) => Some(e),
        }
    }

    pub fn is_discard(&self) -> bool {
        matches!(self.kind, StepKind::Discard(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("pool of instance {target} would exceed its capacity")]
    PoolOverflow { target: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("step is not enabled in this state")]
    NotEnabled,
}

/// A step paired with its outcome. Failed steps stay visible so exploration
/// can report them as diagnostics.
#[derive(Clone, Debug)]
pub struct Successor {
    pub step: StepRecord,
    pub result: Result<GlobalState, StepError>,
}

impl ValidatedSystem {
    /// Enabled steps in declaration order (instances, then rules).
    ///
    /// Per instance: enabled triggerless rules take priority; otherwise the
    /// head event is dispatched to matching rules whose guard holds, and if
    /// none matches it is discarded.
    pub fn enabled_steps(&self, g: &GlobalState) -> Vec<StepRecord> {
        self.successors(g).into_iter().map(|s| s.step).collect()
    }

    pub fn successors(&self, g: &GlobalState) -> Vec<Successor> {
        let views = self.views(g);
        let mut out = Vec::new();
        for inst in 0..views.len() {
            self.instance_successors(&views, inst, &mut out);
        }
        out
    }

    /// Successor for one specific step; fails with `NotEnabled` if the step
    /// (compared by id and content) is not enabled in `g`.
    pub fn apply_step(&self, g: &GlobalState, s: &StepRecord) -> Result<GlobalState, StepError> {
        let views = self.views(g);
        let mut out = Vec::new();
        self.instance_successors(&views, s.instance, &mut out);
        out.into_iter()
            .find(|succ| succ.step.id() == s.id())
            .ok_or(StepError::NotEnabled)
            .and_then(|succ| {
                if succ.step == *s || succ.result.is_err() {
                    succ.result
                } else {
                    Err(StepError::NotEnabled)
                }
            })
    }

    /// Successor reached by the step with the given id, if enabled.
    pub fn step_by_id(&self, g: &GlobalState, id: StepId) -> Option<Successor> {
        let views = self.views(g);
        let mut out = Vec::new();
        self.instance_successors(&views, id.instance as usize, &mut out);
        out.into_iter().find(|s| s.step.id() == id)
    }

    fn instance_successors(
        &self,
        views: &[InstanceView<'_>],
        inst: usize,
        out: &mut Vec<Successor>,
    ) {
        let view = &views[inst];
        let m = view.machine();
        let state = view.control;

        let mut completion_fired = false;
        for &ri in &m.completion[state] {
            let rule = &m.rules[ri];
            match rule.guard.as_ref().map(|gd| gd.eval(view.vars, &[])) {
                Some(Ok(0)) => {}
                Some(Err(e)) => {
                    completion_fired = true;
                    out.push(Successor {
                        step: StepRecord {
                            instance: inst,
                            kind: StepKind::Fire {
                                rule: ri,
                                consumed: None,
                                sends: Vec::new(),
                            },
                        },
                        result: Err(e.into()),
                    });
                }
                _ => {
                    completion_fired = true;
                    out.push(self.fire(views, inst, ri, None));
                }
            }
        }
        if completion_fired {
            return;
        }

        let Some((sig, args)) = view.head() else {
            return;
        };
        let mut matched = false;
        for &ri in &m.triggered[state][sig] {
            let rule = &m.rules[ri];
            match rule.guard.as_ref().map(|gd| gd.eval(view.vars, args)) {
                Some(Ok(0)) => {}
                Some(Err(e)) => {
                    matched = true;
                    out.push(Successor {
                        step: StepRecord {
                            instance: inst,
                            kind: StepKind::Fire {
                                rule: ri,
                                consumed: Some(Event {
                                    signal: sig,
                                    args: args.to_vec(),
                                }),
                                sends: Vec::new(),
                            },
                        },
                        result: Err(e.into()),
                    });
                }
                _ => {
                    matched = true;
                    out.push(self.fire(views, inst, ri, Some((sig, args))));
                }
            }
        }
        if !matched {
            let event = Event {
                signal: sig,
                args: args.to_vec(),
            };
            let result = self.rebuild(views, inst, view.control, view.vars, true, &[]);
            out.push(Successor {
                step: StepRecord {
                    instance: inst,
                    kind: StepKind::Discard(event),
                },
                result,
            });
        }
    }

    fn fire(
        &self,
        views: &[InstanceView<'_>],
        inst: usize,
        ri: usize,
        head: Option<(usize, &[i32])>,
    ) -> Successor {
        let view = &views[inst];
        let rule = &view.machine().rules[ri];
        let params: &[i32] = head.map_or(&[], |(_, a)| a);
        let mut vars = view.vars.to_vec();
        let mut sends = Vec::new();
        let mut error = None;
        for action in &rule.actions {
            match action {
                CAction::Assign(vi, e) => match e.eval(&vars, params) {
                    Ok(v) => vars[*vi] = v as i32,
                    Err(err) => {
                        error = Some(err);
                        break;
                    }
                },
                CAction::Send {
                    target,
                    signal,
                    args,
                } => {
                    let mut vals = Vec::with_capacity(args.len());
                    for a in args {
                        match a.eval(&vars, params) {
                            Ok(v) => vals.push(v as i32),
                            Err(err) => {
                                error = Some(err);
                                break;
                            }
                        }
                    }
                    if error.is_some() {
                        break;
                    }
                    sends.push(Emission {
                        target: *target,
                        event: Event {
                            signal: *signal,
                            args: vals,
                        },
                    });
                }
            }
        }
        let result = match error {
            Some(e) => Err(e.into()),
            None => self.rebuild(views, inst, rule.target, &vars, head.is_some(), &sends),
        };
        Successor {
            step: StepRecord {
                instance: inst,
                kind: StepKind::Fire {
                    rule: ri,
                    consumed: head.map(|(s, a)| Event {
                        signal: s,
                        args: a.to_vec(),
                    }),
                    sends,
                },
            },
            result,
        }
    }

    /// Re-encodes the configuration after `inst` moved to `control` with
    /// valuation `vars`, optionally popping its head, and `sends` appended.
    fn rebuild(
        &self,
        views: &[InstanceView<'_>],
        inst: usize,
        control: usize,
        vars: &[i32],
        pop_head: bool,
        sends: &[Emission],
    ) -> Result<GlobalState, StepError> {
        let mut buf = Vec::with_capacity(64);
        for (j, v) in views.iter().enumerate() {
            let (ctl, vals, pool, mut len) = if j == inst {
                let skip = if pop_head { v.head_len() } else { 0 };
                let len = v.pool_len() - pop_head as usize;
                (control, vars, &v.pool_raw()[skip..], len)
            } else {
                (v.control, v.vars, v.pool_raw(), v.pool_len())
            };
            buf.push(ctl as i32);
            buf.extend_from_slice(vals);
            let len_at = buf.len();
            buf.push(0);
            buf.extend_from_slice(pool);
            for s in sends.iter().filter(|s| s.target == j) {
                len += 1;
                buf.push(s.event.signal as i32);
                buf.extend_from_slice(&s.event.args);
            }
            if len > self.instances[j].capacity {
                return Err(StepError::PoolOverflow { target: j });
            }
            buf[len_at] = len as i32;
        }
        Ok(GlobalState::from_vec(buf))
    }

    pub fn rule_label(&self, instance: usize, rule: usize) -> &str {
        &self.machine_of(instance).rules[rule].label
    }

    /// One-line human-readable rendering of a step.
    pub fn describe_step(&self, s: &StepRecord) -> String {
        let name = self.instance_name(s.instance);
        match &s.kind {
            StepKind::Discard(e) => format!("{name}: discard {}", self.describe_event(s.instance, e)),
            StepKind::Fire {
                rule,
                consumed,
                sends,
            } => {
                let mut out = format!("{name}.{}", self.rule_label(s.instance, *rule));
                if let Some(e) = consumed {
                    out.push_str(&format!(" [{}]", self.describe_event(s.instance, e)));
                }
                for e in sends {
                    out.push_str(&format!(
                        " -> {}.{}",
                        self.instance_name(e.target),
                        self.describe_event(e.target, &e.event)
                    ));
                }
                out
            }
        }
    }

    pub fn emission_text(&self, e: &Emission) -> String {
        let m = self.machine_of(e.target);
        format!(
            "{}.{}",
            self.instance_name(e.target),
            format_signal(&m.signals[e.event.signal].name, &e.event.args)
        )
    }
}
