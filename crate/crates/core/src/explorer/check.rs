use std::time::Instant;

use crate::kernel::{GlobalState, InstanceView, StepId, StepRecord, ValidatedSystem};

use super::monitor::Monitor;
use super::pack::{pack, unpack};
use super::{Limits, StateSet, Stats, Trace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(Trace),
    Witness(Trace),
    /// The search was truncated by a limit before a verdict was reached.
    Unknown,
    /// Exhaustive search found no witness for a reachability monitor.
    Unreachable,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated(_) => "violated",
            Verdict::Witness(_) => "witness",
            Verdict::Unknown => "unknown",
            Verdict::Unreachable => "unreachable",
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            Verdict::Violated(t) | Verdict::Witness(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub verdict: Verdict,
    /// Statistics of the product exploration (system state paired with
    /// monitor state).
    pub stats: Stats,
}

enum Hit {
    Violation,
    Witness,
}

const OFF: i32 = 0;
const ON: i32 = 1;

impl Monitor {
    fn initial(&self, sys: &ValidatedSystem, views: &[InstanceView<'_>]) -> Result<Vec<i32>, Hit> {
        match self {
            Monitor::Deadlock => Ok(Vec::new()),
            Monitor::Reach { pred, after } | Monitor::Never { pred, after } => {
                let hit = if matches!(self, Monitor::Reach { .. }) {
                    Hit::Witness
                } else {
                    Hit::Violation
                };
                match after {
                    None if pred.holds(sys, None, views) => Err(hit),
                    None => Ok(Vec::new()),
                    Some(a) => Ok(vec![a.holds(sys, None, views) as i32]),
                }
            }
            Monitor::Order { reset, .. } | Monitor::BoundedDelay { reset, .. } => {
                let active = !reset.as_ref().is_some_and(|r| r.holds(sys, None, views));
                Ok(vec![if active { ON } else { OFF }])
            }
        }
    }

    fn advance(
        &self,
        sys: &ValidatedSystem,
        mstate: &[i32],
        step: &StepRecord,
        views: &[InstanceView<'_>],
    ) -> Result<Vec<i32>, Hit> {
        match self {
            Monitor::Deadlock => Ok(Vec::new()),
            Monitor::Reach { pred, after } | Monitor::Never { pred, after } => {
                let armed = after.is_none() || mstate[0] == 1;
                if armed && pred.holds(sys, Some(step), views) {
                    return Err(if matches!(self, Monitor::Reach { .. }) {
                        Hit::Witness
                    } else {
                        Hit::Violation
                    });
                }
                Ok(match after {
                    None => Vec::new(),
                    Some(a) => vec![(armed || a.holds(sys, Some(step), views)) as i32],
                })
            }
            Monitor::Order { send, deliver, reset } => {
                if mstate[0] == OFF {
                    return Ok(mstate.to_vec());
                }
                let mut queue = mstate[1..].to_vec();
                for e in step.sends() {
                    if let Some(p) = send.matches(e) {
                        queue.push(p);
                    } else if let Some(p) = deliver.matches(e) {
                        if queue.first() != Some(&p) {
                            return Err(Hit::Violation);
                        }
                        queue.remove(0);
                    }
                }
                if reset.as_ref().is_some_and(|r| r.holds(sys, Some(step), views)) {
                    return Ok(vec![OFF]);
                }
                let mut out = vec![ON];
                out.extend(queue);
                Ok(out)
            }
            Monitor::BoundedDelay {
                send,
                deliver,
                bound,
                clock,
                reset,
            } => {
                if mstate[0] == OFF {
                    return Ok(mstate.to_vec());
                }
                let mut ages = mstate[1..].to_vec();
                if clock.holds(sys, Some(step), views) {
                    for a in &mut ages {
                        *a += 1;
                        if *a as u32 > *bound {
                            return Err(Hit::Violation);
                        }
                    }
                }
                for e in step.sends() {
                    if send.matches(e).is_some() {
                        ages.push(0);
                    } else if deliver.matches(e).is_some() && !ages.is_empty() {
                        ages.remove(0);
                    }
                }
                if reset.as_ref().is_some_and(|r| r.holds(sys, Some(step), views)) {
                    return Ok(vec![OFF]);
                }
                let mut out = vec![ON];
                out.extend(ages);
                Ok(out)
            }
        }
    }
}

pub fn check(sys: &ValidatedSystem, monitors: &[Monitor], limits: Limits) -> Vec<CheckResult> {
    monitors.iter().map(|m| check_one(sys, m, limits)).collect()
}

/// Breadth-first search over the product of the system with one monitor.
/// Stops at the first violation or witness, which is therefore reached by a
/// shortest path.
pub fn check_one(sys: &ValidatedSystem, monitor: &Monitor, limits: Limits) -> CheckResult {
    let start = Instant::now();
    let g0 = sys.initial_state();
    let m0 = match monitor.initial(sys, &sys.views(&g0)) {
        Ok(m) => m,
        Err(hit) => {
            let t = Trace::new(g0);
            return CheckResult {
                verdict: match hit {
                    Hit::Violation => Verdict::Violated(t),
                    Hit::Witness => Verdict::Witness(t),
                },
                stats: Stats {
                    states: 1,
                    exhausted: false,
                    peak_frontier: 1,
                    ..Stats::default()
                },
            };
        }
    };

    // Keys are the packed system state followed by the monitor state.
    let mut keys: StateSet<Box<[u8]>> = StateSet::default();
    let mut parent: Vec<(u32, StepId)> = vec![(u32::MAX, StepId { instance: 0, rule: None })];
    keys.insert(pack(&[g0.as_slice(), &m0].concat()));
    let mut transitions = 0usize;
    let mut exhausted = true;
    let (mut depth, mut level_end, mut peak) = (0usize, 1usize, 1usize);
    let mut next = 0usize;
    let mut found: Option<(usize, Option<StepRecord>, Option<GlobalState>, Hit)> = None;

    'bfs: while next < keys.len() {
        if next == level_end {
            depth += 1;
            level_end = keys.len();
            peak = peak.max(level_end - next);
        }
        if limits.time_budget.is_some_and(|b| next % 256 == 0 && start.elapsed() > b) {
            exhausted = false;
            break;
        }
        let key = unpack(&keys[next]);
        let split = sys.encoded_len(&key);
        let g = GlobalState::from_vec(key[..split].to_vec());
        let mstate = &key[split..];
        let succs = sys.successors(&g);
        if matches!(monitor, Monitor::Deadlock) && succs.is_empty() {
            found = Some((next, None, None, Hit::Violation));
            break;
        }
        if limits.max_depth.is_some_and(|d| depth >= d) {
            if !succs.is_empty() {
                exhausted = false;
            }
            next += 1;
            continue;
        }
        for s in succs {
            let Ok(h) = s.result else { continue };
            let views = sys.views(&h);
            let m1 = match monitor.advance(sys, mstate, &s.step, &views) {
                Ok(m1) => m1,
                Err(hit) => {
                    transitions += 1;
                    found = Some((next, Some(s.step), Some(h.clone()), hit));
                    break 'bfs;
                }
            };
            let mut k = Vec::with_capacity(h.as_slice().len() + m1.len());
            k.extend_from_slice(h.as_slice());
            k.extend_from_slice(&m1);
            let k = pack(&k);
            if !keys.contains(&k) {
                if limits.max_states.is_some_and(|m| keys.len() >= m) {
                    exhausted = false;
                    continue;
                }
                keys.insert(k);
                parent.push((next as u32, s.step.id()));
            }
            transitions += 1;
        }
        next += 1;
    }

    let stats = Stats {
        states: keys.len(),
        transitions,
        depth,
        exhausted: exhausted && found.is_none(),
        peak_frontier: peak,
    };
    let verdict = match found {
        Some((at, step, dst, hit)) => {
            let mut chain = Vec::new();
            let mut cur = at;
            while parent[cur].0 != u32::MAX {
                chain.push(cur);
                cur = parent[cur].0 as usize;
            }
            chain.reverse();
            let mut trace = Trace::new(g0);
            for id in chain {
                let (from, sid) = parent[id];
                let mut src = unpack(&keys[from as usize]);
                src.truncate(sys.encoded_len(&src));
                let g = GlobalState::from_vec(src);
                let succ = sys.step_by_id(&g, sid).expect("recorded step");
                trace.push(succ.step, succ.result.expect("recorded step succeeded"));
            }
            if let (Some(step), Some(dst)) = (step, dst) {
                trace.push(step, dst);
            }
            match hit {
                Hit::Violation => Verdict::Violated(trace),
                Hit::Witness => Verdict::Witness(trace),
            }
        }
        None if !exhausted => Verdict::Unknown,
        None if matches!(monitor, Monitor::Reach { .. }) => Verdict::Unreachable,
        None => Verdict::Holds,
    };
    CheckResult { verdict, stats }
}
