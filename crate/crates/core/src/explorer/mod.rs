//! Breadth-first state-space generation, property monitors and random walks.

mod check;
mod monitor;
mod pack;

use std::time::{Duration, Instant};

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxBuildHasher;
use serde::Serialize;

use crate::kernel::{GlobalState, StepError, StepId, StepRecord, ValidatedSystem};

pub use check::{check, check_one, CheckResult, Verdict};
pub use monitor::{parse_monitor, MsgPattern, Monitor, MonitorParseError, Pred};

use pack::{pack, unpack};

pub(crate) type StateSet<K> = IndexSet<K, FxBuildHasher>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Limits {
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    pub time_budget: Option<Duration>,
}

impl Limits {
    pub fn none() -> Self {
        Limits::default()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    pub depth: usize,
    pub exhausted: bool,
    pub peak_frontier: usize,
}

/// A step whose successor could not be built (pool overflow or evaluation
/// error). Such steps are reported, not followed.
#[derive(Clone, Debug)]
pub struct StepFailure {
    pub state: u32,
    pub step: StepRecord,
    pub error: StepError,
}

/// Reachable configurations with dense ids in BFS discovery order; id 0 is
/// the initial configuration.
#[derive(Clone, Debug)]
pub struct StateSpace {
    /// Packed configurations.
    states: StateSet<Box<[u8]>>,
    /// Sorted by source id, then by kernel step order.
    pub transitions: Vec<(u32, StepId, u32)>,
    pub stats: Stats,
    pub failures: Vec<StepFailure>,
}

impl StateSpace {
    pub fn initial(&self) -> u32 {
        0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: u32) -> GlobalState {
        GlobalState::from_vec(unpack(&self.states[id as usize]))
    }

    pub fn id_of(&self, g: &GlobalState) -> Option<u32> {
        self.states.get_index_of(&pack(g.as_slice())).map(|i| i as u32)
    }

    pub fn states(&self) -> impl Iterator<Item = GlobalState> + '_ {
        self.states.iter().map(|b| GlobalState::from_vec(unpack(b)))
    }

    /// Rebuilds the full step record of a stored transition.
    pub fn step_record(&self, sys: &ValidatedSystem, from: u32, id: StepId) -> StepRecord {
        sys.step_by_id(&self.state(from), id)
            .expect("stored transition is enabled in its source state")
            .step
    }

    /// Shortest path from the initial state to `target`, rebuilt from the BFS
    /// layering.
    pub fn path_to(&self, sys: &ValidatedSystem, target: u32) -> Trace {
        let mut parent: Vec<Option<(u32, StepId)>> = vec![None; self.len()];
        for &(from, step, to) in &self.transitions {
            if to != 0 && parent[to as usize].is_none() && from < to {
                parent[to as usize] = Some((from, step));
            }
        }
        let mut chain = Vec::new();
        let mut at = target;
        while let Some((from, step)) = parent[at as usize] {
            chain.push((from, step));
            at = from;
        }
        chain.reverse();
        let mut trace = Trace::new(self.state(0));
        for (from, step) in chain {
            let succ = sys.step_by_id(&self.state(from), step).expect("stored transition");
            trace.push(succ.step, succ.result.expect("stored transition succeeded"));
        }
        trace
    }
}

/// Alternating configurations and steps: `states[i]` --`steps[i]`--> `states[i+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<GlobalState>,
    pub steps: Vec<StepRecord>,
}

impl Trace {
    pub fn new(initial: GlobalState) -> Self {
        Trace {
            states: vec![initial],
            steps: Vec::new(),
        }
    }

    pub fn push(&mut self, step: StepRecord, next: GlobalState) {
        self.steps.push(step);
        self.states.push(next);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last_state(&self) -> &GlobalState {
        self.states.last().expect("trace has an initial state")
    }

    /// Checks that every step is enabled in its source and yields the next
    /// recorded configuration.
    pub fn is_valid(&self, sys: &ValidatedSystem) -> bool {
        self.states.len() == self.steps.len() + 1
            && self.steps.iter().enumerate().all(|(i, s)| {
                sys.apply_step(&self.states[i], s).as_ref() == Ok(&self.states[i + 1])
            })
    }
}

/// Generates the reachable state space breadth-first. Limits truncate the
/// search; the result then has `exhausted == false`.
pub fn explore(sys: &ValidatedSystem, limits: Limits) -> StateSpace {
    let start = Instant::now();
    let mut states: StateSet<Box<[u8]>> = StateSet::default();
    states.insert(pack(sys.initial_state().as_slice()));
    let mut transitions = Vec::new();
    let mut failures = Vec::new();
    let mut exhausted = true;
    let mut depth = 0;
    let mut level_end = 1;
    let mut peak_frontier = 1;
    let mut next = 0usize;

    while next < states.len() {
        if next == level_end {
            depth += 1;
            level_end = states.len();
            peak_frontier = peak_frontier.max(level_end - next);
        }
        if let Some(budget) = limits.time_budget {
            if next % 256 == 0 && start.elapsed() > budget {
                exhausted = false;
                break;
            }
        }
        let g = GlobalState::from_vec(unpack(&states[next]));
        let succs = sys.successors(&g);
        if limits.max_depth.is_some_and(|d| depth >= d) {
            if !succs.is_empty() {
                exhausted = false;
            }
            next += 1;
            continue;
        }
        for s in succs {
            match s.result {
                Ok(h) => {
                    let h = pack(h.as_slice());
                    let to = match states.get_index_of(&h) {
                        Some(i) => i,
                        None => {
                            if limits.max_states.is_some_and(|m| states.len() >= m) {
                                exhausted = false;
                                continue;
                            }
                            states.insert_full(h).0
                        }
                    };
                    transitions.push((next as u32, s.step.id(), to as u32));
                }
                Err(error) => failures.push(StepFailure {
                    state: next as u32,
                    step: s.step,
                    error,
                }),
            }
        }
        next += 1;
    }

    let stats = Stats {
        states: states.len(),
        transitions: transitions.len(),
        depth,
        exhausted,
        peak_frontier,
    };
    StateSpace {
        states,
        transitions,
        stats,
        failures,
    }
}

/// Seeded random walks choosing uniformly among successful successors. A
/// walk ends early at a state without such successors.
pub fn random_walks(sys: &ValidatedSystem, n_walks: usize, max_len: usize, seed: u64) -> Vec<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_walks);
    for _ in 0..n_walks {
        let mut trace = Trace::new(sys.initial_state());
        while trace.len() < max_len {
            let mut succs: Vec<_> = sys
                .successors(trace.last_state())
                .into_iter()
                .filter(|s| s.result.is_ok())
                .collect();
            if succs.is_empty() {
                break;
            }
            let pick = succs.swap_remove(rng.gen_range(0..succs.len()));
            trace.push(pick.step, pick.result.expect("filtered"));
        }
        out.push(trace);
    }
    out
}
