//! Interactive animation: one configuration at a time, with undo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explorer::Trace;
use crate::kernel::{GlobalState, StepError, Successor, ValidatedSystem};
use crate::view::{StateView, StepView};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("state version {given} is stale, current is {current}")]
    Stale { given: u64, current: u64 },
    #[error("no enabled step {index} ({count} enabled)")]
    NoSuchStep { index: usize, count: usize },
    #[error("step cannot be applied: {0}")]
    Blocked(StepError),
    #[error("nothing to undo")]
    NothingToUndo,
}

/// An enabled step as listed to a user.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct EnabledStep {
    pub index: usize,
    pub step: StepView,
    /// Why the step cannot be applied, e.g. a full pool.
    pub blocked: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct EnabledSteps {
    pub version: u64,
    pub steps: Vec<EnabledStep>,
}

/// The current configuration of a system, the trace leading to it, and a
/// version that changes whenever the configuration does.
#[derive(Clone, Debug)]
pub struct Session {
    sys: ValidatedSystem,
    trace: Trace,
    version: u64,
}

impl Session {
    pub fn new(sys: ValidatedSystem) -> Self {
        let trace = Trace::new(sys.initial_state());
        Session { sys, trace, version: 0 }
    }

    pub fn system(&self) -> &ValidatedSystem {
        &self.sys
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn current(&self) -> &GlobalState {
        self.trace.last_state()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn state_view(&self) -> StateView {
        StateView::new(&self.sys, self.current())
    }

    fn successors(&self) -> Vec<Successor> {
        self.sys.successors(self.current())
    }

    pub fn enabled(&self) -> EnabledSteps {
        let steps = self
            .successors()
            .iter()
            .enumerate()
            .map(|(index, s)| EnabledStep {
                index,
                step: StepView::new(&self.sys, &s.step),
                blocked: s.result.as_ref().err().map(ToString::to_string),
            })
            .collect();
        EnabledSteps {
            version: self.version,
            steps,
        }
    }

    /// Fires enabled step `index`, provided the caller listed the steps
    /// against the current version.
    pub fn step(&mut self, index: usize, version: u64) -> Result<(), SessionError> {
        if version != self.version {
            return Err(SessionError::Stale {
                given: version,
                current: self.version,
            });
        }
        let mut succs = self.successors();
        if index >= succs.len() {
            return Err(SessionError::NoSuchStep {
                index,
                count: succs.len(),
            });
        }
        let s = succs.swap_remove(index);
        let next = s.result.map_err(SessionError::Blocked)?;
        self.trace.push(s.step, next);
        self.version += 1;
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), SessionError> {
        if self.trace.steps.pop().is_none() {
            return Err(SessionError::NothingToUndo);
        }
        self.trace.states.pop();
        self.version += 1;
        Ok(())
    }

    /// Up to `n` uniformly chosen applicable steps; returns how many fired.
    pub fn auto(&mut self, n: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for done in 0..n {
            let mut ok: Vec<Successor> = self.successors().into_iter().filter(|s| s.result.is_ok()).collect();
            if ok.is_empty() {
                return done;
            }
            let s = ok.swap_remove(rng.gen_range(0..ok.len()));
            self.trace.push(s.step, s.result.expect("filtered"));
            self.version += 1;
        }
        n
    }
}
