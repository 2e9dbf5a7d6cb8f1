//! Execution kernel: static validation, configurations and the step relation.

mod eval;
mod state;
mod step;
mod validate;

pub use eval::EvalError;
pub use state::{Event, GlobalState, InstanceView};
pub(crate) use state::format_signal;
pub use step::{Emission, StepError, StepId, StepKind, StepRecord, Successor};
pub use validate::{
    load_system, InstanceInfo, MachineInfo, RuleInfo, SignalInfo, StaticError, Ty, ValidatedSystem,
    VarInfo,
};

