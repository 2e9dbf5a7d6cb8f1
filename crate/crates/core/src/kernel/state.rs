use std::fmt;

use serde::{Deserialize, Serialize};

use super::validate::{MachineInfo, ValidatedSystem};

/// A signal occurrence sitting in (or travelling to) an event pool. The signal
/// index refers to the receiving machine's signal table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub signal: usize,
    pub args: Vec<i32>,
}

/// Global configuration: for every instance its control state, variable
/// valuation and FIFO pool, packed into one flat buffer.
///
/// Layout per instance, in declaration order:
/// `[control, vars.., pool_len, (signal, args..)*]`. The encoding is canonical
/// (equal configurations have equal buffers), so derived equality and hashing
/// are component-wise.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(Box<[i32]>);

impl GlobalState {
    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub(crate) fn from_vec(v: Vec<i32>) -> Self {
        GlobalState(v.into_boxed_slice())
    }
}

impl fmt::Debug for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GlobalState{:?}", &self.0)
    }
}

/// Borrowed view of one instance inside a [`GlobalState`].
#[derive(Clone, Copy)]
pub struct InstanceView<'a> {
    pub control: usize,
    pub vars: &'a [i32],
    pool_len: usize,
    pool: &'a [i32],
    machine: &'a MachineInfo,
}

impl<'a> InstanceView<'a> {
    pub fn pool_len(&self) -> usize {
        self.pool_len
    }

    /// Raw encoded pool region.
    pub(crate) fn pool_raw(&self) -> &'a [i32] {
        self.pool
    }

    pub fn head(&self) -> Option<(usize, &'a [i32])> {
        if self.pool_len == 0 {
            return None;
        }
        let sig = self.pool[0] as usize;
        let arity = self.machine.signals[sig].arity;
        Some((sig, &self.pool[1..1 + arity]))
    }

    /// Encoded length of the head event (signal word plus arguments).
    pub(crate) fn head_len(&self) -> usize {
        self.head().map_or(0, |(_, a)| 1 + a.len())
    }

    pub fn pool(&self) -> Vec<Event> {
        let mut out = Vec::with_capacity(self.pool_len);
        let mut i = 0;
        for _ in 0..self.pool_len {
            let sig = self.pool[i] as usize;
            let arity = self.machine.signals[sig].arity;
            out.push(Event {
                signal: sig,
                args: self.pool[i + 1..i + 1 + arity].to_vec(),
            });
            i += 1 + arity;
        }
        out
    }

    pub fn state_name(&self) -> &'a str {
        &self.machine.states[self.control]
    }

    pub fn machine(&self) -> &'a MachineInfo {
        self.machine
    }
}

impl ValidatedSystem {
    /// All instances in the initial configuration: initial control states,
    /// initial valuations, empty pools.
    pub fn initial_state(&self) -> GlobalState {
        let mut buf = Vec::new();
        for inst in &self.instances {
            let m = &self.machines[inst.machine];
            buf.push(m.initial as i32);
            buf.extend(m.vars.iter().map(|v| v.init));
            buf.push(0);
        }
        GlobalState::from_vec(buf)
    }

    /// Views of every instance, in declaration order.
    pub fn views<'a>(&'a self, g: &'a GlobalState) -> Vec<InstanceView<'a>> {
        let data = g.as_slice();
        let mut out = Vec::with_capacity(self.instances.len());
        let mut at = 0;
        for inst in &self.instances {
            let m = &self.machines[inst.machine];
            let control = data[at] as usize;
            let vars = &data[at + 1..at + 1 + m.vars.len()];
            at += 1 + m.vars.len();
            let pool_len = data[at] as usize;
            at += 1;
            let start = at;
            for _ in 0..pool_len {
                let sig = data[at] as usize;
                at += 1 + m.signals[sig].arity;
            }
            out.push(InstanceView {
                control,
                vars,
                pool_len,
                pool: &data[start..at],
                machine: m,
            });
        }
        out
    }

    pub fn view<'a>(&'a self, g: &'a GlobalState, instance: usize) -> InstanceView<'a> {
        self.views(g)[instance]
    }

    /// Length of the system part of an encoded buffer; anything past it is
    /// caller-owned payload (e.g. monitor state).
    pub(crate) fn encoded_len(&self, data: &[i32]) -> usize {
        let mut at = 0;
        for inst in &self.instances {
            let m = &self.machines[inst.machine];
            at += 1 + m.vars.len();
            let pool_len = data[at] as usize;
            at += 1;
            for _ in 0..pool_len {
                let sig = data[at] as usize;
                at += 1 + m.signals[sig].arity;
            }
        }
        at
    }

    /// Builds a state from decoded components; used by tests and the service.
    pub fn compose_state(&self, parts: &[(usize, Vec<i32>, Vec<Event>)]) -> GlobalState {
        let mut buf = Vec::new();
        for (control, vars, pool) in parts {
            buf.push(*control as i32);
            buf.extend_from_slice(vars);
            buf.push(pool.len() as i32);
            for e in pool {
                buf.push(e.signal as i32);
                buf.extend_from_slice(&e.args);
            }
        }
        GlobalState::from_vec(buf)
    }

    pub fn describe_event(&self, instance: usize, e: &Event) -> String {
        let m = self.machine_of(instance);
        format_signal(&m.signals[e.signal].name, &e.args)
    }
}

pub(crate) fn format_signal(name: &str, args: &[i32]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        let a: Vec<String> = args.iter().map(|v| v.to_string()).collect();
        format!("{name}({})", a.join(","))
    }
}
