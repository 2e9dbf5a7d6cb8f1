//! Machine templates and closed systems, before validation.

use serde::{Deserialize, Serialize};

use crate::expr::Expr;

pub const DEFAULT_POOL_CAPACITY: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDecl {
    pub name: String,
    /// Formal parameter names; only the count matters to the kernel.
    pub params: Vec<String>,
}

impl SignalDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Assign { var: String, value: Expr },
    Send { target: String, signal: String, args: Vec<Expr> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    pub signal: String,
    pub params: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRule {
    pub label: String,
    pub source: String,
    pub target: String,
    pub trigger: Option<Trigger>,
    pub guard: Option<Expr>,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub init: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineDef {
    pub name: String,
    pub signals: Vec<SignalDecl>,
    pub vars: Vec<VarDecl>,
    pub states: Vec<String>,
    /// Names of states marked initial; a valid machine has exactly one.
    pub initial: Vec<String>,
    pub rules: Vec<TransitionRule>,
}

impl MachineDef {
    pub fn new(name: &str) -> Self {
        MachineDef {
            name: name.to_string(),
            signals: Vec::new(),
            vars: Vec::new(),
            states: Vec::new(),
            initial: Vec::new(),
            rules: Vec::new(),
        }
    }

    pub fn signal(&self, name: &str) -> Option<&SignalDecl> {
        self.signals.iter().find(|s| s.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDef {
    pub name: String,
    pub machine: String,
    pub capacity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDef {
    pub name: String,
    pub machines: Vec<MachineDef>,
    pub instances: Vec<InstanceDef>,
    /// Symbolic constants in declaration order.
    pub constants: Vec<(String, i64)>,
}

impl SystemDef {
    pub fn machine(&self, name: &str) -> Option<&MachineDef> {
        self.machines.iter().find(|m| m.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<i64> {
        self.constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    /// Rebinds an existing constant or appends a new one.
    pub fn set_constant(&mut self, name: &str, value: i64) {
        match self.constants.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.constants.push((name.to_string(), value)),
        }
    }
}
