//! Source-level syntax tree. Names are unresolved; positions are kept for
//! diagnostics but ignored by equality, so a re-parsed model compares equal
//! to the original regardless of layout.

use crate::expr::{BinOp, UnOp};

/// 1-based source location.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AExpr {
    Int(i64),
    Bool(bool),
    Name(String, Pos),
    Unary(UnOp, Box<AExpr>),
    Binary(BinOp, Box<AExpr>, Box<AExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub value: i64,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalSig {
    pub name: String,
    pub params: Vec<String>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInit {
    pub name: String,
    pub init: AExpr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub initial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriggerDecl {
    pub signal: String,
    pub params: Vec<String>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionDecl {
    Assign {
        var: String,
        value: AExpr,
        pos: Pos,
    },
    Send {
        target: String,
        signal: String,
        args: Vec<AExpr>,
        pos: Pos,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub label: Option<String>,
    pub source: String,
    pub target: String,
    pub trigger: Option<TriggerDecl>,
    pub guard: Option<AExpr>,
    pub actions: Vec<ActionDecl>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub signals: Vec<SignalSig>,
    pub vars: Vec<VarInit>,
    pub states: Vec<StateDecl>,
    pub rules: Vec<RuleDecl>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDecl {
    pub name: String,
    pub class: String,
    pub capacity: Option<usize>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDecl {
    pub name: String,
    pub instances: Vec<InstanceDecl>,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceModel {
    pub consts: Vec<ConstDecl>,
    pub classes: Vec<ClassDecl>,
    pub systems: Vec<SystemDecl>,
}
