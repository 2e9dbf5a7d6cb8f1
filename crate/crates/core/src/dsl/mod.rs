//! Textual model notation (`.smm`).
//!
//! ```text
//! model      = { const_decl | class_decl | system_decl } ;
//! const_decl = "const" IDENT "=" ["-"] INT ";" ;
//! class_decl = "class" IDENT "{" { signals | vars | states | transitions } "}" ;
//! signals    = "signals" signal { "," signal } ";" ;
//! signal     = IDENT [ "(" [ IDENT { "," IDENT } ] ")" ] ;
//! vars       = "vars" IDENT ":=" expr { "," IDENT ":=" expr } ";" ;
//! states     = "states" ["initial"] IDENT { "," ["initial"] IDENT } ";" ;
//! transitions = "transitions" { rule } ;
//! rule       = [ IDENT ":" ] IDENT "->" IDENT
//!              "{" [ trigger ] [ "[" expr "]" ] [ "/" [ action { ";" action } ] [ ";" ] ] "}" ;
//! trigger    = IDENT [ "(" [ IDENT { "," IDENT } ] ")" ] ;
//! action     = IDENT ":=" expr | IDENT "." IDENT [ "(" [ expr { "," expr } ] ")" ] ;
//! system_decl = "system" IDENT "{" { IDENT ":" IDENT [ "capacity" INT ] ";" } "}" ;
//! expr       = or operators, loosest first: "or"; "and"; "= /= < <= > >=" (non-chaining);
//!              "+ -"; "* %"; prefix "-" and "not"; then INT, "true", "false", IDENT,
//!              "(" expr ")", "min(" expr "," expr ")", "max(" expr "," expr ")" ;
//! ```
//!
//! Comments run from `--` to the end of the line.

pub mod ast;
mod lexer;
mod lower;
mod parser;
mod printer;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{load_system, StaticError, ValidatedSystem};
use crate::system::SystemDef;

pub use ast::{Pos, SourceModel};
pub use lower::lower;
pub use parser::{parse_expr, parse_model};
pub use printer::{print_expr, print_model, print_rule};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Error)]
#[error("{line}:{col}: {message}")]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// Token classes that would have been accepted; empty for
    /// resolution errors.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: String) -> Self {
        Diagnostic {
            line: pos.line,
            col: pos.col,
            message,
            expected: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum ModelError {
    #[error("{} syntax or resolution error(s)", .0.len())]
    Syntax(Vec<Diagnostic>),
    #[error("{} static error(s)", .0.len())]
    Static(Vec<StaticError>),
}

/// Parses and lowers source text into a system definition.
pub fn compile(text: &str, system: Option<&str>) -> Result<SystemDef, ModelError> {
    let m = parse_model(text).map_err(ModelError::Syntax)?;
    lower(&m, system).map_err(ModelError::Syntax)
}

/// Parses, lowers and validates in one go.
pub fn load_text(text: &str, system: Option<&str>) -> Result<ValidatedSystem, ModelError> {
    load_system(&compile(text, system)?).map_err(ModelError::Static)
}
