//! Guard and assignment expressions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest magnitude an integer value may reach during evaluation.
pub const VALUE_BOUND: i64 = i32::MAX as i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Euclidean remainder, always non-negative for a positive divisor.
    Mod,
    Min,
    Max,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "%",
            BinOp::Min => "min",
            BinOp::Max => "max",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength for infix operators; `min`/`max` are written as calls.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Mod => 5,
            BinOp::Min | BinOp::Max => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_call(self) -> bool {
        matches!(self, BinOp::Min | BinOp::Max)
    }
}

/// Expression with names already classified as machine variables, trigger
/// parameters or system constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Param(String),
    Const(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    /// Visits every named reference in the tree.
    pub fn for_each_name(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Expr::Var(_) | Expr::Param(_) | Expr::Const(_) => f(self),
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Unary(_, e) => e.for_each_name(f),
            Expr::Binary(_, a, b) => {
                a.for_each_name(f);
                b.for_each_name(f);
            }
        }
    }

    /// `true` literal or no guard at all.
    pub fn is_trivially_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, false, f)
    }
}

fn fmt_expr(e: &Expr, ctx: u8, right: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Int(v) if *v < 0 => write!(f, "({v})"),
        Expr::Int(v) => write!(f, "{v}"),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Var(n) | Expr::Param(n) | Expr::Const(n) => f.write_str(n),
        Expr::Unary(op, inner) => {
            let paren = ctx > 6;
            if paren {
                f.write_str("(")?;
            }
            match op {
                UnOp::Neg => f.write_str("-")?,
                UnOp::Not => f.write_str("not ")?,
            }
            if matches!(**inner, Expr::Unary(UnOp::Neg, _)) || matches!(**inner, Expr::Int(v) if v < 0) {
                f.write_str("(")?;
                fmt_expr(inner, 0, false, f)?;
                f.write_str(")")?;
            } else {
                fmt_expr(inner, 6, false, f)?;
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Binary(op, a, b) if op.is_call() => {
            write!(f, "{}(", op.symbol())?;
            fmt_expr(a, 0, false, f)?;
            f.write_str(", ")?;
            fmt_expr(b, 0, false, f)?;
            f.write_str(")")
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            let paren = p < ctx || (p == ctx && right) || (op.is_comparison() && ctx == p);
            if paren {
                f.write_str("(")?;
            }
            fmt_expr(a, p, false, f)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(b, p, true, f)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}
