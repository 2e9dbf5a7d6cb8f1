use thiserror::Error;

use crate::expr::{BinOp, UnOp, VALUE_BOUND};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("integer value {0} exceeds the bound of ±{VALUE_BOUND}")]
    Overflow(i128),
    #[error("remainder by non-positive divisor {0}")]
    Modulus(i64),
}

/// Index-resolved expression; booleans evaluate to 0 / 1.
#[derive(Clone, Debug)]
pub(crate) enum CExpr {
    Lit(i64),
    Var(usize),
    Param(usize),
    Un(UnOp, Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

#[derive(Clone, Debug)]
pub(crate) enum CAction {
    Assign(usize, CExpr),
    Send {
        target: usize,
        signal: usize,
        args: Vec<CExpr>,
    },
}

fn bounded(v: i128) -> Result<i64, EvalError> {
    if v.abs() > VALUE_BOUND as i128 {
        Err(EvalError::Overflow(v))
    } else {
        Ok(v as i64)
    }
}

impl CExpr {
    pub(crate) fn eval(&self, vars: &[i32], params: &[i32]) -> Result<i64, EvalError> {
        Ok(match self {
            CExpr::Lit(v) => *v,
            CExpr::Var(i) => vars[*i] as i64,
            CExpr::Param(i) => params[*i] as i64,
            CExpr::Un(UnOp::Neg, e) => -e.eval(vars, params)?,
            CExpr::Un(UnOp::Not, e) => (e.eval(vars, params)? == 0) as i64,
            CExpr::Bin(BinOp::And, a, b) => {
                (a.eval(vars, params)? != 0 && b.eval(vars, params)? != 0) as i64
            }
            CExpr::Bin(BinOp::Or, a, b) => {
                (a.eval(vars, params)? != 0 || b.eval(vars, params)? != 0) as i64
            }
            CExpr::Bin(op, a, b) => {
                let x = a.eval(vars, params)? as i128;
                let y = b.eval(vars, params)? as i128;
                match op {
                    BinOp::Add => bounded(x + y)?,
                    BinOp::Sub => bounded(x - y)?,
                    BinOp::Mul => bounded(x * y)?,
                    BinOp::Mod => {
                        if y <= 0 {
                            return Err(EvalError::Modulus(y as i64));
                        }
                        x.rem_euclid(y) as i64
                    }
                    BinOp::Min => x.min(y) as i64,
                    BinOp::Max => x.max(y) as i64,
                    BinOp::Eq => (x == y) as i64,
                    BinOp::Ne => (x != y) as i64,
                    BinOp::Lt => (x < y) as i64,
                    BinOp::Le => (x <= y) as i64,
                    BinOp::Gt => (x > y) as i64,
                    BinOp::Ge => (x >= y) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        })
    }
}
