use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::expr::{Expr, Node, Rational, Symbol};

/// A binding of symbols to real values.
pub type Point = BTreeMap<Symbol, f64>;

/// Denominators smaller than this in magnitude are treated as singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol {0:?}")]
    Unbound(Symbol),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Evaluates `e` at `point` in double precision.
pub fn eval(e: &Expr, point: &Point) -> Result<f64, EvalError> {
    eval_scaled(e, point).map(|(v, _)| v)
}

/// Evaluates `e` and also returns the largest magnitude of any intermediate value.
pub fn eval_scaled(e: &Expr, point: &Point) -> Result<(f64, f64), EvalError> {
    let mut scale = 0.0f64;
    let v = go(e, point, &mut scale)?;
    Ok((v, scale))
}

fn rational_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn go(e: &Expr, point: &Point, scale: &mut f64) -> Result<f64, EvalError> {
    let v = match e.node() {
        Node::Num(c) => rational_f64(c),
        Node::Sym(s) => *point.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?,
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += go(t, point, scale)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= go(f, point, scale)?;
            }
            acc
        }
        Node::Pow(b, q) => {
            let base = go(b, point, scale)?;
            if q.is_negative() && base.abs() < SINGULAR_DENOMINATOR {
                return Err(EvalError::Domain(format!("division by {base:e}")));
            }
            if q.is_integer() {
                match q.to_integer().to_i32() {
                    Some(k) => base.powi(k),
                    None => base.powf(rational_f64(q)),
                }
            } else {
                if base < 0.0 {
                    return Err(EvalError::Domain(format!(
                        "fractional power of negative base {base}"
                    )));
                }
                base.powf(rational_f64(q))
            }
        }
        Node::Exp(a) => go(a, point, scale)?.exp(),
        Node::Ln(a) => {
            let arg = go(a, point, scale)?;
            if arg <= 0.0 {
                return Err(EvalError::Domain(format!("ln of non-positive {arg}")));
            }
            arg.ln()
        }
    };
    if !v.is_finite() {
        return Err(EvalError::Domain("non-finite value".into()));
    }
    *scale = scale.max(v.abs());
    Ok(v)
}
