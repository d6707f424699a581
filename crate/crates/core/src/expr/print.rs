use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{DerivKey, Expr, Node, Rational};

pub(crate) fn jet_name(depvar: &str, k: DerivKey) -> String {
    match (k.t, k.x) {
        (0, 0) => depvar.to_string(),
        (0, x) => format!("{depvar}_{x}"),
        (t, x) => {
            let mut s = format!("{depvar}_t");
            if t > 1 {
                write!(s, "{t}").unwrap();
            }
            if x > 0 {
                write!(s, "x{x}").unwrap();
            }
            s
        }
    }
}

/// Display adapter printing an expression in the input grammar.
pub struct Printed<'a> {
    expr: &'a Expr,
    depvar: &'a str,
}

impl<'a> Printed<'a> {
    pub(crate) fn new(expr: &'a Expr, depvar: &'a str) -> Self {
        Self { expr, depvar }
    }
}

impl fmt::Display for Printed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self.expr, self.depvar);
        f.write_str(&s)
    }
}

fn write_expr(out: &mut String, e: &Expr, depvar: &str) {
    match e.node() {
        Node::Add(terms) => {
            // Reverse of the internal order reads more naturally: constants last.
            for (i, t) in terms.iter().rev().enumerate() {
                let (negative, body) = term_string(t, depvar);
                match (i, negative) {
                    (0, true) => out.push('-'),
                    (0, false) => {}
                    (_, true) => out.push_str(" - "),
                    (_, false) => out.push_str(" + "),
                }
                out.push_str(&body);
            }
        }
        _ => {
            let (negative, body) = term_string(e, depvar);
            if negative {
                out.push('-');
            }
            out.push_str(&body);
        }
    }
}

fn split(e: &Expr) -> (Rational, Vec<(&Expr, Rational)>) {
    match e.node() {
        Node::Num(c) => (c.clone(), Vec::new()),
        Node::Mul(fs) => {
            let mut coef = Rational::one();
            let mut factors = Vec::new();
            for f in fs {
                match f.node() {
                    Node::Num(c) => coef = c.clone(),
                    Node::Pow(b, q) => factors.push((b, q.clone())),
                    _ => factors.push((f, Rational::one())),
                }
            }
            (coef, factors)
        }
        Node::Pow(b, q) => (Rational::one(), vec![(b, q.clone())]),
        _ => (Rational::one(), vec![(e, Rational::one())]),
    }
}

/// Returns the sign and the printed magnitude of a single term.
fn term_string(e: &Expr, depvar: &str) -> (bool, String) {
    let (coef, factors) = split(e);
    let negative = coef.is_negative();
    let coef = coef.abs();
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    for (base, q) in &factors {
        // `1/(a + b)^2` would reparse as the reciprocal of the expanded square.
        if q.is_negative()
            && q.is_integer()
            && !q.abs().is_one()
            && matches!(base.node(), Node::Add(_))
        {
            num.push(factor_string(base, q, depvar));
            continue;
        }
        let s = factor_string(base, &q.abs(), depvar);
        if q.is_negative() {
            den.push(s);
        } else {
            num.push(s);
        }
    }
    let numer = coef.numer();
    let denom = coef.denom();
    if factors.is_empty() {
        return (negative, coef.to_string());
    }
    if !denom.is_one() {
        num.insert(0, format!("({coef})"));
    } else if !numer.is_one() || num.is_empty() {
        num.insert(0, numer.to_string());
    }
    let mut s = num.join("*");
    match den.len() {
        0 => {}
        1 => write!(s, "/{}", den[0]).unwrap(),
        _ => write!(s, "/({})", den.join("*")).unwrap(),
    }
    (negative, s)
}

fn factor_string(base: &Expr, q: &Rational, depvar: &str) -> String {
    let mut s = match base.node() {
        Node::Sym(sym) => sym.label(depvar),
        Node::Num(c) if c.is_negative() => format!("({c})"),
        Node::Num(c) => c.to_string(),
        Node::Exp(a) => format!("exp({})", a.printed(depvar)),
        Node::Ln(a) => format!("ln({})", a.printed(depvar)),
        _ => format!("({})", base.printed(depvar)),
    };
    if q.is_one() {
        return s;
    }
    if q.is_integer() && q.is_positive() {
        write!(s, "^{q}").unwrap();
    } else {
        write!(s, "^({q})").unwrap();
    }
    s
}
