//! Immutable symbolic expressions over `t`, `x`, jet variables and named parameters.
//!
//! Every [`Expr`] produced through the public constructors and operators is kept in the
//! expanded normal form described in [`normal`]: trees are shared through `Arc`, never
//! mutated, and two expressions that normalize to the same tree compare equal.

mod normal;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use normal::Poly;
pub use parse::{parse, ParseError, Parser};
pub use print::Printed;

/// Exact rational numbers used for constants and exponents.
pub type Rational = num_rational::BigRational;

/// Builds the rational `n / d`. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Multiindex of a jet variable: `t` differentiations then `x` differentiations.
///
/// `(0, 0)` is the unknown function itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivKey {
    pub t: u32,
    pub x: u32,
}

impl DerivKey {
    pub const fn new(t: u32, x: u32) -> Self {
        Self { t, x }
    }

    /// Pure `x`-derivative `u_k`.
    pub const fn x(k: u32) -> Self {
        Self { t: 0, x: k }
    }

    pub const fn order(self) -> u32 {
        self.t + self.x
    }
}

/// Free symbols an expression may depend on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    T,
    X,
    Jet(DerivKey),
    Param(Arc<str>),
}

impl Symbol {
    pub fn param(name: &str) -> Self {
        Symbol::Param(Arc::from(name))
    }

    pub fn u(k: u32) -> Self {
        Symbol::Jet(DerivKey::x(k))
    }

    /// Name used in reports; jets are printed with `depvar`.
    pub fn label(&self, depvar: &str) -> String {
        match self {
            Symbol::T => "t".into(),
            Symbol::X => "x".into(),
            Symbol::Jet(k) => print::jet_name(depvar, *k),
            Symbol::Param(p) => p.to_string(),
        }
    }
}

/// Node kinds of an expression tree.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Rational),
    Exp(Expr),
    Ln(Expr),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.printed("u").fmt(f)
    }
}

impl Expr {
    /// Wraps a node without normalizing it. Use [`Expr::normalize`] to bring such trees
    /// into normal form; every other constructor already returns normalized trees.
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn num(c: Rational) -> Self {
        Self::from_node(Node::Num(c))
    }

    pub fn int(n: i64) -> Self {
        Self::num(Rational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::num(rat(n, d))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::from_node(Node::Sym(s))
    }

    pub fn t() -> Self {
        Self::symbol(Symbol::T)
    }

    pub fn x() -> Self {
        Self::symbol(Symbol::X)
    }

    pub fn jet(k: DerivKey) -> Self {
        Self::symbol(Symbol::Jet(k))
    }

    /// The pure `x`-derivative `u_k`.
    pub fn u(k: u32) -> Self {
        Self::jet(DerivKey::x(k))
    }

    pub fn param(name: &str) -> Self {
        Self::symbol(Symbol::param(name))
    }

    fn poly(&self) -> Poly {
        Poly::from_expr(self)
    }

    pub fn pow(&self, q: Rational) -> Self {
        self.poly().pow(&q).into_expr()
    }

    pub fn powi(&self, k: i64) -> Self {
        self.pow(Rational::from_integer(BigInt::from(k)))
    }

    pub fn recip(&self) -> Self {
        self.powi(-1)
    }

    pub fn sqrt(&self) -> Self {
        self.pow(rat(1, 2))
    }

    pub fn exp(&self) -> Self {
        match self.node() {
            Node::Num(c) if c.is_zero() => Self::one(),
            Node::Ln(a) => a.clone(),
            _ => Self::from_node(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.node() {
            Node::Num(c) if c.is_one() => Self::zero(),
            Node::Exp(a) => a.clone(),
            _ => Self::from_node(Node::Ln(self.clone())),
        }
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        let mut acc = Poly::zero();
        for e in items {
            acc.add_assign(e.poly());
        }
        acc.into_expr()
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        let mut acc = Poly::constant(Rational::one());
        for e in items {
            acc = acc.mul(&e.poly());
            if acc.is_zero() {
                break;
            }
        }
        acc.into_expr()
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut p = self.poly();
        p.scale(k);
        p.into_expr()
    }

    /// Rebuilds the tree bottom-up through the normalizing constructors.
    pub fn normalize(&self) -> Self {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(ts) => Self::sum(ts.iter().map(Expr::normalize)),
            Node::Mul(fs) => Self::product(fs.iter().map(Expr::normalize)),
            Node::Pow(b, q) => b.normalize().pow(q.clone()),
            Node::Exp(a) => a.normalize().exp(),
            Node::Ln(a) => a.normalize().ln(),
        }
    }

    /// `self / den` with common factors cancelled, when `den` divides `self` exactly as a
    /// Laurent polynomial in the atoms of both.
    pub fn exact_div(&self, den: &Expr) -> Option<Expr> {
        let steps = 2 * self.children().len().max(1) + 16;
        normal::exact_quotient(&self.normalize(), &den.normalize(), steps)
    }

    /// Structural zero: the normal form is the literal `0`.
    pub fn is_literal_zero(&self) -> bool {
        matches!(self.node(), Node::Num(c) if c.is_zero())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(c) => Some(c),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => Vec::new(),
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
            Node::Pow(b, _) => vec![b],
            Node::Exp(a) | Node::Ln(a) => vec![a],
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_symbols(out);
                }
            }
        }
    }

    /// Jet variables occurring in the expression.
    pub fn jets(&self) -> BTreeSet<DerivKey> {
        self.free_symbols()
            .into_iter()
            .filter_map(|s| match s {
                Symbol::Jet(k) => Some(k),
                _ => None,
            })
            .collect()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self.node() {
            Node::Sym(x) => x == s,
            _ => self.children().into_iter().any(|c| c.contains(s)),
        }
    }

    /// Exact partial derivative, every other symbol held fixed.
    pub fn diff(&self, wrt: &Symbol) -> Self {
        match self.node() {
            Node::Num(_) => Self::zero(),
            Node::Sym(s) => {
                if s == wrt {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(ts) => Self::sum(ts.iter().map(|t| t.diff(wrt))),
            Node::Mul(fs) => {
                let mut acc = Poly::zero();
                for (i, f) in fs.iter().enumerate() {
                    let df = f.diff(wrt);
                    if df.is_literal_zero() {
                        continue;
                    }
                    let mut p = df.poly();
                    for (j, g) in fs.iter().enumerate() {
                        if i != j {
                            p = p.mul(&g.poly());
                        }
                    }
                    acc.add_assign(p);
                }
                acc.into_expr()
            }
            Node::Pow(b, q) => {
                let db = b.diff(wrt);
                if db.is_literal_zero() {
                    return Self::zero();
                }
                let lowered = b.pow(q - Rational::one());
                Self::product([Self::num(q.clone()), lowered, db])
            }
            Node::Exp(a) => {
                let da = a.diff(wrt);
                if da.is_literal_zero() {
                    return Self::zero();
                }
                &da * self
            }
            Node::Ln(a) => {
                let da = a.diff(wrt);
                if da.is_literal_zero() {
                    return Self::zero();
                }
                &da * &a.recip()
            }
        }
    }

    /// Simultaneous substitution of symbols.
    pub fn subs(&self, bindings: &BTreeMap<Symbol, Expr>) -> Self {
        if bindings.is_empty() {
            return self.clone();
        }
        self.subs_inner(bindings)
    }

    fn subs_inner(&self, bindings: &BTreeMap<Symbol, Expr>) -> Self {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Sym(s) => bindings.get(s).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(ts) | Node::Mul(ts) => {
                let new: Vec<Expr> = ts.iter().map(|t| t.subs_inner(bindings)).collect();
                if new.iter().zip(ts).all(|(a, b)| a.ptr_eq(b)) {
                    return self.clone();
                }
                if matches!(self.node(), Node::Add(_)) {
                    Self::sum(new)
                } else {
                    Self::product(new)
                }
            }
            Node::Pow(b, q) => {
                let nb = b.subs_inner(bindings);
                if nb.ptr_eq(b) {
                    self.clone()
                } else {
                    nb.pow(q.clone())
                }
            }
            Node::Exp(a) => {
                let na = a.subs_inner(bindings);
                if na.ptr_eq(a) {
                    self.clone()
                } else {
                    na.exp()
                }
            }
            Node::Ln(a) => {
                let na = a.subs_inner(bindings);
                if na.ptr_eq(a) {
                    self.clone()
                } else {
                    na.ln()
                }
            }
        }
    }

    pub fn subs1(&self, s: Symbol, value: Expr) -> Self {
        let mut b = BTreeMap::new();
        b.insert(s, value);
        self.subs(&b)
    }

    /// Printer using `depvar` for jet variables.
    pub fn printed<'a>(&'a self, depvar: &'a str) -> Printed<'a> {
        Printed::new(self, depvar)
    }
}

/// Partial derivative of `e` with respect to `wrt`.
pub fn partial_derivative(e: &Expr, wrt: &Symbol) -> Expr {
    e.diff(wrt)
}

/// Simultaneous substitution.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
    e.subs(bindings)
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::num(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let mut p = a.poly();
    p.add_assign(b.poly());
    p.into_expr()
});
binop!(Sub, sub, |a, b| {
    let mut p = a.poly();
    let mut q = b.poly();
    q.scale(&-Rational::one());
    p.add_assign(q);
    p.into_expr()
});
binop!(Mul, mul, |a, b| a.poly().mul(&b.poly()).into_expr());
binop!(Div, div, |a, b| a * b.recip());

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-Rational::one())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}
