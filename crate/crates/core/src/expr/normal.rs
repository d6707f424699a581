//! Expanded sum-of-monomials normal form.
//!
//! A normalized expression is a sum of terms `c * a1^q1 * ... * ak^qk` where `c` is an
//! exact rational and the `ai` are atoms: symbols, `exp(..)`, `ln(..)`, sums that cannot be
//! expanded (negative or fractional exponents), and positive integer bases carrying a
//! fractional exponent in `(0, 1)` (surds such as `2^(1/2)`).
//!
//! Products are distributed, positive integer powers of sums are expanded, like terms are
//! merged and powers of the same atom are combined. Sums kept as atoms are made primitive by
//! pulling the leading coefficient out, so `(2u + 2)^(-1)` and `(u + 1)^(-1) / 2` agree.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Node, Rational};

pub(crate) type Monomial = Vec<(Expr, Rational)>;

#[derive(Clone, Debug, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c);
        p
    }

    fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_expr(e: &Expr) -> Self {
        let mut p = Self::zero();
        match e.node() {
            Node::Num(c) => p.add_term(Vec::new(), c.clone()),
            Node::Add(terms) => {
                for t in terms {
                    let (m, c) = split_term(t);
                    p.add_term(m, c);
                }
            }
            _ => {
                let (m, c) = split_term(e);
                p.add_term(m, c);
            }
        }
        p
    }

    pub fn into_expr(self) -> Expr {
        let mut terms: Vec<Expr> = self
            .terms
            .into_iter()
            .map(|(m, c)| term_to_expr(m, c))
            .collect();
        match terms.len() {
            0 => Expr::from_node(Node::Num(Rational::zero())),
            1 => terms.pop().unwrap(),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, other: Poly) {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    pub fn scale(&mut self, k: &Rational) {
        if k.is_zero() {
            self.terms.clear();
            return;
        }
        for c in self.terms.values_mut() {
            *c *= k;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Leading term under the lexicographic order on exponent vectors.
    fn leading(&self) -> Option<(Monomial, Rational)> {
        self.terms
            .iter()
            .max_by(|a, b| lex(a.0, b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        // A sum multiplied into a product that already carries it as an atom combines
        // exponents instead of being distributed, so `s * s^(-1)` cancels.
        if let Some(a) = other.as_atom_in(self) {
            return self.mul_distribute(&a);
        }
        if let Some(a) = self.as_atom_in(other) {
            return a.mul_distribute(other);
        }
        self.mul_distribute(other)
    }

    fn as_atom_in(&self, host: &Poly) -> Option<Poly> {
        if self.terms.len() < 2 {
            return None;
        }
        let has_sum_atoms = host
            .terms
            .keys()
            .any(|m| m.iter().any(|(a, _)| matches!(a.node(), Node::Add(_))));
        if !has_sum_atoms {
            return None;
        }
        let lead = self.terms.values().next().unwrap().clone();
        for factor in [lead.clone(), lead.abs()] {
            let mut primitive = self.clone();
            primitive.scale(&factor.recip());
            let atom = primitive.into_expr();
            let present = host.terms.keys().any(|m| m.iter().any(|(a, _)| *a == atom));
            if present {
                return Some(Poly::monomial(vec![(atom, Rational::one())], factor));
            }
            if lead.is_positive() {
                break;
            }
        }
        None
    }

    fn mul_distribute(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let (m, k, expand) = settle(merge(m1, m2));
                let coef = c1 * c2 * k;
                if expand.is_empty() {
                    out.add_term(m, coef);
                } else {
                    let mut p = Poly::monomial(m, coef);
                    for (s, n) in expand {
                        p = p.mul(&Poly::from_expr(&s).pow_uint(n));
                    }
                    out.add_assign(p);
                }
            }
        }
        out
    }

    fn pow_uint(&self, mut n: u32) -> Poly {
        let mut acc = Poly::constant(Rational::one());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn pow(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::constant(Rational::one());
        }
        if q.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            if q.is_positive() {
                return Poly::zero();
            }
            // 0 to a non-positive power stays symbolic; evaluation reports a domain error.
            return Poly::monomial(
                vec![(Expr::from_node(Node::Num(Rational::zero())), q.clone())],
                Rational::one(),
            );
        }
        if let Some((m, c)) = self.single_term() {
            let (coef, numeric) = numeric_power(c, q);
            let scaled: Monomial = m.iter().map(|(a, e)| (a.clone(), e * q)).collect();
            let (m, k, expand) = settle(merge(&numeric, &scaled));
            let mut p = Poly::monomial(m, coef * k);
            for (s, n) in expand {
                p = p.mul(&Poly::from_expr(&s).pow_uint(n));
            }
            return p;
        }
        if q.is_integer() && q.is_positive() {
            let n = q
                .to_integer()
                .to_u32()
                .expect("exponent too large to expand");
            return self.pow_uint(n);
        }
        // Non-expandable power of a sum: pull the leading coefficient out and keep the
        // primitive sum as an atom.
        let lead = self.terms.values().next().unwrap().clone();
        let factor = if q.is_integer() { lead } else { lead.abs() };
        let mut primitive = self.clone();
        primitive.scale(&factor.recip());
        let atom = primitive.into_expr();
        let (coef, numeric) = numeric_power(&factor, q);
        let (m, k, _) = settle(merge(&numeric, &vec![(atom, q.clone())]));
        Poly::monomial(m, coef * k)
    }
}

/// Exact quotient of two normalized expressions viewed as Laurent polynomials in their
/// atoms, or `None` when the division leaves a remainder within `max_steps` steps.
pub(crate) fn exact_quotient(num: &Expr, den: &Expr, max_steps: usize) -> Option<Expr> {
    let d = Poly::from_expr(den);
    let (lm_d, lc_d) = d.leading()?;
    let inv: Monomial = lm_d.iter().map(|(a, q)| (a.clone(), -q.clone())).collect();
    let mut r = Poly::from_expr(num);
    let mut q = Poly::zero();
    for _ in 0..max_steps {
        let Some((lm, lc)) = r.leading() else {
            return Some(q.into_expr());
        };
        let (m, k, expand) = settle(merge(&lm, &inv));
        if !expand.is_empty() {
            return None;
        }
        let t = Poly::monomial(m, lc / &lc_d * k);
        let mut sub = t.mul_distribute(&d);
        sub.scale(&-Rational::one());
        r.add_assign(sub);
        if let Some((next, _)) = r.leading() {
            if lex(&next, &lm) != Ordering::Less {
                return None;
            }
        }
        q.add_assign(t);
    }
    None
}

/// Lexicographic comparison of exponent vectors, atoms taken in increasing order.
fn lex(a: &Monomial, b: &Monomial) -> Ordering {
    let zero = Rational::zero();
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some((_, p)), None) => return p.cmp(&zero),
            (None, Some((_, q))) => return zero.cmp(q),
            (Some((x, p)), Some((y, q))) => match x.cmp(y) {
                Ordering::Less => return p.cmp(&zero),
                Ordering::Greater => return zero.cmp(q),
                Ordering::Equal if p != q => return p.cmp(q),
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

fn split_term(e: &Expr) -> (Monomial, Rational) {
    match e.node() {
        Node::Num(c) => (Vec::new(), c.clone()),
        Node::Mul(factors) => {
            let mut coef = Rational::one();
            let mut m = Vec::with_capacity(factors.len());
            for f in factors {
                match f.node() {
                    Node::Num(c) => coef = c.clone(),
                    Node::Pow(b, q) => m.push((b.clone(), q.clone())),
                    _ => m.push((f.clone(), Rational::one())),
                }
            }
            (m, coef)
        }
        Node::Pow(b, q) => (vec![(b.clone(), q.clone())], Rational::one()),
        _ => (vec![(e.clone(), Rational::one())], Rational::one()),
    }
}

fn term_to_expr(m: Monomial, c: Rational) -> Expr {
    let mut factors: Vec<Expr> = Vec::with_capacity(m.len() + 1);
    if m.is_empty() {
        return Expr::from_node(Node::Num(c));
    }
    if !c.is_one() {
        factors.push(Expr::from_node(Node::Num(c)));
    }
    for (a, q) in m {
        if q.is_one() {
            factors.push(a);
        } else {
            factors.push(Expr::from_node(Node::Pow(a, q)));
        }
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::from_node(Node::Mul(factors))
    }
}

fn merge(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push((a[i].0.clone(), &a[i].1 + &b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Drops zero exponents, folds integer parts of surd exponents into the coefficient and
/// reports sum atoms that reached a positive integer exponent (they must be expanded).
fn settle(m: Monomial) -> (Monomial, Rational, Vec<(Expr, u32)>) {
    let mut coef = Rational::one();
    let mut out = Vec::with_capacity(m.len());
    let mut expand = Vec::new();
    for (a, q) in m {
        if q.is_zero() {
            continue;
        }
        match a.node() {
            Node::Num(b) if !b.is_zero() => {
                let fl = q.floor();
                let fr = &q - &fl;
                let k = fl.to_integer().to_i32().expect("exponent out of range");
                coef *= b.pow(k);
                if !fr.is_zero() {
                    out.push((a, fr));
                }
            }
            Node::Add(_) if q.is_integer() && q.is_positive() => {
                let n = q
                    .to_integer()
                    .to_u32()
                    .expect("exponent too large to expand");
                expand.push((a, n));
            }
            _ => out.push((a, q)),
        }
    }
    (out, coef, expand)
}

/// `c^q` for a nonzero rational `c`, split into an exact coefficient and surd atoms.
fn numeric_power(c: &Rational, q: &Rational) -> (Rational, Monomial) {
    if q.is_integer() {
        let k = q.to_integer().to_i32().expect("exponent out of range");
        return (c.pow(k), Vec::new());
    }
    let mut m: Monomial = Vec::new();
    if c.is_negative() {
        m.push((num_atom(BigInt::from(-1)), q.clone()));
    }
    let mut exact = Rational::one();
    let n = c.numer().abs();
    let d = c.denom().clone();
    for (base, e) in [(n, q.clone()), (d, -q.clone())] {
        if base.is_one() {
            continue;
        }
        match exact_root(&base, e.denom()) {
            Some(root) => {
                let k = e.numer().to_i32().expect("exponent out of range");
                exact *= Rational::from_integer(root).pow(k);
            }
            None => m.push((num_atom(base), e)),
        }
    }
    m.sort_by(|a, b| a.0.cmp(&b.0));
    let (m, k, _) = settle(m);
    (exact * k, m)
}

/// `Some(r)` when `n == r^k` exactly.
fn exact_root(n: &BigInt, k: &BigInt) -> Option<BigInt> {
    let k = k.to_u32()?;
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

fn num_atom(n: BigInt) -> Expr {
    Expr::from_node(Node::Num(Rational::from_integer(n)))
}
