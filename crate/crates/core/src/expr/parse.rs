//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+"|"-") term)* ;
//! term    := factor (("*"|"/") factor)* ;
//! factor  := base ("^" exponent)? | "-" factor ;
//! base    := number | "t" | "x" | depvar | depvar "_" digits
//!          | ident | "(" expr ")" | ("exp"|"ln") "(" expr ")" ;
//! exponent:= integer | "-" integer | "(" ["-"] integer ["/" integer] ")" ;
//! ```
//!
//! `depvar_t`, `depvar_t2`, `depvar_tx3`, ... name `t`-derivatives and mixed derivatives;
//! they are accepted so that internally generated expressions print and re-parse.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{DerivKey, Expr, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

/// Parses `text` with dependent variable `depvar`; any other identifier is a parameter.
pub fn parse(text: &str, depvar: &str) -> Result<Expr, ParseError> {
    Parser::new(depvar).parse(text)
}

#[derive(Clone, Debug)]
pub struct Parser {
    depvar: String,
    params: Option<BTreeSet<String>>,
}

impl Parser {
    pub fn new(depvar: &str) -> Self {
        Self {
            depvar: depvar.to_string(),
            params: None,
        }
    }

    /// Restricts parameters to the given names; anything else is an unknown identifier.
    pub fn with_params<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.params = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        let tokens = lex(text)?;
        let mut st = State {
            tokens,
            pos: 0,
            parser: self,
            len: text.len(),
        };
        let e = st.expr()?;
        if st.pos < st.tokens.len() {
            return Err(st.error("unexpected trailing input"));
        }
        Ok(e)
    }

    fn resolve(&self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        match name {
            "t" => return Ok(Expr::t()),
            "x" => return Ok(Expr::x()),
            _ => {}
        }
        if name == self.depvar {
            return Ok(Expr::u(0));
        }
        if let Some(suffix) = name
            .strip_prefix(self.depvar.as_str())
            .and_then(|s| s.strip_prefix('_'))
        {
            return jet_suffix(suffix).map(Expr::jet).ok_or_else(|| {
                ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    offset,
                }
            });
        }
        let allowed = match &self.params {
            Some(set) => set.contains(name),
            None => true,
        };
        if allowed && name != "exp" && name != "ln" {
            Ok(Expr::param(name))
        } else {
            Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                offset,
            })
        }
    }
}

fn jet_suffix(s: &str) -> Option<DerivKey> {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse().ok().map(DerivKey::x);
    }
    let rest = s.strip_prefix('t')?;
    let (tpart, xpart) = match rest.find('x') {
        Some(i) => (&rest[..i], Some(&rest[i + 1..])),
        None => (rest, None),
    };
    let t = if tpart.is_empty() {
        1
    } else {
        tpart.parse().ok()?
    };
    let x = match xpart {
        Some(p) if !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()) => p.parse().ok()?,
        Some(_) => return None,
        None => 0,
    };
    if t == 0 {
        return None;
    }
    Some(DerivKey::new(t, x))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((Tok::Int(n), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if b"+-*/^()".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap();
            return Err(ParseError::Syntax {
                offset: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct State<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    parser: &'a Parser,
    len: usize,
}

impl State<'_> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.1)
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                return Ok(Expr::sum(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat('*') {
                factors.push(self.factor()?);
            } else if self.eat('/') {
                factors.push(self.factor()?.recip());
            } else {
                return Ok(Expr::product(factors));
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if self.eat('^') {
            let q = self.exponent()?;
            return Ok(base.pow(q));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected integer")),
        }
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        if self.eat('(') {
            let neg = self.eat('-');
            let n = self.integer()?;
            let d = if self.eat('/') {
                let at = self.offset();
                let d = self.integer()?;
                if d.is_zero() {
                    return Err(ParseError::Syntax {
                        offset: at,
                        message: "zero denominator in exponent".into(),
                    });
                }
                d
            } else {
                BigInt::from(1)
            };
            self.expect(')')?;
            let q = Rational::new(n, d);
            return Ok(if neg { -q } else { q });
        }
        let neg = self.eat('-');
        let n = Rational::from_integer(self.integer()?);
        Ok(if neg { -n } else { n })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::num(Rational::from_integer(n)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "exp" || name == "ln" {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(if name == "exp" { arg.exp() } else { arg.ln() });
                }
                self.parser.resolve(&name, offset)
            }
            Some(_) => Err(self.error("expected a number, identifier or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rat, Node};

    #[test]
    fn grammar_mapping() {
        let e = parse("u_2 + u*u_1", "u").unwrap();
        let expected = &Expr::u(2) + &(&Expr::u(0) * &Expr::u(1));
        assert_eq!(e, expected);
        assert!(matches!(e.node(), Node::Add(ts) if ts.len() == 2));
    }

    #[test]
    fn depvar_and_jets() {
        let e = parse("v*v_2 - (5/6)*v_1^2 + x^2*v_1", "v").unwrap();
        let v = Expr::u(0);
        let expected = Expr::sum([
            &v * &Expr::u(2),
            Expr::u(1).powi(2).scale(&rat(-5, 6)),
            &Expr::x().powi(2) * &Expr::u(1),
        ]);
        assert_eq!(e, expected);
        assert_eq!(parse("u_0", "u").unwrap(), Expr::u(0));
        assert_eq!(parse("u_t", "u").unwrap(), Expr::jet(DerivKey::new(1, 0)));
        assert_eq!(
            parse("u_t2x3", "u").unwrap(),
            Expr::jet(DerivKey::new(2, 3))
        );
    }

    #[test]
    fn rational_exponents() {
        let e = parse("2^(1/2)*x^(1/2)", "u").unwrap();
        match e.node() {
            Node::Mul(fs) => {
                assert_eq!(fs.len(), 2);
                assert!(fs
                    .iter()
                    .all(|f| matches!(f.node(), Node::Pow(_, q) if *q == rat(1, 2))));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse("x^-2", "u").unwrap(), parse("x^(-2)", "u").unwrap());
    }

    #[test]
    fn errors_carry_offsets() {
        match parse("u + * 2", "u") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("u + $", "u") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("(u + 1", "u") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        let p = Parser::new("u").with_params(["phi1"]);
        assert!(p.parse("phi1*x").is_ok());
        assert_eq!(
            p.parse("x + phi2"),
            Err(ParseError::UnknownIdentifier {
                name: "phi2".into(),
                offset: 4
            })
        );
        assert!(matches!(
            parse("u_q", "u"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse("x^(1/0)", "u"),
            Err(ParseError::Syntax { .. })
        ));
    }
}
