//! Weights, the weighted ranking of derivatives and the differentiation operators acting on
//! differential functions of `t`, `x` and the jet variables `u_{a,b}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{DerivKey, Expr, Symbol};
use crate::symmetry::EvolutionEquation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("unexpected t-derivative {0:?}")]
    TDerivative(DerivKey),
    #[error("jet variable u_{k} lies outside the frame u_0..u_{rho_minus_one}", rho_minus_one = .rho - 1)]
    OutOfFrame { k: u32, rho: u32 },
    #[error("order of the restricted frame must be positive")]
    ZeroOrder,
}

/// Weight `[a] = r*a_t + a_x` of a jet variable for an equation of order `r`.
pub fn weight(k: DerivKey, r: u32) -> u32 {
    r * k.t + k.x
}

/// Maximal weight of the jet variables in `e`, 0 if there are none.
pub fn expr_weight(e: &Expr, r: u32) -> u32 {
    e.jets()
        .into_iter()
        .map(|k| weight(k, r))
        .max()
        .unwrap_or(0)
}

/// The weighted ranking: by weight, ties broken by the number of `t`-differentiations.
pub fn rank_compare(a: DerivKey, b: DerivKey, r: u32) -> Ordering {
    (weight(a, r), a.t).cmp(&(weight(b, r), b.t))
}

/// Highest-ranked jet variable occurring in `e`.
pub fn leading_derivative(e: &Expr, r: u32) -> Option<DerivKey> {
    e.jets().into_iter().max_by(|a, b| rank_compare(*a, *b, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeClass {
    Principal,
    Parametric,
}

/// Classification with respect to the orthonomic system `u_t = H^, u_rho = eta_check`.
pub fn classify_derivative(k: DerivKey, rho: u32) -> DerivativeClass {
    if k.t >= 1 || k.x >= rho {
        DerivativeClass::Principal
    } else {
        DerivativeClass::Parametric
    }
}

fn total_derivative(e: &Expr, base: Symbol, step: DerivKey) -> Expr {
    let mut terms = vec![e.diff(&base)];
    for k in e.jets() {
        let next = DerivKey::new(k.t + step.t, k.x + step.x);
        terms.push(&Expr::jet(next) * &e.diff(&Symbol::Jet(k)));
    }
    Expr::sum(terms)
}

/// `D_x = d_x + sum u_{a,b+1} d_{u_{a,b}}`.
pub fn total_derivative_x(e: &Expr) -> Expr {
    total_derivative(e, Symbol::X, DerivKey::new(0, 1))
}

/// `D_t = d_t + sum u_{a+1,b} d_{u_{a,b}}`.
pub fn total_derivative_t(e: &Expr) -> Expr {
    total_derivative(e, Symbol::T, DerivKey::new(1, 0))
}

pub fn total_derivative_x_n(e: &Expr, n: u32) -> Expr {
    (0..n).fold(e.clone(), |acc, _| total_derivative_x(&acc))
}

fn reject_t_derivatives(e: &Expr) -> Result<(), JetError> {
    match e.jets().into_iter().find(|k| k.t > 0) {
        Some(k) => Err(JetError::TDerivative(k)),
        None => Ok(()),
    }
}

/// Highest pure `x`-derivative order in `e`, if `e` has jet variables.
pub fn x_order(e: &Expr) -> Option<u32> {
    e.jets().into_iter().map(|k| k.x).max()
}

/// `D~_t = d_t + sum_k (D_x^k H) d_{u_k}`, total `t`-derivative on solutions of `eq`.
pub fn reduced_dt_on_solutions(e: &Expr, eq: &EvolutionEquation) -> Result<Expr, JetError> {
    reject_t_derivatives(e)?;
    let mut terms = vec![e.diff(&Symbol::T)];
    let mut dh = eq.rhs().clone();
    let top = x_order(e).unwrap_or(0);
    for k in 0..=top {
        let coeff = e.diff(&Symbol::u(k));
        if !coeff.is_literal_zero() {
            terms.push(&dh * &coeff);
        }
        if k < top {
            dh = total_derivative_x(&dh);
        }
    }
    Ok(Expr::sum(terms))
}

/// Coefficients `(f_{u_0}, ..., f_{u_m})` of the Frechet derivative `f_* = sum f_{u_i} D_x^i`.
pub fn frechet(e: &Expr) -> Result<Vec<Expr>, JetError> {
    reject_t_derivatives(e)?;
    Ok(match x_order(e) {
        Some(m) => (0..=m).map(|i| e.diff(&Symbol::u(i))).collect(),
        None => Vec::new(),
    })
}

/// Applies a Frechet derivative given by its coefficients to `g`.
pub fn apply_frechet(coeffs: &[Expr], g: &Expr) -> Expr {
    let mut terms = Vec::with_capacity(coeffs.len());
    let mut dg = g.clone();
    for (i, c) in coeffs.iter().enumerate() {
        if i > 0 {
            dg = total_derivative_x(&dg);
        }
        terms.push(c * &dg);
    }
    Expr::sum(terms)
}

/// Replaces every `u_{a,b}` with `a >= 1` by `D_x^b D_t^{a-1} H`, highest `a` first, until
/// no `t`-derivatives remain.
pub fn eliminate_t_derivatives(e: &Expr, eq: &EvolutionEquation) -> Expr {
    // dt_h[a] = D_t^a H
    let mut dt_h: Vec<Expr> = vec![eq.rhs().clone()];
    let mut current = e.clone();
    loop {
        let tjets: Vec<DerivKey> = current.jets().into_iter().filter(|k| k.t > 0).collect();
        let Some(max_t) = tjets.iter().map(|k| k.t).max() else {
            return current;
        };
        while dt_h.len() < max_t as usize {
            let next = total_derivative_t(dt_h.last().unwrap());
            dt_h.push(next);
        }
        let mut bindings = BTreeMap::new();
        for k in tjets.into_iter().filter(|k| k.t == max_t) {
            let value = total_derivative_x_n(&dt_h[(k.t - 1) as usize], k.x);
            bindings.insert(Symbol::Jet(k), value);
        }
        current = current.subs(&bindings);
    }
}

/// Total derivatives restricted to the manifold of `u_t = H` and `u_rho = eta_check`
/// together with their `x`-consequences, acting on functions of `t, x, u_0..u_{rho-1}`.
#[derive(Clone, Debug)]
pub struct RestrictedFrame {
    rho: u32,
    eta_check: Expr,
    hhat: Expr,
    /// `D^_x^{b} H^` for `b = 0..rho`.
    hhat_dx: Vec<Expr>,
}

impl RestrictedFrame {
    pub fn new(eq: &EvolutionEquation, rho: u32, eta_check: &Expr) -> Result<Self, JetError> {
        if rho == 0 {
            return Err(JetError::ZeroOrder);
        }
        let mut frame = Self {
            rho,
            eta_check: eta_check.clone(),
            hhat: Expr::zero(),
            hhat_dx: Vec::new(),
        };
        frame.check_closed(eta_check)?;
        let r = eq.order();
        frame.hhat = if rho > r {
            eq.rhs().clone()
        } else {
            let mut bindings = BTreeMap::new();
            let mut d = eta_check.clone();
            for j in 0..=(r - rho) {
                if j > 0 {
                    d = frame.dx(&d)?;
                }
                bindings.insert(Symbol::u(rho + j), d.clone());
            }
            eq.rhs().subs(&bindings)
        };
        let mut hd = vec![frame.hhat.clone()];
        for _ in 0..rho {
            let next = frame.dx(hd.last().unwrap())?;
            hd.push(next);
        }
        frame.hhat_dx = hd;
        Ok(frame)
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn eta_check(&self) -> &Expr {
        &self.eta_check
    }

    /// `H^`: the right-hand side with `u_{rho+j}` replaced by `D^_x^j eta_check`.
    pub fn hhat(&self) -> &Expr {
        &self.hhat
    }

    /// `D^_x^rho H^`.
    pub fn hhat_dx_rho(&self) -> &Expr {
        &self.hhat_dx[self.rho as usize]
    }

    fn check_closed(&self, e: &Expr) -> Result<(), JetError> {
        for k in e.jets() {
            if k.t > 0 {
                return Err(JetError::TDerivative(k));
            }
            if k.x >= self.rho {
                return Err(JetError::OutOfFrame {
                    k: k.x,
                    rho: self.rho,
                });
            }
        }
        Ok(())
    }

    /// `D^_x = d_x + sum_{b=1}^{rho-1} u_b d_{u_{b-1}} + eta_check d_{u_{rho-1}}`.
    pub fn dx(&self, e: &Expr) -> Result<Expr, JetError> {
        self.check_closed(e)?;
        let mut terms = vec![e.diff(&Symbol::X)];
        for b in 1..=self.rho {
            let de = e.diff(&Symbol::u(b - 1));
            if de.is_literal_zero() {
                continue;
            }
            let coeff = if b < self.rho {
                Expr::u(b)
            } else {
                self.eta_check.clone()
            };
            terms.push(&coeff * &de);
        }
        Ok(Expr::sum(terms))
    }

    pub fn dx_n(&self, e: &Expr, n: u32) -> Result<Expr, JetError> {
        let mut acc = e.clone();
        for _ in 0..n {
            acc = self.dx(&acc)?;
        }
        Ok(acc)
    }

    /// `D^_t = d_t + sum_{b=1}^{rho} (D^_x^{b-1} H^) d_{u_{b-1}}`.
    pub fn dt(&self, e: &Expr) -> Result<Expr, JetError> {
        self.check_closed(e)?;
        let mut terms = vec![e.diff(&Symbol::T)];
        for b in 1..=self.rho {
            let de = e.diff(&Symbol::u(b - 1));
            if !de.is_literal_zero() {
                terms.push(&self.hhat_dx[(b - 1) as usize] * &de);
            }
        }
        Ok(Expr::sum(terms))
    }
}

/// `D^_x e` for the manifold of `eq` and `u_rho = eta_check`.
pub fn restricted_dx(
    e: &Expr,
    eq: &EvolutionEquation,
    eta_check: &Expr,
    rho: u32,
) -> Result<Expr, JetError> {
    RestrictedFrame::new(eq, rho, eta_check)?.dx(e)
}

/// `D^_t e` for the manifold of `eq` and `u_rho = eta_check`.
pub fn restricted_dt(
    e: &Expr,
    eq: &EvolutionEquation,
    eta_check: &Expr,
    rho: u32,
) -> Result<Expr, JetError> {
    RestrictedFrame::new(eq, rho, eta_check)?.dt(e)
}
