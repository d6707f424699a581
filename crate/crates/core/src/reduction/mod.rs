//! Ansatzes, their associated operators, reduction of an equation to a system of ODEs in
//! the invariant variable `t`, and verification of explicit solution families.

mod matrix;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Expr, Symbol};
use crate::oracle::{is_zero, OracleError, SamplePlan, Witness, ZeroVerdict};
use crate::symmetry::{CanonicalOperator, Check, EvolutionEquation, SymmetryError};

pub use matrix::SymbolicMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("an ansatz needs at least one parameter")]
    NoParameters,
    #[error("expression depends on the jet variable {0}")]
    JetDependence(String),
    #[error("ansatz is not affine in its parameters")]
    NotAffine,
    #[error("determinant of the parameter matrix vanishes identically")]
    Singular,
    #[error("parameter {0} is inessential: the essentiality determinant vanishes")]
    Inessential(String),
    #[error("family does not solve the equation")]
    NotASolution(Box<Witness>),
    #[error("not reducible: component {index} of the reduced system depends on x")]
    NotReducible {
        index: usize,
        residual: Expr,
        witness: Box<Witness>,
    },
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `u = F(t, x, phi^1, ..., phi^rho)` with `F` affine in the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    rho: u32,
    f: Expr,
    params: Vec<Symbol>,
}

impl Ansatz {
    pub fn new(f: Expr, params: Vec<Symbol>, plan: &SamplePlan) -> Result<Self, ReductionError> {
        if params.is_empty() {
            return Err(ReductionError::NoParameters);
        }
        if let Some(k) = f.jets().into_iter().next() {
            return Err(ReductionError::JetDependence(format!("{k:?}")));
        }
        for a in &params {
            for b in &params {
                if !is_zero(&f.diff(a).diff(b), plan)?.is_zero() {
                    return Err(ReductionError::NotAffine);
                }
            }
        }
        let ansatz = Self {
            rho: params.len() as u32,
            f,
            params,
        };
        if is_zero(&ansatz.phi_matrix().det(), plan)?.is_zero() {
            return Err(ReductionError::Singular);
        }
        Ok(ansatz)
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    /// `d^k F / dx^k`.
    pub fn f_x(&self, k: u32) -> Expr {
        (0..k).fold(self.f.clone(), |e, _| e.diff(&Symbol::X))
    }

    /// `Phi^{ab} = d(F_{a-1}) / d phi^b`.
    pub fn phi_matrix(&self) -> SymbolicMatrix {
        jacobian(&self.f, &self.params)
    }

    fn at_zero(&self, e: &Expr) -> Expr {
        let zero: BTreeMap<Symbol, Expr> = self
            .params
            .iter()
            .map(|p| (p.clone(), Expr::zero()))
            .collect();
        e.subs(&zero)
    }
}

/// Matrix of `d(d^{a-1} f / dx^{a-1}) / d kappa_b`.
fn jacobian(f: &Expr, params: &[Symbol]) -> SymbolicMatrix {
    let n = params.len();
    let mut rows = Vec::with_capacity(n);
    let mut fx = f.clone();
    for a in 0..n {
        if a > 0 {
            fx = fx.diff(&Symbol::X);
        }
        rows.push(params.iter().map(|p| fx.diff(p)).collect());
    }
    SymbolicMatrix::new(rows)
}

/// `phi^a_t = G^a(t, phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSystem {
    pub params: Vec<Symbol>,
    pub rhs: Vec<Expr>,
}

impl ReducedSystem {
    pub fn rho(&self) -> u32 {
        self.rhs.len() as u32
    }
}

/// `u = f(t, x, kappa_1, ..., kappa_rho)`, a family of solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionFamily {
    pub f: Expr,
    pub params: Vec<Symbol>,
}

impl SolutionFamily {
    pub fn new(f: Expr, params: Vec<Symbol>) -> Self {
        Self { f, params }
    }

    pub fn rho(&self) -> u32 {
        self.params.len() as u32
    }
}

/// The operator whose invariant surface condition has the ansatz as general solution.
pub fn ansatz_to_operator(a: &Ansatz) -> Result<CanonicalOperator, ReductionError> {
    let phi = phi_of_u(a);
    let eta = a.f_x(a.rho).subs(&phi);
    Ok(CanonicalOperator::new(a.rho, eta)?)
}

/// `phi = Phi^-1 (u_{(rho-1)} - F^0_{(rho-1)})` as bindings of the parameters.
fn phi_of_u(a: &Ansatz) -> BTreeMap<Symbol, Expr> {
    let phi_hat = a.phi_matrix().inverse();
    let shifted: Vec<Expr> = (0..a.rho)
        .map(|k| &Expr::u(k) - &a.at_zero(&a.f_x(k)))
        .collect();
    a.params
        .iter()
        .cloned()
        .zip(phi_hat.mul_vec(&shifted))
        .collect()
}

/// Residuals of the correspondence between an ansatz and its operator: the first `rho`
/// entries are `F_{a-1}(phi(u)) - u_{a-1}`, the last is `F_rho - eta_check|_{u_k = F_k}`.
pub fn round_trip_residuals(a: &Ansatz, op: &CanonicalOperator) -> Vec<Expr> {
    let phi = phi_of_u(a);
    let mut out: Vec<Expr> = (0..a.rho)
        .map(|k| &a.f_x(k).subs(&phi) - &Expr::u(k))
        .collect();
    let on_ansatz: BTreeMap<Symbol, Expr> = (0..a.rho).map(|k| (Symbol::u(k), a.f_x(k))).collect();
    out.push(&a.f_x(a.rho) - &op.eta_check.subs(&on_ansatz));
    out
}

/// Substitutes the ansatz into the equation and solves for `phi_t`.
pub fn reduce(
    eq: &EvolutionEquation,
    a: &Ansatz,
    plan: &SamplePlan,
) -> Result<ReducedSystem, ReductionError> {
    let r = eq.order();
    let on_ansatz: BTreeMap<Symbol, Expr> = (0..=r).map(|k| (Symbol::u(k), a.f_x(k))).collect();
    let h_tilde = eq.rhs().subs(&on_ansatz);
    let mut rows = Vec::with_capacity(a.rho as usize);
    let mut d = &h_tilde - &a.f.diff(&Symbol::T);
    for k in 0..a.rho {
        if k > 0 {
            d = d.diff(&Symbol::X);
        }
        rows.push(d.clone());
    }
    let phi = a.phi_matrix();
    let det = phi.det();
    if is_zero(&det, plan)?.is_zero() {
        return Err(ReductionError::Singular);
    }
    let g = phi.inverse_with_det(&det).mul_vec(&rows);

    let verdicts: Vec<Result<ZeroVerdict, OracleError>> = g
        .par_iter()
        .map(|ga| is_zero(&ga.diff(&Symbol::X), plan))
        .collect();
    for (index, v) in verdicts.into_iter().enumerate() {
        if let ZeroVerdict::NonZero(w) = v? {
            return Err(ReductionError::NotReducible {
                index,
                residual: g[index].diff(&Symbol::X),
                witness: Box::new(w),
            });
        }
    }
    // Components may still mention x in a form the normalizer cannot cancel; they are
    // independent of x, so any admissible value can be substituted.
    let x0 = Expr::num(sample_x(plan));
    let rhs = g
        .into_iter()
        .map(|ga| {
            if ga.contains(&Symbol::X) {
                ga.subs1(Symbol::X, x0.clone())
            } else {
                ga
            }
        })
        .collect();
    Ok(ReducedSystem {
        params: a.params.clone(),
        rhs,
    })
}

/// Midpoint of the sampling interval for `x`, as an exact rational.
fn sample_x(plan: &SamplePlan) -> crate::expr::Rational {
    let (lo, hi) = plan.boxes.get(&Symbol::X).copied().unwrap_or(plan.interval);
    crate::expr::Rational::from_float((lo + hi) / 2.0).unwrap_or_else(|| crate::expr::rat(1, 1))
}

/// `det( d f_{a-1} / d kappa_b )`.
pub fn essentiality_det(fam: &SolutionFamily) -> Expr {
    jacobian(&fam.f, &fam.params).det()
}

/// Zero-tests `u_t - H(t, x, u, u_x, ...)` for the explicit function `u`.
pub fn verify_solution(
    eq: &EvolutionEquation,
    u: &Expr,
    plan: &SamplePlan,
) -> Result<Check, ReductionError> {
    if let Some(k) = u.jets().into_iter().next() {
        return Err(ReductionError::JetDependence(format!("{k:?}")));
    }
    let mut bindings = BTreeMap::new();
    let mut d = u.clone();
    for k in 0..=eq.order() {
        if k > 0 {
            d = d.diff(&Symbol::X);
        }
        bindings.insert(Symbol::u(k), d.clone());
    }
    let residual = &u.diff(&Symbol::T) - &eq.rhs().subs(&bindings);
    Ok(Check::decide(residual, plan)?)
}

/// Turns a verified, essential, affine family into an ansatz with the same parameters.
pub fn family_to_ansatz(
    fam: &SolutionFamily,
    eq: &EvolutionEquation,
    plan: &SamplePlan,
) -> Result<Ansatz, ReductionError> {
    if is_zero(&essentiality_det(fam), plan)?.is_zero() {
        let names: Vec<String> = fam.params.iter().map(|p| p.label(eq.depvar())).collect();
        return Err(ReductionError::Inessential(names.join(", ")));
    }
    let check = verify_solution(eq, &fam.f, plan)?;
    if let Some(w) = check.verdict.witness() {
        return Err(ReductionError::NotASolution(Box::new(w.clone())));
    }
    Ansatz::new(fam.f.clone(), fam.params.clone(), plan)
}

#[cfg(test)]
mod tests;
