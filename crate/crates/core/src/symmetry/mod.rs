//! Evolution equations, generalized conditional symmetry operators and the checks deciding
//! whether an operator is a symmetry of an equation.

mod involution;
mod probe;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{parse, DerivKey, Expr, ParseError, Symbol};
use crate::jet::{eliminate_t_derivatives, x_order, JetError, RestrictedFrame};
use crate::oracle::{is_zero, OracleError, SamplePlan, Witness, ZeroReport, ZeroVerdict};

pub use involution::{check_involutivity, VectorField};
pub use probe::integrability_probe;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("invalid equation: {0}")]
    InvalidEquation(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("operator is not affine in its highest derivative u_{rho}")]
    NonQuasilinear { rho: u32 },
    #[error("coefficient of the highest derivative u_{rho} vanishes identically")]
    Degenerate { rho: u32 },
    #[error("operator vanishes identically on solutions of the equation")]
    Trivial,
    #[error("commutator has a nonzero coefficient on {0}")]
    NonStructuralCommutator(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `u_t = H(t, x, u_0, ..., u_r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionEquation {
    order: u32,
    rhs: Expr,
    depvar: String,
}

impl EvolutionEquation {
    pub fn new(
        order: u32,
        rhs: Expr,
        depvar: &str,
        plan: &SamplePlan,
    ) -> Result<Self, SymmetryError> {
        if order == 0 {
            return Err(SymmetryError::InvalidEquation(
                "order must be positive".into(),
            ));
        }
        for k in rhs.jets() {
            if k.t > 0 || k.x > order {
                return Err(SymmetryError::InvalidEquation(format!(
                    "right-hand side contains {} beyond order {order}",
                    Symbol::Jet(k).label(depvar)
                )));
            }
        }
        if !matches!(
            is_zero(&rhs.diff(&Symbol::u(order)), plan)?,
            ZeroVerdict::NonZero(_)
        ) {
            return Err(SymmetryError::InvalidEquation(format!(
                "right-hand side does not depend on {}",
                Symbol::u(order).label(depvar)
            )));
        }
        Ok(Self {
            order,
            rhs,
            depvar: depvar.to_string(),
        })
    }

    pub fn parse(
        order: u32,
        rhs: &str,
        depvar: &str,
        plan: &SamplePlan,
    ) -> Result<Self, SymmetryError> {
        Self::new(order, parse(rhs, depvar)?, depvar, plan)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn depvar(&self) -> &str {
        &self.depvar
    }

    /// `E = u_t - H`.
    pub fn residual_expr(&self) -> Expr {
        &Expr::jet(DerivKey::new(1, 0)) - &self.rhs
    }
}

/// Canonical form `u_rho = eta_check(t, x, u_0, ..., u_{rho-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalOperator {
    pub rho: u32,
    pub eta_check: Expr,
}

impl CanonicalOperator {
    pub fn new(rho: u32, eta_check: Expr) -> Result<Self, SymmetryError> {
        if rho == 0 {
            return Err(SymmetryError::InvalidOperator(
                "order must be positive".into(),
            ));
        }
        if let Some(k) = eta_check.jets().into_iter().find(|k| k.t > 0 || k.x >= rho) {
            return Err(SymmetryError::InvalidOperator(format!(
                "canonical right-hand side contains {} with rho = {rho}",
                Expr::jet(k)
            )));
        }
        Ok(Self { rho, eta_check })
    }

    /// The characteristic `u_rho - eta_check` in reduced form.
    pub fn characteristic(&self) -> Expr {
        &Expr::u(self.rho) - &self.eta_check
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GcsOperator {
    /// Characteristic `eta(t, x, u_0, ..., u_rho)` free of `t`-derivatives.
    Reduced(Expr),
    Canonical(CanonicalOperator),
}

impl GcsOperator {
    pub fn canonical(&self, plan: &SamplePlan) -> Result<CanonicalOperator, SymmetryError> {
        match self {
            GcsOperator::Reduced(eta) => to_canonical(eta, plan),
            GcsOperator::Canonical(c) => Ok(c.clone()),
        }
    }

    pub fn reduced_characteristic(&self) -> Expr {
        match self {
            GcsOperator::Reduced(eta) => eta.clone(),
            GcsOperator::Canonical(c) => c.characteristic(),
        }
    }
}

/// A Lie-type operator `tau d_t + xi d_x + eta d_u` with coefficients in `t, x, u`.
#[derive(Clone, Debug, PartialEq)]
pub struct UsualOperator {
    pub tau: Expr,
    pub xi: Expr,
    pub eta: Expr,
}

impl UsualOperator {
    pub fn new(tau: Expr, xi: Expr, eta: Expr) -> Result<Self, SymmetryError> {
        for c in [&tau, &xi, &eta] {
            if let Some(k) = c.jets().into_iter().find(|k| k.t > 0 || k.x > 0) {
                return Err(SymmetryError::InvalidOperator(format!(
                    "coefficient depends on derivative {k:?}"
                )));
            }
        }
        if tau.is_literal_zero() && xi.is_literal_zero() && eta.is_literal_zero() {
            return Err(SymmetryError::InvalidOperator("zero vector field".into()));
        }
        Ok(Self { tau, xi, eta })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// The residual normalized to the literal 0.
    Symmetry,
    Probable(ZeroReport),
    NotSymmetry(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::NotSymmetry(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::NotSymmetry(w) => Some(w),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Symmetry => "Symmetry",
            Verdict::Probable(_) => "Probable",
            Verdict::NotSymmetry(_) => "NotSymmetry",
        }
    }
}

impl From<ZeroVerdict> for Verdict {
    fn from(z: ZeroVerdict) -> Self {
        match z {
            ZeroVerdict::ProvenZero => Verdict::Symmetry,
            ZeroVerdict::ProbablyZero(r) => Verdict::Probable(r),
            ZeroVerdict::NonZero(w) => Verdict::NotSymmetry(w),
        }
    }
}

/// A verdict together with the residual it was decided on.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub verdict: Verdict,
    pub residual: Expr,
}

impl Check {
    /// Zero-tests `residual` and records the verdict.
    pub fn decide(residual: Expr, plan: &SamplePlan) -> Result<Self, SymmetryError> {
        let verdict = is_zero(&residual, plan)?.into();
        Ok(Self { verdict, residual })
    }
}

/// `H^` for the canonical operator `op`.
pub fn build_hhat(eq: &EvolutionEquation, op: &CanonicalOperator) -> Result<Expr, SymmetryError> {
    Ok(RestrictedFrame::new(eq, op.rho, &op.eta_check)?
        .hhat()
        .clone())
}

/// Decides `D^_t eta_check = D^_x^rho H^`.
pub fn check_gcs(
    eq: &EvolutionEquation,
    op: &GcsOperator,
    plan: &SamplePlan,
) -> Result<Check, SymmetryError> {
    let c = op.canonical(plan)?;
    let frame = RestrictedFrame::new(eq, c.rho, &c.eta_check)?;
    let residual = &frame.dt(&c.eta_check)? - frame.hhat_dx_rho();
    Check::decide(residual, plan)
}

/// Removes `t`-derivatives from `eta` using the equation.
pub fn to_reduced_form(
    eq: &EvolutionEquation,
    eta: &Expr,
    plan: &SamplePlan,
) -> Result<GcsOperator, SymmetryError> {
    let reduced = eliminate_t_derivatives(eta, eq);
    if is_zero(&reduced, plan)?.is_zero() {
        return Err(SymmetryError::Trivial);
    }
    Ok(GcsOperator::Reduced(reduced))
}

/// Solves `eta = 0` for the highest derivative, which must enter affinely.
pub fn to_canonical(eta: &Expr, plan: &SamplePlan) -> Result<CanonicalOperator, SymmetryError> {
    if let Some(k) = eta.jets().into_iter().find(|k| k.t > 0) {
        return Err(JetError::TDerivative(k).into());
    }
    let Some(rho) = x_order(eta).filter(|&r| r > 0) else {
        return Err(SymmetryError::InvalidOperator(
            "characteristic has no x-derivatives".into(),
        ));
    };
    let top = Symbol::u(rho);
    let a = eta.diff(&top);
    if !is_zero(&a.diff(&top), plan)?.is_zero() {
        return Err(SymmetryError::NonQuasilinear { rho });
    }
    if is_zero(&a, plan)?.is_zero() {
        return Err(SymmetryError::Degenerate { rho });
    }
    let b = eta.subs1(top.clone(), Expr::zero());
    let quotient = b.exact_div(&a).unwrap_or_else(|| &b / &a);
    CanonicalOperator::new(rho, -quotient)
}

/// `eta^ = eta - tau H - xi u_1`, the reduced form of the usual operator.
pub fn usual_to_generalized(
    eq: &EvolutionEquation,
    uop: &UsualOperator,
    plan: &SamplePlan,
) -> Result<GcsOperator, SymmetryError> {
    let eta_hat = Expr::sum([
        uop.eta.clone(),
        -(&uop.tau * eq.rhs()),
        -(&uop.xi * &Expr::u(1)),
    ]);
    if is_zero(&eta_hat, plan)?.is_zero() {
        return Err(SymmetryError::Trivial);
    }
    Ok(GcsOperator::Reduced(eta_hat))
}

/// Equality of operators as vector fields up to a multiplier, decided on canonical forms.
pub fn canonical_equal(
    a: &GcsOperator,
    b: &GcsOperator,
    plan: &SamplePlan,
) -> Result<bool, SymmetryError> {
    let (ca, cb) = (a.canonical(plan)?, b.canonical(plan)?);
    if ca.rho != cb.rho {
        return Ok(false);
    }
    Ok(is_zero(&(&ca.eta_check - &cb.eta_check), plan)?.is_zero())
}

/// Maps `u_{a}` to the generic names used by the involutivity check and back.
pub(crate) fn frame_renaming(rho: u32) -> (BTreeMap<Symbol, Expr>, BTreeMap<Symbol, Expr>) {
    let mut to_v = BTreeMap::new();
    let mut to_u = BTreeMap::new();
    for a in 0..rho {
        let v = Symbol::param(&format!("_v{a}"));
        to_v.insert(Symbol::u(a), Expr::symbol(v.clone()));
        to_u.insert(v, Expr::u(a));
    }
    (to_v, to_u)
}
