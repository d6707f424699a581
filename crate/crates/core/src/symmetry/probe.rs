use std::collections::BTreeMap;

use super::{Check, EvolutionEquation, GcsOperator, SymmetryError};
use crate::expr::{Expr, Symbol};
use crate::jet::{
    eliminate_t_derivatives, total_derivative_t, total_derivative_x_n, RestrictedFrame,
};
use crate::oracle::SamplePlan;

/// Builds the compatibility condition
/// `F = D_t eta - H_{u_r} D_x^r eta - eta_{u_rho} D_x^rho (u_t - H)`
/// of `u_t = H` and `eta = 0`, restricts it to their joint manifold and zero-tests it.
pub fn integrability_probe(
    eq: &EvolutionEquation,
    op: &GcsOperator,
    plan: &SamplePlan,
) -> Result<Check, SymmetryError> {
    let eta = op.reduced_characteristic();
    let canonical = op.canonical(plan)?;
    let rho = canonical.rho;
    let r = eq.order();

    let h_ur = eq.rhs().diff(&Symbol::u(r));
    let eta_urho = eta.diff(&Symbol::u(rho));
    let f = Expr::sum([
        total_derivative_t(&eta),
        -(&h_ur * &total_derivative_x_n(&eta, r)),
        -(&eta_urho * &total_derivative_x_n(&eq.residual_expr(), rho)),
    ]);
    let f = eliminate_t_derivatives(&f, eq);

    let frame = RestrictedFrame::new(eq, rho, &canonical.eta_check)?;
    let top = f.jets().into_iter().map(|k| k.x).max().unwrap_or(0);
    let mut bindings = BTreeMap::new();
    let mut d = canonical.eta_check.clone();
    for k in rho..=top.max(rho) {
        if k > rho {
            d = frame.dx(&d)?;
        }
        bindings.insert(Symbol::u(k), d.clone());
    }
    Check::decide(f.subs(&bindings), plan)
}
