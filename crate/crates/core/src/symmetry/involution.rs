use std::collections::{BTreeMap, BTreeSet};

use super::{frame_renaming, CanonicalOperator, Check, EvolutionEquation, SymmetryError};
use crate::expr::{Expr, Symbol};
use crate::oracle::SamplePlan;

/// A first-order differential operator `sum c_s d_s`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorField {
    pub coeffs: BTreeMap<Symbol, Expr>,
}

impl VectorField {
    pub fn new<I: IntoIterator<Item = (Symbol, Expr)>>(coeffs: I) -> Self {
        Self {
            coeffs: coeffs.into_iter().collect(),
        }
    }

    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(
            self.coeffs
                .iter()
                .map(|(s, c)| (c, f.diff(s)))
                .filter(|(_, d)| !d.is_literal_zero())
                .map(|(c, d)| c * &d)
                .collect::<Vec<_>>(),
        )
    }

    /// `[A, B]^s = A(B^s) - B(A^s)`.
    pub fn commutator(a: &VectorField, b: &VectorField) -> VectorField {
        let coords: BTreeSet<&Symbol> = a.coeffs.keys().chain(b.coeffs.keys()).collect();
        let zero = Expr::zero();
        VectorField::new(coords.into_iter().map(|s| {
            let bs = b.coeffs.get(s).unwrap_or(&zero);
            let as_ = a.coeffs.get(s).unwrap_or(&zero);
            (s.clone(), &a.apply(bs) - &b.apply(as_))
        }))
    }
}

/// Checks that `D_t` and `D_x`, restricted to the manifold of the equation and the operator
/// and written as vector fields on `(t, x, v^0, ..., v^{rho-1})`, commute.
///
/// The returned residual is the coefficient of `d_{v^{rho-1}}` expressed in `u_0..u_{rho-1}`.
pub fn check_involutivity(
    eq: &EvolutionEquation,
    op: &CanonicalOperator,
    plan: &SamplePlan,
) -> Result<Check, SymmetryError> {
    let rho = op.rho;
    let (to_v, to_u) = frame_renaming(rho);
    let v = |a: u32| Symbol::param(&format!("_v{a}"));
    let eta = op.eta_check.subs(&to_v);

    let mut dx = VectorField::new([(Symbol::X, Expr::one())]);
    for b in 1..rho {
        dx.coeffs.insert(v(b - 1), Expr::symbol(v(b)));
    }
    dx.coeffs.insert(v(rho - 1), eta.clone());

    let r = eq.order();
    let h = if rho > r {
        eq.rhs().subs(&to_v)
    } else {
        let mut bindings = to_v.clone();
        let mut d = eta.clone();
        for j in 0..=(r - rho) {
            if j > 0 {
                d = dx.apply(&d);
            }
            bindings.insert(Symbol::u(rho + j), d.clone());
        }
        eq.rhs().subs(&bindings)
    };

    let mut dt = VectorField::new([(Symbol::T, Expr::one())]);
    let mut hb = h;
    for b in 0..rho {
        if b > 0 {
            hb = dx.apply(&hb);
        }
        dt.coeffs.insert(v(b), hb.clone());
    }

    let bracket = VectorField::commutator(&dt, &dx);
    let top = v(rho - 1);
    for (s, c) in &bracket.coeffs {
        if *s != top && !c.is_literal_zero() {
            return Err(SymmetryError::NonStructuralCommutator(s.label(eq.depvar())));
        }
    }
    let coeff = bracket.coeffs.get(&top).cloned().unwrap_or_else(Expr::zero);
    Check::decide(coeff.subs(&to_u), plan)
}
