use super::*;
use crate::expr::{parse, Parser};
use crate::symmetry::check_gcs;
use crate::symmetry::GcsOperator;

fn plan() -> SamplePlan {
    SamplePlan::default()
}

fn syms(names: &[&str]) -> Vec<Symbol> {
    names.iter().map(|n| Symbol::param(n)).collect()
}

fn ansatz(f: &str, d: &str, names: &[&str]) -> Ansatz {
    let e = Parser::new(d)
        .with_params(names.iter().copied())
        .parse(f)
        .unwrap();
    Ansatz::new(e, syms(names), &plan()).unwrap()
}

fn eq(r: u32, h: &str, d: &str) -> EvolutionEquation {
    EvolutionEquation::parse(r, h, d, &plan()).unwrap()
}

fn sl2() -> (EvolutionEquation, Ansatz) {
    (
        eq(2, "(v*v_2 - (5/6)*v_1^2 + x^2*v_1)/x^2", "v"),
        ansatz(
            "2*x^3 + phi4*x^4 + phi5*x^5 + phi6*x^6",
            "v",
            &["phi4", "phi5", "phi6"],
        ),
    )
}

fn w() -> (EvolutionEquation, Ansatz) {
    (
        eq(2, "3*w_2 + 3*w_1/x - 3*w/x^2", "w"),
        ansatz("psi0*x^3 + psi1*x + psi2/x", "w", &["psi0", "psi1", "psi2"]),
    )
}

fn assert_matches(got: &[Expr], expected: &[&str], d: &str) {
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(expected) {
        let diff = g - &parse(e, d).unwrap();
        assert!(is_zero(&diff, &plan()).unwrap().is_zero(), "{g} vs {e}");
    }
}

#[test]
fn parameter_matrices() {
    let (_, a) = sl2();
    assert_eq!(a.phi_matrix().det(), parse("2*x^12", "v").unwrap());
    let (_, a) = w();
    assert_eq!(a.phi_matrix().det(), Expr::int(-16));
}

#[test]
fn ansatz_validation() {
    let p = syms(&["a", "b"]);
    let e = parse("a*b*x + a", "u").unwrap();
    assert_eq!(
        Ansatz::new(e, p.clone(), &plan()),
        Err(ReductionError::NotAffine)
    );
    let e = parse("(a + b)*x", "u").unwrap();
    assert_eq!(
        Ansatz::new(e, p.clone(), &plan()),
        Err(ReductionError::Singular)
    );
    let e = parse("a + b*u", "u").unwrap();
    assert!(matches!(
        Ansatz::new(e, p, &plan()),
        Err(ReductionError::JetDependence(_))
    ));
}

#[test]
fn operators_from_ansatzes() {
    let a = ansatz("phi1", "u", &["phi1"]);
    let op = ansatz_to_operator(&a).unwrap();
    assert_eq!((op.rho, op.eta_check), (1, Expr::zero()));

    let (_, a) = w();
    let op = ansatz_to_operator(&a).unwrap();
    assert_eq!(op.rho, 3);
    let expected = parse("(3*x*w_1 - 3*w)/x^3", "w").unwrap();
    assert!(is_zero(&(&op.eta_check - &expected), &plan())
        .unwrap()
        .is_zero());

    let (_, a) = sl2();
    let op = ansatz_to_operator(&a).unwrap();
    let expected = parse("(12*x^2*v_2 - 60*x*v_1 + 120*v - 12*x^3)/x^3", "v").unwrap();
    assert!(is_zero(&(&op.eta_check - &expected), &plan())
        .unwrap()
        .is_zero());

    for r in round_trip_residuals(&a, &op) {
        assert!(is_zero(&r, &plan()).unwrap().is_zero(), "{r}");
    }
}

#[test]
fn sl2_reduction() {
    let (e, a) = sl2();
    let sys = reduce(&e, &a, &plan()).unwrap();
    assert_matches(
        &sys.rhs,
        &[
            "7*phi5 - (4/3)*phi4^2",
            "18*phi6 - (4/3)*phi4*phi5",
            "-(5/6)*phi5^2 + 2*phi4*phi6",
        ],
        "v",
    );
}

#[test]
fn w_reduction() {
    let (e, a) = w();
    let sys = reduce(&e, &a, &plan()).unwrap();
    assert_matches(&sys.rhs, &["0", "24*psi0", "0"], "w");
}

#[test]
fn constant_ansatz() {
    let heat = eq(2, "u_2", "u");
    let sys = reduce(&heat, &ansatz("phi1", "u", &["phi1"]), &plan()).unwrap();
    assert_eq!(sys.rhs, vec![Expr::zero()]);
}

#[test]
fn corrupted_ansatz_is_not_reducible() {
    let (e, _) = sl2();
    let bad = ansatz(
        "3*x^3 + phi4*x^4 + phi5*x^5 + phi6*x^6",
        "v",
        &["phi4", "phi5", "phi6"],
    );
    assert!(matches!(
        reduce(&e, &bad, &plan()),
        Err(ReductionError::NotReducible { .. })
    ));
}

#[test]
fn reducibility_matches_symmetry() {
    let cases = [
        (eq(2, "u_2", "u"), ansatz("phi1", "u", &["phi1"]), true),
        (
            eq(2, "u_2", "u"),
            ansatz("phi1 + phi2*x^2", "u", &["phi1", "phi2"]),
            true,
        ),
        (
            eq(2, "u_2 + u*u_1", "u"),
            ansatz("phi1 + phi2*x", "u", &["phi1", "phi2"]),
            true,
        ),
        (sl2().0, sl2().1, true),
        (w().0, w().1, true),
        (eq(2, "u_2 + x", "u"), ansatz("phi1", "u", &["phi1"]), false),
        (eq(2, "u_2", "u"), ansatz("phi1*x^2", "u", &["phi1"]), false),
        (
            eq(2, "u_2 + u*u_1", "u"),
            ansatz("phi1 + phi2*x^2", "u", &["phi1", "phi2"]),
            false,
        ),
        (
            sl2().0,
            ansatz(
                "3*x^3 + phi4*x^4 + phi5*x^5 + phi6*x^6",
                "v",
                &["phi4", "phi5", "phi6"],
            ),
            false,
        ),
    ];
    for (e, a, expected) in cases {
        let reduced = reduce(&e, &a, &plan());
        let op = GcsOperator::Canonical(ansatz_to_operator(&a).unwrap());
        let symmetric = check_gcs(&e, &op, &plan()).unwrap().verdict.holds();
        assert_eq!(reduced.is_ok(), expected, "{}", a.expr());
        assert_eq!(symmetric, expected, "{}", a.expr());
    }
}

#[test]
fn solution_verification() {
    let v = eq(2, "v_2 - v^3/x^3 + (9/4)*v/x^2", "v");
    for s in [
        "(2*x)^(1/2)*(3*x^4 + (24*t + c1)*x^2 - c2)/(x^4 + (24*t + c1)*x^2 + c2)",
        "(2*x)^(1/2)*(c1*x^2 - c2)/(c1*x^2 + c2)",
    ] {
        let u = parse(s, "v").unwrap();
        assert!(
            verify_solution(&v, &u, &plan()).unwrap().verdict.holds(),
            "{s}"
        );
    }
    let heat = eq(2, "u_2", "u");
    let c = verify_solution(&heat, &Expr::t(), &plan()).unwrap();
    assert_eq!(c.residual, Expr::one());
    assert!(!c.verdict.holds());
}

#[test]
fn essentiality() {
    let fam = SolutionFamily::new(
        parse(
            "(2*x)^(1/2)*(3*x^4 + (24*t + c1)*x^2 - c2)/(x^4 + (24*t + c1)*x^2 + c2)",
            "v",
        )
        .unwrap(),
        syms(&["c1", "c2"]),
    );
    assert!(matches!(
        is_zero(&essentiality_det(&fam), &plan()).unwrap(),
        ZeroVerdict::NonZero(_)
    ));

    // composing the ansatz with psi(c) = (c0, 24 c0 t + c1, c2) multiplies det Phi by 1
    let wfam = SolutionFamily::new(
        parse("c0*x^3 + (24*c0*t + c1)*x + c2/x", "w").unwrap(),
        syms(&["c0", "c1", "c2"]),
    );
    assert!(
        is_zero(&(&essentiality_det(&wfam) + &Expr::int(16)), &plan())
            .unwrap()
            .is_zero()
    );

    let bad = SolutionFamily::new(parse("(k1 + k2)*x", "u").unwrap(), syms(&["k1", "k2"]));
    assert!(essentiality_det(&bad).is_literal_zero());
    let heat = eq(2, "u_2", "u");
    assert!(matches!(
        family_to_ansatz(&bad, &heat, &plan()),
        Err(ReductionError::Inessential(_))
    ));
}

#[test]
fn families_reduce_to_constants() {
    let (weq, _) = w();
    let wfam = SolutionFamily::new(
        parse("c0*x^3 + (24*c0*t + c1)*x + c2/x", "w").unwrap(),
        syms(&["c0", "c1", "c2"]),
    );
    let a = family_to_ansatz(&wfam, &weq, &plan()).unwrap();
    let sys = reduce(&weq, &a, &plan()).unwrap();
    assert_matches(&sys.rhs, &["0", "0", "0"], "w");

    let heat = eq(2, "u_2", "u");
    let fam = SolutionFamily::new(parse("k1", "u").unwrap(), syms(&["k1"]));
    let sys = reduce(
        &heat,
        &family_to_ansatz(&fam, &heat, &plan()).unwrap(),
        &plan(),
    )
    .unwrap();
    assert_eq!(sys.rhs, vec![Expr::zero()]);

    let not_solution = SolutionFamily::new(parse("k1*x^2", "u").unwrap(), syms(&["k1"]));
    assert!(matches!(
        family_to_ansatz(&not_solution, &heat, &plan()),
        Err(ReductionError::NotASolution(_))
    ));
}
