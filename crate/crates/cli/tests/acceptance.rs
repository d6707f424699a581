//! Acceptance suite: one line per criterion, nonzero exit status on any failure.

use std::cmp::Ordering;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gcs_cli::commands::reconstruction_residual;
use gcs_cli::report::{ReportBody, Status};
use gcs_cli::{cmd_check, cmd_reduce, cmd_verify_solution, corpus, Options, ProblemFile};
use gcs_core::expr::{parse, DerivKey, Expr, Parser, Symbol};
use gcs_core::jet::{rank_compare, total_derivative_t, total_derivative_x};
use gcs_core::oracle::{
    eval, integrate_reduced, is_zero, IntegrationPlan, SamplePlan, ZeroVerdict,
};
use gcs_core::reduction::{reduce, ReducedSystem, ReductionError};
use gcs_core::symmetry::{
    check_gcs, check_involutivity, integrability_probe, to_reduced_form, Check, EvolutionEquation,
    GcsOperator,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Suite = (&'static str, fn() -> Outcome);

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "sl2 reduction reproduces the printed system",
            limit: secs(10),
            run: reduction_sl2,
        },
        Criterion {
            id: 2,
            name: "sl2 third-order operator is a symmetry",
            limit: secs(10),
            run: symmetry_sl2,
        },
        Criterion {
            id: 3,
            name: "fast-diffusion chain v -> w",
            limit: secs(15),
            run: fast_diffusion_chain,
        },
        Criterion {
            id: 4,
            name: "exact solution families and essentiality",
            limit: secs(10),
            run: exact_solutions,
        },
        Criterion {
            id: 5,
            name: "reduced systems integrate to PDE solutions",
            limit: secs(30),
            run: numeric_witness,
        },
        Criterion {
            id: 6,
            name: "negative controls",
            limit: secs(10),
            run: negative_controls,
        },
        Criterion {
            id: 7,
            name: "property suites",
            limit: secs(120),
            run: property_suites,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.limit => Err(format!(
                "exceeded time limit of {:.0} s",
                c.limit.as_secs_f64()
            )),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} [{}] {} ({:.2} s): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        println!("all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("{failures} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn problem(name: &str) -> Result<ProblemFile, String> {
    let text = corpus::get(name).ok_or_else(|| format!("missing corpus file {name}"))?;
    ProblemFile::parse(text).map_err(|e| e.to_string())
}

fn plan() -> SamplePlan {
    SamplePlan::default()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Compares a reduced system, read back from its printed report, with expected right-hand sides.
fn compare_reduction(name: &str, expected: &[&str]) -> Result<String, String> {
    let p = problem(name)?;
    let r = cmd_reduce(&p, &Options::default()).map_err(err)?;
    ensure(r.status == Status::Success, || {
        format!("status {:?}", r.status)
    })?;
    let ReportBody::Reduce(body) = r.body else {
        return Err("unexpected report".into());
    };
    ensure(body.g.len() == expected.len(), || {
        format!("{} components", body.g.len())
    })?;
    let parser = Parser::new(p.depvar()).with_params(body.params.iter().cloned());
    let mut verdicts = Vec::new();
    for (got, want) in body.g.iter().zip(expected) {
        let diff = &parser.parse(got).map_err(err)? - &parser.parse(want).map_err(err)?;
        match is_zero(&diff, &plan()).map_err(err)? {
            ZeroVerdict::ProvenZero => verdicts.push("ProvenZero"),
            ZeroVerdict::ProbablyZero(_) => verdicts.push("ProbablyZero"),
            ZeroVerdict::NonZero(w) => {
                return Err(format!("{got} differs from {want} (value {:e})", w.value))
            }
        }
    }
    Ok(format!("{} [{}]", body.g.join("; "), verdicts.join(", ")))
}

fn reduction_sl2() -> Outcome {
    compare_reduction(
        "sl2",
        &[
            "7*phi5 - (4/3)*phi4^2",
            "18*phi6 - (4/3)*phi4*phi5",
            "-(5/6)*phi5^2 + 2*phi4*phi6",
        ],
    )
}

fn check_agreeing(name: &str) -> Result<Vec<String>, String> {
    let r = cmd_check(&problem(name)?, &Options::default()).map_err(err)?;
    let ReportBody::Check(body) = r.body else {
        return Err("unexpected report".into());
    };
    let names: Vec<String> = body.verdicts.iter().map(|v| v.verdict.clone()).collect();
    ensure(body.agreement, || {
        format!("{name}: oracles disagree: {names:?}")
    })?;
    ensure(r.status == Status::Success, || {
        format!("{name}: status {:?}, {names:?}", r.status)
    })?;
    Ok(names)
}

fn symmetry_sl2() -> Outcome {
    Ok(format!("verdicts {}", check_agreeing("sl2")?.join(" / ")))
}

fn fast_diffusion_chain() -> Outcome {
    let v = problem("fast-diffusion-v")?;
    let eq = v.equation(&plan()).map_err(err)?;
    let op = v
        .operator()
        .map_err(err)?
        .resolve(&eq, &plan())
        .map_err(err)?;
    let c = check_gcs(&eq, &op, &plan()).map_err(err)?;
    ensure(c.verdict.holds(), || {
        format!("v operator: {}", c.verdict.name())
    })?;
    let w = check_agreeing("fast-diffusion-w")?;
    let reduced = compare_reduction("fast-diffusion-w", &["0", "24*psi0", "0"])?;
    Ok(format!(
        "v: {}; w: {}; {reduced}",
        c.verdict.name(),
        w.join(" / ")
    ))
}

fn exact_solutions() -> Outcome {
    let r = cmd_verify_solution(&problem("fast-diffusion-v")?, &Options::default()).map_err(err)?;
    let ReportBody::VerifySolution(body) = r.body else {
        return Err("unexpected report".into());
    };
    let mut seen = Vec::new();
    for want in ["family", "stationary"] {
        let s = body
            .solutions
            .iter()
            .find(|s| s.name == want)
            .ok_or_else(|| format!("no solution named {want}"))?;
        ensure(s.verdict.holds(), || {
            format!("{want}: {}", s.verdict.verdict)
        })?;
        seen.push(format!("{want} {}", s.verdict.verdict));
    }
    let e = body.essentiality.ok_or("no essentiality report")?;
    ensure(e.essential && e.params.len() == 2, || {
        format!("essential {} over {:?}", e.essential, e.params)
    })?;
    Ok(format!(
        "{}; essential in ({})",
        seen.join(", "),
        e.params.join(", ")
    ))
}

fn numeric_witness() -> Outcome {
    let opts = Options::default();
    let mut out = Vec::new();
    for name in ["sl2", "fast-diffusion-w"] {
        let p = problem(name)?;
        let eq = p.equation(&plan()).map_err(err)?;
        let a = p.ansatz(&plan()).map_err(err)?;
        let worst =
            reconstruction_residual(&eq, &a, &plan(), opts.step, opts.t_span).map_err(err)?;
        ensure(worst < 1e-5, || format!("{name}: residual {worst:e}"))?;
        out.push(format!("{name} {worst:.2e}"));
    }
    Ok(format!("max |u_t - H|: {}", out.join(", ")))
}

fn all_three(eq: &EvolutionEquation, op: &GcsOperator) -> Result<[Check; 3], String> {
    let c = op.canonical(&plan()).map_err(err)?;
    Ok([
        check_gcs(eq, op, &plan()).map_err(err)?,
        check_involutivity(eq, &c, &plan()).map_err(err)?,
        integrability_probe(eq, op, &plan()).map_err(err)?,
    ])
}

fn negative_controls() -> Outcome {
    let p = problem("drift")?;
    let eq = p.equation(&plan()).map_err(err)?;
    let op = p
        .operator()
        .map_err(err)?
        .resolve(&eq, &plan())
        .map_err(err)?;
    let checks = all_three(&eq, &op)?;
    ensure(checks.iter().all(|c| !c.verdict.holds()), || {
        let v: Vec<&str> = checks.iter().map(|c| c.verdict.name()).collect();
        format!("drift verdicts {v:?}")
    })?;
    // A common witness: one point at which every residual is nonzero.
    let witness = checks[0].verdict.witness().ok_or("no witness")?;
    let mut point = witness.point.clone();
    let mut rng = plan().rng_for(0);
    for c in &checks {
        for s in c.residual.free_symbols() {
            point.entry(s).or_insert_with(|| rng.gen_range(0.5..2.5));
        }
    }
    let mut values = Vec::new();
    for c in &checks {
        let v = eval(&c.residual, &point).map_err(err)?;
        ensure(v.abs() > plan().threshold, || {
            format!("residual vanishes at witness: {v}")
        })?;
        values.push(format!("{v}"));
    }

    let corrupted = problem("sl2-corrupted")?;
    let eq = corrupted.equation(&plan()).map_err(err)?;
    let a = corrupted.ansatz(&plan()).map_err(err)?;
    match reduce(&eq, &a, &plan()) {
        Err(ReductionError::NotReducible { index, .. }) => Ok(format!(
            "drift rejected thrice, residuals {} at a common point; corrupted ansatz not reducible (component {})",
            values.join(", "),
            index + 1
        )),
        other => Err(format!("corrupted ansatz: {:?}", other.map(|s| s.rhs))),
    }
}

// ---------------------------------------------------------------- property suites

fn property_suites() -> Outcome {
    let suites: [Suite; 8] = [
        ("agreement", corpus_agreement),
        ("multiplier", multiplier_invariance),
        ("on-solutions", on_solutions_stability),
        ("commutator", commutator_vanishes),
        ("ranking", ranking_axioms),
        ("rk4", rk4_order),
        ("idempotence", normalization_idempotent),
        ("round-trip", parse_print_round_trip),
    ];
    let mut done = Vec::new();
    for (name, f) in suites {
        let d = f().map_err(|e| format!("{name}: {e}"))?;
        done.push(format!("{name} {d}"));
    }
    Ok(done.join("; "))
}

/// Corpus problems that define both an equation and an operator.
fn corpus_operators() -> Result<Vec<(String, EvolutionEquation, GcsOperator)>, String> {
    let mut out = Vec::new();
    for (name, text) in corpus::FILES {
        let p = ProblemFile::parse(text).map_err(err)?;
        if p.get("equation.H").is_none() || !p.has_operator() {
            continue;
        }
        let eq = p.equation(&plan()).map_err(err)?;
        let op = p
            .operator()
            .map_err(err)?
            .resolve(&eq, &plan())
            .map_err(err)?;
        out.push((name.to_string(), eq, op));
    }
    Ok(out)
}

fn corpus_agreement() -> Outcome {
    let mut n = 0;
    for (name, text) in corpus::FILES {
        let p = ProblemFile::parse(text).map_err(err)?;
        if p.get("equation.H").is_none() || !p.has_operator() {
            continue;
        }
        let r = cmd_check(&p, &Options::default()).map_err(err)?;
        let ReportBody::Check(body) = r.body else {
            return Err("unexpected report".into());
        };
        ensure(body.agreement, || format!("{name}: oracles disagree"))?;
        n += 1;
    }
    Ok(format!("({n} problems)"))
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(plan().seed)
}

fn small_rational(rng: &mut ChaCha8Rng) -> Expr {
    let n = rng.gen_range(1..=5);
    let d = rng.gen_range(1..=3);
    Expr::rational(n, d)
}

/// A random expression in `t`, `x`, `u_0..u_{k-1}` that stays positive on the sampling box.
fn positive_factor(rng: &mut ChaCha8Rng, k: u32) -> Expr {
    let mut vars = vec![Expr::t(), Expr::x()];
    vars.extend((0..k).map(Expr::u));
    let mut terms: Vec<Expr> = vars.iter().map(|v| &small_rational(rng) * v).collect();
    terms.push(small_rational(rng));
    let linear = Expr::sum(terms);
    match rng.gen_range(0..3) {
        0 => linear,
        1 => linear.exp(),
        _ => &(&linear * &linear) + &small_rational(rng),
    }
}

fn verdict_of(eq: &EvolutionEquation, op: &GcsOperator) -> Result<bool, String> {
    Ok(check_gcs(eq, op, &plan()).map_err(err)?.verdict.holds())
}

fn multiplier_invariance() -> Outcome {
    let mut rng = rng();
    let mut n = 0;
    for (name, eq, op) in corpus_operators()? {
        let base = verdict_of(&eq, &op)?;
        let rho = op.canonical(&plan()).map_err(err)?.rho;
        let eta = op.reduced_characteristic();
        for _ in 0..10 {
            let lambda = positive_factor(&mut rng, rho);
            let scaled = GcsOperator::Reduced(&lambda * &eta);
            ensure(verdict_of(&eq, &scaled)? == base, || {
                format!(
                    "{name}: verdict changes under multiplier {}",
                    lambda.printed(eq.depvar())
                )
            })?;
            n += 1;
        }
    }
    Ok(format!("({n} cases)"))
}

fn on_solutions_stability() -> Outcome {
    let mut rng = rng();
    let mut n = 0;
    for (name, eq, op) in corpus_operators()? {
        let base = verdict_of(&eq, &op)?;
        let eta = op.reduced_characteristic();
        for _ in 0..10 {
            let chi = positive_factor(&mut rng, 2);
            let shifted = &eta + &(&chi * &eq.residual_expr());
            let reduced = to_reduced_form(&eq, &shifted, &plan()).map_err(err)?;
            ensure(verdict_of(&eq, &reduced)? == base, || {
                format!(
                    "{name}: verdict changes for chi = {}",
                    chi.printed(eq.depvar())
                )
            })?;
            n += 1;
        }
    }
    Ok(format!("({n} cases)"))
}

/// A random expression tree over `t`, `x` and jet variables of order at most 3.
fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Expr::t(),
            1 => Expr::x(),
            2 => small_rational(rng),
            3 => Expr::jet(DerivKey::new(rng.gen_range(0..=1), rng.gen_range(0..=2))),
            _ => Expr::u(rng.gen_range(0..=3)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..7) {
        0 | 1 => &a + &random_expr(rng, depth - 1),
        2 | 3 => &a * &random_expr(rng, depth - 1),
        4 => a.powi(rng.gen_range(-2..=3)),
        5 => a.exp(),
        _ => (&(&a * &a) + &Expr::one()).ln(),
    }
}

fn commutator_vanishes() -> Outcome {
    let mut rng = rng();
    for i in 0..200 {
        let e = random_expr(&mut rng, 4);
        let c = &total_derivative_t(&total_derivative_x(&e))
            - &total_derivative_x(&total_derivative_t(&e));
        ensure(c.is_literal_zero(), || {
            format!(
                "expression {i} ({}) leaves {}",
                e.printed("u"),
                c.printed("u")
            )
        })?;
    }
    Ok("(200 expressions, all ProvenZero)".into())
}

fn ranking_axioms() -> Outcome {
    let keys: Vec<DerivKey> = (0..=6u32)
        .flat_map(|n| (0..=n).map(move |t| DerivKey::new(t, n - t)))
        .collect();
    for r in 1..=4 {
        for &a in &keys {
            ensure(rank_compare(a, a, r) == Ordering::Equal, || {
                format!("{a:?} not reflexive")
            })?;
            for &b in &keys {
                let ab = rank_compare(a, b, r);
                ensure(ab == rank_compare(b, a, r).reverse(), || {
                    format!("{a:?}, {b:?} not antisymmetric")
                })?;
                ensure((ab == Ordering::Equal) == (a == b), || {
                    format!("{a:?}, {b:?} tie")
                })?;
                let dx = rank_compare(DerivKey::new(a.t, a.x + 1), DerivKey::new(b.t, b.x + 1), r);
                let dt = rank_compare(DerivKey::new(a.t + 1, a.x), DerivKey::new(b.t + 1, b.x), r);
                ensure(dx == ab && dt == ab, || {
                    format!("{a:?}, {b:?} not compatible with D")
                })?;
                if ab == Ordering::Less {
                    for &c in &keys {
                        if rank_compare(b, c, r) == Ordering::Less {
                            ensure(rank_compare(a, c, r) == Ordering::Less, || {
                                format!("{a:?} < {b:?} < {c:?} not transitive")
                            })?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("({} keys, r = 1..4)", keys.len()))
}

fn rk4_order() -> Outcome {
    let sys = ReducedSystem {
        params: vec![Symbol::param("phi")],
        rhs: vec![Expr::param("phi")],
    };
    let error = |h: f64| -> Result<f64, String> {
        let plan = IntegrationPlan::new(vec![1.0], (0.0, 1.0)).with_step(h);
        let traj = integrate_reduced(&sys, &plan).map_err(err)?;
        Ok((traj.last().1[0] - std::f64::consts::E).abs())
    };
    let factor = error(0.1)? / error(0.05)?;
    ensure((12.0..=20.0).contains(&factor), || {
        format!("factor {factor}")
    })?;
    Ok(format!("(factor {factor:.2})"))
}

/// Every expression-valued entry of every corpus file.
fn corpus_expressions() -> Result<Vec<(String, Expr)>, String> {
    const NON_EXPR: [&str; 4] = [".r", ".rho", ".params", ".form"];
    let mut out = Vec::new();
    for (name, text) in corpus::FILES {
        let p = ProblemFile::parse(text).map_err(err)?;
        for line in text.lines() {
            let Some((key, value)) = line.split_once(':') else {
                continue;
            };
            let key = key.trim();
            if line.trim_start().starts_with('#')
                || matches!(key, "name" | "depvar")
                || key.starts_with("oracle.")
                || NON_EXPR.iter().any(|s| key.ends_with(s))
            {
                continue;
            }
            let e = parse(value.trim(), p.depvar()).map_err(|e| format!("{name} {key}: {e}"))?;
            out.push((format!("{name} {key}"), e));
        }
    }
    Ok(out)
}

fn normalization_idempotent() -> Outcome {
    let mut rng = rng();
    let mut exprs: Vec<(String, Expr)> = corpus_expressions()?;
    exprs.extend((0..200).map(|i| (format!("random {i}"), random_expr(&mut rng, 4))));
    for (label, e) in &exprs {
        let once = e.normalize();
        ensure(once.normalize() == once, || {
            format!("{label} not idempotent")
        })?;
    }
    Ok(format!("({} expressions)", exprs.len()))
}

fn parse_print_round_trip() -> Outcome {
    let exprs = corpus_expressions()?;
    let mut rng = rng();
    let mut random = Vec::new();
    while random.len() < 200 {
        let e = random_expr(&mut rng, 4);
        // t-derivatives are not writable in input
        if e.jets().iter().all(|k| k.t == 0) {
            random.push((format!("random {}", random.len()), e));
        }
    }
    for (label, e) in exprs.iter().chain(&random) {
        let text = e.printed("u").to_string();
        let back = parse(&text, "u").map_err(|err| format!("{label}: {text}: {err}"))?;
        ensure(&back == e, || {
            format!("{label}: {text} reparses differently")
        })?;
    }
    Ok(format!("({} corpus, {} random)", exprs.len(), random.len()))
}
