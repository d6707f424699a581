use gcs_core::expr::{Expr, Symbol};
use gcs_core::oracle::{
    integrate_reduced, is_zero, pde_residual, IntegrationPlan, OdeError, OracleError,
    ResidualError, SamplePlan, ZeroVerdict,
};
use gcs_core::reduction::{
    ansatz_to_operator, essentiality_det, reduce, round_trip_residuals, verify_solution, Ansatz,
    ReductionError,
};
use gcs_core::symmetry::{
    check_gcs, check_involutivity, integrability_probe, Check, EvolutionEquation, SymmetryError,
};
use thiserror::Error;

use crate::corpus;
use crate::problem::{ProblemError, ProblemFile};
use crate::report::*;

/// Abscissae at which reconstructed solutions are checked against the equation.
pub const PROBE_XS: [f64; 5] = [0.8, 1.0, 1.3, 1.7, 2.1];
/// Number of random initial conditions integrated per reduced system.
pub const TRAJECTORIES: usize = 5;
/// Acceptance bound on the finite-difference residual of reconstructed solutions.
pub const RESIDUAL_BOUND: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error("problem file has no {0} section")]
    Missing(&'static str),
    #[error("unknown demo `{0}`; available: sl2, fast-diffusion-w, heat")]
    UnknownDemo(String),
}

/// Settings given on the command line; sampling overrides take precedence over the file.
#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub threshold: Option<f64>,
    pub step: f64,
    pub t_span: (f64, f64),
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: None,
            points: None,
            threshold: None,
            step: 1e-3,
            t_span: (0.0, 0.05),
        }
    }
}

impl Options {
    pub fn plan(&self, problem: &ProblemFile) -> Result<SamplePlan, ProblemError> {
        let mut plan = problem.sample_plan(&SamplePlan::default())?;
        if let Some(s) = self.seed {
            plan.seed = s;
        }
        if let Some(n) = self.points {
            plan.n_points = n;
        }
        if let Some(t) = self.threshold {
            plan.threshold = t;
        }
        Ok(plan)
    }

    fn base_plan(&self) -> SamplePlan {
        self.plan(&ProblemFile::default())
            .expect("empty problem has no overrides")
    }
}

fn report(plan: &SamplePlan, status: Status, body: ReportBody) -> Report {
    Report {
        seed: plan.seed,
        points: plan.n_points,
        threshold: plan.threshold,
        status,
        body,
    }
}

fn equation_string(eq: &EvolutionEquation) -> String {
    let d = eq.depvar();
    format!("{d}_t = {}", eq.rhs().printed(d))
}

fn require_equation(p: &ProblemFile, plan: &SamplePlan) -> Result<EvolutionEquation, CliError> {
    if p.get("equation.H").is_none() {
        return Err(CliError::Missing("equation"));
    }
    Ok(p.equation(plan)?)
}

fn labels(params: &[Symbol], depvar: &str) -> Vec<String> {
    params.iter().map(|s| s.label(depvar)).collect()
}

pub fn cmd_check(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let plan = opts.plan(p)?;
    let eq = require_equation(p, &plan)?;
    if !p.has_operator() {
        return Err(CliError::Missing("operator"));
    }
    let op = p.operator()?.resolve(&eq, &plan)?;
    let canonical = op.canonical(&plan)?;
    let d = eq.depvar();
    let checks = [
        ("criterion", check_gcs(&eq, &op, &plan)?),
        ("involutivity", check_involutivity(&eq, &canonical, &plan)?),
        ("integrability", integrability_probe(&eq, &op, &plan)?),
    ];
    let verdicts: Vec<VerdictReport> = checks
        .iter()
        .map(|(name, c)| VerdictReport::new(name, c, d))
        .collect();
    let holds = verdicts[0].holds();
    let agreement = verdicts.iter().all(|v| v.holds() == holds);
    let status = match (agreement, holds) {
        (true, true) => Status::Success,
        (true, false) => Status::Negative,
        _ => Status::Failure,
    };
    Ok(report(
        &plan,
        status,
        ReportBody::Check(CheckReport {
            equation: equation_string(&eq),
            operator: CanonicalReport::new(canonical.rho, &canonical.eta_check, d),
            verdicts,
            agreement,
        }),
    ))
}

fn require_ansatz(p: &ProblemFile, plan: &SamplePlan) -> Result<Ansatz, CliError> {
    if !p.has_ansatz() {
        return Err(CliError::Missing("ansatz"));
    }
    Ok(p.ansatz(plan)?)
}

pub fn cmd_reduce(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let plan = opts.plan(p)?;
    let eq = require_equation(p, &plan)?;
    let a = require_ansatz(p, &plan)?;
    let d = eq.depvar();
    let (g, not_reducible, status) = match reduce(&eq, &a, &plan) {
        Ok(sys) => (
            sys.rhs.iter().map(|g| g.printed(d).to_string()).collect(),
            None,
            Status::Success,
        ),
        Err(ReductionError::NotReducible {
            index,
            residual,
            witness,
        }) => (
            Vec::new(),
            Some(NotReducibleReport {
                index,
                residual: residual.printed(d).to_string(),
                witness: WitnessReport::new(&witness, d),
            }),
            Status::Negative,
        ),
        Err(e) => return Err(e.into()),
    };
    Ok(report(
        &plan,
        status,
        ReportBody::Reduce(ReduceReport {
            equation: equation_string(&eq),
            ansatz: a.expr().printed(d).to_string(),
            params: labels(a.params(), d),
            g,
            not_reducible,
        }),
    ))
}

pub fn cmd_convert(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let plan = opts.plan(p)?;
    let eq = require_equation(p, &plan)?;
    if !p.has_operator() {
        return Err(CliError::Missing("operator"));
    }
    let input = p.operator()?;
    let op = input.resolve(&eq, &plan)?;
    let canonical = op.canonical(&plan)?;
    let check = check_gcs(&eq, &op, &plan)?;
    let d = eq.depvar();
    let status = if check.verdict.holds() {
        Status::Success
    } else {
        Status::Negative
    };
    Ok(report(
        &plan,
        status,
        ReportBody::Convert(ConvertReport {
            equation: equation_string(&eq),
            input_form: input.form().to_string(),
            reduced: op.reduced_characteristic().printed(d).to_string(),
            canonical: CanonicalReport::new(canonical.rho, &canonical.eta_check, d),
            gcs: VerdictReport::new("criterion", &check, d),
        }),
    ))
}

pub fn cmd_derive_operator(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let plan = opts.plan(p)?;
    let a = require_ansatz(p, &plan)?;
    let d = p.depvar();
    let op = ansatz_to_operator(&a)?;
    let n = a.rho() as usize;
    let round_trip: Vec<VerdictReport> = round_trip_residuals(&a, &op)
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let name = if k < n {
                format!("round trip {}", Expr::u(k as u32).printed(d))
            } else {
                "invariance".to_string()
            };
            Check::decide(r, &plan).map(|c| VerdictReport::new(&name, &c, d))
        })
        .collect::<Result<_, _>>()?;
    let gcs = if p.get("equation.H").is_some() {
        let eq = p.equation(&plan)?;
        let c = check_gcs(
            &eq,
            &gcs_core::symmetry::GcsOperator::Canonical(op.clone()),
            &plan,
        )?;
        Some(VerdictReport::new("criterion", &c, d))
    } else {
        None
    };
    let ok = round_trip.iter().all(VerdictReport::holds) && gcs.as_ref().is_none_or(|g| g.holds());
    Ok(report(
        &plan,
        if ok {
            Status::Success
        } else {
            Status::Negative
        },
        ReportBody::DeriveOperator(DeriveReport {
            ansatz: a.expr().printed(d).to_string(),
            params: labels(a.params(), d),
            operator: CanonicalReport::new(op.rho, &op.eta_check, d),
            characteristic: op.characteristic().printed(d).to_string(),
            round_trip,
            gcs,
        }),
    ))
}

pub fn cmd_verify_solution(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let plan = opts.plan(p)?;
    let eq = require_equation(p, &plan)?;
    let d = eq.depvar();
    let mut candidates: Vec<(String, Expr)> = Vec::new();
    let family = if p.has_family() {
        let fam = p.family()?;
        candidates.push(("family".into(), fam.f.clone()));
        Some(fam)
    } else {
        None
    };
    candidates.extend(p.solutions()?);
    if candidates.is_empty() {
        return Err(CliError::Missing("family or solution"));
    }
    let solutions: Vec<SolutionReport> = candidates
        .iter()
        .map(|(name, u)| {
            verify_solution(&eq, u, &plan).map(|c| SolutionReport {
                name: name.clone(),
                solution: u.printed(d).to_string(),
                verdict: VerdictReport::new("solution", &c, d),
            })
        })
        .collect::<Result<_, _>>()?;
    let essentiality = match &family {
        Some(fam) => {
            let det = essentiality_det(fam);
            let essential = matches!(is_zero(&det, &plan)?, ZeroVerdict::NonZero(_));
            Some(EssentialityReport {
                params: labels(&fam.params, d),
                determinant: det.printed(d).to_string(),
                essential,
            })
        }
        None => None,
    };
    let ok = solutions.iter().all(|s| s.verdict.holds())
        && essentiality.as_ref().is_none_or(|e| e.essential);
    Ok(report(
        &plan,
        if ok {
            Status::Success
        } else {
            Status::Negative
        },
        ReportBody::VerifySolution(VerifyReport {
            equation: equation_string(&eq),
            solutions,
            essentiality,
        }),
    ))
}

/// Integrates the reduced system from seeded random initial conditions and returns the
/// largest finite-difference residual of the reconstructed solutions.
pub fn reconstruction_residual(
    eq: &EvolutionEquation,
    a: &Ansatz,
    plan: &SamplePlan,
    step: f64,
    t_span: (f64, f64),
) -> Result<f64, CliError> {
    let sys = reduce(eq, a, plan)?;
    let mut worst = 0.0f64;
    for k in 0..TRAJECTORIES {
        let point = plan.sample(a.params(), &mut plan.rng_for(k));
        let initial = a.params().iter().map(|s| point[s]).collect();
        let traj = integrate_reduced(&sys, &IntegrationPlan::new(initial, t_span).with_step(step))?;
        worst = worst.max(pde_residual(eq, a, &traj, &PROBE_XS)?);
    }
    Ok(worst)
}

fn step(problem: &str, name: &str, passed: bool, detail: String) -> DemoStep {
    DemoStep {
        problem: problem.to_string(),
        step: name.to_string(),
        passed,
        detail,
    }
}

fn demo_problem(name: &str, p: &ProblemFile, opts: &Options, steps: &mut Vec<DemoStep>) {
    let mut record = |label: &str, outcome: Result<(bool, String), CliError>| {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        steps.push(step(name, label, passed, detail));
    };
    if p.has_operator() {
        record(
            "convert",
            cmd_convert(p, opts).map(|r| match r.body {
                ReportBody::Convert(c) => (
                    r.status == Status::Success,
                    format!("{} = {}", c.canonical.lhs, c.canonical.eta_check),
                ),
                _ => unreachable!(),
            }),
        );
        record(
            "check",
            cmd_check(p, opts).map(|r| match r.body {
                ReportBody::Check(c) => {
                    let names: Vec<&str> = c.verdicts.iter().map(|v| v.verdict.as_str()).collect();
                    (r.status == Status::Success, names.join(" / "))
                }
                _ => unreachable!(),
            }),
        );
    }
    if p.has_ansatz() {
        record(
            "derive-operator",
            cmd_derive_operator(p, opts).map(|r| match r.body {
                ReportBody::DeriveOperator(c) => (
                    r.status == Status::Success,
                    format!("{} = {}", c.operator.lhs, c.operator.eta_check),
                ),
                _ => unreachable!(),
            }),
        );
        record(
            "reduce",
            cmd_reduce(p, opts).map(|r| match r.body {
                ReportBody::Reduce(c) => {
                    let eqs: Vec<String> = c
                        .params
                        .iter()
                        .zip(&c.g)
                        .map(|(p, g)| format!("{p}_t = {g}"))
                        .collect();
                    (r.status == Status::Success, eqs.join("; "))
                }
                _ => unreachable!(),
            }),
        );
        let numeric = (|| -> Result<(bool, String), CliError> {
            let plan = opts.plan(p)?;
            let eq = require_equation(p, &plan)?;
            let a = p.ansatz(&plan)?;
            let worst = reconstruction_residual(&eq, &a, &plan, opts.step, opts.t_span)?;
            Ok((
                worst < RESIDUAL_BOUND,
                format!("max |u_t - H| = {worst:.2e} over {TRAJECTORIES} trajectories"),
            ))
        })();
        record("integrate+residual", numeric);
    }
    if p.has_family()
        || (p.get("equation.H").is_some() && p.solutions().is_ok_and(|s| !s.is_empty()))
    {
        record(
            "verify-solution",
            cmd_verify_solution(p, opts).map(|r| match r.body {
                ReportBody::VerifySolution(c) => {
                    let mut detail: Vec<String> = c
                        .solutions
                        .iter()
                        .map(|s| format!("{}: {}", s.name, s.verdict.verdict))
                        .collect();
                    if let Some(e) = &c.essentiality {
                        detail.push(format!(
                            "essential in ({}): {}",
                            e.params.join(", "),
                            e.essential
                        ));
                    }
                    (r.status == Status::Success, detail.join(", "))
                }
                _ => unreachable!(),
            }),
        );
    }
}

pub fn cmd_demo(name: &str, opts: &Options) -> Result<Report, CliError> {
    let files = corpus::demo(name).ok_or_else(|| CliError::UnknownDemo(name.to_string()))?;
    let mut steps = Vec::new();
    for (file, text) in files {
        let p = ProblemFile::parse(text)?;
        demo_problem(file, &p, opts, &mut steps);
    }
    let passed = steps.iter().all(|s| s.passed);
    Ok(report(
        &opts.base_plan(),
        if passed {
            Status::Success
        } else {
            Status::Failure
        },
        ReportBody::Demo(DemoReport {
            demo: name.to_string(),
            steps,
            passed,
        }),
    ))
}
