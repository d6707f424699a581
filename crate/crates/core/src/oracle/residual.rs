use thiserror::Error;

use super::eval::{eval, EvalError, Point};
use super::ode::Trajectory;
use crate::expr::{Expr, Symbol};
use crate::reduction::Ansatz;
use crate::symmetry::EvolutionEquation;

/// Minimum number of probe abscissae that must evaluate without domain errors.
pub const MIN_VALID_PROBES: usize = 5;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ResidualError {
    #[error("trajectory has {0} points; at least 5 are needed for the time differences")]
    ShortTrajectory(usize),
    #[error("trajectory is not uniformly spaced")]
    NonUniform,
    #[error("only {valid} probe points were evaluable, {required} required")]
    TooFewProbes { valid: usize, required: usize },
    #[error("state dimension {got} does not match the ansatz ({expected})")]
    Dimension { expected: usize, got: usize },
}

/// Maximal `|u_t - H|` for `u = F(t, x, phi(t))` along a trajectory, with `u_t` from fourth
/// order central differences and the `x`-derivatives of `F` taken exactly.
pub fn pde_residual(
    eq: &EvolutionEquation,
    ansatz: &Ansatz,
    traj: &Trajectory,
    probe_xs: &[f64],
) -> Result<f64, ResidualError> {
    let n = traj.times.len();
    if n < 5 {
        return Err(ResidualError::ShortTrajectory(n));
    }
    let h = traj.times[1] - traj.times[0];
    let uniform = traj
        .times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    if !uniform {
        return Err(ResidualError::NonUniform);
    }
    let rho = ansatz.params().len();
    if let Some(s) = traj.states.iter().find(|s| s.len() != rho) {
        return Err(ResidualError::Dimension {
            expected: rho,
            got: s.len(),
        });
    }
    let derivs: Vec<Expr> = (0..=eq.order()).map(|k| ansatz.f_x(k)).collect();

    let mut worst = 0.0f64;
    let mut valid = 0;
    for &x in probe_xs {
        match probe(eq, ansatz, &derivs, traj, x, h) {
            Ok(r) => {
                valid += 1;
                worst = worst.max(r);
            }
            Err(_) => continue,
        }
    }
    let required = MIN_VALID_PROBES;
    if valid < required {
        return Err(ResidualError::TooFewProbes { valid, required });
    }
    Ok(worst)
}

fn probe(
    eq: &EvolutionEquation,
    ansatz: &Ansatz,
    derivs: &[Expr],
    traj: &Trajectory,
    x: f64,
    h: f64,
) -> Result<f64, EvalError> {
    let point_at = |i: usize| -> Point {
        let mut p: Point = ansatz
            .params()
            .iter()
            .cloned()
            .zip(traj.states[i].iter().copied())
            .collect();
        p.insert(Symbol::T, traj.times[i]);
        p.insert(Symbol::X, x);
        p
    };
    let u: Vec<f64> = (0..traj.times.len())
        .map(|i| eval(&derivs[0], &point_at(i)))
        .collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    for i in 2..u.len() - 2 {
        let u_t = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
        let p = point_at(i);
        let mut q = Point::new();
        q.insert(Symbol::T, traj.times[i]);
        q.insert(Symbol::X, x);
        for (k, d) in derivs.iter().enumerate() {
            q.insert(Symbol::u(k as u32), eval(d, &p)?);
        }
        let rhs = eval(eq.rhs(), &q)?;
        worst = worst.max((u_t - rhs).abs());
    }
    Ok(worst)
}
