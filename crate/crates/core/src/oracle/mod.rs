//! Seeded numeric backend: point evaluation, randomized zero tests, fixed-step RK4
//! integration of reduced systems and finite-difference PDE residuals.

mod eval;
mod ode;
mod residual;
mod zero;

pub use eval::{eval, eval_scaled, EvalError, Point, SINGULAR_DENOMINATOR};
pub use ode::{integrate_reduced, rk4, IntegrationPlan, OdeError, Trajectory, BLOW_UP_NORM};
pub use residual::{pde_residual, ResidualError, MIN_VALID_PROBES};
pub use zero::{
    is_zero, probabilistic_zero_test, OracleError, SamplePlan, Witness, ZeroReport, ZeroVerdict,
    DEFAULT_SEED,
};
