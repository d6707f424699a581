use thiserror::Error;

use super::eval::{eval, EvalError, Point};
use crate::expr::Symbol;
use crate::reduction::ReducedSystem;

/// Integration aborts once the state norm exceeds this.
pub const BLOW_UP_NORM: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationPlan {
    pub step: f64,
    pub t_span: (f64, f64),
    pub initial: Vec<f64>,
}

impl IntegrationPlan {
    pub fn new(initial: Vec<f64>, t_span: (f64, f64)) -> Self {
        Self {
            step: 1e-3,
            t_span,
            initial,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, &[f64]) {
        let i = self.times.len() - 1;
        (self.times[i], &self.states[i])
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integration plan: {0}")]
    InvalidPlan(String),
    #[error("solution blew up at t = {t} (norm {norm:e})")]
    BlowUp { t: f64, norm: f64 },
    #[error("right-hand side not evaluable at t = {t}: {source}")]
    Eval { t: f64, source: EvalError },
}

/// Classical fixed-step fourth-order Runge-Kutta. The step is shrunk slightly, if needed,
/// so that an integer number of steps ends exactly at the end of the span.
pub fn rk4<F>(mut f: F, plan: &IntegrationPlan) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>, EvalError>,
{
    let (t0, t1) = plan.t_span;
    if !(plan.step > 0.0 && plan.step.is_finite()) {
        return Err(OdeError::InvalidPlan(format!(
            "step {} must be positive",
            plan.step
        )));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(OdeError::InvalidPlan(format!("bad span [{t0}, {t1}]")));
    }
    let n = ((t1 - t0) / plan.step - 1e-9).ceil().max(1.0) as usize;
    let h = (t1 - t0) / n as f64;
    let dim = plan.initial.len();
    let mut rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>, OdeError> {
        let d = f(t, y).map_err(|source| OdeError::Eval { t, source })?;
        debug_assert_eq!(d.len(), dim);
        Ok(d)
    };
    let axpy = |y: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(yi, ki)| yi + a * ki).collect()
    };

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut y = plan.initial.clone();
    times.push(t0);
    states.push(y.clone());
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + h / 2.0, &axpy(&y, &k1, h / 2.0))?;
        let k3 = rhs(t + h / 2.0, &axpy(&y, &k2, h / 2.0))?;
        let k4 = rhs(t + h, &axpy(&y, &k3, h))?;
        for j in 0..dim {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = t0 + (i + 1) as f64 * h;
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm.is_nan() || norm > BLOW_UP_NORM {
            return Err(OdeError::BlowUp { t: t_next, norm });
        }
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(Trajectory { times, states })
}

/// Integrates `phi_t = G(t, phi)`.
pub fn integrate_reduced(
    sys: &ReducedSystem,
    plan: &IntegrationPlan,
) -> Result<Trajectory, OdeError> {
    if plan.initial.len() != sys.rhs.len() {
        return Err(OdeError::InvalidPlan(format!(
            "{} initial values for a system of size {}",
            plan.initial.len(),
            sys.rhs.len()
        )));
    }
    let mut point = Point::new();
    rk4(
        |t, y| {
            point.insert(Symbol::T, t);
            for (p, v) in sys.params.iter().zip(y) {
                point.insert(p.clone(), *v);
            }
            sys.rhs.iter().map(|g| eval(g, &point)).collect()
        },
        plan,
    )
}
