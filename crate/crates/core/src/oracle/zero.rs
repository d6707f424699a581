//! Randomized zero testing by evaluation at seeded sample points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::eval::{eval_scaled, EvalError, Point};
use crate::expr::{Expr, Symbol};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Sampling parameters for the probabilistic zero test.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    pub seed: u64,
    pub n_points: usize,
    /// Default sampling interval for every symbol.
    pub interval: (f64, f64),
    /// Per-symbol overrides of `interval`.
    pub boxes: BTreeMap<Symbol, (f64, f64)>,
    pub threshold: f64,
    pub scale_relative: bool,
    /// Resamples allowed per point after a domain error.
    pub max_retries: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            n_points: 50,
            interval: (0.5, 2.5),
            boxes: BTreeMap::new(),
            threshold: 1e-9,
            scale_relative: true,
            max_retries: 10,
        }
    }
}

impl SamplePlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn interval_for(&self, s: &Symbol) -> (f64, f64) {
        self.boxes.get(s).copied().unwrap_or(self.interval)
    }

    /// Deterministic RNG for sample `index`, independent of evaluation order.
    pub fn rng_for(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Draws a point for `symbols` from the given RNG.
    pub fn sample(&self, symbols: &[Symbol], rng: &mut ChaCha8Rng) -> Point {
        symbols
            .iter()
            .map(|s| {
                let (lo, hi) = self.interval_for(s);
                (s.clone(), rng.gen_range(lo..hi))
            })
            .collect()
    }
}

/// Summary of a passed zero test.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroReport {
    pub seed: u64,
    pub points: usize,
    /// Largest observed `|value| / (threshold * scale)`; below 1 for a pass.
    pub worst_ratio: f64,
}

/// A sample point where the expression is visibly nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub point: Point,
    pub value: f64,
    pub scale: f64,
}

impl Witness {
    pub fn labelled(&self, depvar: &str) -> BTreeMap<String, f64> {
        self.point
            .iter()
            .map(|(s, v)| (s.label(depvar), *v))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    /// Normalization produced the literal 0.
    ProvenZero,
    ProbablyZero(ZeroReport),
    NonZero(Witness),
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero(_))
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OracleError {
    #[error("zero test inconclusive: sample {index} hit domain errors on all {attempts} attempts (last: {last})")]
    Inconclusive {
        index: usize,
        attempts: usize,
        last: EvalError,
    },
}

/// Decides whether `e` vanishes identically: structurally when the normal form is 0,
/// otherwise through [`probabilistic_zero_test`].
pub fn is_zero(e: &Expr, plan: &SamplePlan) -> Result<ZeroVerdict, OracleError> {
    if e.is_literal_zero() {
        return Ok(ZeroVerdict::ProvenZero);
    }
    probabilistic_zero_test(e, plan)
}

enum Sample {
    Value {
        point: Point,
        value: f64,
        scale: f64,
    },
    Failed(EvalError),
}

/// Evaluates `e` at `plan.n_points` seeded points.
pub fn probabilistic_zero_test(e: &Expr, plan: &SamplePlan) -> Result<ZeroVerdict, OracleError> {
    let symbols: Vec<Symbol> = e.free_symbols().into_iter().collect();
    let attempts = plan.max_retries + 1;
    let samples: Vec<Sample> = (0..plan.n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = plan.rng_for(i);
            let mut last = None;
            for _ in 0..attempts {
                let point = plan.sample(&symbols, &mut rng);
                match eval_scaled(e, &point) {
                    Ok((value, scale)) => {
                        return Sample::Value {
                            point,
                            value,
                            scale,
                        }
                    }
                    Err(err) => last = Some(err),
                }
            }
            Sample::Failed(last.expect("at least one attempt"))
        })
        .collect();

    let mut worst = 0.0f64;
    for (index, s) in samples.into_iter().enumerate() {
        match s {
            Sample::Failed(last) => {
                return Err(OracleError::Inconclusive {
                    index,
                    attempts,
                    last,
                })
            }
            Sample::Value {
                point,
                value,
                scale,
            } => {
                let bound = if plan.scale_relative {
                    plan.threshold * scale.max(1.0)
                } else {
                    plan.threshold
                };
                let ratio = value.abs() / bound;
                if ratio > 1.0 {
                    return Ok(ZeroVerdict::NonZero(Witness {
                        point,
                        value,
                        scale,
                    }));
                }
                worst = worst.max(ratio);
            }
        }
    }
    Ok(ZeroVerdict::ProbablyZero(ZeroReport {
        seed: plan.seed,
        points: plan.n_points,
        worst_ratio: worst,
    }))
}
