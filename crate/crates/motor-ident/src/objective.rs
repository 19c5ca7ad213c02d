//! Search-space definition, bound handling, fitness evaluation, and the
//! shared evaluation budget.
//!
//! Every optimizer consumes fitness evaluations through [`Objective`], so
//! the budget is charged identically no matter which algorithm runs. The
//! motor fitness is the integrated absolute error between candidate and
//! reference phase currents, approximated by the trapezoid rule on the
//! reference sample grid.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::motor::{self, CurrentWaveform, MotorParams, SupplyProfile};
use crate::ode::IntegratorConfig;

/// Number of identified parameters.
pub const DIM: usize = 5;

/// A point in the parameter search space, ordered Rs, Rr, Lleak, Lm, J.
pub type Point = [f64; DIM];

/// Per-dimension names and initialization bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub names: [&'static str; DIM],
    pub lower: Point,
    pub upper: Point,
}

impl SearchSpace {
    /// The motor identification ranges.
    pub fn motor() -> Self {
        Self {
            names: ["Rs", "Rr", "Lleak", "Lm", "J"],
            lower: [1.0, 1.0, 0.002, 0.05, 0.00005],
            upper: [20.0, 20.0, 1.0, 5.0, 0.001],
        }
    }

    /// A symmetric box for optimizer tests on analytic functions.
    pub fn symmetric(half_width: f64) -> Self {
        Self {
            names: ["x0", "x1", "x2", "x3", "x4"],
            lower: [-half_width; DIM],
            upper: [half_width; DIM],
        }
    }

    pub fn validate(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo < hi)
    }

    pub fn width(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }
}

/// Pins each component at its lower bound; the upper bound is never
/// enforced, so particles may fly above the initialization range.
pub fn clamp_lower(theta: Point, space: &SearchSpace) -> Point {
    let mut out = theta;
    for d in 0..DIM {
        if out[d] < space.lower[d] {
            out[d] = space.lower[d];
        }
    }
    out
}

/// Uniform sample within the initialization box.
pub fn sample_uniform<R: Rng>(space: &SearchSpace, rng: &mut R) -> Point {
    let mut out = [0.0; DIM];
    for d in 0..DIM {
        out[d] = rng.gen_range(space.lower[d]..space.upper[d]);
    }
    out
}

/// A fitness together with the evaluation index that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessValue {
    pub error: f64,
    pub eval_index: u64,
}

/// Shared evaluation budget. The counter is atomic so evaluators may be
/// driven from several worker threads; refusal is returned once spent.
#[derive(Debug)]
pub struct Budget {
    max: u64,
    consumed: AtomicU64,
}

/// Refusal signal: the evaluation budget is spent and optimizers must stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExhausted;

impl Budget {
    pub fn new(max: u64) -> Self {
        Self {
            max,
            consumed: AtomicU64::new(0),
        }
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn consumed(&self) -> u64 {
        self.consumed.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> u64 {
        self.max - self.consumed()
    }

    /// Charges one evaluation, returning its 1-based index.
    pub fn charge(&self) -> Result<u64, BudgetExhausted> {
        let prev = self
            .consumed
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| {
                if c < self.max {
                    Some(c + 1)
                } else {
                    None
                }
            });
        match prev {
            Ok(c) => Ok(c + 1),
            Err(_) => Err(BudgetExhausted),
        }
    }
}

/// A budgeted fitness function, minimized by every optimizer.
pub trait Objective {
    /// Evaluates `theta`, charging the budget. `Err` means the budget is
    /// spent; the evaluation did not happen.
    fn evaluate(&mut self, theta: &Point) -> Result<FitnessValue, BudgetExhausted>;

    fn budget(&self) -> &Budget;
}

/// Integrated absolute error between two waveforms on a shared grid
/// (trapezoid rule). Both waveforms must be sampled on the same times.
pub fn waveform_error(reference: &CurrentWaveform, candidate: &CurrentWaveform) -> f64 {
    assert_eq!(
        reference.times.len(),
        candidate.times.len(),
        "waveforms must share the sample grid"
    );
    let point_err = |k: usize| {
        (reference.i1[k] - candidate.i1[k]).abs()
            + (reference.i2[k] - candidate.i2[k]).abs()
            + (reference.i3[k] - candidate.i3[k]).abs()
    };
    let mut total = 0.0;
    for k in 1..reference.times.len() {
        let dt = reference.times[k] - reference.times[k - 1];
        total += 0.5 * dt * (point_err(k) + point_err(k - 1));
    }
    total
}

/// The motor identification objective: simulate a candidate startup and
/// integrate its current error against the reference waveform.
///
/// Failed simulations (stiff or singular candidate dynamics) are mapped to
/// a largest-finite sentinel so population methods survive pathological
/// candidates; the failure count is kept for diagnostics.
pub struct MotorObjective<'a> {
    reference: &'a CurrentWaveform,
    supply: SupplyProfile,
    integrator: IntegratorConfig,
    budget: Budget,
    failures: u64,
}

/// Fitness assigned to candidates whose simulation fails.
pub const FAILURE_SENTINEL: f64 = f64::MAX;

impl<'a> MotorObjective<'a> {
    pub fn new(
        reference: &'a CurrentWaveform,
        supply: SupplyProfile,
        integrator: IntegratorConfig,
        budget: Budget,
    ) -> Self {
        Self {
            reference,
            supply,
            integrator,
            budget,
            failures: 0,
        }
    }

    pub fn failures(&self) -> u64 {
        self.failures
    }
}

impl Objective for MotorObjective<'_> {
    fn evaluate(&mut self, theta: &Point) -> Result<FitnessValue, BudgetExhausted> {
        let eval_index = self.budget.charge()?;
        let params = MotorParams::from_array(*theta);
        let error = if !params.is_strictly_positive() {
            self.failures += 1;
            FAILURE_SENTINEL
        } else {
            match motor::simulate(&params, &self.supply, &self.integrator) {
                Ok(wf) => waveform_error(self.reference, &wf),
                Err(_) => {
                    self.failures += 1;
                    FAILURE_SENTINEL
                }
            }
        };
        Ok(FitnessValue { error, eval_index })
    }

    fn budget(&self) -> &Budget {
        &self.budget
    }
}

/// Wraps a plain function as a budgeted objective; the test hook used to
/// run the optimizers on analytic functions.
pub struct FnObjective<F: FnMut(&Point) -> f64> {
    f: F,
    budget: Budget,
}

impl<F: FnMut(&Point) -> f64> FnObjective<F> {
    pub fn new(f: F, budget: Budget) -> Self {
        Self { f, budget }
    }
}

impl<F: FnMut(&Point) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, theta: &Point) -> Result<FitnessValue, BudgetExhausted> {
        let eval_index = self.budget.charge()?;
        Ok(FitnessValue {
            error: (self.f)(theta),
            eval_index,
        })
    }

    fn budget(&self) -> &Budget {
        &self.budget
    }
}

/// Sum of squared components; the standard easy test function.
pub fn sphere(theta: &Point) -> f64 {
    theta.iter().map(|v| v * v).sum()
}
