//! L-BFGS maximization with central-difference gradients.

use std::cell::{Cell, RefCell};

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use finitediff::FiniteDiff;

/// Stopping rules for [`maximize`].
#[derive(Debug, Clone, Copy)]
pub struct QuasiNewtonSettings {
    /// Number of correction pairs kept by L-BFGS.
    pub memory: usize,
    /// Relative change in value below which an iteration counts as stalled.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for QuasiNewtonSettings {
    fn default() -> Self {
        Self { memory: 8, tolerance: 1e-12, max_evaluations: 20_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Ascent {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// The solver stopped on its own rather than on the evaluation budget.
    pub converged: bool,
}

struct Problem<'a, F: Fn(&[f64]) -> f64> {
    f: &'a F,
    evaluations: Cell<usize>,
    budget: usize,
    best: RefCell<(Vec<f64>, f64)>,
}

impl<F: Fn(&[f64]) -> f64> Problem<'_, F> {
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        let mut best = self.best.borrow_mut();
        if v > best.1 {
            *best = (x.to_vec(), v);
        }
        v
    }

    fn exhausted(&self) -> bool {
        self.evaluations.get() >= self.budget
    }
}

impl<F: Fn(&[f64]) -> f64> CostFunction for &Problem<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, ArgminError> {
        if self.exhausted() {
            return Err(ArgminError::msg("evaluation budget exhausted"));
        }
        let v = self.value(x);
        if v.is_finite() {
            Ok(-v)
        } else {
            Ok(f64::MAX)
        }
    }
}

impl<F: Fn(&[f64]) -> f64> Gradient for &Problem<'_, F> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> Result<Vec<f64>, ArgminError> {
        if self.exhausted() {
            return Err(ArgminError::msg("evaluation budget exhausted"));
        }
        let g = x.central_diff(&|p: &Vec<f64>| -self.value(p));
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(ArgminError::msg("non-finite gradient"))
        }
    }
}

/// Maximizes `f` from `start`. The returned value is never below `f(start)`.
pub fn maximize(f: impl Fn(&[f64]) -> f64, start: &[f64], settings: &QuasiNewtonSettings) -> Ascent {
    let problem = Problem {
        f: &f,
        evaluations: Cell::new(0),
        budget: settings.max_evaluations,
        best: RefCell::new((start.to_vec(), f64::NEG_INFINITY)),
    };
    problem.value(start);
    let mut converged = false;
    if !start.is_empty() && problem.best.borrow().1.is_finite() {
        let solver = LBFGS::new(MoreThuenteLineSearch::new(), settings.memory.max(1))
            .with_tolerance_cost(settings.tolerance)
            .and_then(|s| s.with_tolerance_grad(1e-10));
        if let Ok(solver) = solver {
            let run = Executor::new(&problem, solver).configure(|s| s.param(start.to_vec()).max_iters(u64::MAX)).run();
            converged = run.is_ok() && !problem.exhausted();
        }
    }
    let evaluations = problem.evaluations.get();
    let (point, value) = problem.best.into_inner();
    Ascent { point, value, evaluations, converged }
}
