use rayon::prelude::*;

use super::{params_of, random_direction, Method, Objective, OptimizationResult, OptimizerConfig};
use crate::error::{Error, Result};
use crate::fock::PureState;
use crate::quasi_newton::{self, QuasiNewtonSettings};
use crate::simplex::{self, SimplexSettings};

struct Climb {
    point: Vec<f64>,
    evaluations: usize,
    converged: bool,
}

/// L-BFGS ascent followed by a simplex polish, sharing `budget` evaluations.
fn climb(objective: &Objective, start: &[f64], cfg: &OptimizerConfig, budget: usize) -> Climb {
    let budget = budget.max(4 * cfg.dimension() + 4);
    let qn = QuasiNewtonSettings { max_evaluations: budget * 3 / 4, ..Default::default() };
    let ascent = quasi_newton::maximize(|x| objective.evaluate(x), start, &qn);
    let settings = SimplexSettings {
        initial_step: cfg.local.initial_step * 0.1,
        tolerance: cfg.local.tolerance,
        max_evaluations: budget.saturating_sub(ascent.evaluations).max(cfg.dimension() + 2),
        max_restarts: 50,
    };
    let polish = simplex::maximize(|x| objective.evaluate(x), &ascent.point, &settings);
    let evaluations = ascent.evaluations + polish.evaluations;
    Climb { point: polish.point, evaluations, converged: polish.evaluations < settings.max_evaluations }
}

/// Quasi-Newton ascent with a simplex polish from `start`; the result is never worse than
/// the start.
pub fn local_refine(start: &PureState, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    if start.n() != cfg.n {
        return Err(Error::PhotonNumberMismatch(start.n(), cfg.n));
    }
    let objective = Objective::new(cfg);
    let out = climb(&objective, &params_of(start), cfg, cfg.evaluation_budget());
    let (evaluations, converged) = (out.evaluations, out.converged);
    let mut result = OptimizationResult::from_params(cfg, &objective, &out.point, evaluations, converged)?;
    // The canonical phase rotation can shift F in the last bits; keep the start
    // when the climb found nothing.
    let start_f = objective.model().sensitivity(start, cfg.phi0)?.fisher;
    if result.fisher < start_f {
        result = OptimizationResult::from_params(cfg, &objective, &params_of(start), evaluations, converged)?;
    }
    Ok(result)
}

/// `cfg.local.restarts` independent local ascents from random points,
/// sharing the evaluation budget; the best is reported.
pub fn multi_start(cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    Ok(multi_start_all(cfg)?.swap_remove(0))
}

/// Every multi-start ascent, best first (stable on ties).
pub fn multi_start_all(cfg: &OptimizerConfig) -> Result<Vec<OptimizationResult>> {
    cfg.validate()?;
    let objective = Objective::new(cfg);
    let mut rng = cfg.rng(3);
    let starts: Vec<Vec<f64>> = (0..cfg.local.restarts).map(|_| random_direction(&mut rng, cfg.dimension())).collect();
    let budget = cfg.evaluation_budget() / cfg.local.restarts;
    let outcomes: Vec<Climb> = starts.par_iter().map(|s| climb(&objective, s, cfg, budget)).collect();
    let mut results = outcomes
        .iter()
        .map(|o| {
            let mut r = OptimizationResult::from_params(cfg, &objective, &o.point, o.evaluations, o.converged)?;
            r.method = Method::MultiStartLocal;
            r.methods[0].method = Method::MultiStartLocal;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = results.iter().map(|r| r.evaluations).sum();
    let all_converged = results.iter().all(|r| r.converged);
    results.sort_by(|a, b| b.fisher.total_cmp(&a.fisher));
    if let Some(best) = results.first_mut() {
        best.evaluations = total;
        best.converged = all_converged;
        best.methods[0].evaluations = total;
        best.methods[0].converged = all_converged;
    }
    Ok(results)
}
