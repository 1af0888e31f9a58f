use rand::Rng;
use rand_distr::StandardNormal;

use super::{normalize, random_direction, Objective, OptimizationResult, OptimizerConfig};
use crate::error::Result;

/// Real-coded genetic algorithm on the unit sphere of raw parameters.
///
/// Tournament selection, BLX-α crossover and per-gene Gaussian mutation with
/// a scale that decays geometrically from `sigma_start` to `sigma_end` over
/// the generation budget. The best individual always survives. The run ends
/// when the budget is spent or the best `F` gains less than the tolerance
/// over `stagnation_window` generations.
pub fn ga_optimize(cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let objective = Objective::new(cfg);
    let settings = cfg.ga;
    let dim = cfg.dimension();
    let pop_size = cfg.population();
    let budget = cfg.evaluation_budget();
    let mut rng = cfg.rng(1);

    let mut population: Vec<Vec<f64>> = (0..pop_size).map(|_| random_direction(&mut rng, dim)).collect();
    let mut fitness = objective.evaluate_batch(&population);
    let mut evaluations = pop_size;

    let generations = (budget.saturating_sub(pop_size) / pop_size.saturating_sub(1).max(1)).max(1);
    let decay = (settings.sigma_end / settings.sigma_start).powf(1.0 / generations as f64);
    let mut sigma = settings.sigma_start;

    let mut history = vec![best_of(&fitness).1];
    let mut converged = false;

    while evaluations + pop_size - 1 <= budget {
        let (elite, _) = best_of(&fitness);
        let mut children = Vec::with_capacity(pop_size - 1);
        while children.len() < pop_size - 1 {
            let a = tournament(&mut rng, &fitness, settings.tournament_size);
            let b = tournament(&mut rng, &fitness, settings.tournament_size);
            let mut child = if rng.random::<f64>() < settings.crossover_rate {
                blend(&mut rng, &population[a], &population[b], settings.blend_alpha)
            } else {
                population[a].clone()
            };
            for gene in child.iter_mut() {
                if rng.random::<f64>() < settings.mutation_rate {
                    *gene += sigma * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let child = normalize(child).unwrap_or_else(|| random_direction(&mut rng, dim));
            children.push(child);
        }
        let child_fitness = objective.evaluate_batch(&children);
        evaluations += children.len();

        let elite_genome = population[elite].clone();
        let elite_fitness = fitness[elite];
        population = std::iter::once(elite_genome).chain(children).collect();
        fitness = std::iter::once(elite_fitness).chain(child_fitness).collect();
        sigma = (sigma * decay).max(settings.sigma_end);

        history.push(best_of(&fitness).1);
        let window = settings.stagnation_window;
        if history.len() > window {
            let gain = history[history.len() - 1] - history[history.len() - 1 - window];
            if gain < cfg.tolerance {
                converged = true;
                break;
            }
        }
    }

    let (best, _) = best_of(&fitness);
    OptimizationResult::from_params(cfg, &objective, &population[best], evaluations, converged)
}

/// Index and value of the fittest individual; lowest index wins ties.
fn best_of(fitness: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate() {
        if *f > fitness[best] {
            best = i;
        }
    }
    (best, fitness[best])
}

fn tournament(rng: &mut impl Rng, fitness: &[f64], size: usize) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
        }
    }
    best
}

fn blend(rng: &mut impl Rng, a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (lo, hi) = (x.min(y), x.max(y));
            let ext = alpha * (hi - lo);
            lo - ext + rng.random::<f64>() * (hi - lo + 2.0 * ext)
        })
        .collect()
}
