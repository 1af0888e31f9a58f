use rand::Rng;
use rand_distr::StandardNormal;

use super::{normalize, random_direction, Objective, OptimizationResult, OptimizerConfig};
use crate::error::Result;

/// Number of trial moves used to calibrate the initial temperature.
const CALIBRATION_MOVES: usize = 32;

/// Simulated annealing on the unit sphere of raw parameters.
///
/// Proposals add an isotropic Gaussian step and renormalize. Temperature and
/// step size both decay geometrically over the evaluation budget; the
/// initial temperature is the mean `|ΔF|` of trial moves from the start
/// point times `initial_temperature_factor`.
pub fn sa_optimize(cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let objective = Objective::new(cfg);
    let settings = cfg.sa;
    let dim = cfg.dimension();
    let budget = cfg.evaluation_budget();
    let mut rng = cfg.rng(2);

    let mut current = random_direction(&mut rng, dim);
    let mut current_f = objective.evaluate(&current);
    let mut evaluations = 1;

    let propose = |rng: &mut rand_chacha::ChaCha8Rng, x: &[f64], step: f64| -> Vec<f64> {
        let moved = x.iter().map(|v| v + step * rng.sample::<f64, _>(StandardNormal)).collect();
        normalize(moved).unwrap_or_else(|| random_direction(rng, dim))
    };

    let calibration = CALIBRATION_MOVES.min(budget.saturating_sub(1));
    let mut mean_delta = 0.0;
    let mut finite = 0usize;
    for _ in 0..calibration {
        let f = objective.evaluate(&propose(&mut rng, &current, settings.step_start));
        evaluations += 1;
        if f.is_finite() && current_f.is_finite() {
            mean_delta += (f - current_f).abs();
            finite += 1;
        }
    }
    let t0 = if finite > 0 && mean_delta > 0.0 {
        settings.initial_temperature_factor * mean_delta / finite as f64
    } else {
        settings.initial_temperature_factor
    };

    let steps = budget.saturating_sub(evaluations).max(1);
    let cooling = settings.final_temperature_ratio.powf(1.0 / steps as f64);
    let step_decay = (settings.step_end / settings.step_start).powf(1.0 / steps as f64);
    let (mut temperature, mut step) = (t0, settings.step_start);

    let mut best = current.clone();
    let mut best_f = current_f;
    let mut last_gain = 0usize;
    let mut converged = false;

    for k in 0..steps {
        let candidate = propose(&mut rng, &current, step);
        let f = objective.evaluate(&candidate);
        evaluations += 1;
        let delta = f - current_f;
        let accept = if !current_f.is_finite() {
            f.is_finite()
        } else {
            delta >= 0.0 || rng.random::<f64>() < (delta / temperature).exp()
        };
        if accept {
            current = candidate;
            current_f = f;
            if current_f > best_f {
                if current_f - best_f >= cfg.tolerance {
                    last_gain = k;
                }
                best = current.clone();
                best_f = current_f;
            }
        }
        temperature *= cooling;
        step *= step_decay;
        if k > steps / 2 && k - last_gain > settings.stagnation_window {
            converged = true;
            break;
        }
    }

    OptimizationResult::from_params(cfg, &objective, &best, evaluations, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::LossSpec;
    use crate::optimize::Method;

    #[test]
    fn two_photon_heisenberg_limit() {
        let cfg = OptimizerConfig::new(2, LossSpec::lossless()).with_seed(1).with_method(Method::Sa);
        let r = sa_optimize(&cfg).unwrap();
        assert!((r.fisher - 4.0).abs() / 4.0 < 0.01, "F = {}", r.fisher);
    }

    #[test]
    fn vacuum_has_no_phase_information() {
        let cfg = OptimizerConfig::new(0, LossSpec::new(3.0, 0.0).unwrap()).with_seed(1).with_method(Method::Sa);
        let r = sa_optimize(&cfg).unwrap();
        assert_eq!(r.fisher, 0.0);
        assert!(r.overlaps.is_none());
    }

    #[test]
    fn agrees_with_ga_under_loss() {
        let loss = LossSpec::new(10.0, 0.0).unwrap();
        let sa = sa_optimize(&OptimizerConfig::new(4, loss).with_seed(2).with_method(Method::Sa)).unwrap();
        let ga = super::super::ga_optimize(&OptimizerConfig::new(4, loss).with_seed(2).with_method(Method::Ga)).unwrap();
        assert!((sa.fisher - ga.fisher).abs() / ga.fisher < 0.02, "sa {} ga {}", sa.fisher, ga.fisher);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = OptimizerConfig::new(3, LossSpec::new(2.0, 0.0).unwrap()).with_seed(8).with_method(Method::Sa);
        assert_eq!(sa_optimize(&cfg).unwrap(), sa_optimize(&cfg).unwrap());
    }
}
