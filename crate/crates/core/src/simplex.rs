//! Nelder-Mead maximization with restarts.

/// Stopping rules for [`maximize`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexSettings {
    /// Edge length of the initial simplex around the start point.
    pub initial_step: f64,
    /// A restart that improves the best value by less than this ends the search.
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub max_restarts: usize,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self { initial_step: 0.1, tolerance: 1e-10, max_evaluations: 20_000, max_restarts: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Maximizes `f` from `start`. The returned value is never below `f(start)`.
///
/// Each pass shrinks the simplex until its value spread falls under the
/// tolerance, then restarts around the best vertex with a smaller step. The
/// search stops once a pass gains less than the tolerance.
pub fn maximize(mut f: impl FnMut(&[f64]) -> f64, start: &[f64], settings: &SimplexSettings) -> SimplexOutcome {
    let dim = start.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut best = start.to_vec();
    let mut best_value = eval(&best, &mut evaluations);
    if dim == 0 {
        return SimplexOutcome { point: best, value: best_value, evaluations };
    }

    let mut step = settings.initial_step;
    for _ in 0..=settings.max_restarts {
        let before = best_value;
        let (point, value) = run_pass(&mut eval, &best, best_value, step, settings, &mut evaluations);
        if value > best_value {
            best = point;
            best_value = value;
        }
        if best_value - before < settings.tolerance || evaluations >= settings.max_evaluations {
            break;
        }
        step = (step * 0.5).max(1e-6);
    }
    SimplexOutcome { point: best, value: best_value, evaluations }
}

fn run_pass(
    eval: &mut impl FnMut(&[f64], &mut usize) -> f64,
    start: &[f64],
    start_value: f64,
    step: f64,
    settings: &SimplexSettings,
    evaluations: &mut usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    vertices.push((start.to_vec(), start_value));
    for d in 0..dim {
        let mut x = start.to_vec();
        x[d] += step;
        let v = eval(&x, evaluations);
        vertices.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while *evaluations < settings.max_evaluations {
        // Descending by value: vertices[0] is the best.
        vertices.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = vertices[0].1 - vertices[dim].1;
        if spread.abs() < settings.tolerance * 0.1 {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &vertices[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = vertices[dim].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let reflected = along(alpha);
        let fr = eval(&reflected, evaluations);
        if fr > vertices[0].1 {
            let expanded = along(gamma);
            let fe = eval(&expanded, evaluations);
            vertices[dim] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > vertices[dim - 1].1 {
            vertices[dim] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr > worst.1 {
                let x = along(rho);
                let v = eval(&x, evaluations);
                (x, v)
            } else {
                let x = along(-rho);
                let v = eval(&x, evaluations);
                (x, v)
            };
            if fc > worst.1.max(fr) {
                vertices[dim] = (contracted, fc);
            } else {
                let anchor = vertices[0].0.clone();
                for (x, v) in vertices.iter_mut().skip(1) {
                    for (xi, a) in x.iter_mut().zip(&anchor) {
                        *xi = a + sigma * (*xi - a);
                    }
                    *v = eval(x, evaluations);
                }
            }
        }
    }
    vertices.sort_by(|a, b| b.1.total_cmp(&a.1));
    vertices.swap_remove(0)
}
