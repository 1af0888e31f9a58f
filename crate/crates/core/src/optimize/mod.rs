//! Global search over input amplitudes for the state with the largest Fisher
//! information at a fixed photon number and loss.
//!
//! All methods search the raw `2(N+1)` real parameters `(Re c_0, Im c_0, ...)`
//! and normalize inside the objective, so the landscape is projective and no
//! constraint handling is needed.

mod ga;
mod local;
mod sa;
mod scaling;

pub use ga::ga_optimize;
pub use local::{local_refine, multi_start, multi_start_all};
pub use sa::sa_optimize;
pub use scaling::{fit_scaling, ScalingFit};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{overlap_summary, OverlapSummary};
use crate::error::{Error, Result};
use crate::fock::{LossSpec, PureState};
use crate::metrology::Interferometer;

/// Objective value returned for parameter vectors that do not describe a state.
pub const PENALTY: f64 = f64::NEG_INFINITY;

/// Relative spread between method families above which a consensus is suspect.
pub const SPREAD_FLAG: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ga,
    Sa,
    MultiStartLocal,
    Consensus,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ga => "ga",
            Method::Sa => "sa",
            Method::MultiStartLocal => "multi-start-local",
            Method::Consensus => "consensus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaSettings {
    /// `None` means `40·(N+1)`.
    pub population: Option<usize>,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    /// BLX-α extension of the parent interval.
    pub blend_alpha: f64,
    /// Probability that a gene receives Gaussian noise.
    pub mutation_rate: f64,
    pub sigma_start: f64,
    pub sigma_end: f64,
    pub stagnation_window: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self {
            population: None,
            crossover_rate: 0.9,
            tournament_size: 3,
            blend_alpha: 0.5,
            mutation_rate: 0.2,
            sigma_start: 0.3,
            sigma_end: 0.01,
            stagnation_window: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaSettings {
    /// Initial temperature as a multiple of the mean `|ΔF|` of trial moves.
    pub initial_temperature_factor: f64,
    /// Final over initial temperature; the per-step cooling factor follows
    /// from it and the evaluation budget.
    pub final_temperature_ratio: f64,
    pub step_start: f64,
    pub step_end: f64,
    /// Steps without improvement (in the second half of the run) that stop the chain.
    pub stagnation_window: usize,
}

impl Default for SaSettings {
    fn default() -> Self {
        Self {
            initial_temperature_factor: 1.0,
            final_temperature_ratio: 1e-5,
            step_start: 0.3,
            step_end: 0.003,
            stagnation_window: 5_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalSettings {
    /// Number of random starts for the multi-start method.
    pub restarts: usize,
    pub initial_step: f64,
    /// Improvement per simplex pass below which the refinement stops.
    pub tolerance: f64,
}

impl Default for LocalSettings {
    fn default() -> Self {
        Self { restarts: 16, initial_step: 0.1, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n: usize,
    pub loss: LossSpec,
    /// Phase at which the Fisher information is evaluated.
    #[serde(default)]
    pub phi0: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    /// Stagnation threshold on `F` for the global methods.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Objective evaluations per method; `None` scales with the dimension.
    #[serde(default)]
    pub max_evaluations: Option<usize>,
    #[serde(default)]
    pub ga: GaSettings,
    #[serde(default)]
    pub sa: SaSettings,
    #[serde(default)]
    pub local: LocalSettings,
}

fn default_method() -> Method {
    Method::Consensus
}

fn default_tolerance() -> f64 {
    1e-9
}

impl OptimizerConfig {
    pub fn new(n: usize, loss: LossSpec) -> Self {
        Self {
            n,
            loss,
            phi0: 0.0,
            method: Method::Consensus,
            seed: 0,
            tolerance: default_tolerance(),
            max_evaluations: None,
            ga: GaSettings::default(),
            sa: SaSettings::default(),
            local: LocalSettings::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn dimension(&self) -> usize {
        2 * (self.n + 1)
    }

    pub fn evaluation_budget(&self) -> usize {
        self.max_evaluations.unwrap_or(4_000 * self.dimension())
    }

    pub fn population(&self) -> usize {
        self.ga.population.unwrap_or(40 * (self.n + 1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if !self.phi0.is_finite() {
            return bad("phi0 must be finite");
        }
        if self.evaluation_budget() == 0 {
            return bad("max_evaluations must be positive");
        }
        if self.population() < 2 || self.ga.tournament_size == 0 {
            return bad("GA needs a population of at least 2 and a tournament of at least 1");
        }
        if !(0.0..=1.0).contains(&self.ga.crossover_rate) || !(0.0..=1.0).contains(&self.ga.mutation_rate) {
            return bad("GA rates must lie in [0, 1]");
        }
        if !(self.ga.sigma_start > 0.0 && self.ga.sigma_end > 0.0) {
            return bad("GA mutation scales must be positive");
        }
        if !(self.sa.step_start > 0.0 && self.sa.step_end > 0.0) {
            return bad("SA step sizes must be positive");
        }
        if !(self.sa.final_temperature_ratio > 0.0 && self.sa.final_temperature_ratio < 1.0) {
            return bad("SA final temperature ratio must lie in (0, 1)");
        }
        if self.local.restarts == 0 || !(self.local.initial_step > 0.0) || !(self.local.tolerance > 0.0) {
            return bad("local search needs at least one start and positive step and tolerance");
        }
        Ok(())
    }

    /// Independent RNG stream for one stage of a run.
    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Fisher information at `phi0` as a function of raw parameters.
#[derive(Debug, Clone)]
pub struct Objective {
    model: Interferometer,
    phi0: f64,
}

impl Objective {
    pub fn new(cfg: &OptimizerConfig) -> Self {
        Self { model: Interferometer::new(cfg.n, cfg.loss), phi0: cfg.phi0 }
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn model(&self) -> &Interferometer {
        &self.model
    }

    /// Interprets `params` as `(re, im)` pairs.
    pub fn state(&self, params: &[f64]) -> Option<PureState> {
        let raw = params.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        PureState::new(self.n(), raw).ok()
    }

    pub fn evaluate(&self, params: &[f64]) -> f64 {
        match self.state(params) {
            Some(state) => self.model.sensitivity(&state, self.phi0).map_or(PENALTY, |r| r.fisher),
            None => PENALTY,
        }
    }

    /// Evaluates a batch in parallel; the output order matches the input.
    pub fn evaluate_batch(&self, batch: &[Vec<f64>]) -> Vec<f64> {
        batch.par_iter().map(|p| self.evaluate(p)).collect()
    }
}

/// `F` at `cfg.phi0` for the state encoded by `params`, or [`PENALTY`].
pub fn objective(params: &[f64], cfg: &OptimizerConfig) -> f64 {
    Objective::new(cfg).evaluate(params)
}

pub(crate) fn params_of(state: &PureState) -> Vec<f64> {
    state.amplitudes().iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Uniformly distributed point on the unit sphere in `dim` dimensions.
pub(crate) fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(v.clone()).is_some() {
            return normalize(v).expect("checked");
        }
    }
}

pub(crate) fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 1e-300 && norm.is_finite()) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Best value found by one method family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodBest {
    pub method: Method,
    pub fisher: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n: usize,
    pub loss: LossSpec,
    pub phi0: f64,
    pub method: Method,
    /// Optimal input with its global phase fixed.
    pub state: PureState,
    pub fisher: f64,
    pub delta_phi: f64,
    pub delta_phi_tilde: f64,
    /// `None` for the vacuum, which has no benchmark family members.
    pub overlaps: Option<OverlapSummary>,
    pub evaluations: usize,
    pub converged: bool,
    /// Per-family bests; one entry for single-method runs.
    pub methods: Vec<MethodBest>,
    /// `(max - min) / max` over `methods`; zero for single-method runs.
    pub spread: f64,
    pub suspect: bool,
}

impl OptimizationResult {
    /// Builds the report from the best raw parameters, re-evaluating `F` on
    /// the reported canonical state.
    pub(crate) fn from_params(
        cfg: &OptimizerConfig,
        objective: &Objective,
        params: &[f64],
        evaluations: usize,
        converged: bool,
    ) -> Result<Self> {
        let state = objective.state(params).ok_or(Error::ZeroState)?.canonical();
        let report = objective.model().sensitivity(&state, cfg.phi0)?;
        let overlaps = if cfg.n > 0 { Some(overlap_summary(&state)?) } else { None };
        Ok(Self {
            n: cfg.n,
            loss: cfg.loss,
            phi0: cfg.phi0,
            method: cfg.method,
            state,
            fisher: report.fisher,
            delta_phi: report.delta_phi,
            delta_phi_tilde: report.delta_phi_tilde,
            overlaps,
            evaluations,
            converged,
            methods: vec![MethodBest { method: cfg.method, fisher: report.fisher, evaluations, converged }],
            spread: 0.0,
            suspect: false,
        })
    }
}

/// Relative spread `(max - min) / max` of a set of optimum values.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max <= 0.0 {
        0.0
    } else {
        (max - min) / max
    }
}

/// GA, SA and a multi-start local search, each polished locally, with the
/// overall best reported alongside the agreement between families.
pub fn consensus_optimize(cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let single = |m: Method| {
        let mut c = cfg.clone();
        c.method = m;
        c
    };
    let ga_cfg = single(Method::Ga);
    let sa_cfg = single(Method::Sa);
    let ga = ga_optimize(&ga_cfg)?;
    let ga = local_refine(&ga.state, &ga_cfg)?.with_history(&ga);
    let sa = sa_optimize(&sa_cfg)?;
    let sa = local_refine(&sa.state, &sa_cfg)?.with_history(&sa);
    let ms = multi_start(&single(Method::MultiStartLocal))?;

    let methods: Vec<MethodBest> = [&ga, &sa, &ms]
        .iter()
        .map(|r| MethodBest { method: r.method, fisher: r.fisher, evaluations: r.evaluations, converged: r.converged })
        .collect();
    let spread = relative_spread(&methods.iter().map(|m| m.fisher).collect::<Vec<_>>());
    let evaluations = methods.iter().map(|m| m.evaluations).sum();

    // Earliest family wins ties.
    let mut best = ga;
    for r in [sa, ms] {
        if r.fisher > best.fisher {
            best = r;
        }
    }
    Ok(OptimizationResult {
        method: Method::Consensus,
        evaluations,
        converged: methods.iter().all(|m| m.converged),
        methods,
        spread,
        suspect: spread > SPREAD_FLAG,
        ..best
    })
}

/// Runs the method named in `cfg`.
pub fn optimize(cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    match cfg.method {
        Method::Ga => ga_optimize(cfg),
        Method::Sa => sa_optimize(cfg),
        Method::MultiStartLocal => multi_start(cfg),
        Method::Consensus => consensus_optimize(cfg),
    }
}

impl OptimizationResult {
    /// Carries the evaluation count of the global stage into a refinement result.
    fn with_history(mut self, global: &OptimizationResult) -> Self {
        self.method = global.method;
        self.evaluations += global.evaluations;
        self.converged = global.converged;
        self.methods = vec![MethodBest {
            method: global.method,
            fisher: self.fisher,
            evaluations: self.evaluations,
            converged: self.converged,
        }];
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::noon_state;

    #[test]
    fn objective_is_projective() {
        let cfg = OptimizerConfig::new(3, LossSpec::new(2.0, 1.0).unwrap());
        let p = vec![0.3, -0.1, 0.5, 0.2, -0.7, 0.4, 0.1, 0.9];
        let scaled: Vec<f64> = p.iter().map(|x| 3.7 * x).collect();
        let (a, b) = (objective(&p, &cfg), objective(&scaled, &cfg));
        assert!((a - b).abs() < 1e-12 * a, "{a} {b}");
    }

    #[test]
    fn zero_parameters_get_the_penalty() {
        let cfg = OptimizerConfig::new(2, LossSpec::lossless());
        assert_eq!(objective(&[0.0; 6], &cfg), PENALTY);
        assert_eq!(objective(&[f64::NAN; 6], &cfg), PENALTY);
    }

    #[test]
    fn objective_reaches_heisenberg_with_phase_freedom() {
        let cfg = OptimizerConfig::new(2, LossSpec::lossless());
        // A relative phase in the N00N state moves the operating point off the dark fringe.
        let best = (0..64)
            .map(|i| objective(&params_of(&noon_state(2, i as f64 * 0.1).unwrap()), &cfg))
            .fold(0.0, f64::max);
        assert!((best - 4.0).abs() < 1e-9, "{best}");
    }

    #[test]
    fn single_photon_bound_on_a_grid() {
        let cfg = OptimizerConfig::new(1, LossSpec::lossless());
        let mut max: f64 = 0.0;
        for i in 0..=200 {
            for j in 0..200 {
                let theta = std::f64::consts::PI * i as f64 / 200.0;
                let phase = 2.0 * std::f64::consts::PI * j as f64 / 200.0;
                let (s, c) = (theta / 2.0).sin_cos();
                let f = objective(&[c, 0.0, s * phase.cos(), s * phase.sin()], &cfg);
                assert!(f <= 1.0 + 1e-12);
                max = max.max(f);
            }
        }
        assert!(max > 0.999);
    }

    #[test]
    fn spread_definition() {
        assert_eq!(relative_spread(&[4.0, 4.0, 4.0]), 0.0);
        assert!((relative_spread(&[10.0, 9.9, 9.95]) - 0.01).abs() < 1e-12);
        assert_eq!(relative_spread(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn config_validation_and_serde() {
        let cfg = OptimizerConfig::new(4, LossSpec::new(5.0, 0.0).unwrap()).with_seed(9);
        assert!(cfg.validate().is_ok());
        let json = serde_json::to_string(&cfg).unwrap();
        let back: OptimizerConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let minimal: OptimizerConfig =
            serde_json::from_str(r#"{"n": 3, "loss": {"ra_db": 1.0, "rb_db": 0.0}}"#).unwrap();
        assert_eq!(minimal.method, Method::Consensus);
        assert_eq!(minimal.population(), 160);
        let mut bad = cfg.clone();
        bad.tolerance = 0.0;
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let mut bad = cfg;
        bad.ga.crossover_rate = 1.5;
        assert!(bad.validate().is_err());
    }
}
