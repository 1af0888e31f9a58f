use std::path::Path;

use lio::benchmarks::OverlapSummary;
use lio::optimize::{fit_scaling, optimize, Method, MethodBest, OptimizationResult, OptimizerConfig, ScalingFit};
use lio::{LossSpec, PureState};
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Outcome};
use crate::manifest::{to_pretty_json, write_atomic, ManifestBuilder, RunManifest};
use crate::{OptimizeArgs, ScalingArgs, SearchArgs};

/// On-disk form of one optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub manifest: RunManifest,
    pub n: usize,
    pub loss: LossSpec,
    pub phi0: f64,
    pub method: Method,
    pub fisher: f64,
    pub delta_phi: f64,
    pub delta_phi_tilde: f64,
    pub state: PureState,
    pub overlaps: Option<OverlapSummary>,
    pub consensus_spread: f64,
    pub suspect: bool,
    pub methods: Vec<MethodBest>,
    pub evaluations: usize,
    pub converged: bool,
}

impl ResultFile {
    fn new(manifest: RunManifest, r: OptimizationResult) -> Self {
        Self {
            manifest,
            n: r.n,
            loss: r.loss,
            phi0: r.phi0,
            method: r.method,
            fisher: r.fisher,
            delta_phi: r.delta_phi,
            delta_phi_tilde: r.delta_phi_tilde,
            state: r.state,
            overlaps: r.overlaps,
            consensus_spread: r.spread,
            suspect: r.suspect,
            methods: r.methods,
            evaluations: r.evaluations,
            converged: r.converged,
        }
    }

    pub fn read(path: &Path) -> Outcome<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(e).context(format!("cannot read {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::input(e).context(format!("{} is not a result file", path.display())))
    }
}

pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

pub fn config(n: usize, loss: LossSpec, search: &SearchArgs, seed: u64) -> Outcome<OptimizerConfig> {
    if n == 0 {
        return Err(Failure::usage(anyhow::anyhow!("photon number must be at least 1")));
    }
    let mut cfg = OptimizerConfig::new(n, loss).with_seed(seed).with_method(search.method.into());
    cfg.phi0 = search.phi0;
    cfg.max_evaluations = search.max_evals;
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `bytes` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn warn_if_suspect(label: &str, spread: f64, suspect: bool) {
    if suspect {
        eprintln!("warning: {label}: method families disagree (relative spread {spread:.3e})");
    }
}

pub fn strict_check(strict: bool, suspect_points: usize) -> Outcome {
    if strict && suspect_points > 0 {
        return Err(Failure::numerical(anyhow::anyhow!(
            "{suspect_points} optimization(s) exceeded the consensus spread limit"
        )));
    }
    Ok(())
}

pub fn run(args: &OptimizeArgs) -> Outcome {
    let seed = resolve_seed(args.search.seed);
    let loss = LossSpec::new(args.ra, args.rb)?;
    let cfg = config(args.n, loss, &args.search, seed)?;
    let mut manifest = ManifestBuilder::new("optimize", &cfg, Some(seed));
    let result = optimize(&cfg)?;
    warn_if_suspect("optimize", result.spread, result.suspect);
    let suspect = result.suspect;

    if let Some(path) = &args.state_out {
        manifest.output(path);
    }
    if let Some(path) = &args.out {
        manifest.output(path);
    }
    if let Some(path) = &args.state_out {
        let mut text = result.state.to_json();
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    let file = ResultFile::new(manifest.finish(), result);
    emit(args.out.as_deref(), &to_pretty_json(&file))?;
    strict_check(args.search.strict, usize::from(suspect))
}

#[derive(Debug, Serialize)]
struct ScalingPoint {
    n: usize,
    fisher: f64,
    delta_phi: f64,
    delta_phi_tilde: f64,
    consensus_spread: f64,
    suspect: bool,
}

#[derive(Debug, Serialize)]
struct ScalingReport {
    manifest: RunManifest,
    loss: LossSpec,
    points: Vec<ScalingPoint>,
    fit: Option<ScalingFit>,
    error: Option<String>,
}

pub fn run_scaling(args: &ScalingArgs) -> Outcome {
    if args.ns.len() < 3 {
        return Err(Failure::usage(anyhow::anyhow!("scaling needs at least three photon numbers")));
    }
    let seed = resolve_seed(args.search.seed);
    let loss = LossSpec::new(args.ra, args.rb)?;
    let configs = args.ns.iter().map(|&n| config(n, loss, &args.search, seed)).collect::<Outcome<Vec<_>>>()?;
    let mut manifest = ManifestBuilder::new("scaling", args, Some(seed));
    if let Some(path) = &args.out {
        manifest.output(path);
    }

    let mut points = Vec::new();
    let mut failure = None;
    for cfg in &configs {
        match optimize(cfg) {
            Ok(r) => {
                warn_if_suspect(&format!("N = {}", r.n), r.spread, r.suspect);
                points.push(ScalingPoint {
                    n: r.n,
                    fisher: r.fisher,
                    delta_phi: r.delta_phi,
                    delta_phi_tilde: r.delta_phi_tilde,
                    consensus_spread: r.spread,
                    suspect: r.suspect,
                });
            }
            Err(e) => {
                failure = Some(Failure::from(e).context(format!("optimization at N = {} failed", cfg.n)));
                break;
            }
        }
    }

    let fit = if failure.is_none() {
        let data: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.delta_phi)).collect();
        match fit_scaling(&data) {
            Ok(fit) => Some(fit),
            Err(e) => {
                failure = Some(Failure::from(e).context("power-law fit failed"));
                None
            }
        }
    } else {
        None
    };
    let report = ScalingReport {
        manifest: manifest.finish(),
        loss,
        points,
        fit,
        error: failure.as_ref().map(|f| f.to_string()),
    };
    emit(args.out.as_deref(), &to_pretty_json(&report))?;
    if let Some(f) = failure {
        return Err(f);
    }
    let suspect = report.points.iter().filter(|p| p.suspect).count();
    strict_check(args.search.strict, suspect)
}
