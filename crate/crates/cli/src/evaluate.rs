use std::f64::consts::PI;
use std::path::Path;

use lio::channels::{loss_channel, phase_shift};
use lio::metrology::{Interferometer, Outcome as Detection, SensitivityReport};
use lio::{LossSpec, PureState};
use serde::Serialize;
use serde_json::Value;

use crate::failure::{Failure, Outcome};
use crate::grid::PhaseChoice;
use crate::manifest::{to_pretty_json, write_atomic, ManifestBuilder, RunManifest};
use crate::optimize::emit;
use crate::EvaluateArgs;

/// Points in the phase scan behind `--phi best`.
const PHASE_SCAN_POINTS: usize = 720;

#[derive(Debug, Serialize)]
struct EvaluationReport {
    manifest: RunManifest,
    n: usize,
    loss: LossSpec,
    phi: f64,
    fisher: f64,
    delta_phi: f64,
    delta_phi_tilde: f64,
    phase_sensitive: bool,
    note: Option<&'static str>,
    total_probability: f64,
    outcomes: Vec<Detection>,
}

/// Settings recorded next to a state in a result file.
#[derive(Debug, Default)]
struct Recorded {
    loss: Option<LossSpec>,
    phi0: Option<f64>,
}

/// Reads a bare state file, or the `state` field of a result file together
/// with the loss and phase it was optimized for.
fn read_state(path: &Path) -> Outcome<(PureState, Recorded)> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(e).context(format!("cannot read {}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::input(e).context(format!("{} is not valid JSON", path.display())))?;
    let bad = |e: lio::Error| Failure::from(e).context(format!("bad state in {}", path.display()));
    match value.get("state") {
        Some(inner) if value.get("amplitudes").is_none() => {
            let state = PureState::from_json(&inner.to_string()).map_err(bad)?;
            let loss = value
                .get("loss")
                .map(|l| serde_json::from_value::<LossSpec>(l.clone()))
                .transpose()
                .map_err(|e| Failure::input(e).context(format!("bad loss in {}", path.display())))?;
            Ok((state, Recorded { loss, phi0: value.get("phi0").and_then(Value::as_f64) }))
        }
        _ => Ok((PureState::from_json(&value.to_string()).map_err(bad)?, Recorded::default())),
    }
}

/// Largest F over an offset grid in `[0, 2π)`; the offset keeps the scan off
/// the dark fringes of real-amplitude states.
fn best_phase(model: &Interferometer, state: &PureState) -> Outcome<SensitivityReport> {
    let mut best: Option<SensitivityReport> = None;
    for k in 0..PHASE_SCAN_POINTS {
        let phi = (k as f64 + 0.5) * 2.0 * PI / PHASE_SCAN_POINTS as f64;
        let report = model.sensitivity(state, phi)?;
        if best.is_none_or(|b| report.fisher > b.fisher) {
            best = Some(report);
        }
    }
    Ok(best.expect("scan is non-empty"))
}

pub fn run(args: &EvaluateArgs) -> Outcome {
    let (state, recorded) = read_state(&args.state)?;
    let loss = LossSpec::new(
        args.ra.or(recorded.loss.map(|l| l.r_a_db())).unwrap_or(0.0),
        args.rb.or(recorded.loss.map(|l| l.r_b_db())).unwrap_or(0.0),
    )?;
    let phi = args.phi.unwrap_or(PhaseChoice::Value(recorded.phi0.unwrap_or(0.0)));
    let mut manifest = ManifestBuilder::new("evaluate", args, None);
    manifest.input(&args.state);
    let model = Interferometer::new(state.n(), loss);
    let report = match phi {
        PhaseChoice::Value(phi) => model.sensitivity(&state, phi)?,
        PhaseChoice::Best => best_phase(&model, &state)?,
    };
    let phi = report.phi_evaluated;
    let outcomes = model.outcomes(&state, phi)?;
    let sensitive = report.has_phase_sensitivity();
    if !sensitive {
        eprintln!("note: no phase sensitivity (F = 0)");
    }

    if let Some(path) = &args.density {
        manifest.output(path);
        let rho = loss_channel(&phase_shift(&state, phi), &loss);
        write_atomic(path, &to_pretty_json(&rho.to_json()))?;
    }
    if let Some(path) = &args.out {
        manifest.output(path);
    }
    let out = EvaluationReport {
        manifest: manifest.finish(),
        n: state.n(),
        loss,
        phi,
        fisher: report.fisher,
        delta_phi: report.delta_phi,
        delta_phi_tilde: report.delta_phi_tilde,
        phase_sensitive: sensitive,
        note: (!sensitive).then_some("no phase sensitivity"),
        total_probability: outcomes.total_probability(),
        outcomes: outcomes.outcomes,
    };
    let bytes = to_pretty_json(&out);
    if let Some(path) = &args.out {
        write_atomic(path, &bytes)?;
    }
    emit(None, &bytes)
}
