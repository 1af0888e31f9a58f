use std::f64::consts::FRAC_PI_4;

use lio::fock::{amplitude_to_db, db_to_amplitude};
use lio::metrology::{classical_fisher, classical_fisher_optimized, optimal_splitter_angle};
use serde::Serialize;

use crate::failure::{Failure, Outcome};
use crate::grid::Range;
use crate::manifest::{sidecar_path, to_pretty_json, write_atomic, ManifestBuilder};
use crate::optimize::emit;
use crate::sweep::csv_bytes;
use crate::ClassicalArgs;

#[derive(Debug, Serialize)]
struct Row {
    t2: f64,
    r_db: f64,
    fixed: f64,
    optimized: f64,
    theta_opt: f64,
}

fn row(t: f64) -> Outcome<Row> {
    Ok(Row {
        t2: t * t,
        r_db: amplitude_to_db(t)?,
        fixed: classical_fisher(t, FRAC_PI_4)?,
        optimized: classical_fisher_optimized(t)?,
        theta_opt: optimal_splitter_angle(t)?,
    })
}

pub fn run(args: &ClassicalArgs) -> Outcome {
    let transmissions: Vec<f64> = match (&args.t_range, &args.ra_range) {
        (Some(t), _) => {
            let points = t.points();
            if points.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
                return Err(Failure::usage(anyhow::anyhow!("--t-range must lie in (0, 1], got {t}")));
            }
            points
        }
        (None, range) => {
            let range = range.unwrap_or(Range { start: 0.0, stop: 40.0, step: 1.0 });
            range.points().into_iter().map(|r| db_to_amplitude(r).map(|(t, _)| t)).collect::<lio::Result<_>>()?
        }
    };
    let rows = transmissions.into_iter().map(row).collect::<Outcome<Vec<_>>>()?;
    let bytes = csv_bytes(&rows)?;
    match &args.out {
        Some(path) => {
            let mut manifest = ManifestBuilder::new("classical", args, None);
            manifest.output(path);
            let sidecar = sidecar_path(path);
            manifest.output(&sidecar);
            write_atomic(path, &bytes)?;
            let meta = serde_json::json!({
                "manifest": manifest.finish(),
                "columns": {
                    "t2": "intensity transmission of the phase arm",
                    "r_db": "loss in dB",
                    "fixed": "F per mean photon, 50-50 first splitter",
                    "optimized": "F per mean photon, first splitter tuned to the loss",
                    "theta_opt": "tuned splitter angle in radians",
                },
            });
            write_atomic(&sidecar, &to_pretty_json(&meta))
        }
        None => emit(None, &bytes),
    }
}
