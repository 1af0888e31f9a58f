use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use lio::benchmarks::overlap_summary;
use lio::metrology::{classical_fisher, classical_fisher_optimized, Interferometer};
use lio::optimize::{optimize, OptimizationResult};
use lio::{LossSpec, PureState};
use serde::Serialize;
use serde_json::{json, Value};

use crate::failure::{Failure, Outcome};
use crate::manifest::{sidecar_path, to_pretty_json, write_atomic, ManifestBuilder};
use crate::optimize::{config, emit, resolve_seed, strict_check, warn_if_suspect, ResultFile};
use crate::{CharacterizeArgs, SearchArgs, SweepArgs};

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Outcome<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(Failure::numerical)?;
    }
    writer.into_inner().map_err(|e| Failure::numerical(anyhow::anyhow!("{e}")))
}

#[derive(Debug, Serialize)]
struct FailedPoint {
    ra_db: f64,
    rb_db: f64,
    error: String,
}

/// Optimizes every `(R_A, R_B)` point in order, collecting failures instead
/// of stopping.
fn optimize_points(
    n: usize,
    points: &[(f64, f64)],
    search: &SearchArgs,
    seed: u64,
) -> Outcome<Vec<Result<OptimizationResult, FailedPoint>>> {
    let mut out = Vec::with_capacity(points.len());
    for &(ra, rb) in points {
        let loss = LossSpec::new(ra, rb)?;
        let cfg = config(n, loss, search, seed)?;
        match optimize(&cfg) {
            Ok(r) => {
                warn_if_suspect(&format!("R_A = {ra} dB, R_B = {rb} dB"), r.spread, r.suspect);
                out.push(Ok(r));
            }
            Err(e) => {
                eprintln!("warning: R_A = {ra} dB, R_B = {rb} dB failed: {e}");
                out.push(Err(FailedPoint { ra_db: ra, rb_db: rb, error: e.to_string() }));
            }
        }
    }
    Ok(out)
}

/// Coherent-light `δφ̃ = 1/√(F/n̄)` with loss `ra_db` in the phase arm.
fn classical_tilde(ra_db: f64) -> lio::Result<(f64, f64)> {
    let t = LossSpec::new(ra_db, 0.0)?.t_a();
    Ok((classical_fisher(t, FRAC_PI_4)?.powf(-0.5), classical_fisher_optimized(t)?.powf(-0.5)))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    n: usize,
    ra_db: f64,
    rb_db: f64,
    fisher: Option<f64>,
    delta_phi: Option<f64>,
    delta_phi_tilde: Option<f64>,
    ov_noon: Option<f64>,
    ov_mm: Option<f64>,
    ov_gpcs: Option<f64>,
    cl_fixed: f64,
    cl_opt: f64,
    spread: Option<f64>,
}

fn write_with_sidecar(out: Option<&Path>, csv: &[u8], manifest: &mut ManifestBuilder, meta: Value) -> Outcome {
    match out {
        Some(path) => {
            let sidecar = sidecar_path(path);
            manifest.output(path);
            manifest.output(&sidecar);
            write_atomic(path, csv)?;
            let mut meta = meta;
            meta["manifest"] = serde_json::to_value(manifest.finish()).expect("manifest serializes");
            write_atomic(&sidecar, &to_pretty_json(&meta))
        }
        None => emit(None, csv),
    }
}

pub fn run_sweep(args: &SweepArgs) -> Outcome {
    let seed = resolve_seed(args.search.seed);
    let points: Vec<(f64, f64)> = args.ra_range.points().into_iter().map(|ra| (ra, args.rb.at(ra))).collect();
    for &(ra, rb) in &points {
        LossSpec::new(ra, rb)?;
    }
    config(args.n, LossSpec::lossless(), &args.search, seed)?;
    let mut manifest = ManifestBuilder::new("sweep", args, Some(seed));
    let results = optimize_points(args.n, &points, &args.search, seed)?;

    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut states = Vec::new();
    let mut suspect = 0;
    for (&(ra, rb), result) in points.iter().zip(results) {
        let (cl_fixed, cl_opt) = classical_tilde(ra)?;
        let mut row = SweepRow {
            n: args.n,
            ra_db: ra,
            rb_db: rb,
            fisher: None,
            delta_phi: None,
            delta_phi_tilde: None,
            ov_noon: None,
            ov_mm: None,
            ov_gpcs: None,
            cl_fixed,
            cl_opt,
            spread: None,
        };
        match result {
            Ok(r) => {
                row.fisher = Some(r.fisher);
                row.delta_phi = Some(r.delta_phi);
                row.delta_phi_tilde = Some(r.delta_phi_tilde);
                if let Some(o) = r.overlaps {
                    (row.ov_noon, row.ov_mm, row.ov_gpcs) = (Some(o.noon), Some(o.mm), Some(o.gpcs));
                }
                row.spread = Some(r.spread);
                suspect += usize::from(r.suspect);
                states.push(json!({ "ra_db": ra, "rb_db": rb, "state": r.state }));
            }
            Err(f) => failures.push(f),
        }
        rows.push(row);
    }

    let failed = failures.len();
    let meta = json!({
        "columns": {
            "fisher": "largest Fisher information found",
            "delta_phi": "1/sqrt(F)",
            "delta_phi_tilde": "delta_phi * sqrt(N)",
            "ov_noon": "best squared overlap with a N00N state",
            "ov_mm": "best squared overlap with an M&M' state",
            "ov_gpcs": "best squared overlap with a generalized coherent state",
            "cl_fixed": "coherent-light 1/sqrt(F/n) with a 50-50 first splitter and loss ra_db",
            "cl_opt": "coherent-light 1/sqrt(F/n) with a tuned first splitter and loss ra_db",
            "spread": "relative disagreement between optimizer families",
        },
        "failures": failures,
        "states": states,
    });
    write_with_sidecar(args.out.as_deref(), &csv_bytes(&rows)?, &mut manifest, meta)?;
    if failed > 0 {
        eprintln!("warning: {failed} sweep point(s) failed");
    }
    strict_check(args.search.strict, suspect)
}

/// First grid loss at which the GPCS overlap exceeds the N00N overlap, and
/// the linearly interpolated crossing just below it.
pub fn noon_gpcs_crossover(points: &[(f64, f64, f64)]) -> (Option<f64>, Option<f64>) {
    let Some(i) = points.iter().position(|&(_, noon, gpcs)| gpcs > noon) else {
        return (None, None);
    };
    let (ra, noon, gpcs) = points[i];
    if i == 0 {
        return (Some(ra), Some(ra));
    }
    let (ra0, noon0, gpcs0) = points[i - 1];
    let (d0, d1) = (noon0 - gpcs0, noon - gpcs);
    (Some(ra), Some(ra0 + (ra - ra0) * d0 / (d0 - d1)))
}

struct Characterized {
    ra_db: f64,
    rb_db: f64,
    state: PureState,
    fisher: f64,
    delta_phi_tilde: f64,
    noon: Option<f64>,
    mm: Option<f64>,
    gpcs: Option<f64>,
}

pub fn run_characterize(args: &CharacterizeArgs) -> Outcome {
    let mut manifest;
    let (n, entries) = if let Some(path) = &args.result {
        let file = ResultFile::read(path)?;
        manifest = ManifestBuilder::new("characterize", args, file.manifest.seed);
        manifest.input(path);
        let overlaps = if file.n > 0 { Some(overlap_summary(&file.state)?) } else { None };
        let report = Interferometer::new(file.n, file.loss).sensitivity(&file.state, file.phi0)?;
        let entry = Characterized {
            ra_db: file.loss.r_a_db(),
            rb_db: file.loss.r_b_db(),
            fisher: report.fisher,
            delta_phi_tilde: report.delta_phi_tilde,
            noon: overlaps.map(|o| o.noon),
            mm: overlaps.map(|o| o.mm),
            gpcs: overlaps.map(|o| o.gpcs),
            state: file.state,
        };
        (file.n, vec![entry])
    } else {
        let n = args.n.expect("clap requires --n without --result");
        let seed = resolve_seed(args.search.seed);
        let points: Vec<(f64, f64)> = args.ra_range.points().into_iter().map(|ra| (ra, args.rb)).collect();
        for &(ra, rb) in &points {
            LossSpec::new(ra, rb)?;
        }
        config(n, LossSpec::lossless(), &args.search, seed)?;
        manifest = ManifestBuilder::new("characterize", args, Some(seed));
        let mut entries = Vec::new();
        for result in optimize_points(n, &points, &args.search, seed)? {
            let r = result.map_err(|f| Failure::numerical(anyhow::anyhow!("R_A = {} dB: {}", f.ra_db, f.error)))?;
            entries.push(Characterized {
                ra_db: r.loss.r_a_db(),
                rb_db: r.loss.r_b_db(),
                fisher: r.fisher,
                delta_phi_tilde: r.delta_phi_tilde,
                noon: r.overlaps.map(|o| o.noon),
                mm: r.overlaps.map(|o| o.mm),
                gpcs: r.overlaps.map(|o| o.gpcs),
                state: r.state,
            });
        }
        (n, entries)
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["n", "ra_db", "rb_db"].iter().map(|s| s.to_string()).collect();
    header.extend((0..=n).map(|k| format!("c2_{k}")));
    header.extend(["ov_noon", "ov_mm", "ov_gpcs", "fisher", "delta_phi_tilde"].iter().map(|s| s.to_string()));
    writer.write_record(&header).map_err(Failure::numerical)?;
    let num = |x: f64| format!("{x:?}");
    let cell = |v: Option<f64>| v.map(num).unwrap_or_default();
    for e in &entries {
        let mut record = vec![n.to_string(), num(e.ra_db), num(e.rb_db)];
        record.extend(e.state.populations().into_iter().map(num));
        record.extend([cell(e.noon), cell(e.mm), cell(e.gpcs), num(e.fisher), num(e.delta_phi_tilde)]);
        writer.write_record(&record).map_err(Failure::numerical)?;
    }
    let csv = writer.into_inner().map_err(|e| Failure::numerical(anyhow::anyhow!("{e}")))?;

    let curve: Vec<(f64, f64, f64)> =
        entries.iter().filter_map(|e| Some((e.ra_db, e.noon?, e.gpcs?))).collect();
    let (first, interpolated) = noon_gpcs_crossover(&curve);
    let meta = json!({
        "axes": {
            "x": { "column": "ra_db", "label": "detection-arm loss R_A", "unit": "dB" },
            "composition": { "columns": format!("c2_0..c2_{n}"), "label": "|c_k|^2 of the optimal input, k photons in the control arm" },
            "overlaps": { "columns": ["ov_noon", "ov_mm", "ov_gpcs"], "label": "best squared overlap with each benchmark family" },
        },
        "crossover": { "first_gpcs_above_noon_db": first, "interpolated_db": interpolated },
        "states": entries.iter().map(|e| json!({ "ra_db": e.ra_db, "rb_db": e.rb_db, "state": e.state })).collect::<Vec<_>>(),
    });
    write_with_sidecar(args.out.as_deref(), &csv, &mut manifest, meta)
}
