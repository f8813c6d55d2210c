//! File output: legacy-VTK ASCII structured-points snapshots for
//! visualization, CSV snapshots and diagnostics tables for test consumption.
//! All files are written atomically (temp file + rename), so a killed run
//! never leaves a truncated file behind under the advertised name.

use crate::diagnostics::DiagnosticsReport;
use crate::grid::{Grid, ScalarField};
use crate::model::State;
use crate::tensor::deviator;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::SimError;

/// Write-temp-then-rename; the temp file lives in the target directory so
/// the rename is atomic on the same filesystem.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), SimError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn push_scalar_point_data(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "SCALARS {name} double 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
}

/// Legacy-VTK ASCII structured-points snapshot: nodal temperature fields and
/// displacement as point data, cell-averaged stress measures as cell data.
pub fn vtk_snapshot(grid: &Grid, state: &State, theta_tilde: &ScalarField) -> String {
    let nn = grid.n_nodes();
    let nc = grid.n_cells();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "thermoplast snapshot t = {}", state.t);
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", grid.nx() + 1, grid.ny() + 1);
    let _ = writeln!(out, "ORIGIN 0 0 0");
    let _ = writeln!(out, "SPACING {} {} {}", grid.h(), grid.h(), grid.h());
    let _ = writeln!(out, "POINT_DATA {nn}");
    push_scalar_point_data(&mut out, "theta", &state.theta);
    let theta_hat: Vec<f64> = state
        .theta
        .iter()
        .zip(theta_tilde)
        .map(|(a, b)| a + b)
        .collect();
    push_scalar_point_data(&mut out, "theta_hat", &theta_hat);
    let _ = writeln!(out, "VECTORS displacement double");
    for n in 0..nn {
        let _ = writeln!(out, "{} {} 0", state.u[2 * n], state.u[2 * n + 1]);
    }
    let _ = writeln!(out, "CELL_DATA {nc}");
    let mut dev_norm = vec![0.0; nc];
    let mut plastic_norm = vec![0.0; nc];
    for c in 0..nc {
        for q in 0..4 {
            dev_norm[c] += 0.25 * deviator(&state.stress[4 * c + q]).norm();
            plastic_norm[c] += 0.25 * state.eps_p[4 * c + q].norm();
        }
    }
    push_scalar_point_data(&mut out, "dev_stress_norm", &dev_norm);
    push_scalar_point_data(&mut out, "plastic_strain_norm", &plastic_norm);
    out
}

/// CSV snapshot: node index, coordinates, displacement and temperatures.
pub fn csv_snapshot(grid: &Grid, state: &State, theta_tilde: &ScalarField) -> String {
    let mut out = String::from("node,x,y,ux,uy,theta,theta_tilde\n");
    for n in 0..grid.n_nodes() {
        let (x, y) = grid.node_coords(n);
        let _ = writeln!(
            out,
            "{n},{x},{y},{},{},{},{}",
            state.u[2 * n],
            state.u[2 * n + 1],
            state.theta[n],
            theta_tilde[n]
        );
    }
    out
}

/// Per-step diagnostics table, one row per recorded time.
pub fn diagnostics_csv(report: &DiagnosticsReport) -> String {
    let mut out = String::from(
        "step,t,stress_energy,viscous_work,theta_mass,trunc_gradient,dissipation_min,m_lambda,m_lambda_residual,stress_rate_norm,boccardo_norm,picard_iters\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            r.stress_energy,
            r.viscous_work,
            r.theta_mass,
            r.trunc_gradient,
            r.dissipation_min,
            r.m_lambda,
            r.m_lambda_residual,
            r.stress_rate_norm,
            r.boccardo_norm,
            r.picard_iters
        );
    }
    out
}

/// Human-readable summary with pass/fail verdicts for the sign and trace
/// checks and the truncation-tail trend.
pub fn summary_text(report: &DiagnosticsReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(
        out,
        "dissipation_min = {:e}  [{}] (threshold >= -1e-12)",
        s.dissipation_min,
        verdict(s.dissipation_min >= -1e-12)
    );
    let _ = writeln!(
        out,
        "max |tr eps_p| = {:e}  [{}] (threshold <= 1e-12)",
        s.max_trace_eps_p,
        verdict(s.max_trace_eps_p <= 1e-12)
    );
    let tail_ok = s
        .trunc_tail
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1e-14);
    let _ = writeln!(out, "trunc_tail nonincreasing = {}  [{}]", tail_ok, verdict(tail_ok));
    for (k, v) in &s.trunc_tail {
        let _ = writeln!(out, "trunc_tail K={k}: {v:e}");
    }
    let _ = writeln!(out, "stress_rate_norm = {:e}", s.stress_rate_norm);
    let _ = writeln!(out, "boccardo_norm = {:e}", s.boccardo_norm);
    for (m, v) in &s.renorm_residuals {
        let _ = writeln!(out, "renorm_residual M={m}: {v:e}");
    }
    out
}

/// Table of consecutive-pair Cauchy metrics per output time.
pub fn cauchy_csv(times: &[f64], lambdas: &[f64], rows: &[Vec<Option<f64>>]) -> String {
    let mut out = String::from("t");
    for pair in lambdas.windows(2) {
        let _ = write!(out, ",pair_{}_{}", pair[0], pair[1]);
    }
    out.push('\n');
    for (t, row) in times.iter().zip(rows) {
        let _ = write!(out, "{t}");
        for v in row {
            match v {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => {
                    let _ = write!(out, ",failed");
                }
            }
        }
        out.push('\n');
    }
    out
}
