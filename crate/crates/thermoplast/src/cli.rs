//! Command implementations behind the binary: run, sweep, verify, mms.
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 verification failure.

use crate::config::{parse_config, serialize_config, ParsedConfig};
use crate::coupled::{lambda_sweep, run_simulation_partial, RunResult};
use crate::diagnostics::{build_report, ReportParams};
use crate::error::SimError;
use crate::mms::{elasticity_mms, heat_neumann_mms, linear_exactness};
use crate::output::{
    cauchy_csv, csv_snapshot, diagnostics_csv, summary_text, vtk_snapshot, write_atomic,
};
use crate::sparse::CgParams;
use crate::verify::run_all;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Resolved invocation: configuration, output location, cadence, command
/// and the seed for the sampling suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Verify,
    Mms,
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub parsed: ParsedConfig,
    pub out_dir: PathBuf,
    pub snapshot_every: usize,
    pub seed: u64,
}

impl RunManifest {
    pub fn from_sources(
        command: Command,
        config_path: Option<PathBuf>,
        out_override: Option<PathBuf>,
        snapshot_override: Option<usize>,
        seed: u64,
    ) -> Result<Self, SimError> {
        let text = match &config_path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        let parsed = parse_config(&text)?;
        let out_dir = out_override.unwrap_or_else(|| PathBuf::from(&parsed.output.dir));
        let snapshot_every = snapshot_override.unwrap_or(parsed.output.snapshot_every);
        Ok(Self {
            command,
            config_path,
            parsed,
            out_dir,
            snapshot_every,
            seed,
        })
    }

    /// Create the output directory and echo the resolved configuration;
    /// this is always the first write.
    fn prepare_out_dir(&self, dir: &Path) -> Result<(), SimError> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("config.echo"), &serialize_config(&self.parsed))?;
        Ok(())
    }
}

fn snapshot_steps(n_states: usize, every: usize) -> Vec<usize> {
    let last = n_states - 1;
    let mut steps = Vec::new();
    let stride = every.max(1);
    let mut s = 0;
    while s < last {
        steps.push(s);
        s += stride;
    }
    steps.push(last);
    steps
}

fn write_run_outputs(
    manifest: &RunManifest,
    dir: &Path,
    run: &RunResult,
) -> Result<(), SimError> {
    let grid = run.cfg.grid();
    let snap_dir = dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;
    for step in snapshot_steps(run.states.len(), manifest.snapshot_every) {
        let state = &run.states[step];
        let tilde = &run.theta_tilde[step];
        write_atomic(
            &snap_dir.join(format!("step_{step:06}.vtk")),
            &vtk_snapshot(&grid, state, tilde),
        )?;
        write_atomic(
            &snap_dir.join(format!("step_{step:06}.csv")),
            &csv_snapshot(&grid, state, tilde),
        )?;
    }
    if manifest.parsed.output.dump_lift {
        let lift_dir = dir.join("lift");
        std::fs::create_dir_all(&lift_dir)?;
        for (n, tilde) in run.theta_tilde.iter().enumerate() {
            let mut text = String::from("node,theta_tilde\n");
            for (i, v) in tilde.iter().enumerate() {
                let _ = writeln!(text, "{i},{v}");
            }
            write_atomic(&lift_dir.join(format!("step_{n:06}.csv")), &text)?;
        }
    }
    let params = ReportParams {
        trunc_height: run.cfg.diag_trunc_k,
        boccardo_q: run.cfg.boccardo_q,
        ..ReportParams::default()
    };
    let report = build_report(run, &params)?;
    write_atomic(&dir.join("diagnostics.csv"), &diagnostics_csv(&report))?;
    write_atomic(&dir.join("summary.txt"), &summary_text(&report))?;
    Ok(())
}

/// Single simulation run with snapshots and diagnostics.
pub fn cmd_run(manifest: &RunManifest) -> i32 {
    if let Err(e) = manifest.prepare_out_dir(&manifest.out_dir) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match run_simulation_partial(&manifest.parsed.model) {
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
        Ok((run, failure)) => {
            if let Err(e) = write_run_outputs(manifest, &manifest.out_dir, &run) {
                eprintln!("error writing outputs: {e}");
                return EXIT_SOLVER;
            }
            match failure {
                None => {
                    println!(
                        "run complete: {} steps, outputs in {}",
                        run.n_steps(),
                        manifest.out_dir.display()
                    );
                    EXIT_OK
                }
                Some((step, e)) => {
                    eprintln!(
                        "error: step {step} failed ({e}); partial outputs flushed to {}",
                        manifest.out_dir.display()
                    );
                    EXIT_SOLVER
                }
            }
        }
    }
}

/// Lambda sweep: one run per value in per-lambda subdirectories plus the
/// consecutive-pair Cauchy table and a trend verdict.
pub fn cmd_sweep(manifest: &RunManifest, lambdas: &[f64]) -> i32 {
    if lambdas.len() < 2 {
        eprintln!("error: sweep needs at least two lambda values");
        return EXIT_CONFIG;
    }
    if let Err(e) = manifest.prepare_out_dir(&manifest.out_dir) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let sweep = match lambda_sweep(&manifest.parsed.model, lambdas) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let mut any_failed = false;
    for (lambda, run) in sweep.lambdas.iter().zip(&sweep.runs) {
        let sub = manifest.out_dir.join(format!("lambda_{lambda}"));
        match run {
            Ok(run) => {
                if let Err(e) = std::fs::create_dir_all(&sub)
                    .map_err(SimError::from)
                    .and_then(|_| write_run_outputs(manifest, &sub, run))
                {
                    eprintln!("error writing outputs for lambda = {lambda}: {e}");
                    any_failed = true;
                }
            }
            Err(e) => {
                eprintln!("member lambda = {lambda} failed: {e}");
                any_failed = true;
            }
        }
    }
    // Cauchy table over all steps present in every successful run
    let grid = manifest.parsed.model.grid();
    let d = manifest.parsed.model.elasticity();
    let n_states = sweep
        .runs
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|r| r.states.len()))
        .min()
        .unwrap_or(0);
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for step in 0..n_states {
        times.push(step as f64 * manifest.parsed.model.dt);
        rows.push(sweep.cauchy_at(step, &d, &grid));
    }
    if let Err(e) = write_atomic(
        &manifest.out_dir.join("cauchy.csv"),
        &cauchy_csv(&times, &sweep.lambdas, &rows),
    ) {
        eprintln!("error writing cauchy table: {e}");
        any_failed = true;
    }
    let verdict = match rows.last() {
        Some(last_row) if !last_row.is_empty() && last_row.iter().all(|v| v.is_some()) => {
            let vals: Vec<f64> = last_row.iter().map(|v| v.unwrap()).collect();
            let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
            format!(
                "final-time cauchy metrics {:?}: {}",
                vals,
                if decreasing {
                    "decreasing"
                } else {
                    "not decreasing"
                }
            )
        }
        _ => "final-time cauchy metrics unavailable (member failures)".to_string(),
    };
    println!("{verdict}");
    if write_atomic(
        &manifest.out_dir.join("sweep_summary.txt"),
        &format!("{verdict}\n"),
    )
    .is_err()
    {
        any_failed = true;
    }
    if any_failed {
        EXIT_SOLVER
    } else {
        EXIT_OK
    }
}

/// Sampling-based invariant suites; the CI gate.
pub fn cmd_verify(manifest: &RunManifest) -> i32 {
    let mut all_pass = true;
    for suite in run_all(manifest.seed) {
        println!(
            "[{}] {}: {}",
            if suite.pass { "PASS" } else { "FAIL" },
            suite.name,
            suite.detail
        );
        all_pass &= suite.pass;
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

/// Manufactured-solution convergence studies at h, h/2, h/4.
pub fn cmd_mms(resolutions: &[usize]) -> i32 {
    let cg = CgParams {
        tol: 1e-12,
        ..CgParams::default()
    };
    let d = crate::tensor::ElasticityTensor::new(1.0, 1.0).expect("default moduli");
    let mut ok = true;
    match elasticity_mms(resolutions, &d, &cg) {
        Ok(study) => {
            println!(
                "elasticity: errors {:?} -> observed order {:.3}",
                study.errors, study.observed_order
            );
            ok &= study.observed_order >= 1.8;
        }
        Err(e) => {
            eprintln!("elasticity study failed: {e}");
            ok = false;
        }
    }
    match heat_neumann_mms(resolutions, &cg) {
        Ok(study) => {
            println!(
                "heat_neumann: errors {:?} -> observed order {:.3}",
                study.errors, study.observed_order
            );
            ok &= study.observed_order >= 1.8;
        }
        Err(e) => {
            eprintln!("heat study failed: {e}");
            ok = false;
        }
    }
    match linear_exactness(resolutions[0], &cg) {
        Ok(err) => {
            println!("linear reproduction: max error {err:.3e}");
            ok &= err <= 1e-9;
        }
        Err(e) => {
            eprintln!("linear study failed: {e}");
            ok = false;
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn exit_code_for(e: &SimError) -> i32 {
    match e {
        SimError::Config { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}
