//! Exit-code contract of the binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermoplast"))
}

#[test]
fn unknown_command_is_config_error() {
    let status = bin().arg("frobnicate").output().unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn missing_config_file_is_config_error() {
    let status = bin()
        .args(["run", "--config", "/no/such/file.cfg"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn invalid_config_value_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "flow.alpha = 0.9\n").unwrap();
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("flow.alpha"), "{stderr}");
}

#[test]
fn mms_command_reports_orders() {
    let out = bin()
        .args(["mms", "--resolutions", "8,16,32"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("elasticity"), "{stdout}");
    assert!(stdout.contains("observed order"), "{stdout}");
}

#[test]
fn nonconverging_solver_is_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("stuck.cfg");
    // iteration cap passing the diffusion solves but failing the first
    // momentum solve: the run aborts at step 1 with partial outputs flushed
    std::fs::write(
        &cfg,
        "scenario = shear_ramp\ngrid.nx = 8\ngrid.ny = 8\ntime.t_end = 0.01\ntime.dt = 0.005\nsolver.cg_maxit = 20\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("step 1"), "{stderr}");
    // partial outputs are flushed: config echo plus the initial snapshot
    assert!(out_dir.join("config.echo").exists());
    assert!(out_dir.join("diagnostics.csv").exists());
    assert!(out_dir.join("snapshots").join("step_000000.vtk").exists());
}
