use std::process::Command;

fn pn_atom() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pn-atom"));
    cmd.env_remove("PN_ATOM_OUTPUT_DIR");
    cmd
}

#[test]
fn spectrum_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let status = pn_atom()
        .args(["spectrum", "--sweep", "phi_over_c2=0,-1e-6", "--output-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.starts_with("gamma,beta,phi_over_c2,c,n,l,E_coord"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn environment_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let status = pn_atom()
        .args(["maxwell-residual", "--format", "json"])
        .env("PN_ATOM_OUTPUT_DIR", dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("maxwell-residual.json").exists());
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[ppn]\ngamma = \"one\"\n").unwrap();
    let out = pn_atom()
        .args(["spectrum", "--config"])
        .arg(&path)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
    assert!(!dir.path().join("spectrum.csv").exists());
}

#[test]
fn bad_flags_are_usage_errors() {
    for args in [
        vec!["spectrum", "--sweep", "delta=1"],
        vec!["spectrum", "--format", "xml"],
        vec!["spectrum", "--phi-over-c2", "-0.5"],
        vec!["no-such-command"],
    ] {
        let out = pn_atom().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let out = pn_atom().args(["spectrum", "--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_drift_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "[ppn]\ngrad_phi = [0.0, 0.0, 1e-3]\n[trajectory]\ndt = 1000.0\nsteps = 20\nmomentum = [0.0, 0.0, 30000.0]\n",
    )
    .unwrap();
    let out = pn_atom()
        .args(["trajectory", "--strict", "--config"])
        .arg(&path)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: drift exceeds"));
}

#[test]
fn identical_runs_write_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let status = pn_atom()
            .args(["hamiltonian-report", "--seed", "42", "--points", "2", "--output-dir"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("hamiltonian-report.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
