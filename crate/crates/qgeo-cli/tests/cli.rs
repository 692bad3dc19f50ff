//! End-to-end checks of the `qgeo` binary: exit codes, error reporting,
//! CSV shapes, and stdout/file equivalence.

use std::path::{Path, PathBuf};
use std::process::Output;

fn qgeo(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_qgeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Parses a CSV body into named columns.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse::<f64>().unwrap())
        .collect()
}

const RHO_80_20: &str = r#"{"dim": 2, "real": [0.8, 0.0, 0.0, 0.2], "imag": [0.0, 0.0, 0.0, 0.0]}"#;
const SIGMA_X_HALF: &str =
    r#"{"dim": 2, "real": [0.0, 0.5, 0.5, 0.0], "imag": [0.0, 0.0, 0.0, 0.0]}"#;

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let checks: Vec<(&str, PathBuf)> = vec![
        (
            "malformed json",
            write_cfg(dir.path(), "broken.json", r#"{"mode": "unitary", "#),
        ),
        (
            "unknown field",
            write_cfg(
                dir.path(),
                "unknown.json",
                &format!(
                    r#"{{"mode": "unitary", "rho0": {RHO_80_20}, "hamiltonian": {SIGMA_X_HALF},
                        "grid": {{"start": 0.0, "stop": 0.001, "points": 3}}, "typo": 1}}"#
                ),
            ),
        ),
        (
            "non-hermitian hamiltonian",
            write_cfg(
                dir.path(),
                "skew.json",
                &format!(
                    r#"{{"mode": "unitary", "rho0": {RHO_80_20},
                        "hamiltonian": {{"dim": 2, "real": [0.0, 1.0, 0.5, 0.0], "imag": [0.0, 0.0, 0.0, 0.0]}},
                        "grid": {{"start": 0.0, "stop": 0.001, "points": 3}}}}"#
                ),
            ),
        ),
        (
            "single-point grid",
            write_cfg(
                dir.path(),
                "grid.json",
                &format!(
                    r#"{{"mode": "unitary", "rho0": {RHO_80_20}, "hamiltonian": {SIGMA_X_HALF},
                        "grid": {{"start": 0.0, "stop": 0.001, "points": 1}}}}"#
                ),
            ),
        ),
        (
            "tabulated state count mismatch",
            write_cfg(
                dir.path(),
                "tab.json",
                &format!(
                    r#"{{"mode": "tabulated", "states": [{RHO_80_20}],
                        "grid": {{"start": 0.0, "stop": 1.0, "points": 3}}}}"#
                ),
            ),
        ),
    ];
    for (what, cfg) in &checks {
        let out = qgeo(&["metric-path", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{what}: {}", stderr_str(&out));
        assert!(stderr_str(&out).starts_with("error:"), "{what}");
    }

    // Missing config file and non-positive tolerance are config errors too.
    let out = qgeo(&["metric-path", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
    let good = write_cfg(
        dir.path(),
        "good.json",
        &format!(
            r#"{{"mode": "unitary", "rho0": {RHO_80_20}, "hamiltonian": {SIGMA_X_HALF},
                "grid": {{"start": 0.0, "stop": 0.001, "points": 3}}}}"#
        ),
    );
    let out = qgeo(&[
        "metric-path",
        "--config",
        good.to_str().unwrap(),
        "--tol",
        "-1.0",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_str(&out));
}

#[test]
fn numerical_failures_exit_with_3_and_name_the_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let degenerate = write_cfg(
        dir.path(),
        "mixed.json",
        &format!(
            r#"{{"mode": "unitary",
                "rho0": {{"dim": 2, "real": [0.5, 0.0, 0.0, 0.5], "imag": [0.0, 0.0, 0.0, 0.0]}},
                "hamiltonian": {SIGMA_X_HALF},
                "grid": {{"start": 0.0, "stop": 0.001, "points": 3}}}}"#
        ),
    );
    let out = qgeo(&["metric-path", "--config", degenerate.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_str(&out));
    let err = stderr_str(&out);
    assert!(err.contains("degenerate"), "{err}");
    assert!(err.contains("at parameter value"), "{err}");

    // Without the field the two-site chain keeps its threefold level, so
    // the susceptibility sum has vanishing gaps.
    let thermal = write_cfg(
        dir.path(),
        "thermal.json",
        r#"{"model": {"kind": "chain", "sites": 2, "coupling": 1.0}, "field": 0.0,
            "beta_grid": {"start": 0.5, "stop": 0.9, "points": 3}}"#,
    );
    let out = qgeo(&["thermal-scan", "--config", thermal.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_str(&out));
    assert!(
        stderr_str(&out).contains("degenerate"),
        "{}",
        stderr_str(&out)
    );
}

#[test]
fn metric_path_reports_the_known_unitary_speed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "path.json",
        &format!(
            r#"{{"mode": "unitary", "rho0": {RHO_80_20}, "hamiltonian": {SIGMA_X_HALF},
                "grid": {{"start": 0.0, "stop": 0.0002, "points": 3}}}}"#
        ),
    );
    let out = qgeo(&["metric-path", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let csv = stdout_str(&out);
    let speeds = column(&csv, "speed");
    assert_eq!(speeds.len(), 1, "one interior point on a 3-point grid");
    assert!((speeds[0] - 0.5).abs() < 1e-6, "speed {}", speeds[0]);
    let discrete = column(&csv, "ds2_discrete")[0];
    let differential = column(&csv, "ds2_differential")[0];
    assert!((discrete - differential).abs() < 1e-12);
    // Probabilities stay fixed under conjugation, so the classical part
    // vanishes and the projective part carries everything.
    assert!(column(&csv, "fisher_rao")[0].abs() < 1e-20);
    let fs = column(&csv, "fubini_study")[0];
    assert!((fs - differential).abs() < 1e-20);
}

#[test]
fn metric_path_tabulated_constant_states_have_zero_length() {
    let dir = tempfile::tempdir().unwrap();
    let state = r#"{"dim": 2, "real": [0.7, 0.1, 0.1, 0.3], "imag": [0.0, 0.0, 0.0, 0.0]}"#;
    let cfg = write_cfg(
        dir.path(),
        "tab.json",
        &format!(
            r#"{{"mode": "tabulated", "states": [{state}, {state}, {state}],
                "grid": {{"start": 0.0, "stop": 1.0, "points": 3}}}}"#
        ),
    );
    let out = qgeo(&["metric-path", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let csv = stdout_str(&out);
    // The chord picks up one ulp of cancellation noise in the total mass;
    // the differential columns come out exactly zero.
    assert!(column(&csv, "ds2_discrete")
        .iter()
        .all(|&v| v.abs() < 1e-14));
    for name in ["ds2_differential", "fisher_rao", "speed"] {
        assert!(column(&csv, name).iter().all(|&v| v == 0.0), "{name}");
    }
}

#[test]
fn geodesic_gallery_has_eight_curves_with_exact_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "gallery.json", r#"{"curve": "gallery"}"#);
    let out = qgeo(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let csv = stdout_str(&out);
    assert_eq!(csv.lines().next().unwrap(), "r1,theta12,theta,x,z");
    assert_eq!(csv.lines().count(), 1601);
    let xs = column(&csv, "x");
    let zs = column(&csv, "z");
    let r1s = column(&csv, "r1");
    for c in 0..8 {
        let (first, last) = (200 * c, 200 * c + 199);
        assert_eq!(xs[first], 0.0);
        assert!((zs[first] - r1s[first]).abs() <= 1e-15);
        assert!((xs[last].hypot(zs[last]) - 0.05).abs() <= 1e-15);
    }
}

#[test]
fn geodesic_custom_curve_matches_its_closed_form_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "custom.json",
        r#"{"curve": "custom", "r1": 0.8, "r2": 0.3, "theta12": 1.2, "points": 41}"#,
    );
    let out = qgeo(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let csv = stdout_str(&out);
    assert_eq!(csv.lines().count(), 42);
    let closed = column(&csv, "r_closed");
    let numeric = column(&csv, "r_numeric");
    for (c, n) in closed.iter().zip(numeric.iter()) {
        assert!((c - n).abs() < 1e-9);
    }
    let lc = column(&csv, "length_closed");
    let ln = column(&csv, "length_numeric");
    assert!((lc[0] - ln[0]).abs() < 1e-12);
    assert!(lc.iter().all(|&v| v == lc[0]), "length repeats per row");
}

#[test]
fn interfere_reads_out_the_dispersion_and_purified_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "interfere.json",
        &format!(
            r#"{{"rho": {RHO_80_20}, "hamiltonian": {SIGMA_X_HALF},
                "delta_t": 0.01, "delta_p": [0.001, -0.001]}}"#
        ),
    );
    let out = qgeo(&["interfere", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("missing {key} in:\n{text}"))
            .parse()
            .unwrap()
    };
    // Both eigenvectors disperse at 1/4 under sigma_x/2, so the visibility
    // drop reads out 4(1 - P0max)/dt^2 = 1/4 up to O(dt^2).
    let readout = 4.0 * (1.0 - value("p0_max")) / (0.01f64 * 0.01);
    assert!((readout - 0.25).abs() < 1e-4, "readout {readout}");
    let ratio = value("residual_halving_ratio");
    assert!((6.0..=20.0).contains(&ratio), "ratio {ratio}");
    let p0_purified = value("purified_p0");
    let prediction = value("purified_prediction");
    assert!((p0_purified - prediction).abs() < 1e-8);
}

#[test]
fn thermal_scan_commuting_chain_has_no_fidelity_term() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "thermal.json",
        r#"{"model": {"kind": "chain", "sites": 2, "coupling": 1.0}, "field": 0.65,
            "beta_grid": {"start": 0.5, "stop": 0.9, "points": 3}}"#,
    );
    let out = qgeo(&["thermal-scan", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let csv = stdout_str(&out);
    assert!(column(&csv, "sum_p_chiF").iter().all(|&v| v == 0.0));
    for name in ["rel_err_dbeta", "rel_err_db"] {
        assert!(column(&csv, name).iter().all(|&v| v < 1e-5), "{name}");
    }
    assert_eq!(column(&csv, "beta").len(), 3);
}

#[test]
fn stdout_and_file_output_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "custom.json",
        r#"{"curve": "custom", "r1": 0.6, "r2": 0.4, "theta12": 0.9, "points": 11}"#,
    );
    let to_stdout = qgeo(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert!(to_stdout.status.success());
    let out_path = dir.path().join("curve.csv");
    let to_file = qgeo(&[
        "geodesic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&out_path).unwrap(), to_stdout.stdout);
}

#[test]
fn fuzz_seed_selects_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "fuzz.json",
        r#"{"mode": "fuzz", "pairs": 20, "min_dim": 2, "max_dim": 4}"#,
    );
    let a = qgeo(&["bures", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    let b = qgeo(&["bures", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    let c = qgeo(&["bures", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, c.stdout, "same seed, same report");
    assert_ne!(a.stdout, b.stdout, "different seed, different sample");
}
