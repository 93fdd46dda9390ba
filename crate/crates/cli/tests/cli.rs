use std::process::{Command, Output};

fn szilard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szilard"))
        .args(args)
        .output()
        .unwrap()
}

fn footer(csv: &str, key: &str) -> f64 {
    let prefix = format!("# {key}=");
    csv.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn forces_footer_reports_stopping_points() {
    let out = szilard(&[
        "forces",
        "--stats",
        "boson",
        "--n",
        "3",
        "--t",
        "1",
        "--x-grid",
        "0.1:0.9:9",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("x,F_m,F_avg,residual,W_m,fW_m\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 10);
    assert!((footer(&csv, "x_balance") - 0.4425).abs() < 1e-3);
    assert!((footer(&csv, "x_optimal") - 0.4869).abs() < 1e-3);
}

#[test]
fn sweep_columns_and_json() {
    let out = szilard(&[
        "sweep", "--n", "2", "--stats", "fermion", "--t-grid", "1:3:3", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for key in [
        "t",
        "l",
        "x_balance_1",
        "x_optimal_2",
        "W_balance_kT",
        "W_optimal_E0",
        "W_optimal_0",
        "l_residual",
    ] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(rows[2]["t"], 3.0);
}

#[test]
fn protocol_selection_drops_columns() {
    let out = szilard(&["sweep", "--protocol", "optimal", "--l-grid", "0.3:0.7:3"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.contains("W_optimal_kT") && !header.contains("W_balance_kT"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let out = dir.path().join("run.csv");
    std::fs::write(
        &conf,
        "# recipe\nstats = fermion\nn = 2\nt_grid = 1:2:2\nprotocol = balance\n",
    )
    .unwrap();
    let status = szilard(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--n",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().next().unwrap().contains("x_balance_3"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(szilard(&["sweep", "--l", "1.5"]).status.code(), Some(2));
    assert_eq!(
        szilard(&["sweep", "--stats", "anyon"]).status.code(),
        Some(2)
    );
    assert_eq!(
        szilard(&["sweep", "--t-grid", "1:2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        szilard(&["sweep", "--config", "/nonexistent/file"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(szilard(&["bogus"]).status.code(), Some(2));
    assert_eq!(szilard(&["forces", "--m", "7"]).status.code(), Some(2));
    // level sums past the truncation ceiling
    assert_eq!(szilard(&["forces", "--t", "1e12"]).status.code(), Some(1));
    assert_eq!(szilard(&["sweep", "--t", "1e12"]).status.code(), Some(1));
    assert!(szilard(&["forces", "--stats", "classical"])
        .status
        .success());
    let v = szilard(&["validate"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8(v.stdout)
        .unwrap()
        .contains("PASS oracle-equivalence"));
}
