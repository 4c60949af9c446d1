use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn equiweyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equiweyl")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, edits: &[(&str, serde_json::Value)]) -> String {
    let mut cfg = serde_json::json!({
        "group_family": "dihedral", "group_k": 4, "space_dim": 2,
        "domain_shape": "cube", "domain_half_width_length": 0.5,
        "operator": "laplacian",
        "h_length": 1.0 / 33.0,
        "lambda_min": 100.0, "lambda_max": 1500.0, "lambda_points": 6,
        "quadrature_spacing_length": 0.01, "angular_nodes": 16,
        "mc_samples": 50000, "seed": 3,
        "ratio_tolerance": 0.6, "min_predicted_count": 10.0, "remainder_slope_max": 3.0
    });
    for (k, v) in edits {
        cfg[*k] = v.clone();
    }
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn table_lists_every_irrep() {
    let out = equiweyl(&["table", "dihedral", "4", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn kappa_of_the_half_turn() {
    let out = equiweyl(&["kappa", "cyclic", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.ends_with(",0,2"), "{row}");
}

#[test]
fn verify_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &[]);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = equiweyl(&["verify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(["counts.csv", "fits.csv", "report.json"].map(|f| fs::read(out_dir.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn failing_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &[("ratio_tolerance", serde_json::json!(1e-6))]);
    let out_dir = dir.path().join("out");
    let out = equiweyl(&["verify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &[("lambda_points", serde_json::json!(0))]);
    assert_eq!(equiweyl(&["verify", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        &[
            ("domain_shape", serde_json::json!("ball")),
            ("domain_half_width_length", serde_json::Value::Null),
            ("domain_radius_length", serde_json::json!(0.5)),
        ],
    );
    let out_dir = dir.path().join("c");
    assert_eq!(equiweyl(&["compare", "--config", &cfg, "--out", out_dir.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn csv_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &[]);
    let mm = dir.path().join("l.mtx");
    let out = equiweyl(&["spectrum", "--config", &cfg, "--matrix-market", mm.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&mm).unwrap().starts_with("%%MatrixMarket"));

    let out = equiweyl(&["count", "--config", &cfg, "--lambda", "500"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("lambda,chi,label,count"));
    assert_eq!(text.lines().count(), 6);

    for args in [
        vec!["predict", "--config", &cfg],
        vec!["weyl-volume", "--config", &cfg],
        vec!["weyl-volume", "--config", &cfg, "--mode", "monte-carlo"],
    ] {
        let out = equiweyl(&args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with("lambda,"));
        assert!(text.lines().next().unwrap().contains("value,stderr,method,seed"));
    }

    let out = equiweyl(&["check-domain", "--config", &cfg, "--samples", "20000"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains(",true"));

    let out = equiweyl(&["compare", "--config", &cfg, "--out", dir.path().join("cmp").to_str().unwrap()]);
    assert!(out.status.success());
}
