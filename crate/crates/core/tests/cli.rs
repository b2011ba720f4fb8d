use std::process::{Command, Output};

fn sechlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sechlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn exit_codes() {
    assert_eq!(
        sechlab(&["theorem1", "--n", "2000", "--trials", "4", "--seed", "1"])
            .status
            .code(),
        Some(0)
    );
    let control = sechlab(&[
        "theorem1", "--dist", "uniform", "--n", "200", "--trials", "4", "--seed", "1",
    ]);
    assert_eq!(control.status.code(), Some(1));
    assert_eq!(sechlab(&["theorem1", "--n", "100"]).status.code(), Some(2));
    assert_eq!(
        sechlab(&["frobnicate", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        sechlab(&["index", "--seed", "1", "--tail-eps", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(sechlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_seed_is_explained() {
    let out = sechlab(&["dist"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--seed"), "{err}");
}

#[test]
fn csv_schemas() {
    let head = |args: &[&str]| {
        let out = sechlab(args);
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .next()
            .unwrap_or("")
            .to_string()
    };
    assert_eq!(
        head(&["theorem2", "--n", "100", "--trials", "2", "--seed", "5", "--format", "csv"]),
        "trial,statistic,p_value,reject"
    );
    assert_eq!(
        head(&[
            "fixed-point",
            "--depth",
            "12",
            "--seed",
            "5",
            "--format",
            "csv"
        ]),
        "t,f,residual,abs_err"
    );
    assert_eq!(
        head(&["index", "--n-param", "3", "--seed", "5", "--format", "csv"]),
        "k,p_k,cumulative"
    );
}

#[test]
fn json_report_echoes_config_and_version() {
    let out = sechlab(&[
        "random-sum",
        "--normalization",
        "inv-sqrt-n",
        "--m",
        "2000",
        "--trials",
        "2",
        "--seed",
        "9",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["normalization"], "inv-sqrt-n");
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["trials"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"seed": 4, "n": 500, "trials": 3, "dist": "laplace"}"#,
    )
    .unwrap();
    let out = sechlab(&["dist", "--config", path.to_str().unwrap(), "--trials", "2"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["n_samples"], 500);
    assert_eq!(report["config"]["trials"], 2);
    assert_eq!(report["config"]["dist"], "laplace");

    std::fs::write(&path, r#"{"seed": 4, "colour": "red"}"#).unwrap();
    let out = sechlab(&["dist", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
