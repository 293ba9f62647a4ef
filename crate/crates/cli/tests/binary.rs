mod common;

use std::fs;
use std::process::Command;

use common::{read, write_fixture};

fn wind_atlas() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wind-atlas"));
    cmd.env_remove(wind_atlas_cli::DATA_DIR_ENV)
        .env("RUST_LOG", "warn");
    cmd
}

#[test]
fn run_then_atlas_from_results() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_fixture(&data, 0);
    let out = tmp.path().join("out");

    let status = wind_atlas()
        .args([
            "run",
            "--capacities",
            "200,800",
            "--jobs",
            "2",
            "--station-dir",
        ])
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(out.join("sweep.csv")).lines().count(), 3);

    let prefix = tmp.path().join("maps/finland");
    let output = wind_atlas()
        .args(["atlas", "--results"])
        .arg(&out)
        .arg("--out")
        .arg(&prefix)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_eq!(
        read(tmp.path().join("maps/finland.csv")),
        read(out.join("atlas.csv"))
    );
    assert!(read(tmp.path().join("maps/finland.svg")).contains("<circle"));
}

#[test]
fn env_var_config_file_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_fixture(&data, 0);
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "load = \"household\"\nbattery_wh = 1000.0\nkernel = \"naive\"\nout_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();

    let status = wind_atlas()
        .env(wind_atlas_cli::DATA_DIR_ENV, &data)
        .args([
            "simulate",
            "--kernel",
            "fast",
            "--battery-wh",
            "2500",
            "--config",
        ])
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());
    let scan: serde_json::Value = serde_json::from_str(&read(out.join("scan.json"))).unwrap();
    assert_eq!(scan["battery_wh"], 2500.0);
    assert_eq!(scan["load"], "household");
    assert_eq!(scan["kernel"], "fast");
    assert_eq!(read(out.join("rho.csv")).lines().count(), 4);
}

#[test]
fn failures_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let output = wind_atlas()
        .args(["sweep", "--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("station directory"));

    let data = tmp.path().join("data");
    fs::create_dir_all(&data).unwrap();
    fs::write(
        data.join("s1.csv"),
        "station_id,timestamp_iso8601\ns1,2021-01-01T00:00:00\n",
    )
    .unwrap();
    let output = wind_atlas()
        .args(["ingest", "--station-dir"])
        .arg(&data)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("stage ingest") && stderr.contains("s1"),
        "{stderr}"
    );

    let output = wind_atlas()
        .args(["simulate", "--kernel", "quick"])
        .output()
        .unwrap();
    assert!(!output.status.success());
}
