mod common;

use std::fs;
use std::path::Path;

use common::{config, read, write_fixture, STATIONS};
use wind_atlas::MapStyle;
use wind_atlas_cli::{atlas_from_results, execute, KernelChoice, PipelineError, Plan, Stage};

const CSV_OUTPUTS: [&str; 11] = [
    "rho.csv",
    "sweep.csv",
    "rho_by_capacity.csv",
    "hourly.csv",
    "monthly.csv",
    "entropy.csv",
    "monthly_speed.csv",
    "ingest_report.csv",
    "stations.csv",
    "atlas.csv",
    "atlas.geojson",
];

fn fixture(gaps: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(&dir.path().join("data"), gaps);
    dir
}

fn assert_same_outputs(a: &Path, b: &Path) {
    for name in CSV_OUTPUTS.iter().chain(&["atlas.svg", "scan.json"]) {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn fixture_run_writes_full_atlas() {
    let tmp = fixture(1);
    let out = tmp.path().join("out");
    let summary = execute(&config(&tmp.path().join("data"), out.clone()), Plan::Run).unwrap();
    assert_eq!(summary.kept.len(), 3);
    assert!(summary.excluded.is_empty());

    let atlas = read(out.join("atlas.csv"));
    assert_eq!(atlas.lines().count(), 1 + 3);
    assert!(atlas.starts_with(
        "station_id,name,latitude,longitude,rho,normalized_entropy,battery_wh,load\n"
    ));
    for (id, ..) in STATIONS {
        assert!(
            atlas.contains(&format!("\n{id},")),
            "{id} missing from atlas"
        );
    }

    let sweep = read(out.join("sweep.csv"));
    let means: Vec<f64> = sweep
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(means.len(), 6);
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert!(sweep.starts_with("capacity_wh,min,max,mean,std\n"));

    assert_eq!(read(out.join("hourly.csv")).lines().count(), 1 + 3 * 24);
    assert_eq!(read(out.join("monthly.csv")).lines().count(), 1 + 3 * 12);
    for name in CSV_OUTPUTS
        .iter()
        .chain(&["atlas.svg", "scan.json", "manifest.json"])
    {
        assert!(out.join(name).is_file(), "{name} not written");
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    let inputs = manifest["inputs"].as_array().unwrap();
    let curve = inputs.iter().find(|i| i["role"] == "power_curve").unwrap();
    assert_eq!(curve["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(inputs.iter().filter(|i| i["role"] == "station").count(), 3);
    let stages: Vec<&str> = manifest["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["stage"].as_str().unwrap())
        .collect();
    assert_eq!(
        stages,
        ["ingest", "filter", "impute", "power", "scan", "analysis", "atlas"]
    );
    assert_eq!(manifest["config"]["load"], "dishwasher");
    assert_eq!(manifest["stations"]["kept"], 3);
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = fixture(1);
    let data = tmp.path().join("data");
    execute(&config(&data, tmp.path().join("a")), Plan::Run).unwrap();
    execute(&config(&data, tmp.path().join("b")), Plan::Run).unwrap();
    assert_same_outputs(&tmp.path().join("a"), &tmp.path().join("b"));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let tmp = fixture(1);
    let data = tmp.path().join("data");
    for (jobs, name) in [(1, "one"), (4, "four")] {
        let mut cfg = config(&data, tmp.path().join(name));
        cfg.jobs = Some(jobs);
        execute(&cfg, Plan::Run).unwrap();
    }
    assert_same_outputs(&tmp.path().join("one"), &tmp.path().join("four"));
}

#[test]
fn zero_threshold_drops_gapped_station() {
    let tmp = fixture(1);
    let out = tmp.path().join("out");
    let mut cfg = config(&tmp.path().join("data"), out.clone());
    cfg.missing_threshold = 0.0;
    let summary = execute(&cfg, Plan::Run).unwrap();
    assert_eq!(summary.excluded, vec![STATIONS[2].0.to_string()]);
    assert_eq!(read(out.join("atlas.csv")).lines().count(), 1 + 2);
    let report = read(out.join("ingest_report.csv"));
    assert!(
        report.contains(&format!("{},{}.csv,52704,1,", STATIONS[2].0, STATIONS[2].0)),
        "{report}"
    );
    assert!(report.trim_end().ends_with("excluded"));
    assert!(!read(out.join("stations.csv")).contains(STATIONS[2].0));
}

#[test]
fn kernels_agree_through_the_pipeline() {
    let tmp = fixture(0);
    let data = tmp.path().join("data");
    for (kernel, name) in [(KernelChoice::Naive, "naive"), (KernelChoice::Fast, "fast")] {
        let mut cfg = config(&data, tmp.path().join(name));
        cfg.kernel = kernel;
        cfg.battery_wh = Some(800.0);
        execute(&cfg, Plan::Simulate).unwrap();
    }
    let naive = read(tmp.path().join("naive/rho.csv"));
    assert_eq!(naive, read(tmp.path().join("fast/rho.csv")));
    assert_eq!(naive.lines().count(), 4);
}

#[test]
fn atlas_rebuilt_from_results_matches_run() {
    let tmp = fixture(1);
    let out = tmp.path().join("out");
    execute(&config(&tmp.path().join("data"), out.clone()), Plan::Run).unwrap();
    let prefix = tmp.path().join("again/map");
    let files = atlas_from_results(&out, &prefix, &MapStyle::default()).unwrap();
    assert_eq!(files.len(), 3);
    for ext in ["csv", "geojson", "svg"] {
        assert_eq!(
            fs::read(out.join(format!("atlas.{ext}"))).unwrap(),
            fs::read(tmp.path().join(format!("again/map.{ext}"))).unwrap(),
            "atlas.{ext}"
        );
    }
}

#[test]
fn sweep_honours_capacity_order_and_report_capacity() {
    let tmp = fixture(0);
    let out = tmp.path().join("out");
    let mut cfg = config(&tmp.path().join("data"), out.clone());
    cfg.capacities_wh = vec![1000.0, 200.0];
    cfg.battery_wh = Some(500.0);
    execute(&cfg, Plan::Run).unwrap();
    let caps: Vec<String> = read(out.join("sweep.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(caps, ["1000.0", "200.0"]);
    let scan: serde_json::Value = serde_json::from_str(&read(out.join("scan.json"))).unwrap();
    assert_eq!(scan["battery_wh"], 500.0);

    let by_cap = read(out.join("rho_by_capacity.csv"));
    assert_eq!(by_cap.lines().count(), 1 + 3 * 2);
}

#[test]
fn ingest_dumps_imputed_series() {
    let tmp = fixture(3);
    let out = tmp.path().join("out");
    let dump = tmp.path().join("dump");
    let mut cfg = config(&tmp.path().join("data"), out.clone());
    cfg.dump_imputed = Some(dump.clone());
    execute(&cfg, Plan::Ingest).unwrap();
    let gapped = read(dump.join(format!("{}.csv", STATIONS[2].0)));
    assert!(gapped.starts_with("slot,speed,imputed\n"));
    assert_eq!(
        gapped
            .lines()
            .filter(|l| l.ends_with(",1") || l.ends_with(",true"))
            .count(),
        3
    );
    assert!(out.join("ingest_report.csv").is_file());
    assert!(!out.join("rho.csv").exists());
}

#[test]
fn stage_failures_name_stage_and_station() {
    let tmp = fixture(0);
    let data = tmp.path().join("data");
    let bad = data.join("zz_broken.csv");
    fs::write(
        &bad,
        "station_id,timestamp_iso8601,wind_speed_ms\nbroken,2021-01-01T00:00:00,3\nbroken,2021-01-01T00:00:00,4\n",
    )
    .unwrap();
    let err = execute(&config(&data, tmp.path().join("out")), Plan::Run).unwrap_err();
    assert_eq!(err.stage(), Stage::Ingest);
    assert_eq!(err.station_id(), Some("zz_broken"));
    let msg = err.to_string();
    assert!(msg.contains("ingest") && msg.contains("zz_broken"), "{msg}");
    fs::remove_file(bad).unwrap();

    // catalog without one of the stations
    let catalog = tmp.path().join("partial.csv");
    fs::write(
        &catalog,
        "station_id,name,latitude,longitude\n100971,Helsinki,60.18,24.94\n",
    )
    .unwrap();
    let mut cfg = config(&data, tmp.path().join("out2"));
    cfg.catalog = Some(catalog);
    let err = execute(&cfg, Plan::Run).unwrap_err();
    assert_eq!(err.stage(), Stage::Atlas);
    assert_eq!(err.station_id(), Some(STATIONS[1].0));

    let mut cfg = config(&tmp.path().join("nowhere"), tmp.path().join("out3"));
    assert!(matches!(
        execute(&cfg, Plan::Run),
        Err(PipelineError::Config(_))
    ));
    cfg.station_dir = Some(data);
    cfg.capacities_wh = vec![0.0];
    assert!(matches!(
        execute(&cfg, Plan::Sweep),
        Err(PipelineError::Config(_))
    ));
}
