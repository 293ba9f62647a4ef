#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use wind_atlas_cli::RunConfig;

pub const SLOTS: usize = 52_560 + 144;
pub const STATIONS: [(&str, &str, f64, f64); 3] = [
    ("100971", "Helsinki Kaisaniemi", 60.18, 24.94),
    ("101104", "Jokioinen Ilmala", 60.81, 23.50),
    ("101786", "Oulu Vihreasaari", 65.01, 25.42),
];

/// Deterministic speed for a station and slot; smooth with daily and weekly swings.
pub fn speed(station: usize, slot: usize) -> f64 {
    let i = slot as f64;
    let k = station as f64;
    let v = 3.0
        + k
        + 2.5 * (i / 144.0 * std::f64::consts::TAU + k).sin()
        + 2.0 * (i / 1_008.0 * std::f64::consts::TAU * (1.0 + 0.3 * k)).sin()
        + 1.0 * (i / 37.0).sin();
    (v.max(0.0) * 100.0).round() / 100.0
}

/// Canonical station files plus `stations.csv`; the third station misses `gaps` slots.
pub fn write_fixture(dir: &Path, gaps: usize) {
    fs::create_dir_all(dir).unwrap();
    let mut catalog = String::from("station_id,name,latitude,longitude\n");
    for (k, (id, name, lat, lon)) in STATIONS.iter().enumerate() {
        writeln!(catalog, "{id},{name},{lat},{lon}").unwrap();
        let mut body = String::from("station_id,timestamp_iso8601,wind_speed_ms\n");
        for slot in 0..SLOTS {
            let (day, rem) = (slot / 144, slot % 144);
            let date = chrono_like_date(day);
            let ts = format!("{date}T{:02}:{:02}:00", rem / 6, (rem % 6) * 10);
            let gap = k == 2 && slot >= 5_000 && slot < 5_000 + gaps;
            if gap {
                writeln!(body, "{id},{ts},").unwrap();
            } else {
                writeln!(body, "{id},{ts},{}", speed(k, slot)).unwrap();
            }
        }
        fs::write(dir.join(format!("{id}.csv")), body).unwrap();
    }
    fs::write(dir.join("stations.csv"), catalog).unwrap();
}

/// `YYYY-MM-DD` for day `n` counted from 2021-01-01 (2021 and early 2022 only).
fn chrono_like_date(n: usize) -> String {
    const DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let (mut year, mut rest) = (2021, n);
    if rest >= 365 {
        year += 1;
        rest -= 365;
    }
    let mut month = 0;
    while rest >= DAYS[month] {
        rest -= DAYS[month];
        month += 1;
    }
    format!("{year}-{:02}-{:02}", month + 1, rest + 1)
}

pub fn config(data: &Path, out: PathBuf) -> RunConfig {
    RunConfig {
        station_dir: Some(data.to_path_buf()),
        out_dir: out,
        ..RunConfig::default()
    }
}

pub fn read(path: impl AsRef<Path>) -> String {
    let path = path.as_ref();
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
