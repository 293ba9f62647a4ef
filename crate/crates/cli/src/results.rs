//! File layouts of a results directory.
//!
//! Ratios and entropies are written at full precision here so that an atlas
//! rebuilt from the directory matches the one written by `run`; the atlas
//! exports themselves round to 4 decimals.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wind_atlas::analysis::{HOURS_PER_DAY, MONTHS_PER_YEAR};
use wind_atlas::{parse_station_catalog, Error, Result, StationAtlasEntry, StationMeta, SweepRow};

pub const RHO: &str = "rho.csv";
pub const RHO_BY_CAPACITY: &str = "rho_by_capacity.csv";
pub const SWEEP: &str = "sweep.csv";
pub const HOURLY: &str = "hourly.csv";
pub const MONTHLY: &str = "monthly.csv";
pub const ENTROPY: &str = "entropy.csv";
pub const MONTHLY_SPEED: &str = "monthly_speed.csv";
pub const INGEST_REPORT: &str = "ingest_report.csv";
pub const STATIONS: &str = "stations.csv";
pub const SCAN: &str = "scan.json";
pub const MANIFEST: &str = "manifest.json";

/// What the per-station files in a results directory were computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanInfo {
    pub battery_wh: f64,
    pub load: String,
    pub kernel: String,
    pub starts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub station_id: String,
    pub file: String,
    pub records: usize,
    pub missing: usize,
    pub missing_fraction: Option<f64>,
    pub status: String,
}

fn csv_bytes<F>(header: &[&str], body: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    body(&mut w)?;
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn rho_csv(rows: &[(String, f64)]) -> Result<Vec<u8>> {
    csv_bytes(&["station_id", "rho"], |w| {
        rows.iter()
            .try_for_each(|r| w.serialize(r).map_err(Into::into))
    })
}

/// `station_id,capacity_wh,rho`
pub fn rho_by_capacity_csv(
    stations: &[String],
    capacities: &[f64],
    rhos: &[Vec<f64>],
) -> Result<Vec<u8>> {
    csv_bytes(&["station_id", "capacity_wh", "rho"], |w| {
        for (id, row) in stations.iter().zip(rhos) {
            for (cap, rho) in capacities.iter().zip(row) {
                w.serialize((id, cap, rho))?;
            }
        }
        Ok(())
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    csv_bytes(&["capacity_wh", "min", "max", "mean", "std"], |w| {
        rows.iter().try_for_each(|r| {
            w.serialize((
                r.battery_capacity_wh,
                r.min_rho,
                r.max_rho,
                r.mean_rho,
                r.std_rho,
            ))
            .map_err(Into::into)
        })
    })
}

/// `station_id,hour,count`, hours 0..23.
pub fn hourly_csv(rows: &[(String, [u64; HOURS_PER_DAY])]) -> Result<Vec<u8>> {
    csv_bytes(&["station_id", "hour", "count"], |w| {
        for (id, counts) in rows {
            for (h, c) in counts.iter().enumerate() {
                w.serialize((id, h, c))?;
            }
        }
        Ok(())
    })
}

/// `station_id,month,count`, months 1..12.
pub fn monthly_csv(rows: &[(String, [u64; MONTHS_PER_YEAR])]) -> Result<Vec<u8>> {
    csv_bytes(&["station_id", "month", "count"], |w| {
        for (id, counts) in rows {
            for (m, c) in counts.iter().enumerate() {
                w.serialize((id, m + 1, c))?;
            }
        }
        Ok(())
    })
}

/// Empty field where no start is suitable.
pub fn entropy_csv(rows: &[(String, Option<f64>)]) -> Result<Vec<u8>> {
    csv_bytes(&["station_id", "normalized_entropy"], |w| {
        rows.iter()
            .try_for_each(|r| w.serialize(r).map_err(Into::into))
    })
}

/// Empty field for months without data.
pub fn monthly_speed_csv(rows: &[(String, [f64; MONTHS_PER_YEAR])]) -> Result<Vec<u8>> {
    csv_bytes(&["station_id", "month", "mean_speed_ms"], |w| {
        for (id, means) in rows {
            for (m, v) in means.iter().enumerate() {
                w.serialize((id, m + 1, (!v.is_nan()).then_some(*v)))?;
            }
        }
        Ok(())
    })
}

pub fn ingest_report_csv(rows: &[IngestRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Rebuilds atlas entries from `rho.csv`, `entropy.csv`, `hourly.csv`,
/// `monthly.csv`, `stations.csv` and `scan.json`, in `rho.csv` order.
pub fn read_atlas_entries(dir: &Path) -> Result<Vec<StationAtlasEntry>> {
    let scan: ScanInfo = serde_json::from_reader(File::open(dir.join(SCAN))?)?;
    let rho: Vec<(String, f64)> = read_rows(&dir.join(RHO))?;
    let entropy: Vec<(String, Option<f64>)> = read_rows(&dir.join(ENTROPY))?;
    let hourly: Vec<(String, usize, u64)> = read_rows(&dir.join(HOURLY))?;
    let monthly: Vec<(String, usize, u64)> = read_rows(&dir.join(MONTHLY))?;
    let catalog: Vec<StationMeta> = parse_station_catalog(File::open(dir.join(STATIONS))?)?;

    let missing = |what: &str, id: &str| Error::Invalid {
        what: "results directory",
        message: format!("station {id} has no {what}"),
    };
    rho.into_iter()
        .map(|(id, rho)| {
            let meta = catalog
                .iter()
                .find(|m| m.station_id == id)
                .cloned()
                .ok_or_else(|| missing("catalog entry", &id))?;
            let normalized_entropy = entropy
                .iter()
                .find(|(s, _)| *s == id)
                .ok_or_else(|| missing("entropy row", &id))?
                .1;
            let mut hourly_counts = [0; HOURS_PER_DAY];
            for (_, h, c) in hourly.iter().filter(|(s, _, _)| *s == id) {
                *hourly_counts
                    .get_mut(*h)
                    .ok_or_else(|| missing("valid hour", &id))? = *c;
            }
            let mut monthly_counts = [0; MONTHS_PER_YEAR];
            for (_, m, c) in monthly.iter().filter(|(s, _, _)| *s == id) {
                let slot = m.checked_sub(1).and_then(|m| monthly_counts.get_mut(m));
                *slot.ok_or_else(|| missing("valid month", &id))? = *c;
            }
            Ok(StationAtlasEntry {
                meta,
                rho,
                normalized_entropy,
                hourly_counts,
                monthly_counts,
                battery_capacity_wh: scan.battery_wh,
                load_name: scan.load.clone(),
            })
        })
        .collect()
}
