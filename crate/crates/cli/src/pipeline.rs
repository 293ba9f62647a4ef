//! Stage orchestration and the results directory it writes.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use wind_atlas::{
    filter_stations, impute_linear, missing_fraction, monthly_mean_speed, parse_station_catalog,
    parse_station_csv, speeds_to_power, summarize, sweep_station, to_atlas_csv, to_geojson,
    to_svg_map, write_station_catalog, ColumnMapping, HeightExtrapolation, Kernel, LoadProfile,
    MapStyle, PowerCurve, RawObservationTable, SimulationConfig, StartCalendar, StationAtlasEntry,
    StationMeta, SuitabilityResult, SweepRow, TemporalDistribution, WindPowerSeries,
    WindSpeedSeries,
};

use crate::config::{InputFormat, RunConfig};
use crate::results::{self, IngestRecord, ScanInfo};
use crate::{PipelineError, Stage};

/// Which subcommand is running; decides the stages and outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Plan {
    /// ingest, filter, impute
    Ingest,
    /// ... power, scan at the report capacity
    Simulate,
    /// ... power, scan at every sweep capacity
    Sweep,
    /// simulate plus hourly/monthly analysis
    Analyze,
    /// everything, including the atlas
    Run,
}

impl Plan {
    fn scans(self) -> bool {
        self != Plan::Ingest
    }

    fn sweeps(self) -> bool {
        matches!(self, Plan::Sweep | Plan::Run)
    }

    fn reports(self) -> bool {
        matches!(self, Plan::Simulate | Plan::Analyze | Plan::Run)
    }

    fn analyzes(self) -> bool {
        matches!(self, Plan::Analyze | Plan::Run)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Checksum {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Plan,
    config: &'a RunConfig,
    inputs: &'a [Checksum],
    stations: StationCounts,
    stages: &'a [StageTiming],
    outputs: &'a [Checksum],
}

#[derive(Debug, Clone, Copy, Serialize)]
struct StationCounts {
    files: usize,
    kept: usize,
    excluded: usize,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub kept: Vec<String>,
    pub excluded: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<StageTiming>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

struct Context<'a> {
    cfg: &'a RunConfig,
    inputs: Vec<Checksum>,
    timings: Vec<StageTiming>,
    outputs: Vec<Checksum>,
    clock: Instant,
}

impl Context<'_> {
    fn lap(&mut self, stage: Stage) {
        let seconds = self.clock.elapsed().as_secs_f64();
        info!("{stage}: {seconds:.3} s");
        self.timings.push(StageTiming {
            stage: stage.name(),
            seconds,
        });
        self.clock = Instant::now();
    }

    fn write(
        &mut self,
        name: &str,
        bytes: wind_atlas::Result<Vec<u8>>,
    ) -> Result<(), PipelineError> {
        let bytes = bytes.map_err(|source| PipelineError::Stage {
            stage: Stage::Output,
            source,
        })?;
        let path = self.cfg.out_dir.join(name);
        fs::write(&path, &bytes).map_err(|e| PipelineError::io(Stage::Output, &path, e))?;
        self.outputs.push(Checksum {
            role: "output",
            path: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    fn read_input(
        &mut self,
        role: &'static str,
        stage: Stage,
        path: &Path,
    ) -> Result<Vec<u8>, PipelineError> {
        let bytes = fs::read(path).map_err(|e| PipelineError::io(stage, path, e))?;
        self.inputs.push(Checksum {
            role,
            path: display(path),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }
}

struct Models {
    curve: PowerCurve,
    shear: HeightExtrapolation,
    profile: LoadProfile,
    catalog: Option<Vec<StationMeta>>,
}

fn load_models(ctx: &mut Context) -> Result<Models, PipelineError> {
    let cfg = ctx.cfg;
    let config_err =
        |what: &str, e: wind_atlas::Error| PipelineError::config(format!("{what}: {e}"));

    let curve = match &cfg.power_curve {
        Some(p) => {
            let bytes = ctx.read_input("power_curve", Stage::Config, p)?;
            PowerCurve::from_csv(bytes.as_slice()).map_err(|e| config_err(&display(p), e))?
        }
        None => {
            let curve = PowerCurve::nordex_n100();
            let mut bytes = Vec::new();
            curve
                .write_csv(&mut bytes)
                .map_err(|e| config_err("power curve", e))?;
            ctx.inputs.push(Checksum {
                role: "power_curve",
                path: "builtin:nordex_n100".into(),
                sha256: sha256_hex(&bytes),
            });
            curve
        }
    };

    let profile = match cfg.load.as_str() {
        name @ ("dishwasher" | "household") => {
            let profile = if name == "dishwasher" {
                LoadProfile::dishwasher()
            } else {
                LoadProfile::household()
            };
            let mut bytes = Vec::new();
            profile
                .write_csv(&mut bytes)
                .map_err(|e| config_err("load", e))?;
            ctx.inputs.push(Checksum {
                role: "load",
                path: format!("builtin:{name}"),
                sha256: sha256_hex(&bytes),
            });
            profile
        }
        path => {
            let path = Path::new(path);
            let bytes = ctx.read_input("load", Stage::Config, path)?;
            let name = path
                .file_stem()
                .map_or("load".into(), |s| s.to_string_lossy().into_owned());
            LoadProfile::from_csv(bytes.as_slice(), &name)
                .map_err(|e| config_err(&display(path), e))?
        }
    };

    let catalog = match cfg.catalog_path()? {
        Some(p) => {
            let bytes = ctx.read_input("catalog", Stage::Config, &p)?;
            Some(parse_station_catalog(bytes.as_slice()).map_err(|e| config_err(&display(&p), e))?)
        }
        None => None,
    };

    let shear = HeightExtrapolation::new(cfg.reference_height_m, cfg.hub_height_m, cfg.alpha)
        .map_err(|e| config_err("height extrapolation", e))?;
    Ok(Models {
        curve,
        shear,
        profile,
        catalog,
    })
}

/// `*.csv` files in the station directory, sorted, minus the catalog and any
/// `stations.csv`.
fn station_files(dir: &Path, catalog: Option<&Path>) -> Result<Vec<PathBuf>, PipelineError> {
    let catalog = catalog.and_then(|p| p.canonicalize().ok());
    let entries = fs::read_dir(dir).map_err(|e| PipelineError::io(Stage::Ingest, dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| PipelineError::io(Stage::Ingest, dir, e))?
            .path();
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let is_catalog = path.file_name().is_some_and(|n| n == "stations.csv")
            || (catalog.is_some() && path.canonicalize().ok() == catalog);
        if is_csv && path.is_file() && !is_catalog {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn ingest(
    ctx: &mut Context,
    files: &[PathBuf],
) -> Result<Vec<(PathBuf, RawObservationTable)>, PipelineError> {
    let (mapping, by_file_name) = match ctx.cfg.input_format {
        InputFormat::Canonical => (ColumnMapping::canonical(), false),
        InputFormat::Fmi => (ColumnMapping::fmi(), true),
    };
    let parsed = files
        .par_iter()
        .map(|path| {
            let stem = file_stem(path);
            let bytes = fs::read(path).map_err(|e| PipelineError::io(Stage::Ingest, path, e))?;
            let mut table = parse_station_csv(bytes.as_slice(), &mapping, &stem)
                .map_err(|e| PipelineError::station(Stage::Ingest, &stem, e))?;
            if by_file_name {
                table.set_station_id(stem);
            }
            Ok((path.clone(), sha256_hex(&bytes), table))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;

    let mut seen = BTreeSet::new();
    let mut tables = Vec::with_capacity(parsed.len());
    for (path, sha256, table) in parsed {
        if !seen.insert(table.station_id().to_string()) {
            return Err(PipelineError::station(
                Stage::Ingest,
                table.station_id(),
                wind_atlas::Error::Invalid {
                    what: "station directory",
                    message: format!("station id repeated in {}", display(&path)),
                },
            ));
        }
        ctx.inputs.push(Checksum {
            role: "station",
            path: display(&path),
            sha256,
        });
        tables.push((path, table));
    }
    Ok(tables)
}

fn ingest_report(
    files: &[(String, PathBuf)],
    kept: &[RawObservationTable],
    excluded: &[RawObservationTable],
) -> Vec<IngestRecord> {
    files
        .iter()
        .filter_map(|(id, path)| {
            let (t, status) = kept
                .iter()
                .find(|t| t.station_id() == id)
                .map(|t| (t, "kept"))
                .or_else(|| {
                    excluded
                        .iter()
                        .find(|t| t.station_id() == id)
                        .map(|t| (t, "excluded"))
                })?;
            Some(IngestRecord {
                station_id: id.clone(),
                file: path
                    .file_name()
                    .map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
                records: t.len(),
                missing: t.missing_count(),
                missing_fraction: missing_fraction(t).ok(),
                status: status.into(),
            })
        })
        .collect()
}

fn impute(
    ctx: &Context,
    kept: &[RawObservationTable],
) -> Result<Vec<WindSpeedSeries>, PipelineError> {
    let series = kept
        .par_iter()
        .map(|t| {
            impute_linear(t).map_err(|e| PipelineError::station(Stage::Impute, t.station_id(), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(dir) = &ctx.cfg.dump_imputed {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(Stage::Impute, dir, e))?;
        for s in &series {
            let path = dir.join(format!("{}.csv", s.station_id()));
            let file =
                fs::File::create(&path).map_err(|e| PipelineError::io(Stage::Impute, &path, e))?;
            s.write_imputed_csv(std::io::BufWriter::new(file))
                .map_err(|e| PipelineError::station(Stage::Impute, s.station_id(), e))?;
        }
    }
    Ok(series)
}

/// Per station, one result per entry of `capacities` (ascending, distinct).
fn scan(
    powers: &[WindPowerSeries],
    profile: &LoadProfile,
    capacities: &[f64],
    kernel: Kernel,
    starts: usize,
) -> Result<Vec<Vec<SuitabilityResult>>, PipelineError> {
    powers
        .par_iter()
        .map(|p| {
            let err = |e| PipelineError::station(Stage::Scan, p.station_id(), e);
            match kernel {
                Kernel::Fast => sweep_station(p, profile, capacities, starts).map_err(err),
                Kernel::Naive => capacities
                    .iter()
                    .map(|&c| {
                        let cfg = SimulationConfig::new(c)
                            .and_then(|s| s.with_starts(starts))
                            .map_err(err)?;
                        Ok(kernel.run(p, profile, &cfg))
                    })
                    .collect(),
            }
        })
        .collect()
}

fn distinct_sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn position(capacities: &[f64], c: f64) -> usize {
    capacities
        .iter()
        .position(|&x| x == c)
        .expect("capacity was scanned")
}

fn atlas_entries(
    catalog: &[StationMeta],
    ids: &[String],
    rhos: &[f64],
    temporal: &[TemporalDistribution],
    scan: &ScanInfo,
) -> Result<Vec<StationAtlasEntry>, PipelineError> {
    ids.iter()
        .zip(rhos)
        .zip(temporal)
        .map(|((id, &rho), t)| {
            let meta = catalog
                .iter()
                .find(|m| &m.station_id == id)
                .cloned()
                .ok_or_else(|| {
                    PipelineError::station(
                        Stage::Atlas,
                        id,
                        wind_atlas::Error::Invalid {
                            what: "catalog",
                            message: "station has no catalog entry".into(),
                        },
                    )
                })?;
            Ok(StationAtlasEntry {
                meta,
                rho,
                normalized_entropy: t.normalized_entropy,
                hourly_counts: t.hourly_counts,
                monthly_counts: t.monthly_counts,
                battery_capacity_wh: scan.battery_wh,
                load_name: scan.load.clone(),
            })
        })
        .collect()
}

/// Writes `<prefix>.csv`, `<prefix>.geojson` and `<prefix>.svg`; returns the paths.
pub fn write_atlas(
    entries: &[StationAtlasEntry],
    prefix: &Path,
    style: &MapStyle,
) -> Result<Vec<(PathBuf, Vec<u8>)>, PipelineError> {
    let stage_err = |source| PipelineError::Stage {
        stage: Stage::Atlas,
        source,
    };
    if entries.is_empty() {
        return Err(stage_err(wind_atlas::Error::Invalid {
            what: "atlas",
            message: "no stations to map".into(),
        }));
    }
    let mut csv = Vec::new();
    to_atlas_csv(entries, &mut csv).map_err(stage_err)?;
    let geojson = to_geojson(entries).map_err(stage_err)?;
    let map = to_svg_map(entries, style).map_err(stage_err)?;
    for id in &map.out_of_bounds {
        warn!("station {id} lies outside the map bounds; marker clipped");
    }
    let with_ext = |ext: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(".");
        name.push(ext);
        PathBuf::from(name)
    };
    let files = vec![
        (with_ext("csv"), csv),
        (with_ext("geojson"), geojson),
        (with_ext("svg"), map.svg.into_bytes()),
    ];
    for (path, bytes) in &files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(Stage::Atlas, parent, e))?;
        }
        fs::write(path, bytes).map_err(|e| PipelineError::io(Stage::Atlas, path, e))?;
    }
    Ok(files)
}

/// `atlas --results DIR --out PREFIX`
pub fn atlas_from_results(
    dir: &Path,
    prefix: &Path,
    style: &MapStyle,
) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = results::read_atlas_entries(dir).map_err(|source| PipelineError::Stage {
        stage: Stage::Atlas,
        source,
    })?;
    Ok(write_atlas(&entries, prefix, style)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

/// Runs the stages `plan` needs and writes the results directory.
///
/// With `jobs` set, work runs on a dedicated pool of that many threads;
/// outputs do not depend on the thread count.
pub fn execute(cfg: &RunConfig, plan: Plan) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::config(format!("thread pool: {e}")))?
            .install(|| execute_inner(cfg, plan)),
        None => execute_inner(cfg, plan),
    }
}

fn execute_inner(cfg: &RunConfig, plan: Plan) -> Result<RunSummary, PipelineError> {
    let mut ctx = Context {
        cfg,
        inputs: Vec::new(),
        timings: Vec::new(),
        outputs: Vec::new(),
        clock: Instant::now(),
    };
    let models = load_models(&mut ctx)?;
    let station_dir = cfg.station_dir()?;
    let catalog_path = cfg.catalog_path()?;
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| PipelineError::io(Stage::Output, &cfg.out_dir, e))?;

    let files = station_files(station_dir, catalog_path.as_deref())?;
    if files.is_empty() {
        return Err(PipelineError::config(format!(
            "no station CSV files in {}",
            display(station_dir)
        )));
    }
    let tables = ingest(&mut ctx, &files)?;
    ctx.lap(Stage::Ingest);

    let sources: Vec<(String, PathBuf)> = tables
        .iter()
        .map(|(p, t)| (t.station_id().to_string(), p.clone()))
        .collect();
    let tables: Vec<RawObservationTable> = tables.into_iter().map(|(_, t)| t).collect();
    let (kept, excluded) =
        filter_stations(tables, cfg.missing_threshold).map_err(|source| PipelineError::Stage {
            stage: Stage::Filter,
            source,
        })?;
    let kept_ids: Vec<String> = kept.iter().map(|t| t.station_id().to_string()).collect();
    let excluded_ids: Vec<String> = excluded
        .iter()
        .map(|t| t.station_id().to_string())
        .collect();
    for id in &excluded_ids {
        info!("station {id} excluded by the missing-data filter");
    }
    let report = ingest_report(&sources, &kept, &excluded);
    drop(excluded);
    ctx.write(results::INGEST_REPORT, results::ingest_report_csv(&report))?;
    if let Some(catalog) = &models.catalog {
        let kept_meta: Vec<StationMeta> = kept_ids
            .iter()
            .filter_map(|id| catalog.iter().find(|m| &m.station_id == id).cloned())
            .collect();
        let mut bytes = Vec::new();
        let written = write_station_catalog(&mut bytes, &kept_meta).map(|_| bytes);
        ctx.write(results::STATIONS, written)?;
    }
    ctx.lap(Stage::Filter);

    let series = impute(&ctx, &kept)?;
    drop(kept);
    ctx.lap(Stage::Impute);

    if plan.scans() {
        if series.is_empty() {
            return Err(PipelineError::Stage {
                stage: Stage::Filter,
                source: wind_atlas::Error::Invalid {
                    what: "missing-data filter",
                    message: format!("no station passes threshold {}", cfg.missing_threshold),
                },
            });
        }
        let powers: Vec<WindPowerSeries> = series
            .par_iter()
            .map(|s| speeds_to_power(s, &models.shear, &models.curve))
            .collect();
        ctx.lap(Stage::Power);

        let report_cap = cfg.report_capacity().expect("validated capacities");
        let sweep_caps = distinct_sorted(cfg.capacities_wh.iter().copied());
        let scanned = match plan {
            Plan::Sweep => sweep_caps.clone(),
            Plan::Run => distinct_sorted(sweep_caps.iter().copied().chain([report_cap])),
            _ => vec![report_cap],
        };
        let kernel = Kernel::from(cfg.kernel);
        let masks = scan(&powers, &models.profile, &scanned, kernel, cfg.starts)?;
        ctx.lap(Stage::Scan);

        if plan.sweeps() {
            // sweep.csv keeps the order the capacities were given in
            let rhos: Vec<Vec<f64>> = masks
                .iter()
                .map(|m| {
                    cfg.capacities_wh
                        .iter()
                        .map(|&c| m[position(&scanned, c)].rho())
                        .collect()
                })
                .collect();
            let rows = cfg
                .capacities_wh
                .iter()
                .enumerate()
                .map(|(k, &cap)| {
                    let column: Vec<f64> = rhos.iter().map(|r| r[k]).collect();
                    summarize(&column).map(|s| SweepRow {
                        battery_capacity_wh: cap,
                        min_rho: s.min,
                        max_rho: s.max,
                        mean_rho: s.mean,
                        std_rho: s.std,
                    })
                })
                .collect::<wind_atlas::Result<Vec<_>>>();
            ctx.write(results::SWEEP, rows.and_then(|r| results::sweep_csv(&r)))?;
            ctx.write(
                results::RHO_BY_CAPACITY,
                results::rho_by_capacity_csv(&kept_ids, &cfg.capacities_wh, &rhos),
            )?;
        }

        let scan_info = ScanInfo {
            battery_wh: report_cap,
            load: models.profile.name().to_string(),
            kernel: format!("{:?}", cfg.kernel).to_lowercase(),
            starts: cfg.starts,
        };
        if plan.reports() {
            let k = position(&scanned, report_cap);
            let rhos: Vec<f64> = masks.iter().map(|m| m[k].rho()).collect();
            let rows: Vec<(String, f64)> =
                kept_ids.iter().cloned().zip(rhos.iter().copied()).collect();
            ctx.write(results::RHO, results::rho_csv(&rows))?;
            ctx.write(
                results::SCAN,
                serde_json::to_vec_pretty(&scan_info).map_err(Into::into),
            )?;

            if plan.analyzes() {
                let temporal: Vec<TemporalDistribution> = masks
                    .par_iter()
                    .zip(&series)
                    .map(|(m, s)| {
                        TemporalDistribution::from_mask(m[k].mask(), &StartCalendar::new(s.start()))
                    })
                    .collect();
                let speeds: Vec<_> = series.par_iter().map(monthly_mean_speed).collect();
                let ids = kept_ids.iter().cloned();
                let hourly: Vec<_> = ids
                    .clone()
                    .zip(temporal.iter().map(|t| t.hourly_counts))
                    .collect();
                let monthly: Vec<_> = ids
                    .clone()
                    .zip(temporal.iter().map(|t| t.monthly_counts))
                    .collect();
                let entropy: Vec<_> = ids
                    .clone()
                    .zip(temporal.iter().map(|t| t.normalized_entropy))
                    .collect();
                let speeds: Vec<_> = ids.zip(speeds).collect();
                ctx.write(results::HOURLY, results::hourly_csv(&hourly))?;
                ctx.write(results::MONTHLY, results::monthly_csv(&monthly))?;
                ctx.write(results::ENTROPY, results::entropy_csv(&entropy))?;
                ctx.write(results::MONTHLY_SPEED, results::monthly_speed_csv(&speeds))?;
                ctx.lap(Stage::Analysis);

                if plan == Plan::Run {
                    match &models.catalog {
                        Some(catalog) => {
                            let entries =
                                atlas_entries(catalog, &kept_ids, &rhos, &temporal, &scan_info)?;
                            let files = write_atlas(
                                &entries,
                                &cfg.out_dir.join("atlas"),
                                &MapStyle::default(),
                            )?;
                            for (path, bytes) in files {
                                ctx.outputs.push(Checksum {
                                    role: "output",
                                    path: path.file_name().map_or_else(String::new, |n| {
                                        n.to_string_lossy().into_owned()
                                    }),
                                    sha256: sha256_hex(&bytes),
                                });
                            }
                        }
                        None => warn!("no station catalog; skipping the atlas stage"),
                    }
                    ctx.lap(Stage::Atlas);
                }
            }
        }
    }

    let manifest = Manifest {
        tool: "wind-atlas",
        version: env!("CARGO_PKG_VERSION"),
        command: plan,
        config: cfg,
        inputs: &ctx.inputs,
        stations: StationCounts {
            files: files.len(),
            kept: kept_ids.len(),
            excluded: excluded_ids.len(),
        },
        stages: &ctx.timings,
        outputs: &ctx.outputs,
    };
    let manifest = serde_json::to_vec_pretty(&manifest).map_err(Into::into);
    let mut outputs: Vec<PathBuf> = ctx
        .outputs
        .iter()
        .map(|c| cfg.out_dir.join(&c.path))
        .collect();
    let timings = std::mem::take(&mut ctx.timings);
    ctx.write(results::MANIFEST, manifest)?;
    outputs.push(cfg.out_dir.join(results::MANIFEST));

    Ok(RunSummary {
        out_dir: cfg.out_dir.clone(),
        kept: kept_ids,
        excluded: excluded_ids,
        outputs,
        timings,
    })
}
