//! Wind-power feasibility scanning for 10-minute weather-station observations.
//!
//! The pipeline turns raw wind-speed records into per-station useful annual
//! fractions: the share of candidate start instants at which a load profile
//! can run entirely on local turbine output plus a small battery.
//!
//! - [`ingest`]: station CSV parsing, grid canonicalization and the missing-data filter
//! - [`timeseries`]: linear gap imputation
//! - [`power`]: hub-height extrapolation and turbine power curves
//! - [`loads`]: finite-support load profiles
//! - [`simulate`]: the battery recurrence, suitability scan and capacity sweeps
//! - [`analysis`]: hourly/monthly distributions of suitable starts, entropy, summary statistics
//! - [`atlas`]: CSV, GeoJSON and SVG export

pub mod analysis;
pub mod atlas;
mod csvmeta;
pub mod error;
pub mod ingest;
pub mod loads;
pub mod power;
pub mod simulate;
pub mod timeseries;

pub use analysis::{
    hourly_entropy, monthly_distribution, monthly_mean_speed, summarize, HourlyDistribution,
    StartCalendar, Summary, TemporalDistribution,
};
pub use atlas::{to_atlas_csv, to_geojson, to_svg_map, MapStyle, StationAtlasEntry, SvgMap};
pub use error::{Error, Result};
pub use ingest::{
    filter_stations, missing_fraction, parse_station_catalog, parse_station_csv,
    write_station_catalog, ColumnMapping, RawObservationTable, StationMeta,
    DEFAULT_MISSING_THRESHOLD,
};
pub use loads::{Cadence, LoadProfile};
pub use power::{
    extrapolate_speed, power_at_speed, speeds_to_power, HeightExtrapolation, PowerCurve,
    WindPowerSeries,
};
pub use simulate::{
    battery_trace, capacity_sweep, simulate_start, sweep_station, useful_fraction,
    useful_fraction_fast, Kernel, SimulationConfig, SuitabilityResult, SweepResult, SweepRow,
    STARTS_PER_YEAR,
};
pub use timeseries::{impute_linear, WindSpeedSeries};

/// Minutes between consecutive observation slots.
pub const SLOT_MINUTES: u32 = 10;
