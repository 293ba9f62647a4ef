//! Station observation files and station catalogs.
//!
//! Observation files are read into a [`RawObservationTable`], which always sits
//! on a gap-free 10-minute grid: slots absent from the file, negative speeds and
//! non-numeric speed fields all become `None` (missing). Timestamps are kept as
//! wall-clock values in whatever zone the source file uses; nothing is converted.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SLOT_MINUTES;

/// Stations with a larger share of missing observations are excluded.
pub const DEFAULT_MISSING_THRESHOLD: f64 = 0.03;

const SLOT_SECONDS: i64 = SLOT_MINUTES as i64 * 60;
const CANONICAL_TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// One weather station from the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMeta {
    pub station_id: String,
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
}

impl StationMeta {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::invalid(
                "station",
                format!(
                    "'{}': latitude {} outside [-90, 90]",
                    self.station_id, self.latitude
                ),
            ));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::invalid(
                "station",
                format!(
                    "'{}': longitude {} outside [-180, 180]",
                    self.station_id, self.longitude
                ),
            ));
        }
        Ok(())
    }
}

/// Reads a `station_id,name,latitude,longitude` catalog.
pub fn parse_station_catalog<R: Read>(reader: R) -> Result<Vec<StationMeta>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut seen = HashSet::new();
    let mut stations = Vec::new();
    for record in rdr.deserialize::<StationMeta>() {
        let meta = record?;
        meta.validate()?;
        if !seen.insert(meta.station_id.clone()) {
            return Err(Error::invalid(
                "station catalog",
                format!("duplicate station_id '{}'", meta.station_id),
            ));
        }
        stations.push(meta);
    }
    Ok(stations)
}

/// Writes a catalog in the same layout [`parse_station_catalog`] reads.
pub fn write_station_catalog<W: Write>(writer: W, stations: &[StationMeta]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for s in stations {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Accepted header names for one column role; matching ignores case and surrounding blanks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnNames(Vec<String>);

impl ColumnNames {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ColumnNames(names.into_iter().map(Into::into).collect())
    }

    fn find(&self, headers: &csv::StringRecord) -> Option<usize> {
        headers.iter().position(|h| {
            let h = h.trim();
            self.0.iter().any(|n| n.eq_ignore_ascii_case(h))
        })
    }

    fn require(&self, headers: &csv::StringRecord) -> Result<usize> {
        self.find(headers).ok_or_else(|| Error::MissingColumn {
            column: self.0.first().cloned().unwrap_or_default(),
        })
    }
}

/// Where the timestamp of a row comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimestampColumns {
    /// A single ISO-8601 date-time column.
    Iso8601(ColumnNames),
    /// Separate year, month, day and time-of-day columns (FMI export layout).
    DateParts {
        year: ColumnNames,
        month: ColumnNames,
        day: ColumnNames,
        time: ColumnNames,
    },
}

/// Maps header names of an observation file onto the roles the parser needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub station_id: ColumnNames,
    /// A file without a station column takes the caller's default id.
    pub station_id_required: bool,
    pub timestamp: TimestampColumns,
    pub speed: ColumnNames,
}

impl ColumnMapping {
    /// `station_id,timestamp_iso8601,wind_speed_ms`
    pub fn canonical() -> Self {
        ColumnMapping {
            station_id: ColumnNames::new(["station_id"]),
            station_id_required: true,
            timestamp: TimestampColumns::Iso8601(ColumnNames::new(["timestamp_iso8601"])),
            speed: ColumnNames::new(["wind_speed_ms"]),
        }
    }

    /// FMI open-data download layout. Both the older
    /// `Year,m,d,Time,Time zone,Wind speed (m/s)` export and the newer
    /// `Observation station,Year,Month,Day,Time [Local time],Average wind speed [m/s]`
    /// export are recognized. The time-zone column is ignored.
    pub fn fmi() -> Self {
        ColumnMapping {
            station_id: ColumnNames::new(["Observation station", "station_id"]),
            station_id_required: false,
            timestamp: TimestampColumns::DateParts {
                year: ColumnNames::new(["Year"]),
                month: ColumnNames::new(["m", "Month"]),
                day: ColumnNames::new(["d", "Day"]),
                time: ColumnNames::new(["Time", "Time [Local time]", "Time [UTC]"]),
            },
            speed: ColumnNames::new([
                "Wind speed (m/s)",
                "Average wind speed [m/s]",
                "Wind speed [m/s]",
            ]),
        }
    }
}

enum ResolvedTimestamp {
    Iso(usize),
    Parts {
        year: usize,
        month: usize,
        day: usize,
        time: usize,
    },
}

/// One station's observations on a complete 10-minute grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RawObservationTable {
    station_id: String,
    start: NaiveDateTime,
    speeds: Vec<Option<f64>>,
}

impl RawObservationTable {
    /// Builds a table from grid-aligned speeds starting at `start`. Negative or
    /// non-finite speeds are stored as missing.
    pub fn new(
        station_id: impl Into<String>,
        start: NaiveDateTime,
        speeds: Vec<Option<f64>>,
    ) -> Self {
        let speeds = speeds
            .into_iter()
            .map(|s| s.and_then(clean_speed))
            .collect();
        RawObservationTable {
            station_id: station_id.into(),
            start,
            speeds,
        }
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn set_station_id(&mut self, id: impl Into<String>) {
        self.station_id = id.into();
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn speeds(&self) -> &[Option<f64>] {
        &self.speeds
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.speeds.iter().filter(|s| s.is_none()).count()
    }

    pub fn timestamp(&self, slot: usize) -> NaiveDateTime {
        self.start + Duration::seconds(slot as i64 * SLOT_SECONDS)
    }

    pub fn records(&self) -> impl Iterator<Item = (NaiveDateTime, Option<f64>)> + '_ {
        self.speeds
            .iter()
            .enumerate()
            .map(|(i, s)| (self.timestamp(i), *s))
    }

    /// Writes the canonical `station_id,timestamp_iso8601,wind_speed_ms` layout.
    /// Missing slots are written with an empty speed field.
    pub fn write_canonical_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["station_id", "timestamp_iso8601", "wind_speed_ms"])?;
        for (ts, speed) in self.records() {
            let speed = speed.map(|v| v.to_string()).unwrap_or_default();
            wtr.write_record([
                self.station_id.as_str(),
                &ts.format(CANONICAL_TIMESTAMP_FORMAT).to_string(),
                &speed,
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn clean_speed(v: f64) -> Option<f64> {
    (v.is_finite() && v >= 0.0).then_some(v)
}

fn parse_speed(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().and_then(clean_speed)
}

fn parse_iso_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_local());
    }
    [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
}

fn parse_time_of_day(s: &str) -> Option<NaiveTime> {
    let s = s.trim();
    NaiveTime::parse_from_str(s, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
        .ok()
}

/// Parses one station's observation file.
///
/// The result covers every 10-minute slot between the earliest and latest
/// timestamp in the file. Rows may appear in any order; a repeated timestamp or
/// one that does not sit on the 10-minute grid anchored at the earliest row is
/// an error. If the mapping allows it and the file has no station column,
/// `default_station_id` names the table.
pub fn parse_station_csv<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
    default_station_id: &str,
) -> Result<RawObservationTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();

    let station_col = if mapping.station_id_required {
        Some(mapping.station_id.require(&headers)?)
    } else {
        mapping.station_id.find(&headers)
    };
    let ts_cols = match &mapping.timestamp {
        TimestampColumns::Iso8601(names) => ResolvedTimestamp::Iso(names.require(&headers)?),
        TimestampColumns::DateParts {
            year,
            month,
            day,
            time,
        } => ResolvedTimestamp::Parts {
            year: year.require(&headers)?,
            month: month.require(&headers)?,
            day: day.require(&headers)?,
            time: time.require(&headers)?,
        },
    };
    let speed_col = mapping.speed.require(&headers)?;

    let mut station_id: Option<String> = None;
    let mut rows: BTreeMap<NaiveDateTime, (Option<f64>, u64)> = BTreeMap::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| Error::row(line, format!("expected at least {} fields", idx + 1)))
        };

        if let Some(col) = station_col {
            let id = field(col)?;
            match &station_id {
                None => station_id = Some(id.to_string()),
                Some(prev) if prev != id => {
                    return Err(Error::row(
                        line,
                        format!("station '{id}' differs from '{prev}' earlier in the file"),
                    ))
                }
                Some(_) => {}
            }
        }

        let ts = match ts_cols {
            ResolvedTimestamp::Iso(col) => {
                let raw = field(col)?;
                parse_iso_timestamp(raw)
                    .ok_or_else(|| Error::row(line, format!("unparseable timestamp '{raw}'")))?
            }
            ResolvedTimestamp::Parts {
                year,
                month,
                day,
                time,
            } => {
                let (y, m, d, t) = (field(year)?, field(month)?, field(day)?, field(time)?);
                let date = match (y.parse::<i32>(), m.parse::<u32>(), d.parse::<u32>()) {
                    (Ok(y), Ok(m), Ok(d)) => NaiveDate::from_ymd_opt(y, m, d),
                    _ => None,
                }
                .ok_or_else(|| Error::row(line, format!("unparseable date '{y}-{m}-{d}'")))?;
                let time = parse_time_of_day(t)
                    .ok_or_else(|| Error::row(line, format!("unparseable time '{t}'")))?;
                date.and_time(time)
            }
        };

        let speed = parse_speed(field(speed_col)?);
        match rows.entry(ts) {
            Entry::Occupied(_) => {
                return Err(Error::DuplicateTimestamp {
                    line,
                    timestamp: ts.format(CANONICAL_TIMESTAMP_FORMAT).to_string(),
                })
            }
            Entry::Vacant(v) => {
                v.insert((speed, line));
            }
        }
    }

    let station_id = station_id.unwrap_or_else(|| default_station_id.to_string());
    let Some((&start, _)) = rows.first_key_value() else {
        return Err(Error::EmptyTable { station_id });
    };
    let (&end, _) = rows.last_key_value().expect("nonempty");
    let n_slots = ((end - start).num_seconds() / SLOT_SECONDS) as usize + 1;

    let mut speeds = vec![None; n_slots];
    for (ts, (speed, line)) in rows {
        let offset = (ts - start).num_seconds();
        if offset % SLOT_SECONDS != 0 {
            return Err(Error::row(
                line,
                format!(
                    "timestamp {} is not on the 10-minute grid starting at {}",
                    ts.format(CANONICAL_TIMESTAMP_FORMAT),
                    start.format(CANONICAL_TIMESTAMP_FORMAT)
                ),
            ));
        }
        speeds[(offset / SLOT_SECONDS) as usize] = speed;
    }

    Ok(RawObservationTable::new(station_id, start, speeds))
}

/// Share of missing records in a table.
pub fn missing_fraction(table: &RawObservationTable) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::EmptyTable {
            station_id: table.station_id.clone(),
        });
    }
    Ok(table.missing_count() as f64 / table.len() as f64)
}

/// Splits tables into those whose missing fraction is at most `threshold` and
/// the rest. Both halves keep input order. Empty tables are excluded.
pub fn filter_stations(
    tables: Vec<RawObservationTable>,
    threshold: f64,
) -> Result<(Vec<RawObservationTable>, Vec<RawObservationTable>)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(
            "missing threshold",
            format!("{threshold} is outside [0, 1]"),
        ));
    }
    Ok(tables
        .into_iter()
        .partition(|t| missing_fraction(t).is_ok_and(|f| f <= threshold)))
}
