//! Gap imputation: a [`RawObservationTable`] becomes a complete [`WindSpeedSeries`].

use std::io::Write;

use chrono::{Duration, NaiveDateTime};

use crate::error::{Error, Result};
use crate::ingest::RawObservationTable;
use crate::SLOT_MINUTES;

/// A complete 10-minute wind-speed series at observation height.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSpeedSeries {
    station_id: String,
    start: NaiveDateTime,
    speeds: Vec<f64>,
    imputed: Vec<bool>,
}

impl WindSpeedSeries {
    /// Builds a series with nothing imputed. Speeds must be finite and non-negative.
    pub fn new(
        station_id: impl Into<String>,
        start: NaiveDateTime,
        speeds: Vec<f64>,
    ) -> Result<Self> {
        let imputed = vec![false; speeds.len()];
        Self::with_mask(station_id, start, speeds, imputed)
    }

    pub fn with_mask(
        station_id: impl Into<String>,
        start: NaiveDateTime,
        speeds: Vec<f64>,
        imputed: Vec<bool>,
    ) -> Result<Self> {
        if speeds.len() != imputed.len() {
            return Err(Error::invalid(
                "wind speed series",
                format!("{} speeds but {} mask entries", speeds.len(), imputed.len()),
            ));
        }
        if let Some((i, v)) = speeds
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::invalid(
                "wind speed series",
                format!("slot {i} holds {v}; speeds must be finite and >= 0"),
            ));
        }
        Ok(WindSpeedSeries {
            station_id: station_id.into(),
            start,
            speeds,
            imputed,
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn imputed_mask(&self) -> &[bool] {
        &self.imputed
    }

    pub fn imputed_count(&self) -> usize {
        self.imputed.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn timestamp(&self, slot: usize) -> NaiveDateTime {
        self.start + Duration::minutes(slot as i64 * SLOT_MINUTES as i64)
    }

    /// Debug dump as `slot,speed,imputed`.
    pub fn write_imputed_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["slot", "speed", "imputed"])?;
        for (i, (v, m)) in self.speeds.iter().zip(&self.imputed).enumerate() {
            wtr.write_record([i.to_string(), v.to_string(), m.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Fills missing slots by linear interpolation in the slot index.
///
/// An interior gap between observed slots `m` and `n` gets
/// `(v[m] - v[n]) / (m - n) * (t - m) + v[m]`. Leading and trailing gaps have
/// only one neighbour and take its value. Every filled slot is flagged in the
/// imputed mask; observed values pass through untouched.
pub fn impute_linear(table: &RawObservationTable) -> Result<WindSpeedSeries> {
    let raw = table.speeds();
    let observed: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
    let (Some(&first), Some(&last)) = (observed.first(), observed.last()) else {
        return Err(Error::AllMissing {
            station_id: table.station_id().to_string(),
        });
    };

    let mut speeds = vec![0.0; raw.len()];
    let mut imputed = vec![false; raw.len()];
    for &i in &observed {
        speeds[i] = raw[i].expect("observed");
    }

    for t in 0..first {
        speeds[t] = speeds[first];
        imputed[t] = true;
    }
    for t in last + 1..raw.len() {
        speeds[t] = speeds[last];
        imputed[t] = true;
    }

    for pair in observed.windows(2) {
        let (m, n) = (pair[0], pair[1]);
        if n == m + 1 {
            continue;
        }
        let (vm, vn) = (speeds[m], speeds[n]);
        let slope = (vm - vn) / (m as f64 - n as f64);
        let (lo, hi) = (vm.min(vn), vm.max(vn));
        for t in m + 1..n {
            // clamp only absorbs rounding at the bracket ends
            speeds[t] = (slope * (t - m) as f64 + vm).clamp(lo, hi);
            imputed[t] = true;
        }
    }

    WindSpeedSeries::with_mask(table.station_id(), table.start(), speeds, imputed)
}
