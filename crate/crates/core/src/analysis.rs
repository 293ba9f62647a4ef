//! When do suitable starts happen? Hour-of-day and month histograms, entropy
//! of the hourly distribution, and summary statistics across stations.
//!
//! Hours and months come from the series timestamps as ingested, in whatever
//! zone the source files used.

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::timeseries::WindSpeedSeries;
use crate::SLOT_MINUTES;

pub const HOURS_PER_DAY: usize = 24;
pub const MONTHS_PER_YEAR: usize = 12;

/// Maps a start index to its wall-clock instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StartCalendar {
    start: NaiveDateTime,
}

impl StartCalendar {
    pub fn new(start: NaiveDateTime) -> Self {
        StartCalendar { start }
    }

    pub fn instant(&self, index: usize) -> NaiveDateTime {
        self.start + Duration::minutes(index as i64 * SLOT_MINUTES as i64)
    }

    /// 0..24
    pub fn hour_of(&self, index: usize) -> usize {
        self.instant(index).hour() as usize
    }

    /// 0..12, January is 0.
    pub fn month_of(&self, index: usize) -> usize {
        self.instant(index).month0() as usize
    }
}

/// Suitable starts per hour of day and the normalized entropy of that histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourlyDistribution {
    pub counts: [u64; HOURS_PER_DAY],
    /// `None` when there are no suitable starts at all.
    pub normalized_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalDistribution {
    pub hourly_counts: [u64; HOURS_PER_DAY],
    pub monthly_counts: [u64; MONTHS_PER_YEAR],
    pub normalized_entropy: Option<f64>,
}

impl TemporalDistribution {
    pub fn from_mask(mask: &[bool], calendar: &StartCalendar) -> Self {
        let hourly = hourly_entropy(mask, calendar);
        TemporalDistribution {
            hourly_counts: hourly.counts,
            monthly_counts: monthly_distribution(mask, calendar),
            normalized_entropy: hourly.normalized_entropy,
        }
    }

    pub fn total(&self) -> u64 {
        self.hourly_counts.iter().sum()
    }
}

/// Shannon entropy in nats of the distribution `counts / sum(counts)`, with
/// empty bins contributing nothing. `None` if every count is zero.
pub fn shannon_entropy(counts: &[u64]) -> Option<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let total = total as f64;
    Some(
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total;
                p * (total / c as f64).ln()
            })
            .sum(),
    )
}

/// Entropy of an hour-of-day histogram divided by `ln 24`, so a uniform
/// spread scores 1 and a single busy hour scores 0.
pub fn normalized_hourly_entropy(counts: &[u64; HOURS_PER_DAY]) -> Option<f64> {
    shannon_entropy(counts).map(|h| (h / (HOURS_PER_DAY as f64).ln()).clamp(0.0, 1.0))
}

pub fn hourly_entropy(mask: &[bool], calendar: &StartCalendar) -> HourlyDistribution {
    let mut counts = [0u64; HOURS_PER_DAY];
    for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        counts[calendar.hour_of(i)] += 1;
    }
    HourlyDistribution {
        normalized_entropy: normalized_hourly_entropy(&counts),
        counts,
    }
}

pub fn monthly_distribution(mask: &[bool], calendar: &StartCalendar) -> [u64; MONTHS_PER_YEAR] {
    let mut counts = [0u64; MONTHS_PER_YEAR];
    for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        counts[calendar.month_of(i)] += 1;
    }
    counts
}

/// Mean 10 m wind speed per calendar month; NaN for months the series does not touch.
pub fn monthly_mean_speed(series: &WindSpeedSeries) -> [f64; MONTHS_PER_YEAR] {
    let calendar = StartCalendar::new(series.start());
    let mut sums = [0.0; MONTHS_PER_YEAR];
    let mut counts = [0usize; MONTHS_PER_YEAR];
    for (i, &v) in series.speeds().iter().enumerate() {
        let m = calendar.month_of(i);
        sums[m] += v;
        counts[m] += 1;
    }
    std::array::from_fn(|m| {
        if counts[m] == 0 {
            f64::NAN
        } else {
            sums[m] / counts[m] as f64
        }
    })
}

/// Population statistics of a list of ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

/// Min, max, mean and population standard deviation (single-pass Welford).
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::invalid("summary", "no values"));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        min = min.min(x);
        max = max.max(x);
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok(Summary {
        min,
        max,
        mean: mean.clamp(min, max),
        std: (m2.max(0.0) / values.len() as f64).sqrt(),
    })
}
