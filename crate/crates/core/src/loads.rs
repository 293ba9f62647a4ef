//! Finite-support load profiles.

use std::io::{Read, Write};

use crate::csvmeta;
use crate::error::{Error, Result};
use crate::SLOT_MINUTES;

const DISHWASHER: &str = include_str!("../data/dishwasher.csv");
const HOUSEHOLD: &str = include_str!("../data/household.csv");

/// Sampling interval of a load profile; always a divisor of the 10-minute slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cadence(u32);

impl Cadence {
    pub const ONE_MINUTE: Cadence = Cadence(1);
    pub const TEN_MINUTES: Cadence = Cadence(SLOT_MINUTES);

    pub fn from_minutes(minutes: u32) -> Result<Self> {
        if minutes == 0 || !SLOT_MINUTES.is_multiple_of(minutes) {
            return Err(Error::invalid(
                "cadence",
                format!("{minutes} min does not divide the {SLOT_MINUTES}-minute slot"),
            ));
        }
        Ok(Cadence(minutes))
    }

    pub fn minutes(self) -> u32 {
        self.0
    }

    /// Profile samples per 10-minute observation slot.
    pub fn substeps_per_slot(self) -> usize {
        (SLOT_MINUTES / self.0) as usize
    }

    /// Profile samples per hour, the inverse of the step length in hours.
    pub fn substeps_per_hour(self) -> u32 {
        60 / self.0
    }
}

/// Power demand `a(t')` of an appliance or household, zero outside `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    name: String,
    cadence: Cadence,
    demand: Vec<f64>,
}

impl LoadProfile {
    pub fn new(name: impl Into<String>, cadence: Cadence, demand: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = demand
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::invalid(
                "load profile",
                format!("t_index {i}: power {p} must be finite and >= 0"),
            ));
        }
        Ok(LoadProfile {
            name: name.into(),
            cadence,
            demand,
        })
    }

    /// 75-minute dishwasher cycle at 1-minute cadence.
    pub fn dishwasher() -> Self {
        Self::from_csv(DISHWASHER.as_bytes(), "dishwasher").expect("bundled profile is valid")
    }

    /// One day of a single-family household at 10-minute cadence.
    pub fn household() -> Self {
        Self::from_csv(HOUSEHOLD.as_bytes(), "household").expect("bundled profile is valid")
    }

    /// Reads `t_index,power_w` rows preceded by a `# cadence_minutes: N` line.
    /// Indices must run 0, 1, 2, ... without gaps.
    pub fn from_csv<R: Read>(mut reader: R, name: &str) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let (meta, body) = csvmeta::split(&text);
        let cadence = meta
            .get("cadence_minutes")
            .ok_or_else(|| Error::invalid("load profile", "missing '# cadence_minutes: N' line"))?;
        let cadence = cadence
            .parse::<u32>()
            .map_err(|_| Error::invalid("load profile", format!("cadence_minutes '{cadence}'")))
            .and_then(Cadence::from_minutes)?;

        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = rdr.headers()?.clone();
        for col in ["t_index", "power_w"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::MissingColumn { column: col.into() });
            }
        }

        let mut demand = Vec::new();
        for row in rdr.deserialize::<ProfileRow>() {
            let row = row?;
            if row.t_index != demand.len() as u64 {
                return Err(Error::invalid(
                    "load profile",
                    format!("expected t_index {}, found {}", demand.len(), row.t_index),
                ));
            }
            demand.push(row.power_w);
        }
        if demand.is_empty() {
            return Err(Error::invalid("load profile", "no rows"));
        }
        Self::new(name, cadence, demand)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# cadence_minutes: {}", self.cadence.minutes())?;
        writeln!(writer, "t_index,power_w")?;
        for (i, p) in self.demand.iter().enumerate() {
            writeln!(writer, "{i},{p}")?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cadence(&self) -> Cadence {
        self.cadence
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    /// Support length `T_a` in profile steps.
    pub fn support_len(&self) -> usize {
        self.demand.len()
    }

    /// Demand at any step index; zero outside the support.
    pub fn demand_at(&self, t_prime: i64) -> f64 {
        usize::try_from(t_prime)
            .ok()
            .and_then(|i| self.demand.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn peak(&self) -> f64 {
        self.demand.iter().copied().fold(0.0, f64::max)
    }

    /// Energy of one full run, in watt-hours.
    pub fn total_energy_wh(&self) -> f64 {
        self.demand.iter().sum::<f64>() / self.cadence.substeps_per_hour() as f64
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.cadence,
            self.demand.iter().map(|p| p * c).collect(),
        )
    }
}

#[derive(serde::Deserialize)]
struct ProfileRow {
    t_index: u64,
    power_w: f64,
}
