//! Battery recurrence and the useful-fraction scan.
//!
//! A start slot `t_s` is *suitable* when a load started there, with an empty
//! battery, never drives the stored energy below zero:
//!
//! ```text
//! E(0) = 0
//! E(j + 1) = min(E(j) + (P(j) - a(j)) * dt, E_bat)
//! ```
//!
//! for `j = 0 .. T_a`, where `P(j)` is the wind power of the 10-minute slot
//! containing profile step `j` (held constant within the slot) and `dt` is the
//! profile cadence in hours.
//!
//! Both kernels keep the battery level in units of watt-steps, `E * steps_per_hour`,
//! so each step is a plain `level + (P - a)` and the capacity is scaled once.
//! They perform the same floating-point operations in the same order for every
//! step they evaluate, which is what makes their masks bit-identical.
//!
//! A window that would need wind data past the end of the series is unsuitable.

use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{summarize, Summary};
use crate::error::{Error, Result};
use crate::loads::LoadProfile;
use crate::power::WindPowerSeries;

/// Candidate start instants in a 365-day year of 10-minute slots.
pub const STARTS_PER_YEAR: usize = 365 * 24 * 6;

const PAR_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    battery_capacity_wh: f64,
    starts: usize,
}

impl SimulationConfig {
    /// Scans the standard 52,560 candidate starts.
    pub fn new(battery_capacity_wh: f64) -> Result<Self> {
        if !(battery_capacity_wh.is_finite() && battery_capacity_wh >= 0.0) {
            return Err(Error::invalid(
                "battery capacity",
                format!("{battery_capacity_wh} Wh; expected a finite value >= 0"),
            ));
        }
        Ok(SimulationConfig {
            battery_capacity_wh,
            starts: STARTS_PER_YEAR,
        })
    }

    /// Overrides the number of candidate starts (and so the denominator of rho).
    pub fn with_starts(mut self, starts: usize) -> Result<Self> {
        if starts == 0 {
            return Err(Error::invalid("start count", "must be at least 1"));
        }
        self.starts = starts;
        Ok(self)
    }

    pub fn with_capacity(self, battery_capacity_wh: f64) -> Result<Self> {
        Ok(Self::new(battery_capacity_wh)?
            .with_starts(self.starts)
            .expect("nonzero"))
    }

    pub fn battery_capacity_wh(&self) -> f64 {
        self.battery_capacity_wh
    }

    pub fn starts(&self) -> usize {
        self.starts
    }
}

/// Which scan implementation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    Naive,
    #[default]
    Fast,
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Kernel::Naive),
            "fast" => Ok(Kernel::Fast),
            other => Err(Error::invalid(
                "kernel",
                format!("'{other}' (expected naive|fast)"),
            )),
        }
    }
}

impl Kernel {
    pub fn run(
        self,
        power: &WindPowerSeries,
        profile: &LoadProfile,
        cfg: &SimulationConfig,
    ) -> SuitabilityResult {
        match self {
            Kernel::Naive => useful_fraction(power, profile, cfg),
            Kernel::Fast => useful_fraction_fast(power, profile, cfg),
        }
    }
}

/// Per-start suitability and the resulting useful fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuitabilityResult {
    mask: Vec<bool>,
    suitable: usize,
}

impl SuitabilityResult {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        let suitable = mask.iter().filter(|&&b| b).count();
        SuitabilityResult { mask, suitable }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn suitable_count(&self) -> usize {
        self.suitable
    }

    pub fn starts(&self) -> usize {
        self.mask.len()
    }

    /// Suitable starts divided by candidate starts.
    pub fn rho(&self) -> f64 {
        if self.mask.is_empty() {
            return 0.0;
        }
        self.suitable as f64 / self.mask.len() as f64
    }
}

fn capacity_levels(profile: &LoadProfile, cfg: &SimulationConfig) -> f64 {
    cfg.battery_capacity_wh * profile.cadence().substeps_per_hour() as f64
}

fn overruns(n_slots: usize, per_slot: usize, support: usize, t_start: usize) -> bool {
    t_start * per_slot + support > n_slots * per_slot
}

/// Runs the recurrence for one start. Stops at the first deficit.
pub fn simulate_start(
    power: &WindPowerSeries,
    profile: &LoadProfile,
    cfg: &SimulationConfig,
    t_start: usize,
) -> bool {
    run_naive(power, profile, capacity_levels(profile, cfg), t_start, None)
}

/// Battery levels in watt-hours for one start, beginning with `E(0) = 0`.
///
/// Ends after the last profile step, or at the first step whose level is
/// negative; that level is reported as computed, not clamped at zero.
/// Returns `None` if the window runs past the end of the data.
pub fn battery_trace(
    power: &WindPowerSeries,
    profile: &LoadProfile,
    cfg: &SimulationConfig,
    t_start: usize,
) -> Option<Vec<f64>> {
    let per_slot = profile.cadence().substeps_per_slot();
    if overruns(power.len(), per_slot, profile.support_len(), t_start) {
        return None;
    }
    let mut trace = Vec::with_capacity(profile.support_len() + 1);
    run_naive(
        power,
        profile,
        capacity_levels(profile, cfg),
        t_start,
        Some(&mut trace),
    );
    let per_hour = profile.cadence().substeps_per_hour() as f64;
    Some(trace.into_iter().map(|level| level / per_hour).collect())
}

fn run_naive(
    power: &WindPowerSeries,
    profile: &LoadProfile,
    cap: f64,
    t_start: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> bool {
    let per_slot = profile.cadence().substeps_per_slot();
    let support = profile.support_len();
    if overruns(power.len(), per_slot, support, t_start) {
        return false;
    }
    let first_step = t_start * per_slot;
    let mut level = 0.0_f64;
    if let Some(t) = trace.as_deref_mut() {
        t.push(level);
    }
    for j in 0..support {
        let wind = power.power()[(first_step + j) / per_slot];
        let demand = profile.demand_at(j as i64);
        level = (level + (wind - demand)).min(cap);
        if let Some(t) = trace.as_deref_mut() {
            t.push(level);
        }
        if level < 0.0 {
            return false;
        }
    }
    true
}

/// Reference scan: [`simulate_start`] at every candidate start.
pub fn useful_fraction(
    power: &WindPowerSeries,
    profile: &LoadProfile,
    cfg: &SimulationConfig,
) -> SuitabilityResult {
    let cap = capacity_levels(profile, cfg);
    let mask = (0..cfg.starts)
        .map(|t| run_naive(power, profile, cap, t, None))
        .collect();
    SuitabilityResult::from_mask(mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Outcome {
    suitable: bool,
    /// The capacity bound cut the level at least once before the verdict.
    clamped: bool,
}

/// Precomputed state shared by every window of one scan.
struct Scanner<'a> {
    power: &'a [f64],
    demand: &'a [f64],
    per_slot: usize,
    /// Slots touched by one window.
    span: usize,
    /// `covered[t]`: every slot of the window at `t` delivers at least the
    /// profile's peak demand, so no step can run a deficit.
    covered: Vec<bool>,
}

impl<'a> Scanner<'a> {
    fn new(power: &'a WindPowerSeries, profile: &'a LoadProfile) -> Self {
        let per_slot = profile.cadence().substeps_per_slot();
        let demand = profile.demand();
        let span = demand.len().div_ceil(per_slot);
        let peak = profile.peak();
        let covered = if span == 0 {
            vec![true; power.len() + 1]
        } else {
            sliding_min(power.power(), span)
                .into_iter()
                .map(|m| m >= peak)
                .collect()
        };
        Scanner {
            power: power.power(),
            demand,
            per_slot,
            span,
            covered,
        }
    }

    fn window(&self, t_start: usize, cap: f64) -> Outcome {
        if t_start + self.span > self.power.len() {
            return Outcome {
                suitable: false,
                clamped: false,
            };
        }
        if self.covered[t_start] {
            return Outcome {
                suitable: true,
                clamped: false,
            };
        }
        let mut level = 0.0_f64;
        let mut clamped = false;
        let slots = &self.power[t_start..t_start + self.span];
        for (&wind, steps) in slots.iter().zip(self.demand.chunks(self.per_slot)) {
            for &demand in steps {
                let next = level + (wind - demand);
                if next > cap {
                    clamped = true;
                    level = cap;
                } else {
                    level = next;
                }
                if level < 0.0 {
                    return Outcome {
                        suitable: false,
                        clamped,
                    };
                }
            }
        }
        Outcome {
            suitable: true,
            clamped,
        }
    }
}

/// Minimum of every length-`w` window of `values`, via a monotone deque.
/// Returns `values.len() - w + 1` entries (none if `w > values.len()`).
pub(crate) fn sliding_min(values: &[f64], w: usize) -> Vec<f64> {
    assert!(w > 0);
    if w > values.len() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(values.len() - w + 1);
    let mut deque = std::collections::VecDeque::with_capacity(w);
    for (i, &v) in values.iter().enumerate() {
        while deque.back().is_some_and(|&j| values[j] >= v) {
            deque.pop_back();
        }
        deque.push_back(i);
        if deque[0] + w <= i {
            deque.pop_front();
        }
        if i + 1 >= w {
            out.push(values[deque[0]]);
        }
    }
    out
}

/// Same mask as [`useful_fraction`], computed faster.
///
/// Windows whose wind power never drops below the profile peak are accepted
/// without stepping through them (every increment is non-negative, so the
/// level can't fall below zero). The rest run the same recurrence with an
/// early exit, split across threads by start range.
pub fn useful_fraction_fast(
    power: &WindPowerSeries,
    profile: &LoadProfile,
    cfg: &SimulationConfig,
) -> SuitabilityResult {
    let scanner = Scanner::new(power, profile);
    let cap = capacity_levels(profile, cfg);
    let mut mask = vec![false; cfg.starts];
    mask.par_chunks_mut(PAR_CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let base = chunk * PAR_CHUNK;
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = scanner.window(base + i, cap).suitable;
            }
        });
    SuitabilityResult::from_mask(mask)
}

/// Masks for one station at several capacities, returned in input order.
///
/// Capacities are visited in ascending order. A start that was suitable at a
/// smaller capacity stays suitable (the level at a larger capacity is never
/// lower), and an unsuitable start whose level never reached the smaller
/// capacity follows the identical trajectory at any larger one; only the
/// remaining starts are simulated again.
pub fn sweep_station(
    power: &WindPowerSeries,
    profile: &LoadProfile,
    capacities_wh: &[f64],
    starts: usize,
) -> Result<Vec<SuitabilityResult>> {
    let configs = capacities_wh
        .iter()
        .map(|&c| SimulationConfig::new(c)?.with_starts(starts))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..configs.len()).collect();
    order.sort_by(|&a, &b| capacities_wh[a].total_cmp(&capacities_wh[b]));

    let scanner = Scanner::new(power, profile);
    let mut state: Vec<Outcome> = Vec::new();
    let mut results: Vec<Option<SuitabilityResult>> = vec![None; configs.len()];

    for (rank, &idx) in order.iter().enumerate() {
        let cap = capacity_levels(profile, &configs[idx]);
        if rank == 0 {
            state = (0..starts)
                .into_par_iter()
                .with_min_len(PAR_CHUNK)
                .map(|t| scanner.window(t, cap))
                .collect();
        } else {
            state
                .par_iter_mut()
                .enumerate()
                .with_min_len(PAR_CHUNK)
                .for_each(|(t, o)| {
                    if !o.suitable && o.clamped {
                        *o = scanner.window(t, cap);
                    }
                });
        }
        results[idx] = Some(SuitabilityResult::from_mask(
            state.iter().map(|o| o.suitable).collect(),
        ));
    }
    Ok(results
        .into_iter()
        .map(|r| r.expect("every capacity visited"))
        .collect())
}

/// Summary statistics of per-station rho for one battery capacity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub battery_capacity_wh: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub mean_rho: f64,
    pub std_rho: f64,
}

impl SweepRow {
    fn from_summary(battery_capacity_wh: f64, s: Summary) -> Self {
        SweepRow {
            battery_capacity_wh,
            min_rho: s.min,
            max_rho: s.max,
            mean_rho: s.mean,
            std_rho: s.std,
        }
    }
}

/// Per-station rho at each capacity plus one summary row per capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub capacities_wh: Vec<f64>,
    /// `rhos[station][capacity]`, stations in input order.
    pub rhos: Vec<Vec<f64>>,
    pub rows: Vec<SweepRow>,
}

/// Runs every station at every capacity and summarizes rho across stations
/// (population standard deviation).
pub fn capacity_sweep(
    powers: &[WindPowerSeries],
    profile: &LoadProfile,
    capacities_wh: &[f64],
    starts: usize,
) -> Result<SweepResult> {
    if capacities_wh.is_empty() {
        return Err(Error::invalid("capacity sweep", "no capacities given"));
    }
    if powers.is_empty() {
        return Err(Error::invalid("capacity sweep", "no stations given"));
    }
    let rhos = powers
        .par_iter()
        .map(|p| {
            sweep_station(p, profile, capacities_wh, starts)
                .map(|rs| rs.iter().map(SuitabilityResult::rho).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = capacities_wh
        .iter()
        .enumerate()
        .map(|(k, &cap)| {
            let column: Vec<f64> = rhos.iter().map(|r| r[k]).collect();
            summarize(&column).map(|s| SweepRow::from_summary(cap, s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        capacities_wh: capacities_wh.to_vec(),
        rhos,
        rows,
    })
}
