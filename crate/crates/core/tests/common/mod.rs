#![allow(dead_code)]

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn jan1_2021() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2021, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Synthetic 10 m wind speeds: magnitude of two AR(1) wind components
/// (Rayleigh marginals) with a mild diurnal swing. `scale` sets the typical
/// speed in m/s.
pub fn synthetic_speeds(seed: u64, slots: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi: f64 = 0.985;
    let innov = (1.0 - phi * phi).sqrt();
    let (mut u, mut v) = (gaussian(&mut rng), gaussian(&mut rng));
    (0..slots)
        .map(|i| {
            u = phi * u + innov * gaussian(&mut rng);
            v = phi * v + innov * gaussian(&mut rng);
            let hour = (i % 144) as f64 / 6.0;
            let diurnal = 1.0 + 0.15 * ((hour - 15.0) / 24.0 * 2.0 * std::f64::consts::PI).cos();
            (scale * diurnal * (u * u + v * v).sqrt() / std::f64::consts::SQRT_2 * 100.0).round()
                / 100.0
        })
        .collect()
}

/// Canonical CSV text for a station, with every `gap_every`-th slot dropped
/// (0 disables) and every `negative_every`-th speed written as -9.
pub fn canonical_csv(
    id: &str,
    start: NaiveDateTime,
    speeds: &[f64],
    gap_every: usize,
    negative_every: usize,
) -> String {
    let mut out = String::from("station_id,timestamp_iso8601,wind_speed_ms\n");
    for (i, v) in speeds.iter().enumerate() {
        if gap_every > 0 && i % gap_every == gap_every / 2 {
            continue;
        }
        let ts = (start + Duration::minutes(10 * i as i64)).format("%Y-%m-%dT%H:%M:%S");
        if negative_every > 0 && i % negative_every == 1 {
            out.push_str(&format!("{id},{ts},-9\n"));
        } else {
            out.push_str(&format!("{id},{ts},{v}\n"));
        }
    }
    out
}

/// Step-by-step recurrence in watt-hours, written independently of the
/// library kernels.
pub fn oracle_suitable(
    power: &[f64],
    demand: &[f64],
    cadence_min: usize,
    cap_wh: f64,
    t_start: usize,
) -> bool {
    let dt_h = cadence_min as f64 / 60.0;
    let mut e = 0.0_f64;
    for (j, &a) in demand.iter().enumerate() {
        let minute = t_start * 10 + j * cadence_min;
        let Some(&p) = power.get(minute / 10) else {
            return false;
        };
        e = (e + (p - a) * dt_h).min(cap_wh);
        if e < 0.0 {
            return false;
        }
    }
    let last_minute = t_start * 10 + demand.len() * cadence_min;
    last_minute.div_ceil(10) <= power.len()
}

pub fn oracle_mask(
    power: &[f64],
    demand: &[f64],
    cadence_min: usize,
    cap_wh: f64,
    starts: usize,
) -> Vec<bool> {
    (0..starts)
        .map(|t| oracle_suitable(power, demand, cadence_min, cap_wh, t))
        .collect()
}

/// Random raw power series in watts with calm spells.
pub fn random_power(rng: &mut ChaCha8Rng, len: usize, peak: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut level: f64 = rng.random_range(0.0..peak);
    while out.len() < len {
        let run = rng.random_range(1..40usize);
        let calm = rng.random_bool(0.3);
        for _ in 0..run {
            level = (level + rng.random_range(-0.2..0.2) * peak).clamp(0.0, peak);
            out.push(if calm { 0.0 } else { level });
        }
    }
    out.truncate(len);
    out
}

pub fn random_demand(rng: &mut ChaCha8Rng, len: usize, peak: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..peak)
            }
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
