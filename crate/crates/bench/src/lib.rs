//! Synthetic station years for the benchmarks.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wind_atlas::{
    speeds_to_power, HeightExtrapolation, PowerCurve, WindPowerSeries, WindSpeedSeries,
    STARTS_PER_YEAR,
};

/// A year of 10-minute speeds: AR(1) around a diurnal cycle, `mean` m/s on average.
pub fn synthetic_speeds(seed: u64, slots: usize, mean: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0f64;
    (0..slots)
        .map(|i| {
            x = 0.985 * x + 0.17 * rng.random_range(-1.0..1.0);
            let day = (i % 144) as f64 / 144.0 * std::f64::consts::TAU;
            (mean * (1.0 + x + 0.25 * day.sin())).max(0.0)
        })
        .collect()
}

/// Hub-height turbine output for a synthetic station, one year plus a day of slack.
pub fn synthetic_station(seed: u64, mean: f64) -> WindPowerSeries {
    let start = NaiveDate::from_ymd_opt(2021, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date");
    let speeds = synthetic_speeds(seed, STARTS_PER_YEAR + 144, mean);
    let series = WindSpeedSeries::new(format!("bench{seed}"), start, speeds).expect("valid speeds");
    speeds_to_power(
        &series,
        &HeightExtrapolation::default(),
        &PowerCurve::nordex_n100(),
    )
}
