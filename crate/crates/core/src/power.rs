//! From 10 m wind speed to turbine output at hub height.

use std::io::{Read, Write};

use chrono::NaiveDateTime;

use crate::csvmeta;
use crate::error::{Error, Result};
use crate::timeseries::WindSpeedSeries;

const BUNDLED_CURVE: &str = include_str!("../data/nordex_n100_2500.csv");

/// Power-law shear extrapolation from the observation height to the hub.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightExtrapolation {
    reference_height: f64,
    hub_height: f64,
    alpha: f64,
}

impl Default for HeightExtrapolation {
    /// 10 m anemometer, 100 m hub, exponent 1/7.
    fn default() -> Self {
        HeightExtrapolation {
            reference_height: 10.0,
            hub_height: 100.0,
            alpha: 1.0 / 7.0,
        }
    }
}

impl HeightExtrapolation {
    pub fn new(reference_height: f64, hub_height: f64, alpha: f64) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(reference_height) || !positive(hub_height) {
            return Err(Error::invalid(
                "height extrapolation",
                format!("heights must be > 0 (got {reference_height}, {hub_height})"),
            ));
        }
        if !positive(alpha) {
            return Err(Error::invalid(
                "height extrapolation",
                format!("alpha must be > 0 (got {alpha})"),
            ));
        }
        Ok(HeightExtrapolation {
            reference_height,
            hub_height,
            alpha,
        })
    }

    pub fn reference_height(&self) -> f64 {
        self.reference_height
    }

    pub fn hub_height(&self) -> f64 {
        self.hub_height
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(hub / reference) ^ alpha`
    pub fn factor(&self) -> f64 {
        (self.hub_height / self.reference_height).powf(self.alpha)
    }
}

/// Scales a reference-height speed to hub height.
pub fn extrapolate_speed(v10: f64, cfg: &HeightExtrapolation) -> Result<f64> {
    if !(v10.is_finite() && v10 >= 0.0) {
        return Err(Error::invalid(
            "wind speed",
            format!("{v10} m/s; expected a finite value >= 0"),
        ));
    }
    Ok(v10 * cfg.factor())
}

/// A tabulated turbine power curve.
///
/// Knot speeds are strictly increasing. Output is zero below the first knot
/// and at or above `cut_out`, piecewise linear between knots, and holds the
/// last knot's power between the last knot and `cut_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    knots: Vec<(f64, f64)>,
    cut_out: f64,
}

impl PowerCurve {
    pub fn new(knots: Vec<(f64, f64)>, cut_out: f64) -> Result<Self> {
        let Some(&(first, _)) = knots.first() else {
            return Err(Error::invalid("power curve", "no knots"));
        };
        if !(first.is_finite() && first >= 0.0) {
            return Err(Error::invalid(
                "power curve",
                format!("first knot speed {first} < 0"),
            ));
        }
        for &(v, p) in &knots {
            if !v.is_finite() || !(p.is_finite() && p >= 0.0) {
                return Err(Error::invalid(
                    "power curve",
                    format!("knot ({v}, {p}) must be finite with power >= 0"),
                ));
            }
        }
        if let Some(w) = knots.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "power curve",
                format!(
                    "knot speeds not strictly increasing at {} -> {}",
                    w[0].0, w[1].0
                ),
            ));
        }
        let last = knots[knots.len() - 1].0;
        if cut_out.is_nan() || cut_out < last {
            return Err(Error::invalid(
                "power curve",
                format!("cut-out {cut_out} below last knot speed {last}"),
            ));
        }
        Ok(PowerCurve { knots, cut_out })
    }

    /// The bundled Nordex N100/2500 curve.
    pub fn nordex_n100() -> Self {
        Self::from_csv(BUNDLED_CURVE.as_bytes()).expect("bundled power curve is valid")
    }

    /// Reads `speed_ms,power_w` rows preceded by a `# cut_out_ms: X` comment line.
    pub fn from_csv<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let (meta, body) = csvmeta::split(&text);
        let cut_out = meta
            .get("cut_out_ms")
            .ok_or_else(|| Error::invalid("power curve", "missing '# cut_out_ms: X' line"))?;
        let cut_out: f64 = cut_out
            .parse()
            .map_err(|_| Error::invalid("power curve", format!("cut_out_ms '{cut_out}'")))?;

        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = rdr.headers()?.clone();
        for col in ["speed_ms", "power_w"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::MissingColumn { column: col.into() });
            }
        }
        let mut knots = Vec::new();
        for row in rdr.deserialize::<KnotRow>() {
            let row = row?;
            knots.push((row.speed_ms, row.power_w));
        }
        Self::new(knots, cut_out)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# cut_out_ms: {}", self.cut_out)?;
        writeln!(writer, "speed_ms,power_w")?;
        for (v, p) in &self.knots {
            writeln!(writer, "{v},{p}")?;
        }
        Ok(())
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn cut_out(&self) -> f64 {
        self.cut_out
    }

    /// Largest tabulated power (the turbine rating).
    pub fn rated_power(&self) -> f64 {
        self.knots.iter().map(|k| k.1).fold(0.0, f64::max)
    }
}

#[derive(serde::Deserialize)]
struct KnotRow {
    speed_ms: f64,
    power_w: f64,
}

/// Turbine output for a hub-height speed.
pub fn power_at_speed(v100: f64, curve: &PowerCurve) -> f64 {
    let knots = &curve.knots;
    if v100.is_nan() || v100 < knots[0].0 || v100 >= curve.cut_out {
        return 0.0;
    }
    match knots.binary_search_by(|k| k.0.total_cmp(&v100)) {
        Ok(i) => knots[i].1,
        Err(i) if i == knots.len() => knots[i - 1].1,
        Err(i) => {
            let (vj, pj) = knots[i - 1];
            let (vk, pk) = knots[i];
            let p = (pj - pk) / (vj - vk) * (v100 - vj) + pj;
            p.clamp(pj.min(pk), pj.max(pk))
        }
    }
}

/// Turbine output series for one station.
#[derive(Debug, Clone, PartialEq)]
pub struct WindPowerSeries {
    station_id: String,
    start: NaiveDateTime,
    power: Vec<f64>,
}

impl WindPowerSeries {
    /// Power values in watts; they must be finite and non-negative.
    pub fn new(
        station_id: impl Into<String>,
        start: NaiveDateTime,
        power: Vec<f64>,
    ) -> Result<Self> {
        if let Some(p) = power.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(
                "wind power series",
                format!("{p} W; power must be finite and >= 0"),
            ));
        }
        Ok(WindPowerSeries {
            station_id: station_id.into(),
            start,
            power,
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Multiplies every value by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.station_id.clone(),
            self.start,
            self.power.iter().map(|p| p * c).collect(),
        )
    }
}

/// Extrapolates each speed to hub height and maps it through the power curve.
pub fn speeds_to_power(
    series: &WindSpeedSeries,
    cfg: &HeightExtrapolation,
    curve: &PowerCurve,
) -> WindPowerSeries {
    let factor = cfg.factor();
    let power = series
        .speeds()
        .iter()
        .map(|&v| power_at_speed(v * factor, curve))
        .collect();
    WindPowerSeries {
        station_id: series.station_id().to_string(),
        start: series.start(),
        power,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn curve() -> PowerCurve {
        PowerCurve::new(
            vec![(3.0, 0.0), (5.0, 100.0), (10.0, 1000.0), (12.0, 1000.0)],
            25.0,
        )
        .unwrap()
    }

    #[test]
    fn extrapolation_values() {
        let cfg = HeightExtrapolation::default();
        assert_eq!(extrapolate_speed(0.0, &cfg).unwrap(), 0.0);
        let one = extrapolate_speed(1.0, &cfg).unwrap();
        // 10^(1/7) to 16 digits
        assert_relative_eq!(one, 1.389_495_494_373_137_6, max_relative = 1e-15);
        assert_eq!(extrapolate_speed(2.0, &cfg).unwrap(), 2.0 * one);
        assert!(extrapolate_speed(-0.1, &cfg).is_err());
    }

    #[test]
    fn invalid_extrapolation_config() {
        assert!(HeightExtrapolation::new(0.0, 100.0, 1.0 / 7.0).is_err());
        assert!(HeightExtrapolation::new(10.0, 100.0, 0.0).is_err());
        assert!(HeightExtrapolation::new(10.0, 80.0, 0.2).is_ok());
    }

    #[test]
    fn curve_regions() {
        let c = curve();
        assert_eq!(power_at_speed(0.0, &c), 0.0);
        assert_eq!(power_at_speed(2.99, &c), 0.0);
        assert_eq!(power_at_speed(5.0, &c), 100.0);
        assert_eq!(power_at_speed(7.5, &c), 550.0);
        assert_eq!(power_at_speed(4.0, &c), 50.0);
        // plateau between last knot and cut-out
        assert_eq!(power_at_speed(20.0, &c), 1000.0);
        assert_eq!(power_at_speed(25.0, &c), 0.0);
        assert_eq!(power_at_speed(30.0, &c), 0.0);
        assert_eq!(power_at_speed(f64::NAN, &c), 0.0);
    }

    #[test]
    fn curve_validation() {
        assert!(PowerCurve::new(vec![], 10.0).is_err());
        assert!(PowerCurve::new(vec![(3.0, 0.0), (3.0, 1.0)], 10.0).is_err());
        assert!(PowerCurve::new(vec![(3.0, -1.0)], 10.0).is_err());
        assert!(PowerCurve::new(vec![(-1.0, 0.0)], 10.0).is_err());
        assert!(PowerCurve::new(vec![(3.0, 0.0), (12.0, 5.0)], 11.0).is_err());
        assert!(PowerCurve::new(vec![(3.0, 0.0), (12.0, 5.0)], 12.0).is_ok());
    }

    #[test]
    fn bundled_curve() {
        let c = PowerCurve::nordex_n100();
        assert_eq!(c.cut_out(), 20.0);
        assert_eq!(c.rated_power(), 2_500_000.0);
        assert_eq!(c.knots()[0], (2.5, 0.0));
    }

    #[test]
    fn curve_csv_round_trip_and_errors() {
        let c = curve();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(PowerCurve::from_csv(buf.as_slice()).unwrap(), c);

        assert!(PowerCurve::from_csv("speed_ms,power_w\n3,0\n".as_bytes()).is_err());
        assert!(matches!(
            PowerCurve::from_csv("# cut_out_ms: 20\nspeed,power_w\n3,0\n".as_bytes()),
            Err(Error::MissingColumn { .. })
        ));
    }

    fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2021, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    #[test]
    fn series_conversion() {
        let cfg = HeightExtrapolation::default();
        let c = curve();
        let zeros = WindSpeedSeries::new("s", start(), vec![0.0; 5]).unwrap();
        assert_eq!(speeds_to_power(&zeros, &cfg, &c).power(), &[0.0; 5]);

        let one = WindSpeedSeries::new("s", start(), vec![4.2]).unwrap();
        let expected = power_at_speed(extrapolate_speed(4.2, &cfg).unwrap(), &c);
        assert_eq!(speeds_to_power(&one, &cfg, &c).power(), &[expected]);

        // v10 chosen so the hub speed lands on the 10 m/s knot
        let v10 = 10.0 / 10f64.powf(1.0 / 7.0);
        let constant = WindSpeedSeries::new("s", start(), vec![v10; 4]).unwrap();
        for p in speeds_to_power(&constant, &cfg, &c).power() {
            assert_relative_eq!(*p, 1000.0, max_relative = 1e-9);
        }
    }

    fn arb_curve() -> impl Strategy<Value = PowerCurve> {
        (
            0.0..3.0f64,
            prop::collection::vec((0.1..3.0f64, 0.0..3000.0f64), 1..12),
            0.0..5.0f64,
        )
            .prop_map(|(first, steps, extra)| {
                let mut v = first;
                let mut knots = vec![(first, 0.0)];
                for (dv, p) in steps {
                    v += dv;
                    knots.push((v, p));
                }
                let cut_out = v + extra;
                PowerCurve::new(knots, cut_out).unwrap()
            })
    }

    proptest! {
        #[test]
        fn power_is_bounded_and_continuous(c in arb_curve(), v in 0.0..40.0f64) {
            let p = power_at_speed(v, &c);
            prop_assert!(p >= 0.0 && p <= c.rated_power());
            // continuity on [0, cut_out): nearby speeds give nearby power
            let h = 1e-7;
            if v + h < c.cut_out() {
                let q = power_at_speed(v + h, &c);
                let max_slope = c.knots().windows(2)
                    .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                    .fold(0.0, f64::max);
                prop_assert!((p - q).abs() <= max_slope * h * 1.01 + 1e-9);
            }
        }

        #[test]
        fn knots_are_reproduced_exactly(c in arb_curve()) {
            for &(v, p) in c.knots() {
                if v < c.cut_out() {
                    prop_assert_eq!(power_at_speed(v, &c), p);
                }
            }
        }

        #[test]
        fn monotone_where_knots_are(steps in prop::collection::vec(0.1..3.0f64, 1..10), a in 0.0..30.0f64, b in 0.0..30.0f64) {
            let mut v = 1.0;
            let mut p = 0.0;
            let mut knots = vec![(v, p)];
            for s in steps {
                v += s;
                p += 100.0 * s;
                knots.push((v, p));
            }
            let c = PowerCurve::new(knots, v + 1.0).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if hi < c.cut_out() {
                prop_assert!(power_at_speed(lo, &c) <= power_at_speed(hi, &c));
            }
        }

        #[test]
        fn extrapolation_is_positively_homogeneous(v in 0.0..50.0f64, scale in 0.0..20.0f64) {
            let cfg = HeightExtrapolation::default();
            let lhs = extrapolate_speed(scale * v, &cfg).unwrap();
            let rhs = scale * extrapolate_speed(v, &cfg).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }
    }
}
