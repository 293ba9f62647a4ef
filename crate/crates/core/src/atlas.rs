//! Atlas export: CSV table, GeoJSON points and an SVG map whose marker radii
//! scale linearly with each station's useful fraction.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{HOURS_PER_DAY, MONTHS_PER_YEAR};
use crate::error::{Error, Result};
use crate::ingest::StationMeta;

/// Everything the atlas knows about one station.
#[derive(Debug, Clone, PartialEq)]
pub struct StationAtlasEntry {
    pub meta: StationMeta,
    pub rho: f64,
    pub normalized_entropy: Option<f64>,
    pub hourly_counts: [u64; HOURS_PER_DAY],
    pub monthly_counts: [u64; MONTHS_PER_YEAR],
    pub battery_capacity_wh: f64,
    pub load_name: String,
}

fn require_entries(entries: &[StationAtlasEntry]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::invalid("atlas", "no stations to export"));
    }
    if let Some(e) = entries.iter().find(|e| !(0.0..=1.0).contains(&e.rho)) {
        return Err(Error::invalid(
            "atlas",
            format!(
                "station '{}' has rho {} outside [0, 1]",
                e.meta.station_id, e.rho
            ),
        ));
    }
    Ok(())
}

/// `station_id,name,latitude,longitude,rho,normalized_entropy,battery_wh,load`,
/// ratios to 4 decimals.
pub fn to_atlas_csv<W: Write>(entries: &[StationAtlasEntry], writer: W) -> Result<()> {
    require_entries(entries)?;
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "station_id",
        "name",
        "latitude",
        "longitude",
        "rho",
        "normalized_entropy",
        "battery_wh",
        "load",
    ])?;
    for e in entries {
        wtr.write_record([
            e.meta.station_id.clone(),
            e.meta.name.clone(),
            e.meta.latitude.to_string(),
            e.meta.longitude.to_string(),
            format!("{:.4}", e.rho),
            e.normalized_entropy
                .map(|h| format!("{h:.4}"))
                .unwrap_or_default(),
            e.battery_capacity_wh.to_string(),
            e.load_name.clone(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FeatureCollection {
    #[serde(rename = "type")]
    pub kind: String,
    pub features: Vec<Feature>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Feature {
    #[serde(rename = "type")]
    pub kind: String,
    pub geometry: Point,
    pub properties: FeatureProperties,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Point {
    #[serde(rename = "type")]
    pub kind: String,
    /// `[longitude, latitude]`
    pub coordinates: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FeatureProperties {
    pub station_id: String,
    pub name: String,
    pub rho: f64,
    pub entropy: Option<f64>,
    pub battery_wh: f64,
    pub load: String,
}

/// A GeoJSON `FeatureCollection` with one `Point` per station.
///
/// Numbers are written in shortest round-trip form, so parsing the output
/// recovers every value bit for bit.
pub fn to_geojson(entries: &[StationAtlasEntry]) -> Result<Vec<u8>> {
    require_entries(entries)?;
    let features = entries
        .iter()
        .map(|e| Feature {
            kind: "Feature".into(),
            geometry: Point {
                kind: "Point".into(),
                coordinates: [e.meta.longitude, e.meta.latitude],
            },
            properties: FeatureProperties {
                station_id: e.meta.station_id.clone(),
                name: e.meta.name.clone(),
                rho: e.rho,
                entropy: e.normalized_entropy,
                battery_wh: e.battery_capacity_wh,
                load: e.load_name.clone(),
            },
        })
        .collect();
    let fc = FeatureCollection {
        kind: "FeatureCollection".into(),
        features,
    };
    let mut out = serde_json::to_vec_pretty(&fc)?;
    out.push(b'\n');
    Ok(out)
}

/// Canvas and projection settings for [`to_svg_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct MapStyle {
    pub width: f64,
    pub height: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
    /// Radius of a station with rho = 1.
    pub max_radius: f64,
    /// Skip stations with rho = 0 instead of drawing a zero-radius circle.
    pub omit_zero: bool,
    pub fill: String,
    pub title: Option<String>,
}

impl Default for MapStyle {
    /// Mainland Finland and Åland, with the canvas aspect matched to the
    /// east-west shrink at about 65°N.
    fn default() -> Self {
        MapStyle {
            width: 400.0,
            height: 780.0,
            lon_min: 19.0,
            lon_max: 32.0,
            lat_min: 59.5,
            lat_max: 70.2,
            max_radius: 12.0,
            omit_zero: false,
            fill: "#d62728".into(),
            title: None,
        }
    }
}

impl MapStyle {
    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::invalid("map style", "canvas size must be positive"));
        }
        if !(self.lon_max > self.lon_min && self.lat_max > self.lat_min) {
            return Err(Error::invalid("map style", "empty projection bounds"));
        }
        if self.max_radius.is_nan() || self.max_radius < 0.0 {
            return Err(Error::invalid("map style", "max_radius must be >= 0"));
        }
        Ok(())
    }

    /// Equirectangular projection into canvas pixels, north up.
    pub fn project(&self, latitude: f64, longitude: f64) -> (f64, f64) {
        let x = (longitude - self.lon_min) / (self.lon_max - self.lon_min) * self.width;
        let y = (self.lat_max - latitude) / (self.lat_max - self.lat_min) * self.height;
        (x, y)
    }

    fn contains(&self, latitude: f64, longitude: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&latitude)
            && (self.lon_min..=self.lon_max).contains(&longitude)
    }

    pub fn radius(&self, rho: f64) -> f64 {
        self.max_radius * rho
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgMap {
    pub svg: String,
    /// Stations outside the projection bounds; their markers are clipped.
    pub out_of_bounds: Vec<String>,
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders one circle per station, radius `max_radius * rho`.
pub fn to_svg_map(entries: &[StationAtlasEntry], style: &MapStyle) -> Result<SvgMap> {
    require_entries(entries)?;
    style.validate()?;
    let (w, h) = (style.width, style.height);
    let mut svg = String::new();
    let mut out_of_bounds = Vec::new();

    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        svg,
        "  <defs><clipPath id=\"plot\"><rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\"/></clipPath></defs>"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\" stroke=\"#999999\"/>"
    );
    if let Some(title) = &style.title {
        let _ = writeln!(
            svg,
            "  <text x=\"8\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
            escape_xml(title)
        );
    }
    let _ = writeln!(
        svg,
        "  <g clip-path=\"url(#plot)\" fill=\"{}\" fill-opacity=\"0.6\" stroke=\"#7f0000\" stroke-width=\"0.5\">",
        escape_xml(&style.fill)
    );
    for e in entries {
        let m = &e.meta;
        if !style.contains(m.latitude, m.longitude) {
            log::warn!(
                "station '{}' at ({}, {}) lies outside the map bounds; marker clipped",
                m.station_id,
                m.latitude,
                m.longitude
            );
            out_of_bounds.push(m.station_id.clone());
        }
        if style.omit_zero && e.rho == 0.0 {
            continue;
        }
        let (x, y) = style.project(m.latitude, m.longitude);
        let _ = writeln!(
            svg,
            "    <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{}\" data-station=\"{}\"><title>{}: {:.4}</title></circle>",
            style.radius(e.rho),
            escape_xml(&m.station_id),
            escape_xml(&m.name),
            e.rho
        );
    }
    svg.push_str("  </g>\n</svg>\n");
    Ok(SvgMap { svg, out_of_bounds })
}
