//! Run configuration: a TOML file, then command-line overrides on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wind_atlas::{Kernel, DEFAULT_MISSING_THRESHOLD, STARTS_PER_YEAR};

use crate::PipelineError;

/// Fallback for `station_dir` when neither the config file nor a flag sets it.
pub const DATA_DIR_ENV: &str = "WIND_ATLAS_DATA_DIR";

pub const BUILTIN_LOADS: [&str; 2] = ["dishwasher", "household"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// `station_id,timestamp_iso8601,wind_speed_ms`
    #[default]
    Canonical,
    /// FMI open-data download layout; station id taken from the file name.
    Fmi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    Naive,
    #[default]
    Fast,
}

impl From<KernelChoice> for Kernel {
    fn from(k: KernelChoice) -> Kernel {
        match k {
            KernelChoice::Naive => Kernel::Naive,
            KernelChoice::Fast => Kernel::Fast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub station_dir: Option<PathBuf>,
    /// `station_id,name,latitude,longitude`; defaults to `<station_dir>/stations.csv` if present.
    pub catalog: Option<PathBuf>,
    pub input_format: InputFormat,
    pub missing_threshold: f64,
    /// Bundled Nordex N100/2500 curve when unset.
    pub power_curve: Option<PathBuf>,
    pub reference_height_m: f64,
    pub hub_height_m: f64,
    pub alpha: f64,
    /// `dishwasher`, `household`, or a path to a load-profile CSV.
    pub load: String,
    pub capacities_wh: Vec<f64>,
    /// Capacity used for rho, histograms and the map. Largest sweep capacity when unset.
    pub battery_wh: Option<f64>,
    pub kernel: KernelChoice,
    pub starts: usize,
    pub out_dir: PathBuf,
    pub dump_imputed: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            station_dir: None,
            catalog: None,
            input_format: InputFormat::default(),
            missing_threshold: DEFAULT_MISSING_THRESHOLD,
            power_curve: None,
            reference_height_m: 10.0,
            hub_height_m: 100.0,
            alpha: 1.0 / 7.0,
            load: "dishwasher".into(),
            capacities_wh: vec![200.0, 500.0, 800.0, 1000.0, 1500.0, 2000.0],
            battery_wh: None,
            kernel: KernelChoice::default(),
            starts: STARTS_PER_YEAR,
            out_dir: PathBuf::from("wind-atlas-out"),
            dump_imputed: None,
            jobs: None,
        }
    }
}

/// Values given on the command line. `None` leaves the config value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub station_dir: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub input_format: Option<InputFormat>,
    pub missing_threshold: Option<f64>,
    pub power_curve: Option<PathBuf>,
    pub reference_height_m: Option<f64>,
    pub hub_height_m: Option<f64>,
    pub alpha: Option<f64>,
    pub load: Option<String>,
    pub capacities_wh: Option<Vec<f64>>,
    pub battery_wh: Option<f64>,
    pub kernel: Option<KernelChoice>,
    pub starts: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub dump_imputed: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
            .map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Flags win over the file; the data-directory env var fills in last.
    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field { self.$field = v; })*
            };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if o.$field.is_some() { self.$field = o.$field; })*
            };
        }
        set!(
            input_format,
            missing_threshold,
            reference_height_m,
            hub_height_m,
            alpha,
            load,
            capacities_wh,
            kernel,
            starts,
            out_dir
        );
        set_opt!(
            station_dir,
            catalog,
            power_curve,
            battery_wh,
            dump_imputed,
            jobs
        );
        if self.station_dir.is_none() {
            self.station_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        }
    }

    /// Capacity the per-station outputs refer to.
    pub fn report_capacity(&self) -> Option<f64> {
        self.battery_wh
            .or_else(|| self.capacities_wh.iter().copied().reduce(f64::max))
    }

    pub fn station_dir(&self) -> Result<&Path, PipelineError> {
        let dir = self.station_dir.as_deref().ok_or_else(|| {
            PipelineError::config(format!(
                "no station directory (use --station-dir or set {DATA_DIR_ENV})"
            ))
        })?;
        if !dir.is_dir() {
            return Err(PipelineError::config(format!(
                "{} is not a directory",
                dir.display()
            )));
        }
        Ok(dir)
    }

    /// Explicit catalog, or `stations.csv` inside the station directory if it exists.
    pub fn catalog_path(&self) -> Result<Option<PathBuf>, PipelineError> {
        match &self.catalog {
            Some(p) if p.is_file() => Ok(Some(p.clone())),
            Some(p) => Err(PipelineError::config(format!(
                "catalog {} not found",
                p.display()
            ))),
            None => {
                let p = self.station_dir()?.join("stations.csv");
                Ok(p.is_file().then_some(p))
            }
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.station_dir()?;
        self.catalog_path()?;
        if let Some(p) = &self.power_curve {
            if !p.is_file() {
                return Err(PipelineError::config(format!(
                    "power curve {} not found",
                    p.display()
                )));
            }
        }
        if !BUILTIN_LOADS.contains(&self.load.as_str()) && !Path::new(&self.load).is_file() {
            return Err(PipelineError::config(format!(
                "load '{}' is neither a built-in profile ({}) nor a file",
                self.load,
                BUILTIN_LOADS.join(", ")
            )));
        }
        if !(0.0..=1.0).contains(&self.missing_threshold) {
            return Err(PipelineError::config(format!(
                "missing threshold {} is outside [0, 1]",
                self.missing_threshold
            )));
        }
        if self.capacities_wh.is_empty() {
            return Err(PipelineError::config("no battery capacities"));
        }
        for &c in self.capacities_wh.iter().chain(&self.battery_wh) {
            if !(c.is_finite() && c > 0.0) {
                return Err(PipelineError::config(format!(
                    "battery capacity {c} must be > 0"
                )));
            }
        }
        if self.starts == 0 {
            return Err(PipelineError::config("starts must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(PipelineError::config("jobs must be at least 1"));
        }
        wind_atlas::HeightExtrapolation::new(
            self.reference_height_m,
            self.hub_height_m,
            self.alpha,
        )
        .map_err(|e| PipelineError::config(e.to_string()))?;
        Ok(())
    }
}
