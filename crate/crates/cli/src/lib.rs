//! Pipeline orchestration behind the `wind-atlas` binary.
//!
//! [`pipeline::execute`] runs ingest, filter, impute, power, scan, analysis and
//! atlas stages for a [`config::RunConfig`] and writes the results directory;
//! [`results`] holds the CSV/JSON layouts of that directory.

use std::fmt;
use std::path::PathBuf;

pub mod config;
pub mod pipeline;
pub mod results;

pub use config::{InputFormat, KernelChoice, Overrides, RunConfig, DATA_DIR_ENV};
pub use pipeline::{atlas_from_results, execute, Plan, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Filter,
    Impute,
    Power,
    Scan,
    Analysis,
    Atlas,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Filter => "filter",
            Stage::Impute => "impute",
            Stage::Power => "power",
            Stage::Scan => "scan",
            Stage::Analysis => "analysis",
            Stage::Atlas => "atlas",
            Stage::Output => "output",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed for station {station}: {source}")]
    Station {
        stage: Stage,
        station: String,
        #[source]
        source: wind_atlas::Error,
    },
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: wind_atlas::Error,
    },
    #[error("stage {stage} failed on {}: {source}", path.display())]
    Io {
        stage: Stage,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        PipelineError::Config(msg.into())
    }

    pub(crate) fn station(stage: Stage, station: &str, source: wind_atlas::Error) -> Self {
        PipelineError::Station {
            stage,
            station: station.to_string(),
            source,
        }
    }

    pub(crate) fn io(stage: Stage, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            stage,
            path: path.into(),
            source,
        }
    }

    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Config(_) => Stage::Config,
            PipelineError::Station { stage, .. }
            | PipelineError::Stage { stage, .. }
            | PipelineError::Io { stage, .. } => *stage,
        }
    }

    pub fn station_id(&self) -> Option<&str> {
        match self {
            PipelineError::Station { station, .. } => Some(station),
            _ => None,
        }
    }
}
