use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wind_atlas::MapStyle;
use wind_atlas_cli::{
    atlas_from_results, execute, InputFormat, KernelChoice, Overrides, Plan, RunConfig,
};

/// Wind-power feasibility atlas from 10-minute weather-station observations.
#[derive(Parser)]
#[command(name = "wind-atlas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, filter and impute station files; writes ingest_report.csv.
    Ingest(Common),
    /// Useful fraction per station at one battery capacity; writes rho.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "WH")]
        battery_wh: Option<f64>,
    },
    /// Capacity sweep; writes sweep.csv and rho_by_capacity.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', value_name = "WH,...")]
        capacities: Option<Vec<f64>>,
    },
    /// Simulate plus hour-of-day and monthly distributions of suitable starts.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "WH")]
        battery_wh: Option<f64>,
    },
    /// Atlas CSV, GeoJSON and SVG from an existing results directory.
    Atlas {
        #[arg(long, value_name = "DIR")]
        results: PathBuf,
        /// Output path without extension [default: DIR/atlas]
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = MapStyle::default().max_radius)]
        max_radius: f64,
        /// Leave out markers of stations with rho = 0.
        #[arg(long)]
        omit_zero: bool,
    },
    /// Whole pipeline: sweep, analysis at --battery-wh, atlas and manifest.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', value_name = "WH,...")]
        capacities: Option<Vec<f64>>,
        /// Capacity for rho, histograms and the map [default: largest of --capacities]
        #[arg(long, value_name = "WH")]
        battery_wh: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Station observation files [default: $WIND_ATLAS_DATA_DIR]
    #[arg(long, value_name = "DIR")]
    station_dir: Option<PathBuf>,
    /// station_id,name,latitude,longitude [default: DIR/stations.csv]
    #[arg(long, value_name = "FILE")]
    catalog: Option<PathBuf>,
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
    /// Largest tolerated share of missing records [default: 0.03]
    #[arg(long)]
    threshold: Option<f64>,
    /// Power-curve CSV [default: bundled Nordex N100/2500]
    #[arg(long, value_name = "FILE")]
    power_curve: Option<PathBuf>,
    #[arg(long, value_name = "M")]
    reference_height: Option<f64>,
    #[arg(long, value_name = "M")]
    hub_height: Option<f64>,
    /// Wind-shear exponent [default: 1/7]
    #[arg(long)]
    alpha: Option<f64>,
    /// dishwasher, household, or a load-profile CSV [default: dishwasher]
    #[arg(long, value_name = "NAME|FILE")]
    load: Option<String>,
    #[arg(long, value_enum)]
    kernel: Option<KernelChoice>,
    /// Start times scanned per station [default: 52560]
    #[arg(long)]
    starts: Option<usize>,
    /// Worker threads [default: all cores]
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Results directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write slot,speed,imputed per station into DIR
    #[arg(long, value_name = "DIR")]
    dump_imputed: Option<PathBuf>,
}

impl Common {
    fn into_config(
        self,
        capacities: Option<Vec<f64>>,
        battery_wh: Option<f64>,
    ) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_toml_file(path).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        cfg.apply(Overrides {
            station_dir: self.station_dir,
            catalog: self.catalog,
            input_format: self.input_format,
            missing_threshold: self.threshold,
            power_curve: self.power_curve,
            reference_height_m: self.reference_height,
            hub_height_m: self.hub_height,
            alpha: self.alpha,
            load: self.load,
            capacities_wh: capacities,
            battery_wh,
            kernel: self.kernel,
            starts: self.starts,
            out_dir: self.out,
            dump_imputed: self.dump_imputed,
            jobs: self.jobs,
        });
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let (common, plan, capacities, battery_wh) = match cli.command {
        Command::Atlas {
            results,
            out,
            max_radius,
            omit_zero,
        } => {
            let style = MapStyle {
                max_radius,
                omit_zero,
                ..MapStyle::default()
            };
            let prefix = out.unwrap_or_else(|| results.join("atlas"));
            return match atlas_from_results(&results, &prefix, &style) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            };
        }
        Command::Ingest(common) => (common, Plan::Ingest, None, None),
        Command::Simulate { common, battery_wh } => (common, Plan::Simulate, None, battery_wh),
        Command::Sweep { common, capacities } => (common, Plan::Sweep, capacities, None),
        Command::Analyze { common, battery_wh } => (common, Plan::Analyze, None, battery_wh),
        Command::Run {
            common,
            capacities,
            battery_wh,
        } => (common, Plan::Run, capacities, battery_wh),
    };

    let cfg = match common.into_config(capacities, battery_wh) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&cfg, plan) {
        Ok(summary) => {
            log::info!(
                "{} stations kept, {} excluded",
                summary.kept.len(),
                summary.excluded.len()
            );
            for f in &summary.outputs {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &wind_atlas_cli::PipelineError) -> ExitCode {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
    ExitCode::FAILURE
}
