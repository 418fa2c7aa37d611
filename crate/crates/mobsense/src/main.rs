use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mobsense::error::{EXIT_OK, EXIT_USAGE};
use mobsense::{run, Command, PipelineConfig, PipelineError};
use mobsense_core::model::Day;
use mobsense_core::od::OdBasis;

/// Multi-modal itinerary reconstruction and mobility analytics.
#[derive(Debug, Parser)]
#[command(name = "mobsense", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Generate a synthetic dataset with ground truth and a defect ledger.
    Synth,
    /// Parse and collate leg records; report malformed lines and defects.
    Ingest,
    /// Merge spurious same-vehicle legs and write the merge audit.
    Clean,
    /// Spatial coverage, power laws, hourly profiles and mode shares.
    Demand,
    /// Hourly OD matrices and the regression against external flows.
    Od,
    /// Transfer events and matrix, stop hubs and the transfer density.
    Transfers,
    /// Ingest (or generate), clean, then run every enabled analysis.
    All {
        /// Generate the input dataset first.
        #[arg(long)]
        synth: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Basis {
    Leg,
    Chain,
}

#[derive(Debug, Args)]
struct Opts {
    /// Flat TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory with legs.jsonl, zones.csv, stops.csv and external_od.csv.
    #[arg(long, global = true)]
    input_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    legs: Option<PathBuf>,
    #[arg(long, global = true)]
    zones: Option<PathBuf>,
    #[arg(long, global = true)]
    stops: Option<PathBuf>,
    #[arg(long, global = true)]
    external_od: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Local time offset from UTC in seconds.
    #[arg(long, global = true, allow_hyphen_values = true)]
    utc_offset: Option<i64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// DBSCAN radius in radians of central angle.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// DBSCAN minimum neighbourhood size, the point itself included.
    #[arg(long, global = true)]
    min_points: Option<usize>,
    /// KDE bandwidth in metres.
    #[arg(long, global = true)]
    bandwidth: Option<f64>,
    /// KDE raster cell size in metres.
    #[arg(long, global = true)]
    kde_cell: Option<f64>,
    #[arg(long, global = true, value_enum)]
    od_basis: Option<Basis>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    devices: Option<usize>,
    #[arg(long, global = true)]
    days: Option<u32>,
    #[arg(long, global = true)]
    start_day: Option<Day>,
    #[arg(long, global = true)]
    p_spurious: Option<f64>,
    #[arg(long, global = true)]
    p_conjoined: Option<f64>,
    #[arg(long, global = true)]
    p_boarding_shift: Option<f64>,
    /// Skip analyses in `all`.
    #[arg(long, global = true)]
    no_demand: bool,
    #[arg(long, global = true)]
    no_od: bool,
    #[arg(long, global = true)]
    no_transfers: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Opts {
    fn into_config(self) -> Result<PipelineConfig, PipelineError> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        set(&mut c.input_dir, self.input_dir);
        if self.legs.is_some() {
            c.legs = self.legs;
        }
        if self.zones.is_some() {
            c.zones = self.zones;
        }
        if self.stops.is_some() {
            c.stops = self.stops;
        }
        if self.external_od.is_some() {
            c.external_od = self.external_od;
        }
        set(&mut c.out_dir, self.out);
        set(&mut c.utc_offset_s, self.utc_offset);
        set(&mut c.workers, self.workers);
        set(&mut c.epsilon_rad, self.epsilon);
        set(&mut c.min_points, self.min_points);
        set(&mut c.bandwidth_m, self.bandwidth);
        set(&mut c.kde_cell_m, self.kde_cell);
        set(
            &mut c.od_basis,
            self.od_basis.map(|b| match b {
                Basis::Leg => OdBasis::Leg,
                Basis::Chain => OdBasis::Chain,
            }),
        );
        set(&mut c.seed, self.seed);
        set(&mut c.devices, self.devices);
        set(&mut c.days, self.days);
        set(&mut c.start_day, self.start_day);
        set(&mut c.p_spurious, self.p_spurious);
        set(&mut c.p_conjoined, self.p_conjoined);
        set(&mut c.p_boarding_shift, self.p_boarding_shift);
        c.demand &= !self.no_demand;
        c.od &= !self.no_od;
        c.transfers &= !self.no_transfers;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let command = match cli.command {
        Sub::Synth => Command::Synth,
        Sub::Ingest => Command::Ingest,
        Sub::Clean => Command::Clean,
        Sub::Demand => Command::Demand,
        Sub::Od => Command::Od,
        Sub::Transfers => Command::Transfers,
        Sub::All { synth } => Command::All { synth },
    };
    let result = cli.opts.into_config().and_then(|config| run(command, &config));
    match result {
        Ok(manifest) => {
            log::info!(
                "{} finished: {} outputs in {}",
                manifest.subcommand,
                manifest.outputs.len(),
                manifest.config.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
