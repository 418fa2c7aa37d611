//! Pipeline configuration: one flat TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use mobsense_core::model::Day;
use mobsense_core::od::OdBasis;
use mobsense_core::synth::SynthConfig;
use mobsense_core::transfer::{DEFAULT_BANDWIDTH_M, HUB_EPSILON_RAD, HUB_MIN_POINTS};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

pub const LEGS_FILE: &str = "legs.jsonl";
pub const ZONES_FILE: &str = "zones.csv";
pub const STOPS_FILE: &str = "stops.csv";
pub const EXTERNAL_OD_FILE: &str = "external_od.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory holding the default-named input files.
    pub input_dir: PathBuf,
    pub legs: Option<PathBuf>,
    pub zones: Option<PathBuf>,
    pub stops: Option<PathBuf>,
    /// Optional for `od` and `all`; the regression is skipped without it.
    pub external_od: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Fixed offset of local time from UTC, for hourly binning.
    pub utc_offset_s: i64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,

    /// Analyses run by `all`.
    pub demand: bool,
    pub od: bool,
    pub transfers: bool,

    pub epsilon_rad: f64,
    pub min_points: usize,
    pub bandwidth_m: f64,
    pub kde_cell_m: f64,
    pub od_basis: OdBasis,
    /// Merges whose same-vehicle legs lie further apart than this are flagged
    /// in the audit.
    pub long_gap_s: i64,

    // Synthetic data generation.
    pub seed: u64,
    pub devices: usize,
    pub days: u32,
    pub start_day: Day,
    pub stop_count: usize,
    pub hub_count: usize,
    pub line_count: usize,
    pub transfer_probability: f64,
    pub p_spurious: f64,
    pub p_conjoined: f64,
    pub p_boarding_shift: f64,
    /// External OD flows are `scale * truth + N(0, noise)`.
    pub external_od_scale: f64,
    pub external_od_noise: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        PipelineConfig {
            input_dir: PathBuf::from("."),
            legs: None,
            zones: None,
            stops: None,
            external_od: None,
            out_dir: PathBuf::from("out"),
            utc_offset_s: synth.utc_offset_s,
            workers: 0,
            demand: true,
            od: true,
            transfers: true,
            epsilon_rad: HUB_EPSILON_RAD,
            min_points: HUB_MIN_POINTS,
            bandwidth_m: DEFAULT_BANDWIDTH_M,
            kde_cell_m: synth.grid.cell_size_m,
            od_basis: OdBasis::Leg,
            long_gap_s: 3600,
            seed: synth.seed,
            devices: synth.devices,
            days: synth.days,
            start_day: synth.start_day,
            stop_count: synth.stops,
            hub_count: synth.hubs,
            line_count: synth.lines,
            transfer_probability: synth.transfer_probability,
            p_spurious: synth.p_spurious,
            p_conjoined: synth.p_conjoined,
            p_boarding_shift: synth.p_boarding_shift,
            external_od_scale: 5.0,
            external_od_noise: 0.5,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PipelineError::Usage(format!("{name} must be positive, got {v}")))
    }
}

impl PipelineConfig {
    /// Reads a config file; absent keys keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        toml::from_str(&text).map_err(|e| PipelineError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        positive("epsilon_rad", self.epsilon_rad)?;
        positive("bandwidth_m", self.bandwidth_m)?;
        positive("kde_cell_m", self.kde_cell_m)?;
        if self.min_points < 2 {
            return Err(PipelineError::Usage(format!(
                "min_points must be at least 2, got {}",
                self.min_points
            )));
        }
        if self.long_gap_s < 0 {
            return Err(PipelineError::Usage("long_gap_s must be non-negative".into()));
        }
        if !(self.external_od_scale.is_finite() && self.external_od_noise >= 0.0 && self.external_od_noise.is_finite())
        {
            return Err(PipelineError::Usage(
                "external OD scale and noise must be finite, noise non-negative".into(),
            ));
        }
        self.synth_config()
            .validate()
            .map_err(|e| PipelineError::Usage(format!("synthetic data settings: {e}")))
    }

    fn input(&self, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.input_dir.join(default_name))
    }

    pub fn legs_path(&self) -> PathBuf {
        self.input(&self.legs, LEGS_FILE)
    }

    pub fn zones_path(&self) -> PathBuf {
        self.input(&self.zones, ZONES_FILE)
    }

    pub fn stops_path(&self) -> PathBuf {
        self.input(&self.stops, STOPS_FILE)
    }

    /// The external OD file, when one is configured or present in the input
    /// directory.
    pub fn external_od_path(&self) -> Option<PathBuf> {
        match &self.external_od {
            Some(p) => Some(p.clone()),
            None => {
                let p = self.input_dir.join(EXTERNAL_OD_FILE);
                p.is_file().then_some(p)
            }
        }
    }

    /// Generator settings derived from the flat keys.
    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            devices: self.devices,
            days: self.days,
            start_day: self.start_day,
            utc_offset_s: self.utc_offset_s,
            stops: self.stop_count,
            hubs: self.hub_count,
            lines: self.line_count,
            transfer_probability: self.transfer_probability,
            p_spurious: self.p_spurious,
            p_conjoined: self.p_conjoined,
            p_boarding_shift: self.p_boarding_shift,
            ..SynthConfig::default()
        }
    }
}
