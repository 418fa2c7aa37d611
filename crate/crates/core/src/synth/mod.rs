//! Seeded synthetic networks, travellers and sensed leg records.
//!
//! Generation runs in three stages: a PT network ([`generate_network`]), a
//! ground-truth population of itineraries ([`generate_population`]), and the
//! sensing pass ([`apply_sensing`]) that obfuscates private legs, snaps them to
//! grid cells and injects defects, recording each one in a ledger.
//!
//! Every device and every itinerary draws from its own ChaCha stream derived
//! from the master seed, so output does not depend on how work is scheduled.

mod network;
mod population;
mod sensing;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GridSpec;
use crate::model::{Day, Mode};
use crate::od::{OdKey, OdMatrix, ZoneTable};

pub use network::{generate_network, Line, Network};
pub use population::{generate_device, generate_population};
pub use sensing::{apply_sensing, sense_itinerary, DefectKind, DefectRecord, Sensed, SensedItinerary};

/// Bounding box in WGS84 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

/// Relative frequency with which each mode is drawn as the main mode of a
/// chain. PT chains also get walking access, transfer and egress legs when
/// `walking` is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeWeights {
    pub walking: f64,
    pub cycling: f64,
    pub private_vehicle: f64,
    pub bus: f64,
    pub tram: f64,
    pub subway: f64,
    pub train: f64,
    pub ferry: f64,
    pub other: f64,
}

impl Default for ModeWeights {
    fn default() -> Self {
        ModeWeights {
            walking: 0.24,
            cycling: 0.05,
            private_vehicle: 0.25,
            bus: 0.16,
            tram: 0.06,
            subway: 0.06,
            train: 0.05,
            ferry: 0.0,
            other: 0.13,
        }
    }
}

impl ModeWeights {
    pub fn zero() -> Self {
        ModeWeights {
            walking: 0.0,
            cycling: 0.0,
            private_vehicle: 0.0,
            bus: 0.0,
            tram: 0.0,
            subway: 0.0,
            train: 0.0,
            ferry: 0.0,
            other: 0.0,
        }
    }

    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Walking => self.walking,
            Mode::Cycling => self.cycling,
            Mode::PrivateVehicle => self.private_vehicle,
            Mode::Bus => self.bus,
            Mode::Tram => self.tram,
            Mode::Subway => self.subway,
            Mode::Train => self.train,
            Mode::Ferry => self.ferry,
            Mode::Other => self.other,
        }
    }

    pub fn total(&self) -> f64 {
        Mode::ALL.iter().map(|&m| self.get(m)).sum()
    }

    pub fn pt_total(&self) -> f64 {
        Mode::PT.iter().map(|&m| self.get(m)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obfuscation {
    /// Round each endpoint up or down with equal probability.
    Random,
    /// Round each endpoint to the nearest quarter hour.
    Nearest,
}

/// Two commuting peaks, 7-8 and 15-16 local time.
pub const WEEKDAY_PROFILE: [f64; 24] = [
    0.3, 0.2, 0.1, 0.1, 0.3, 1.0, 3.0, 7.0, 7.5, 4.5, 3.5, 3.8, 4.2, 4.8, 5.5, 6.5, 6.0, 4.8, 3.8, 3.0, 2.2, 1.6, 1.0,
    0.6,
];

/// A single early-afternoon peak.
pub const WEEKEND_PROFILE: [f64; 24] = [
    0.8, 0.6, 0.4, 0.2, 0.2, 0.3, 0.6, 1.2, 2.0, 3.0, 4.0, 5.0, 5.8, 6.4, 6.8, 6.2, 5.4, 4.6, 3.8, 3.0, 2.4, 1.8, 1.3,
    1.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub devices: usize,
    pub days: u32,
    pub start_day: Day,
    pub utc_offset_s: i64,
    pub extent: Extent,
    /// Projection origin and cell size of the planar grid.
    pub grid: GridSpec,
    pub stops: usize,
    /// Number of planted stop clusters.
    pub hubs: usize,
    /// Share of stops placed inside hubs; the rest are uniform over the extent.
    pub hub_fraction: f64,
    pub hub_radius_m: f64,
    pub lines: usize,
    pub stops_per_line: usize,
    pub vehicles_per_line: usize,
    pub mode_weights: ModeWeights,
    pub min_chains_per_day: u32,
    pub max_chains_per_day: u32,
    pub transfer_probability: f64,
    pub p_spurious: f64,
    pub p_conjoined: f64,
    pub p_boarding_shift: f64,
    pub obfuscation: Obfuscation,
    pub weekday_profile: [f64; 24],
    pub weekend_profile: [f64; 24],
    /// Zones of the generated zone table, as columns x rows of equal blocks.
    pub zone_columns: u32,
    pub zone_rows: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 20201112,
            devices: 500,
            days: 7,
            start_day: Day::from_ymd(2020, 11, 16).expect("valid date"),
            utc_offset_s: 7200,
            extent: Extent {
                min_lat: 60.10,
                min_lon: 24.70,
                max_lat: 60.30,
                max_lon: 25.10,
            },
            grid: GridSpec::new(60.10, 24.70),
            stops: 300,
            hubs: 8,
            hub_fraction: 0.4,
            hub_radius_m: 30.0,
            lines: 24,
            stops_per_line: 12,
            vehicles_per_line: 6,
            mode_weights: ModeWeights::default(),
            min_chains_per_day: 1,
            max_chains_per_day: 4,
            transfer_probability: 0.15,
            p_spurious: 0.04,
            p_conjoined: 0.0,
            p_boarding_shift: 0.0,
            obfuscation: Obfuscation::Random,
            weekday_profile: WEEKDAY_PROFILE,
            weekend_profile: WEEKEND_PROFILE,
            zone_columns: 2,
            zone_rows: 2,
        }
    }
}

fn probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, "must lie in [0, 1]"))
    }
}

fn non_negative(name: &'static str, w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite and non-negative"))
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        probability("hub_fraction", self.hub_fraction)?;
        probability("transfer_probability", self.transfer_probability)?;
        probability("p_spurious", self.p_spurious)?;
        probability("p_conjoined", self.p_conjoined)?;
        probability("p_boarding_shift", self.p_boarding_shift)?;
        for m in Mode::ALL {
            non_negative("mode_weights", self.mode_weights.get(m))?;
        }
        for w in self.weekday_profile.iter().chain(&self.weekend_profile) {
            non_negative("hourly profile", *w)?;
        }
        if self.weekday_profile.iter().sum::<f64>() <= 0.0 || self.weekend_profile.iter().sum::<f64>() <= 0.0 {
            return Err(Error::param("hourly profile", "needs positive total weight"));
        }
        let e = &self.extent;
        if !(e.max_lat > e.min_lat && e.max_lon > e.min_lon) {
            return Err(Error::DegenerateExtent);
        }
        if !(self.grid.cell_size_m > 0.0) {
            return Err(Error::param("grid.cell_size_m", "must be positive"));
        }
        non_negative("hub_radius_m", self.hub_radius_m)?;
        if self.lines > 0 && self.stops < 2 {
            return Err(Error::LineNeedsTwoStops { stops: self.stops });
        }
        if self.lines > 0 && self.stops_per_line < 2 {
            return Err(Error::param("stops_per_line", "must be at least 2"));
        }
        if self.vehicles_per_line == 0 {
            return Err(Error::param("vehicles_per_line", "must be at least 1"));
        }
        if self.min_chains_per_day > self.max_chains_per_day {
            return Err(Error::param("min_chains_per_day", "exceeds max_chains_per_day"));
        }
        if self.zone_columns == 0 || self.zone_rows == 0 {
            return Err(Error::param("zone_columns/zone_rows", "must be positive"));
        }
        if self.mode_weights.pt_total() > 0.0 && self.lines == 0 {
            return Err(Error::param(
                "lines",
                "PT modes have weight but the network has no lines",
            ));
        }
        Ok(())
    }

    /// Planar bounds of the extent: (min_x, min_y, max_x, max_y).
    pub fn planar_bounds(&self) -> (f64, f64, f64, f64) {
        let (x0, y0) = self.grid.project(self.extent.min_lat, self.extent.min_lon);
        let (x1, y1) = self.grid.project(self.extent.max_lat, self.extent.max_lon);
        (x0, y0, x1, y1)
    }

    pub fn day(&self, index: u32) -> Day {
        self.start_day
            .add_days(i64::from(index))
            .expect("day within calendar range")
    }
}

pub(crate) fn stream_rng(seed: u64, salt: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(stream);
    rng
}

/// Zone table covering the extent, split into `zone_columns x zone_rows`
/// equal blocks of cells named `Z01`, `Z02`, ... row by row.
pub fn generate_zone_table(config: &SynthConfig) -> Result<ZoneTable> {
    config.validate()?;
    let (x0, y0, x1, y1) = config.planar_bounds();
    let lo = config.grid.cell_of_xy(x0, y0);
    let hi = config.grid.cell_of_xy(x1, y1);
    let cols = (hi.col - lo.col + 1) as u64;
    let rows = (hi.row - lo.row + 1) as u64;
    let zc = u64::from(config.zone_columns);
    let zr = u64::from(config.zone_rows);
    let mut table = ZoneTable::new(config.grid);
    for row in lo.row..=hi.row {
        for col in lo.col..=hi.col {
            let zx = ((col - lo.col) as u64 * zc / cols).min(zc - 1);
            let zy = ((row - lo.row) as u64 * zr / rows).min(zr - 1);
            let name = alloc::format!("Z{:02}", zy * zc + zx + 1);
            table.insert(crate::model::GridCell::new(col, row), &name);
        }
    }
    Ok(table)
}

/// Standard normal draw by the Box-Muller transform.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// External OD flows modelled as `scale * flow + N(0, noise_sd)`, clipped at
/// zero, for every entry of `reference`.
pub fn synthetic_external_od(reference: &OdMatrix, scale: f64, noise_sd: f64, seed: u64) -> OdMatrix {
    let mut rng = stream_rng(seed, 0x0D0D_0D0D, 0);
    let mut out = OdMatrix {
        day_type: reference.day_type,
        days: reference.days,
        entries: Default::default(),
    };
    for (key, flow) in &reference.entries {
        let v = (scale * flow + noise_sd * standard_normal(&mut rng)).max(0.0);
        out.entries.insert(
            OdKey {
                origin: key.origin.to_string(),
                destination: key.destination.to_string(),
                hour: key.hour,
            },
            v,
        );
    }
    out
}

/// Ground truth plus sensed output of one generator run.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub network: Network,
    pub zones: ZoneTable,
    pub truth: Vec<crate::model::Itinerary>,
    pub sensed: Sensed,
}

/// Runs every stage serially.
pub fn synthesize(config: &SynthConfig) -> Result<SynthOutput> {
    let network = generate_network(config)?;
    let zones = generate_zone_table(config)?;
    let truth = generate_population(config, &network)?;
    let sensed = apply_sensing(config, &network, &truth)?;
    Ok(SynthOutput {
        network,
        zones,
        truth,
        sensed,
    })
}

pub(crate) fn label(prefix: &str, n: usize, width: usize) -> String {
    alloc::format!("{prefix}{n:0width$}")
}
