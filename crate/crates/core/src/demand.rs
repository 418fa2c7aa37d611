//! Per-cell leg counts, coverage, count statistics, power-law fits, hourly
//! profiles and mode shares.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{local_hour, DayType, GridCell, Itinerary, Leg, Mode, ReportGroup, TripChain};
use crate::od::{leg_cells, ZoneTable};
use crate::stats;

/// Mode groups reported in the spatial and temporal summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModeGroup {
    Walking,
    Cycling,
    PrivateVehicle,
    Bus,
    UrbanRail,
    Train,
    /// Union of the six primary groups above.
    Total,
}

impl ModeGroup {
    pub const PRIMARY: [ModeGroup; 6] = [
        ModeGroup::Walking,
        ModeGroup::Cycling,
        ModeGroup::PrivateVehicle,
        ModeGroup::Bus,
        ModeGroup::UrbanRail,
        ModeGroup::Train,
    ];

    pub const ALL: [ModeGroup; 7] = [
        ModeGroup::Walking,
        ModeGroup::Cycling,
        ModeGroup::PrivateVehicle,
        ModeGroup::Bus,
        ModeGroup::UrbanRail,
        ModeGroup::Train,
        ModeGroup::Total,
    ];

    pub fn contains(self, mode: Mode) -> bool {
        match self {
            ModeGroup::Walking => mode == Mode::Walking,
            ModeGroup::Cycling => mode == Mode::Cycling,
            ModeGroup::PrivateVehicle => mode == Mode::PrivateVehicle,
            ModeGroup::Bus => mode == Mode::Bus,
            ModeGroup::UrbanRail => mode.is_urban_rail(),
            ModeGroup::Train => mode == Mode::Train,
            ModeGroup::Total => ModeGroup::PRIMARY.iter().any(|g| g.contains(mode)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeGroup::Walking => "walking",
            ModeGroup::Cycling => "cycling",
            ModeGroup::PrivateVehicle => "private_vehicle",
            ModeGroup::Bus => "bus",
            ModeGroup::UrbanRail => "urban_rail",
            ModeGroup::Train => "train",
            ModeGroup::Total => "total",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridModeCounts {
    pub group: ModeGroup,
    /// Only cells with at least one leg are present.
    pub counts: BTreeMap<GridCell, u64>,
    /// Cells in the service area.
    pub total_cells: usize,
}

impl GridModeCounts {
    pub fn empty(group: ModeGroup, total_cells: usize) -> Self {
        GridModeCounts {
            group,
            counts: BTreeMap::new(),
            total_cells,
        }
    }

    /// Counts a leg once in its start cell and once in its end cell when they
    /// differ. Endpoints outside the service area are skipped.
    pub fn add_leg(&mut self, leg: &Leg, zones: &ZoneTable) {
        if !self.group.contains(leg.mode()) {
            return;
        }
        let (a, b) = leg_cells(leg, &zones.grid);
        if zones.contains(a) {
            *self.counts.entry(a).or_insert(0) += 1;
        }
        if b != a && zones.contains(b) {
            *self.counts.entry(b).or_insert(0) += 1;
        }
    }

    /// Adds another partial count map of the same group.
    pub fn merge(&mut self, other: &GridModeCounts) {
        for (cell, n) in &other.counts {
            *self.counts.entry(*cell).or_insert(0) += n;
        }
    }

    pub fn used_cells(&self) -> usize {
        self.counts.len()
    }
}

pub fn grid_leg_counts<'a>(
    legs: impl IntoIterator<Item = &'a Leg>,
    group: ModeGroup,
    zones: &ZoneTable,
) -> GridModeCounts {
    let mut out = GridModeCounts::empty(group, zones.len());
    for leg in legs {
        out.add_leg(leg, zones);
    }
    out
}

/// Percentage of service-area cells with at least one leg.
pub fn coverage(counts: &GridModeCounts) -> Result<f64> {
    if counts.total_cells == 0 {
        return Err(Error::ZeroTotalCells);
    }
    Ok(100.0 * counts.used_cells() as f64 / counts.total_cells as f64)
}

/// Population mean and standard deviation of leg counts over used cells.
pub fn count_stats(counts: &GridModeCounts) -> Result<(f64, f64)> {
    let values: Vec<f64> = counts.counts.values().map(|&n| n as f64).collect();
    if values.is_empty() {
        return Err(Error::Empty("no used cells"));
    }
    stats::mean_std(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub r_squared: f64,
    /// Distinct count values in the fit.
    pub support: usize,
}

/// Number of cells holding exactly `n` legs, for each observed `n`.
pub fn count_frequencies(counts: &GridModeCounts) -> BTreeMap<u64, u64> {
    let mut freq = BTreeMap::new();
    for &n in counts.counts.values() {
        *freq.entry(n).or_insert(0) += 1;
    }
    freq
}

/// Log-log least squares of frequency on count value. `alpha` is the slope.
pub fn fit_power_law_histogram(freq: &BTreeMap<u64, u64>) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = freq
        .iter()
        .filter(|(&n, &f)| n > 0 && f > 0)
        .map(|(&n, &f)| (libm::log(n as f64), libm::log(f as f64)))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientSupport { distinct: points.len() });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    let fit = stats::ols(&xs, &ys)?;
    Ok(PowerLawFit {
        alpha: fit.slope,
        r_squared: fit.r_squared,
        support: fit.n,
    })
}

pub fn fit_power_law(counts: &GridModeCounts) -> Result<PowerLawFit> {
    fit_power_law_histogram(&count_frequencies(counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyProfile {
    pub group: ModeGroup,
    pub day_type: DayType,
    pub bins: [u64; 24],
}

impl HourlyProfile {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    pub fn as_f64(&self) -> [f64; 24] {
        self.bins.map(|b| b as f64)
    }
}

/// Legs of a group on days of one type, binned by local start hour.
pub fn hourly_profile(
    itineraries: &[Itinerary],
    group: ModeGroup,
    day_type: DayType,
    utc_offset_s: i64,
) -> HourlyProfile {
    let mut bins = [0u64; 24];
    for it in itineraries.iter().filter(|it| it.day.day_type() == day_type) {
        for leg in it.legs().filter(|l| group.contains(l.mode())) {
            bins[local_hour(leg.start_time(), utc_offset_s) as usize] += 1;
        }
    }
    HourlyProfile { group, day_type, bins }
}

pub fn pearson(a: &HourlyProfile, b: &HourlyProfile) -> Result<f64> {
    stats::pearson(&a.as_f64(), &b.as_f64())
}

/// Mean pairwise correlation over profiles with non-zero variance, and the
/// number of pairs used.
pub fn mean_pairwise_pearson(profiles: &[HourlyProfile]) -> Option<(f64, usize)> {
    let mut sum = 0.0;
    let mut n = 0;
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            if let Ok(r) = pearson(&profiles[i], &profiles[j]) {
                sum += r;
                n += 1;
            }
        }
    }
    (n > 0).then(|| (sum / n as f64, n))
}

/// Percentages per reporting group, in [`ReportGroup::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeShares {
    pub percent: [f64; 5],
    pub total: u64,
}

impl ModeShares {
    pub fn get(&self, group: ReportGroup) -> f64 {
        self.percent[group_index(group)]
    }

    fn from_counts(counts: [u64; 5], what: &'static str) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty(what));
        }
        Ok(ModeShares {
            percent: counts.map(|c| 100.0 * c as f64 / total as f64),
            total,
        })
    }
}

fn group_index(group: ReportGroup) -> usize {
    ReportGroup::ALL.iter().position(|&g| g == group).expect("listed")
}

pub fn mode_share_legs(itineraries: &[Itinerary]) -> Result<ModeShares> {
    let mut counts = [0u64; 5];
    for leg in itineraries.iter().flat_map(Itinerary::legs) {
        counts[group_index(leg.mode().report_group())] += 1;
    }
    ModeShares::from_counts(counts, "no legs")
}

/// Group of a whole chain: any PT leg makes it PT, else any car leg makes it
/// Car, then Cycling, Walking, Other.
pub fn chain_group(chain: &TripChain) -> ReportGroup {
    const PRIORITY: [ReportGroup; 5] = [
        ReportGroup::Pt,
        ReportGroup::Car,
        ReportGroup::Cycling,
        ReportGroup::Walking,
        ReportGroup::Other,
    ];
    PRIORITY
        .into_iter()
        .find(|g| chain.legs.iter().any(|l| l.mode().report_group() == *g))
        .unwrap_or(ReportGroup::Other)
}

pub fn mode_share_chains(itineraries: &[Itinerary]) -> Result<ModeShares> {
    let mut counts = [0u64; 5];
    for chain in itineraries.iter().flat_map(|it| it.chains.iter()) {
        counts[group_index(chain_group(chain))] += 1;
    }
    ModeShares::from_counts(counts, "no chains")
}
