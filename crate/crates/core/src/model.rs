//! Legs, trip chains and itineraries.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

/// Private-leg timestamps are rounded to quarter hours.
pub const QUARTER_HOUR_S: i64 = 900;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Walking,
    Cycling,
    PrivateVehicle,
    Bus,
    Tram,
    Subway,
    Train,
    Ferry,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Private,
    Pt,
    Other,
}

/// Reporting groups used for mode shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReportGroup {
    Car,
    Pt,
    Cycling,
    Walking,
    Other,
}

impl ReportGroup {
    pub const ALL: [ReportGroup; 5] = [
        ReportGroup::Car,
        ReportGroup::Pt,
        ReportGroup::Cycling,
        ReportGroup::Walking,
        ReportGroup::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ReportGroup::Car => "Car",
            ReportGroup::Pt => "PT",
            ReportGroup::Cycling => "Cycling",
            ReportGroup::Walking => "Walking",
            ReportGroup::Other => "Other",
        }
    }
}

impl Mode {
    pub const ALL: [Mode; 9] = [
        Mode::Walking,
        Mode::Cycling,
        Mode::PrivateVehicle,
        Mode::Bus,
        Mode::Tram,
        Mode::Subway,
        Mode::Train,
        Mode::Ferry,
        Mode::Other,
    ];

    pub const PT: [Mode; 5] = [Mode::Bus, Mode::Tram, Mode::Subway, Mode::Train, Mode::Ferry];

    pub fn category(self) -> Category {
        mode_category(self)
    }

    pub fn is_pt(self) -> bool {
        self.category() == Category::Pt
    }

    /// Tram and subway are reported together as urban rail.
    pub fn is_urban_rail(self) -> bool {
        matches!(self, Mode::Tram | Mode::Subway)
    }

    pub fn report_group(self) -> ReportGroup {
        match self {
            Mode::PrivateVehicle => ReportGroup::Car,
            Mode::Walking => ReportGroup::Walking,
            Mode::Cycling => ReportGroup::Cycling,
            Mode::Other => ReportGroup::Other,
            Mode::Bus | Mode::Tram | Mode::Subway | Mode::Train | Mode::Ferry => ReportGroup::Pt,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Walking => "walking",
            Mode::Cycling => "cycling",
            Mode::PrivateVehicle => "private_vehicle",
            Mode::Bus => "bus",
            Mode::Tram => "tram",
            Mode::Subway => "subway",
            Mode::Train => "train",
            Mode::Ferry => "ferry",
            Mode::Other => "other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMode(pub String);

impl fmt::Display for UnknownMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown mode {:?}", self.0)
    }
}

impl core::error::Error for UnknownMode {}

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMode(s.to_string()))
    }
}

/// Total mapping from modes to their category.
pub fn mode_category(mode: Mode) -> Category {
    match mode {
        Mode::Walking | Mode::Cycling | Mode::PrivateVehicle => Category::Private,
        Mode::Bus | Mode::Tram | Mode::Subway | Mode::Train | Mode::Ferry => Category::Pt,
        Mode::Other => Category::Other,
    }
}

/// A 250 m grid cell, indexed from the projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub col: i64,
    pub row: i64,
}

impl GridCell {
    pub const fn new(col: i64, row: i64) -> Self {
        GridCell { col, row }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRef {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

impl StopRef {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Self {
        StopRef {
            id: id.into(),
            lat,
            lon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivateLeg {
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub start_cell: GridCell,
    pub end_cell: GridCell,
    pub mode: Mode,
}

/// A leg sensed inside the PT network. A leg produced by merging spurious
/// splits lists the absorbed leg indices in `merged_from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtLeg {
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub board: StopRef,
    pub alight: StopRef,
    pub mode: Mode,
    pub line_id: String,
    pub direction: String,
    pub vehicle_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merged_from: Vec<usize>,
    /// Set when a merge produced a leg that returns to its boarding stop.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub circular: bool,
}

impl PtLeg {
    pub fn is_merged(&self) -> bool {
        !self.merged_from.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Leg {
    Private(PrivateLeg),
    Pt(PtLeg),
}

impl Leg {
    pub fn mode(&self) -> Mode {
        match self {
            Leg::Private(l) => l.mode,
            Leg::Pt(l) => l.mode,
        }
    }

    pub fn start_time(&self) -> Timestamp {
        match self {
            Leg::Private(l) => l.start_time,
            Leg::Pt(l) => l.start_time,
        }
    }

    pub fn end_time(&self) -> Timestamp {
        match self {
            Leg::Private(l) => l.end_time,
            Leg::Pt(l) => l.end_time,
        }
    }

    pub fn as_pt(&self) -> Option<&PtLeg> {
        match self {
            Leg::Pt(l) => Some(l),
            Leg::Private(_) => None,
        }
    }

    pub fn is_pt(&self) -> bool {
        matches!(self, Leg::Pt(_))
    }
}

/// An invariant broken by a leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    TimeOrder,
    Obfuscation,
    ModeCategory,
    SameStop,
}

impl Violation {
    pub fn as_str(self) -> &'static str {
        match self {
            Violation::TimeOrder => "time order violated",
            Violation::Obfuscation => "obfuscation violated",
            Violation::ModeCategory => "mode category mismatch",
            Violation::SameStop => "board stop equals alight stop",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lists every leg invariant that does not hold. Never fails.
pub fn validate_leg(leg: &Leg) -> Vec<Violation> {
    let mut report = Vec::new();
    if leg.end_time() < leg.start_time() {
        report.push(Violation::TimeOrder);
    }
    match leg {
        Leg::Private(l) => {
            if l.start_time.rem_euclid(QUARTER_HOUR_S) != 0 || l.end_time.rem_euclid(QUARTER_HOUR_S) != 0 {
                report.push(Violation::Obfuscation);
            }
            if l.mode.is_pt() {
                report.push(Violation::ModeCategory);
            }
        }
        Leg::Pt(l) => {
            if !l.mode.is_pt() {
                report.push(Violation::ModeCategory);
            }
            if l.board.id == l.alight.id && !l.circular {
                report.push(Violation::SameStop);
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripChain {
    pub chain_id: String,
    pub legs: Vec<Leg>,
}

impl TripChain {
    pub fn pt_leg_count(&self) -> usize {
        self.legs.iter().filter(|l| l.is_pt()).count()
    }

    pub fn has_pt(&self) -> bool {
        self.legs.iter().any(Leg::is_pt)
    }

    pub fn start_time(&self) -> Option<Timestamp> {
        self.legs.first().map(Leg::start_time)
    }

    pub fn end_time(&self) -> Option<Timestamp> {
        self.legs.last().map(Leg::end_time)
    }

    /// Start times are non-decreasing along the chain.
    pub fn is_time_ordered(&self) -> bool {
        self.legs.windows(2).all(|w| w[0].start_time() <= w[1].start_time())
    }

    /// Start times are non-decreasing up to what quarter-hour rounding of
    /// private legs can explain: each private leg of a consecutive pair may
    /// have moved by less than [`QUARTER_HOUR_S`].
    pub fn is_time_ordered_sensed(&self) -> bool {
        let slack = |l: &Leg| if l.is_pt() { 0 } else { QUARTER_HOUR_S - 1 };
        self.legs
            .windows(2)
            .all(|w| w[0].start_time() <= w[1].start_time() + slack(&w[0]) + slack(&w[1]))
    }
}

/// All trip chains of one device on one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub device_id: String,
    pub day: Day,
    pub chains: Vec<TripChain>,
}

impl Itinerary {
    pub fn legs(&self) -> impl Iterator<Item = &Leg> {
        self.chains.iter().flat_map(|c| c.legs.iter())
    }

    pub fn leg_count(&self) -> usize {
        self.chains.iter().map(|c| c.legs.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayType {
    #[serde(alias = "workday")]
    Weekday,
    Weekend,
}

impl DayType {
    pub const ALL: [DayType; 2] = [DayType::Weekday, DayType::Weekend];

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        }
    }
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DayType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weekday" | "workday" => Ok(DayType::Weekday),
            "weekend" => Ok(DayType::Weekend),
            other => Err(alloc::format!("unknown day type {other:?}")),
        }
    }
}

/// A calendar date, written `YYYY-MM-DD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day(time::Date);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidDay(pub String);

impl fmt::Display for InvalidDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid day {:?}, expected YYYY-MM-DD", self.0)
    }
}

impl core::error::Error for InvalidDay {}

impl Day {
    pub fn from_ymd(year: i32, month: u8, day: u8) -> Option<Day> {
        let month = time::Month::try_from(month).ok()?;
        time::Date::from_calendar_date(year, month, day).ok().map(Day)
    }

    /// Days since 1970-01-01.
    pub fn epoch_days(self) -> i64 {
        i64::from(self.0.to_julian_day()) - 2_440_588
    }

    pub fn from_epoch_days(days: i64) -> Option<Day> {
        let jd = i32::try_from(days + 2_440_588).ok()?;
        time::Date::from_julian_day(jd).ok().map(Day)
    }

    pub fn add_days(self, n: i64) -> Option<Day> {
        Day::from_epoch_days(self.epoch_days() + n)
    }

    pub fn day_type(self) -> DayType {
        match self.0.weekday() {
            time::Weekday::Saturday | time::Weekday::Sunday => DayType::Weekend,
            _ => DayType::Weekday,
        }
    }

    /// UTC instant of local midnight, for a fixed UTC offset in seconds.
    pub fn local_midnight_utc(self, utc_offset_s: i64) -> Timestamp {
        self.epoch_days() * SECONDS_PER_DAY - utc_offset_s
    }
}

/// Local hour of day (0..24) of a UTC timestamp.
pub fn local_hour(t: Timestamp, utc_offset_s: i64) -> u8 {
    ((t + utc_offset_s).rem_euclid(SECONDS_PER_DAY) / 3600) as u8
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:04}-{:02}-{:02}",
            self.0.year(),
            u8::from(self.0.month()),
            self.0.day()
        )
    }
}

impl FromStr for Day {
    type Err = InvalidDay;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidDay(s.to_string());
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(bad());
        }
        let year: i32 = s[0..4].parse().map_err(|_| bad())?;
        let month: u8 = s[5..7].parse().map_err(|_| bad())?;
        let day: u8 = s[8..10].parse().map_err(|_| bad())?;
        Day::from_ymd(year, month, day).ok_or_else(bad)
    }
}

impl Serialize for Day {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Day {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
