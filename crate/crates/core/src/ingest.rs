//! Leg records, collation into itineraries, and privacy conformance.
//!
//! A [`LegRecordRow`] is the flat wire form of one line of a leg-record file.
//! Exactly one of two field groups must be present, matching the mode: grid
//! cells for private modes, stops/line/vehicle for PT modes. A row that passes
//! [`LegRecordRow::into_record`] becomes a [`RawLegRecord`].

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    Day, GridCell, Itinerary, Leg, Mode, PrivateLeg, PtLeg, StopRef, Timestamp, TripChain, QUARTER_HOUR_S,
};

/// One line of a leg-record file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegRecordRow {
    pub device_id: String,
    pub day: Day,
    pub chain_id: String,
    pub leg_ordinal: u32,
    pub mode: Mode,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_col: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_row: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_col: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_row: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub board_stop_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub board_lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub board_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alight_stop_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alight_lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alight_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordError {
    /// Fields of the group that does not belong to the mode are present.
    FieldGroupMismatch {
        mode: Mode,
        field: &'static str,
    },
    MissingField(&'static str),
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordError::FieldGroupMismatch { mode, field } => {
                write!(f, "field group mismatch: {mode} leg has {field}")
            }
            RecordError::MissingField(field) => write!(f, "missing field {field}"),
        }
    }
}

/// A validated leg record with its grouping keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLegRecord {
    pub device_id: String,
    pub day: Day,
    pub chain_id: String,
    pub leg_ordinal: u32,
    pub leg: Leg,
}

/// A wire field name and whether it is present.
type FieldPresence = (&'static str, bool);

impl LegRecordRow {
    fn cell_fields(&self) -> [(&'static str, bool); 4] {
        [
            ("start_col", self.start_col.is_some()),
            ("start_row", self.start_row.is_some()),
            ("end_col", self.end_col.is_some()),
            ("end_row", self.end_row.is_some()),
        ]
    }

    fn stop_fields(&self) -> [(&'static str, bool); 9] {
        [
            ("board_stop_id", self.board_stop_id.is_some()),
            ("board_lat", self.board_lat.is_some()),
            ("board_lon", self.board_lon.is_some()),
            ("alight_stop_id", self.alight_stop_id.is_some()),
            ("alight_lat", self.alight_lat.is_some()),
            ("alight_lon", self.alight_lon.is_some()),
            ("line_id", self.line_id.is_some()),
            ("direction", self.direction.is_some()),
            ("vehicle_id", self.vehicle_id.is_some()),
        ]
    }

    pub fn into_record(self) -> Result<RawLegRecord, RecordError> {
        let pt = self.mode.is_pt();
        let (foreign, own): (&[FieldPresence], &[FieldPresence]) = if pt {
            (&self.cell_fields(), &self.stop_fields())
        } else {
            (&self.stop_fields(), &self.cell_fields())
        };
        if let Some((field, _)) = foreign.iter().find(|(_, present)| *present) {
            return Err(RecordError::FieldGroupMismatch { mode: self.mode, field });
        }
        if let Some((field, _)) = own.iter().find(|(_, present)| !*present) {
            return Err(RecordError::MissingField(field));
        }
        let leg = if pt {
            Leg::Pt(PtLeg {
                start_time: self.start_time,
                end_time: self.end_time,
                board: StopRef::new(
                    self.board_stop_id.unwrap_or_default(),
                    self.board_lat.unwrap_or_default(),
                    self.board_lon.unwrap_or_default(),
                ),
                alight: StopRef::new(
                    self.alight_stop_id.unwrap_or_default(),
                    self.alight_lat.unwrap_or_default(),
                    self.alight_lon.unwrap_or_default(),
                ),
                mode: self.mode,
                line_id: self.line_id.unwrap_or_default(),
                direction: self.direction.unwrap_or_default(),
                vehicle_id: self.vehicle_id.unwrap_or_default(),
                merged_from: Vec::new(),
                circular: false,
            })
        } else {
            Leg::Private(PrivateLeg {
                start_time: self.start_time,
                end_time: self.end_time,
                start_cell: GridCell::new(self.start_col.unwrap_or_default(), self.start_row.unwrap_or_default()),
                end_cell: GridCell::new(self.end_col.unwrap_or_default(), self.end_row.unwrap_or_default()),
                mode: self.mode,
            })
        };
        Ok(RawLegRecord {
            device_id: self.device_id,
            day: self.day,
            chain_id: self.chain_id,
            leg_ordinal: self.leg_ordinal,
            leg,
        })
    }
}

impl RawLegRecord {
    pub fn to_row(&self) -> LegRecordRow {
        let mut row = LegRecordRow {
            device_id: self.device_id.clone(),
            day: self.day,
            chain_id: self.chain_id.clone(),
            leg_ordinal: self.leg_ordinal,
            mode: self.leg.mode(),
            start_time: self.leg.start_time(),
            end_time: self.leg.end_time(),
            start_col: None,
            start_row: None,
            end_col: None,
            end_row: None,
            board_stop_id: None,
            board_lat: None,
            board_lon: None,
            alight_stop_id: None,
            alight_lat: None,
            alight_lon: None,
            line_id: None,
            direction: None,
            vehicle_id: None,
        };
        match &self.leg {
            Leg::Private(l) => {
                row.start_col = Some(l.start_cell.col);
                row.start_row = Some(l.start_cell.row);
                row.end_col = Some(l.end_cell.col);
                row.end_row = Some(l.end_cell.row);
            }
            Leg::Pt(l) => {
                row.board_stop_id = Some(l.board.id.clone());
                row.board_lat = Some(l.board.lat);
                row.board_lon = Some(l.board.lon);
                row.alight_stop_id = Some(l.alight.id.clone());
                row.alight_lat = Some(l.alight.lat);
                row.alight_lon = Some(l.alight.lon);
                row.line_id = Some(l.line_id.clone());
                row.direction = Some(l.direction.clone());
                row.vehicle_id = Some(l.vehicle_id.clone());
            }
        }
        row
    }
}

/// Flattens itineraries into records, numbering legs from zero within each chain.
pub fn itinerary_records(itinerary: &Itinerary) -> Vec<RawLegRecord> {
    let mut out = Vec::with_capacity(itinerary.leg_count());
    for chain in &itinerary.chains {
        for (i, leg) in chain.legs.iter().enumerate() {
            out.push(RawLegRecord {
                device_id: itinerary.device_id.clone(),
                day: itinerary.day,
                chain_id: chain.chain_id.clone(),
                leg_ordinal: i as u32,
                leg: leg.clone(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CollateDefect {
    /// A second record with the same (device, day, chain, ordinal) was discarded.
    DuplicateOrdinal {
        device_id: String,
        day: Day,
        chain_id: String,
        leg_ordinal: u32,
    },
    /// Leg start times decrease along the ordinal order by more than private-leg
    /// obfuscation can explain. The chain is kept.
    TemporalOrder {
        device_id: String,
        day: Day,
        chain_id: String,
    },
}

impl CollateDefect {
    pub fn kind(&self) -> &'static str {
        match self {
            CollateDefect::DuplicateOrdinal { .. } => "duplicate ordinal",
            CollateDefect::TemporalOrder { .. } => "temporal order violated",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Collated {
    pub itineraries: BTreeMap<(String, Day), Itinerary>,
    pub defects: Vec<CollateDefect>,
}

impl Collated {
    pub fn leg_count(&self) -> usize {
        self.itineraries.values().map(Itinerary::leg_count).sum()
    }

    pub fn duplicate_count(&self) -> usize {
        self.defects
            .iter()
            .filter(|d| matches!(d, CollateDefect::DuplicateOrdinal { .. }))
            .count()
    }

    pub fn into_itineraries(self) -> Vec<Itinerary> {
        self.itineraries.into_values().collect()
    }
}

fn stop_cmp(a: &StopRef, b: &StopRef) -> Ordering {
    a.id.cmp(&b.id)
        .then(a.lat.total_cmp(&b.lat))
        .then(a.lon.total_cmp(&b.lon))
}

/// Total order on leg content, used to pick deterministically among duplicates.
fn leg_cmp(a: &Leg, b: &Leg) -> Ordering {
    a.start_time()
        .cmp(&b.start_time())
        .then(a.end_time().cmp(&b.end_time()))
        .then(a.mode().cmp(&b.mode()))
        .then_with(|| match (a, b) {
            (Leg::Private(x), Leg::Private(y)) => x.start_cell.cmp(&y.start_cell).then(x.end_cell.cmp(&y.end_cell)),
            (Leg::Pt(x), Leg::Pt(y)) => stop_cmp(&x.board, &y.board)
                .then_with(|| stop_cmp(&x.alight, &y.alight))
                .then_with(|| x.line_id.cmp(&y.line_id))
                .then_with(|| x.direction.cmp(&y.direction))
                .then_with(|| x.vehicle_id.cmp(&y.vehicle_id)),
            (Leg::Private(_), Leg::Pt(_)) => Ordering::Less,
            (Leg::Pt(_), Leg::Private(_)) => Ordering::Greater,
        })
}

fn record_cmp(a: &RawLegRecord, b: &RawLegRecord) -> Ordering {
    a.device_id
        .cmp(&b.device_id)
        .then(a.day.cmp(&b.day))
        .then_with(|| a.chain_id.cmp(&b.chain_id))
        .then(a.leg_ordinal.cmp(&b.leg_ordinal))
        .then_with(|| leg_cmp(&a.leg, &b.leg))
}

/// Groups records by (device, day) and chain id.
///
/// Legs are ordered by ordinal. Chains are ordered by first-leg start time,
/// then chain id. Among records sharing a full key, the one first in leg
/// content order is kept; the output is independent of input order.
pub fn collate_itineraries(mut records: Vec<RawLegRecord>) -> Collated {
    records.sort_unstable_by(record_cmp);
    let mut out = Collated::default();
    let mut iter = records.into_iter().peekable();
    while let Some(first) = iter.next() {
        let device_id = first.device_id.clone();
        let day = first.day;
        let mut chains: Vec<TripChain> = Vec::new();
        let mut pending = Some(first);
        while let Some(rec) = pending.take() {
            let chain_id = rec.chain_id.clone();
            let mut last_ordinal = rec.leg_ordinal;
            let mut legs = Vec::new();
            legs.push(rec.leg);
            while let Some(next) = iter.peek() {
                if next.device_id != device_id || next.day != day || next.chain_id != chain_id {
                    break;
                }
                let next = iter.next().expect("peeked");
                if next.leg_ordinal == last_ordinal {
                    out.defects.push(CollateDefect::DuplicateOrdinal {
                        device_id: device_id.clone(),
                        day,
                        chain_id: chain_id.clone(),
                        leg_ordinal: next.leg_ordinal,
                    });
                    continue;
                }
                last_ordinal = next.leg_ordinal;
                legs.push(next.leg);
            }
            let chain = TripChain { chain_id, legs };
            if !chain.is_time_ordered_sensed() {
                out.defects.push(CollateDefect::TemporalOrder {
                    device_id: device_id.clone(),
                    day,
                    chain_id: chain.chain_id.clone(),
                });
            }
            chains.push(chain);
            if let Some(next) = iter.peek() {
                if next.device_id == device_id && next.day == day {
                    pending = iter.next();
                }
            }
        }
        chains.sort_by(|a, b| {
            a.start_time()
                .cmp(&b.start_time())
                .then_with(|| a.chain_id.cmp(&b.chain_id))
        });
        out.itineraries
            .insert((device_id.clone(), day), Itinerary { device_id, day, chains });
    }
    out.defects.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    Start,
    End,
}

impl Endpoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Endpoint::Start => "start",
            Endpoint::End => "end",
        }
    }
}

/// A private-leg timestamp that is not on a quarter-hour boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyViolation {
    pub chain_id: String,
    pub leg_index: usize,
    pub endpoint: Endpoint,
    pub time: Timestamp,
}

/// PT legs are exempt: their times are not obfuscated.
pub fn check_privacy_conformance(itinerary: &Itinerary) -> Vec<PrivacyViolation> {
    let mut report = Vec::new();
    for chain in &itinerary.chains {
        for (i, leg) in chain.legs.iter().enumerate() {
            let Leg::Private(l) = leg else { continue };
            for (endpoint, t) in [(Endpoint::Start, l.start_time), (Endpoint::End, l.end_time)] {
                if t.rem_euclid(QUARTER_HOUR_S) != 0 {
                    report.push(PrivacyViolation {
                        chain_id: chain.chain_id.to_string(),
                        leg_index: i,
                        endpoint,
                        time: t,
                    });
                }
            }
        }
    }
    report
}
