use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{stream_rng, Network, Obfuscation, SynthConfig};
use crate::error::Result;
use crate::ingest::RawLegRecord;
use crate::model::{Day, GridCell, Itinerary, Leg, Mode, PrivateLeg, PtLeg, Timestamp, QUARTER_HOUR_S};

const SENSING_SALT: u64 = 0x5345_4E53_494E_4700;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    /// One PT ride split into two same-vehicle legs around a short `other` leg.
    SpuriousSplit,
    /// A chain absorbed the following chain of the same itinerary.
    ConjoinedChain,
    /// Boarding recorded one stop late or alighting one stop early.
    BoardingShift,
}

/// One injected defect, addressed by the sensed record keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub kind: DefectKind,
    pub device_id: String,
    pub day: Day,
    pub chain_id: String,
    /// Sensed ordinals of the affected legs.
    pub leg_ordinals: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensedItinerary {
    pub records: Vec<RawLegRecord>,
    pub defects: Vec<DefectRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sensed {
    pub records: Vec<RawLegRecord>,
    pub defects: Vec<DefectRecord>,
}

fn floor_q(t: Timestamp) -> Timestamp {
    t - t.rem_euclid(QUARTER_HOUR_S)
}

fn ceil_q(t: Timestamp) -> Timestamp {
    let r = t.rem_euclid(QUARTER_HOUR_S);
    if r == 0 {
        t
    } else {
        t + QUARTER_HOUR_S - r
    }
}

fn obfuscate_one(t: Timestamp, mode: Obfuscation, rng: &mut ChaCha8Rng) -> Timestamp {
    match mode {
        Obfuscation::Random => {
            if rng.random_bool(0.5) {
                floor_q(t)
            } else {
                ceil_q(t)
            }
        }
        Obfuscation::Nearest => {
            if t.rem_euclid(QUARTER_HOUR_S) < QUARTER_HOUR_S / 2 {
                floor_q(t)
            } else {
                ceil_q(t)
            }
        }
    }
}

/// Quarter-hour obfuscation of a leg's endpoints. When independent rounding
/// would reverse the interval, the end is rounded up instead, which keeps both
/// errors under 900 s.
pub(crate) fn obfuscate_interval(
    start: Timestamp,
    end: Timestamp,
    mode: Obfuscation,
    rng: &mut ChaCha8Rng,
) -> (Timestamp, Timestamp) {
    let s = obfuscate_one(start, mode, rng);
    let mut e = obfuscate_one(end, mode, rng);
    if e < s {
        e = ceil_q(end);
    }
    (s, e)
}

struct Emitter<'a> {
    itinerary: &'a Itinerary,
    out: &'a mut SensedItinerary,
    chain_id: String,
    ordinal: u32,
}

impl Emitter<'_> {
    fn push(&mut self, leg: Leg) -> u32 {
        let ordinal = self.ordinal;
        self.out.records.push(RawLegRecord {
            device_id: self.itinerary.device_id.clone(),
            day: self.itinerary.day,
            chain_id: self.chain_id.clone(),
            leg_ordinal: ordinal,
            leg,
        });
        self.ordinal += 1;
        ordinal
    }

    fn defect(&mut self, kind: DefectKind, leg_ordinals: Vec<u32>, vehicle_id: Option<String>, detail: Option<String>) {
        self.out.defects.push(DefectRecord {
            kind,
            device_id: self.itinerary.device_id.clone(),
            day: self.itinerary.day,
            chain_id: self.chain_id.clone(),
            leg_ordinals,
            vehicle_id,
            detail,
        });
    }
}

/// Line positions of the boarding and alighting stops of a ground-truth leg.
fn positions(network: &Network, leg: &PtLeg) -> Option<(usize, usize)> {
    let line = network.line(&leg.line_id)?;
    let i = line.position(network.stop(&leg.board.id)?)?;
    let j = line.position(network.stop(&leg.alight.id)?)?;
    Some((i, j))
}

fn step_towards(from: usize, to: usize, by: usize) -> usize {
    if to > from {
        from + by
    } else {
        from - by
    }
}

fn sense_pt(config: &SynthConfig, network: &Network, truth: &PtLeg, em: &mut Emitter<'_>, rng: &mut ChaCha8Rng) {
    let mut leg = truth.clone();
    let Some((mut i, mut j)) = positions(network, truth) else {
        em.push(Leg::Pt(leg));
        return;
    };
    let line = network.line(&truth.line_id).expect("positions resolved the line");

    if config.p_boarding_shift > 0.0 && i.abs_diff(j) >= 3 && rng.random_bool(config.p_boarding_shift) {
        let detail = if rng.random_bool(0.5) {
            i = step_towards(i, j, 1);
            leg.board = network.stops[line.stops[i]].clone();
            "delayed boarding"
        } else {
            j = step_towards(j, i, 1);
            leg.alight = network.stops[line.stops[j]].clone();
            "anticipated alighting"
        };
        em.defect(
            DefectKind::BoardingShift,
            alloc::vec![em.ordinal],
            Some(leg.vehicle_id.clone()),
            Some(detail.into()),
        );
    }

    let hops = i.abs_diff(j);
    if hops < 2 || !rng.random_bool(config.p_spurious) {
        em.push(Leg::Pt(leg));
        return;
    }
    let k_off = rng.random_range(1..hops);
    let k = step_towards(i, j, k_off);
    let mid = network.stops[line.stops[k]].clone();
    let split_t = leg.start_time + (leg.end_time - leg.start_time) * k_off as i64 / hops as i64;

    let mut first = leg.clone();
    first.end_time = split_t;
    first.alight = mid.clone();
    let mut second = leg;
    second.start_time = split_t;
    second.board = mid;

    let cell: GridCell = {
        let (x, y) = network.stop_xy[line.stops[k]];
        config.grid.cell_of_xy(x, y)
    };
    let (s, e) = obfuscate_interval(split_t, split_t, config.obfuscation, rng);
    let still = PrivateLeg {
        start_time: s,
        end_time: e,
        start_cell: cell,
        end_cell: cell,
        mode: Mode::Other,
    };
    let vehicle = first.vehicle_id.clone();
    let a = em.push(Leg::Pt(first));
    let b = em.push(Leg::Private(still));
    let c = em.push(Leg::Pt(second));
    em.defect(DefectKind::SpuriousSplit, alloc::vec![a, b, c], Some(vehicle), None);
}

/// Sensed records and defects of one ground-truth itinerary. `index` selects
/// the random stream, so each itinerary can be sensed independently.
pub fn sense_itinerary(config: &SynthConfig, network: &Network, truth: &Itinerary, index: usize) -> SensedItinerary {
    let mut rng = stream_rng(config.seed, SENSING_SALT, index as u64);
    let mut out = SensedItinerary::default();

    // Conjoined chains: a chain swallows its successor.
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut c = 0;
    while c < truth.chains.len() {
        let mut members = alloc::vec![c];
        if config.p_conjoined > 0.0 && c + 1 < truth.chains.len() && rng.random_bool(config.p_conjoined) {
            members.push(c + 1);
        }
        c += members.len();
        groups.push((members[0], members));
    }

    for (head, members) in groups {
        let mut em = Emitter {
            itinerary: truth,
            out: &mut out,
            chain_id: truth.chains[head].chain_id.clone(),
            ordinal: 0,
        };
        for (n, &m) in members.iter().enumerate() {
            if n > 0 {
                let first_ordinal = em.ordinal;
                em.defect(
                    DefectKind::ConjoinedChain,
                    alloc::vec![first_ordinal],
                    None,
                    Some(truth.chains[m].chain_id.clone()),
                );
            }
            for leg in &truth.chains[m].legs {
                match leg {
                    Leg::Private(p) => {
                        let (s, e) = obfuscate_interval(p.start_time, p.end_time, config.obfuscation, &mut rng);
                        em.push(Leg::Private(PrivateLeg {
                            start_time: s,
                            end_time: e,
                            ..p.clone()
                        }));
                    }
                    Leg::Pt(p) => sense_pt(config, network, p, &mut em, &mut rng),
                }
            }
        }
    }
    out
}

/// Senses every itinerary in order.
pub fn apply_sensing(config: &SynthConfig, network: &Network, truth: &[Itinerary]) -> Result<Sensed> {
    config.validate()?;
    let mut sensed = Sensed::default();
    for (i, it) in truth.iter().enumerate() {
        let part = sense_itinerary(config, network, it, i);
        sensed.records.extend(part.records);
        sensed.defects.extend(part.defects);
    }
    Ok(sensed)
}
