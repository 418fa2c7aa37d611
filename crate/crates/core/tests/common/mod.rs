//! Generators shared by the property tests.

#![allow(dead_code)]

use mobsense_core::geo::GridSpec;
use mobsense_core::od::ZoneTable;
use mobsense_core::synth::SynthConfig;
use mobsense_core::{Day, GridCell, Itinerary, Leg, Mode, PrivateLeg, PtLeg, StopRef, TripChain};
use proptest::prelude::*;

/// Every property runs on this many random cases.
pub const CASES: u32 = 100;

pub const STOP_POOL: usize = 6;
pub const PRIVATE_MODES: [Mode; 4] = [Mode::Walking, Mode::Cycling, Mode::PrivateVehicle, Mode::Other];

pub fn grid() -> GridSpec {
    GridSpec::new(60.16, 24.93)
}

/// 16 x 16 cells split into four zones of 8 x 8.
pub fn zones() -> ZoneTable {
    let mut z = ZoneTable::new(grid());
    for row in 0..16 {
        for col in 0..16 {
            z.insert(GridCell::new(col, row), &format!("Z{}{}", col / 8, row / 8));
        }
    }
    z
}

/// Stops spread over the zone table, roughly 300 m apart.
pub fn stop(i: usize) -> StopRef {
    StopRef::new(format!("s{i}"), 60.162 + 0.0027 * i as f64, 24.935 + 0.004 * i as f64)
}

pub fn base_day() -> Day {
    Day::from_ymd(2020, 11, 16).unwrap()
}

/// Shape of one leg; [`build_chain`] lays legs out in time.
#[derive(Debug, Clone)]
pub struct LegSpec {
    pub pt: bool,
    pub mode: usize,
    pub gap_s: i64,
    pub duration_s: i64,
    pub vehicle: u8,
    pub board: usize,
    pub hop: usize,
    /// Private legs: start and end cells, within 0..20 so some fall outside
    /// the zone table.
    pub cells: (i64, i64, i64, i64),
}

pub fn leg_spec() -> impl Strategy<Value = LegSpec> {
    (
        any::<bool>(),
        0usize..5,
        0i64..1200,
        60i64..3000,
        0u8..3,
        0..STOP_POOL,
        1..STOP_POOL,
        (0i64..20, 0i64..20, 0i64..20, 0i64..20),
    )
        .prop_map(|(pt, mode, gap_s, duration_s, vehicle, board, hop, cells)| LegSpec {
            pt,
            mode,
            gap_s,
            duration_s,
            vehicle,
            board,
            hop,
            cells,
        })
}

fn round_up_q(t: i64) -> i64 {
    let r = t.rem_euclid(900);
    if r == 0 {
        t
    } else {
        t + 900 - r
    }
}

pub fn pt_leg(mode: Mode, start: i64, end: i64, board: usize, alight: usize, vehicle: &str) -> Leg {
    Leg::Pt(PtLeg {
        start_time: start,
        end_time: end,
        board: stop(board),
        alight: stop(alight),
        mode,
        line_id: format!("L-{vehicle}"),
        direction: "0".into(),
        vehicle_id: vehicle.into(),
        merged_from: vec![],
        circular: false,
    })
}

/// Chain of legs in time order starting at or after `t0`: private legs on
/// quarter hours, PT legs at arbitrary seconds. Returns the chain end time.
pub fn build_chain(chain_id: &str, t0: i64, specs: &[LegSpec]) -> (TripChain, i64) {
    let mut t = t0;
    let mut legs = Vec::with_capacity(specs.len());
    for s in specs {
        if s.pt {
            let start = t + s.gap_s;
            let end = start + s.duration_s;
            let alight = (s.board + s.hop) % STOP_POOL;
            let vehicle = format!("V{}", s.vehicle);
            legs.push(pt_leg(Mode::PT[s.mode], start, end, s.board, alight, &vehicle));
            t = end;
        } else {
            let start = round_up_q(t + s.gap_s);
            let end = start + 900 * (1 + s.duration_s / 900);
            let (c0, r0, c1, r1) = s.cells;
            legs.push(Leg::Private(PrivateLeg {
                start_time: start,
                end_time: end,
                start_cell: GridCell::new(c0, r0),
                end_cell: GridCell::new(c1, r1),
                mode: PRIVATE_MODES[s.mode % 4],
            }));
            t = end;
        }
    }
    (
        TripChain {
            chain_id: chain_id.into(),
            legs,
        },
        t,
    )
}

pub fn chain() -> impl Strategy<Value = TripChain> {
    (prop::collection::vec(leg_spec(), 1..9), 0i64..86_400)
        .prop_map(|(specs, t0)| build_chain("c0", 1_605_484_800 + t0, &specs).0)
}

/// Itineraries with distinct (device, day) keys and non-interleaving chains.
pub fn itineraries() -> impl Strategy<Value = Vec<Itinerary>> {
    prop::collection::vec(
        (
            0i64..14,
            prop::collection::vec(prop::collection::vec(leg_spec(), 1..7), 1..4),
        ),
        1..6,
    )
    .prop_map(|its| {
        its.into_iter()
            .enumerate()
            .map(|(i, (offset, chains))| {
                let day = base_day().add_days(offset).unwrap();
                let mut t = day.local_midnight_utc(7200) + 6 * 3600;
                let chains = chains
                    .iter()
                    .enumerate()
                    .map(|(k, specs)| {
                        let (c, end) = build_chain(&format!("d{i}-{k}"), t, specs);
                        t = end + 1800;
                        c
                    })
                    .collect();
                Itinerary {
                    device_id: format!("d{i}"),
                    day,
                    chains,
                }
            })
            .collect()
    })
}

/// A small generator configuration with only spurious splits enabled.
pub fn small_synth(seed: u64, p_spurious: f64) -> SynthConfig {
    SynthConfig {
        seed,
        devices: 6,
        days: 3,
        stops: 60,
        hubs: 3,
        lines: 6,
        p_spurious,
        ..SynthConfig::default()
    }
}
