//! Properties of the domain model: mode categories, leg serialization and
//! the type invariants of legs, chains and itineraries.

use crate::common::*;
use mobsense_core::model::{mode_category, validate_leg};
use mobsense_core::{Category, Leg, Mode, PrivateLeg, PtLeg, StopRef};
use proptest::prelude::*;

use super::property;

fn expected_category(mode: Mode) -> Category {
    match mode {
        Mode::Walking | Mode::Cycling | Mode::PrivateVehicle => Category::Private,
        Mode::Bus | Mode::Tram | Mode::Subway | Mode::Train | Mode::Ferry => Category::Pt,
        Mode::Other => Category::Other,
    }
}

fn any_mode() -> impl Strategy<Value = Mode> {
    prop::sample::select(Mode::ALL.to_vec())
}

fn any_stop() -> impl Strategy<Value = StopRef> {
    ("[a-z0-9:_-]{1,12}", -90.0f64..90.0, -180.0f64..180.0).prop_map(|(id, lat, lon)| StopRef::new(id, lat, lon))
}

/// Any structurally possible leg, including ones that break invariants.
fn any_leg() -> impl Strategy<Value = Leg> {
    let private =
        (any::<i64>(), any::<i64>(), any::<(i64, i64, i64, i64)>(), any_mode()).prop_map(|(s, e, c, mode)| {
            Leg::Private(PrivateLeg {
                start_time: s,
                end_time: e,
                start_cell: mobsense_core::GridCell::new(c.0, c.1),
                end_cell: mobsense_core::GridCell::new(c.2, c.3),
                mode,
            })
        });
    let pt = (
        any::<(i64, i64)>(),
        any_stop(),
        any_stop(),
        any_mode(),
        ("\\PC{0,8}", "\\PC{0,4}", "\\PC{0,8}"),
        prop::collection::vec(0usize..50, 0..5),
        any::<bool>(),
    )
        .prop_map(
            |((s, e), board, alight, mode, (line_id, direction, vehicle_id), merged_from, circular)| {
                Leg::Pt(PtLeg {
                    start_time: s,
                    end_time: e,
                    board,
                    alight,
                    mode,
                    line_id,
                    direction,
                    vehicle_id,
                    merged_from,
                    circular,
                })
            },
        );
    prop_oneof![private, pt]
}

property!(mode_category_is_total_and_deterministic(mode in any_mode()) {
    prop_assert_eq!(mode_category(mode), expected_category(mode));
    prop_assert_eq!(mode_category(mode), mode_category(mode));
    prop_assert_eq!(mode.as_str().parse::<Mode>().unwrap(), mode);
});

property!(leg_serde_round_trips(leg in any_leg()) {
    let json = serde_json::to_string(&leg).unwrap();
    let back: Leg = serde_json::from_str(&json).unwrap();
    prop_assert_eq!(back, leg);
});

property!(well_formed_legs_validate_clean(chain in chain()) {
    for leg in &chain.legs {
        prop_assert!(validate_leg(leg).is_empty(), "{:?}", validate_leg(leg));
    }
    prop_assert!(!chain.legs.is_empty());
    prop_assert!(chain.is_time_ordered());
});

property!(off_quarter_private_times_are_reported(k in -1000i64..1000, off in 1i64..900) {
    let leg = Leg::Private(PrivateLeg {
        start_time: 900 * k + off,
        end_time: 900 * (k + 1),
        start_cell: mobsense_core::GridCell::new(0, 0),
        end_cell: mobsense_core::GridCell::new(0, 0),
        mode: Mode::Walking,
    });
    let report = validate_leg(&leg);
    prop_assert!(report.iter().any(|v| v.as_str() == "obfuscation violated"));
});
