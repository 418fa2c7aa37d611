//! OD properties: flow conservation, the regression identity, and leg-order
//! independence of aggregation.

use std::collections::BTreeMap;

use crate::common::*;
use mobsense_core::od::{aggregate_od, count_days, map_leg_to_zones, regress_od, OdBasis, OdKey, OdMatrix};
use mobsense_core::{DayType, Itinerary};
use proptest::prelude::*;

use super::property;

fn basis() -> impl Strategy<Value = OdBasis> {
    prop_oneof![Just(OdBasis::Leg), Just(OdBasis::Chain)]
}

/// An OD matrix with at least three entries and some spread in flows.
fn matrix() -> impl Strategy<Value = OdMatrix> {
    prop::collection::btree_map((0u8..4, 0u8..4, 0u8..24), 0.01f64..1000.0, 3..60).prop_filter_map(
        "flows need spread",
        |m| {
            let entries: BTreeMap<OdKey, f64> = m
                .into_iter()
                .map(|((o, d, h), v)| {
                    (
                        OdKey {
                            origin: format!("Z{o}"),
                            destination: format!("Z{d}"),
                            hour: h,
                        },
                        v,
                    )
                })
                .collect();
            let (lo, hi) = entries
                .values()
                .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            (hi - lo > 1e-3).then_some(OdMatrix {
                day_type: DayType::Weekday,
                days: 5,
                entries,
            })
        },
    )
}

property!(flows_are_conserved(its in itineraries()) {
    let zones = zones();
    for dt in DayType::ALL {
        let days = count_days(&its, dt);
        let Ok(m) = aggregate_od(&its, &zones, dt, 7200, OdBasis::Leg) else {
            prop_assert_eq!(days, 0);
            continue;
        };
        let mapped = its
            .iter()
            .filter(|it| it.day.day_type() == dt)
            .flat_map(Itinerary::legs)
            .filter(|l| map_leg_to_zones(l, &zones).is_some())
            .count();
        prop_assert!((m.total() * f64::from(m.days) - mapped as f64).abs() < 1e-9 * (1.0 + mapped as f64));
        prop_assert!(m.entries.values().all(|&v| v > 0.0));
        let names: Vec<&str> = zones.zones();
        prop_assert!(m.zones().iter().all(|z| names.contains(z)));
    }
});

property!(regression_on_itself_is_identity(m in matrix()) {
    let r = regress_od(&m, &m).unwrap();
    prop_assert!((r.alpha - 1.0).abs() < 1e-9, "alpha {}", r.alpha);
    prop_assert!(r.beta.abs() < 1e-9 * (1.0 + m.total()), "beta {}", r.beta);
    prop_assert!((r.r_squared - 1.0).abs() < 1e-12, "r2 {}", r.r_squared);
    prop_assert_eq!(r.n_points, m.entries.len());
});

property!(aggregation_ignores_leg_order(
    (its, perm) in itineraries().prop_flat_map(|its| {
        let n = its.len();
        (Just(its), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    }),
    b in basis(),
) {
    let zones = zones();
    let mut shuffled: Vec<Itinerary> = perm.iter().map(|&i| its[i].clone()).collect();
    if b == OdBasis::Leg {
        // Leg basis: reorder legs within chains too.
        for it in &mut shuffled {
            for c in &mut it.chains {
                c.legs.reverse();
            }
            it.chains.reverse();
        }
    }
    for dt in DayType::ALL {
        let x = aggregate_od(&its, &zones, dt, 7200, b);
        let y = aggregate_od(&shuffled, &zones, dt, 7200, b);
        prop_assert_eq!(x, y);
    }
});
