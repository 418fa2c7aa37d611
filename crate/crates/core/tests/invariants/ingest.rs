//! Collation properties: input-order independence and record conservation.

use crate::common::*;
use mobsense_core::ingest::{collate_itineraries, itinerary_records, RawLegRecord};
use proptest::prelude::*;

use super::property;

/// Records of the itineraries plus duplicated keys, some with altered content.
fn records_with_duplicates() -> impl Strategy<Value = Vec<RawLegRecord>> {
    (
        itineraries(),
        prop::collection::vec((any::<prop::sample::Index>(), 0i64..3), 0..8),
    )
        .prop_map(|(its, dups)| {
            let mut records: Vec<RawLegRecord> = its.iter().flat_map(itinerary_records).collect();
            let n = records.len();
            for (idx, shift) in dups {
                let mut d = records[idx.index(n)].clone();
                if let mobsense_core::Leg::Pt(p) = &mut d.leg {
                    p.start_time += shift;
                }
                records.push(d);
            }
            records
        })
}

property!(collate_ignores_input_order(
    (records, shuffled) in records_with_duplicates()
        .prop_flat_map(|r| (Just(r.clone()), Just(r).prop_shuffle()))
) {
    prop_assert_eq!(collate_itineraries(records), collate_itineraries(shuffled));
});

property!(records_are_conserved(records in records_with_duplicates()) {
    let n = records.len();
    let c = collate_itineraries(records);
    prop_assert_eq!(n, c.leg_count() + c.duplicate_count());
});

property!(collate_reconstructs_itineraries(its in itineraries()) {
    let records: Vec<RawLegRecord> = its.iter().flat_map(itinerary_records).collect();
    let c = collate_itineraries(records);
    prop_assert!(c.defects.is_empty());
    let mut expected = its.clone();
    expected.sort_by(|a, b| (&a.device_id, a.day).cmp(&(&b.device_id, b.day)));
    prop_assert_eq!(c.into_itineraries(), expected);
});
