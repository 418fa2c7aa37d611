//! Merge properties: span, leg counts, idempotence, and exact recovery of
//! generator ground truth.

use crate::common::*;
use mobsense_core::cleaning::{clean_dataset, merge_spurious_legs};
use mobsense_core::ingest::collate_itineraries;
use mobsense_core::synth::{synthesize, DefectKind};
use mobsense_core::{Itinerary, Leg, PtLeg};
use proptest::prelude::*;

use super::property;

/// PT legs of every chain, keyed by chain id, without merge bookkeeping.
fn pt_legs_by_chain(its: &[Itinerary]) -> Vec<(String, Vec<PtLeg>)> {
    let mut out: Vec<(String, Vec<PtLeg>)> = its
        .iter()
        .flat_map(|it| it.chains.iter())
        .map(|c| {
            let pts = c
                .legs
                .iter()
                .filter_map(Leg::as_pt)
                .map(|p| PtLeg {
                    merged_from: vec![],
                    circular: false,
                    ..p.clone()
                })
                .collect();
            (c.chain_id.clone(), pts)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

property!(merging_preserves_chain_span(chain in chain()) {
    let out = merge_spurious_legs(&chain).chain;
    prop_assert_eq!(out.start_time(), chain.start_time());
    prop_assert_eq!(out.end_time(), chain.end_time());
});

property!(each_merge_removes_legs(chain in chain()) {
    let out = merge_spurious_legs(&chain);
    prop_assert!(out.chain.legs.len() <= chain.legs.len());
    // A merge replaces a run of k >= 2 legs by one leg, so the count
    // drops by k - 1 >= 1 and the run spans exactly the absorbed legs.
    let absorbed: usize = out.events.iter().map(|e| e.merged_from.len()).sum();
    prop_assert_eq!(chain.legs.len() - out.chain.legs.len(), absorbed - out.events.len());
    for e in &out.events {
        prop_assert!(e.merged_from.len() >= 2);
    }
    if chain.pt_leg_count() < 2 {
        prop_assert_eq!(&out.chain, &chain);
    }
});

property!(merging_is_idempotent(chain in chain()) {
    let once = merge_spurious_legs(&chain).chain;
    let twice = merge_spurious_legs(&once);
    prop_assert_eq!(twice.merge_count(), 0);
    prop_assert_eq!(twice.chain, once);
});

property!(cleaning_recovers_ground_truth(seed in any::<u64>(), p in 0.0f64..=1.0) {
    let out = synthesize(&small_synth(seed, p)).unwrap();
    let ledger = out.sensed.defects.iter().filter(|d| d.kind == DefectKind::SpuriousSplit).count();
    let sensed = collate_itineraries(out.sensed.records).into_itineraries();
    let cleaned = clean_dataset(&sensed);
    prop_assert_eq!(cleaned.audit.len(), ledger);
    prop_assert_eq!(pt_legs_by_chain(&cleaned.itineraries), pt_legs_by_chain(&out.truth));
});
