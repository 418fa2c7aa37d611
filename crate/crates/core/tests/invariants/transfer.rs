//! Transfer properties: the counting law, matrix normalisation, DBSCAN
//! determinism and membership, intra-hub proportions.

use std::collections::BTreeMap;

use crate::common::*;
use mobsense_core::cleaning::clean_dataset;
use mobsense_core::ingest::collate_itineraries;
use mobsense_core::synth::{generate_network, synthesize, SynthConfig};
use mobsense_core::transfer::{
    cluster_hubs, detect_transfers, intra_hub_proportion, intra_hub_proportions, transfer_matrix, TransferEvent,
    HUB_EPSILON_RAD,
};
use mobsense_core::StopRef;
use proptest::prelude::*;

use super::property;

/// Stops from a generated network with planted hubs, so clusters exist.
fn network_stops() -> impl Strategy<Value = Vec<StopRef>> {
    (any::<u64>(), 20usize..200, 1usize..6).prop_map(|(seed, stops, hubs)| {
        let config = SynthConfig {
            seed,
            stops,
            hubs,
            hub_fraction: 0.6,
            ..SynthConfig::default()
        };
        generate_network(&config).unwrap().stops
    })
}

property!(transfer_count_law(chain in chain()) {
    let events = detect_transfers(&chain);
    prop_assert_eq!(events.len(), chain.pt_leg_count().saturating_sub(1));
});

property!(transfer_law_and_matrix_on_generated_data(seed in any::<u64>(), p in 0.0f64..=1.0) {
    let out = synthesize(&small_synth(seed, p)).unwrap();
    let cleaned = clean_dataset(&collate_itineraries(out.sensed.records).into_itineraries());
    let chains: Vec<_> = cleaned.itineraries.iter().flat_map(|it| it.chains.iter()).collect();
    let events: Vec<TransferEvent> = chains.iter().flat_map(|c| detect_transfers(c)).collect();
    let expected: usize = chains.iter().map(|c| c.pt_leg_count().saturating_sub(1)).sum();
    prop_assert_eq!(events.len(), expected);
    if let Ok(m) = transfer_matrix(&events) {
        prop_assert_eq!(m.counts.values().sum::<u64>(), events.len() as u64);
        let total: f64 = m.proportions().values().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    } else {
        prop_assert!(events.is_empty());
    }
});

property!(dbscan_ignores_stop_order(
    (stops, shuffled) in network_stops().prop_flat_map(|s| (Just(s.clone()), Just(s).prop_shuffle())),
    min_points in 2usize..6,
) {
    let a = cluster_hubs(&stops, HUB_EPSILON_RAD, min_points).unwrap();
    let b = cluster_hubs(&shuffled, HUB_EPSILON_RAD, min_points).unwrap();
    prop_assert_eq!(&a, &b);
    // Every stop is in exactly one hub or in the noise set.
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for m in a.hubs.iter().flat_map(|h| h.members.iter()).chain(a.noise.iter()) {
        *seen.entry(m.as_str()).or_default() += 1;
    }
    prop_assert_eq!(seen.len(), stops.len());
    prop_assert!(seen.values().all(|&n| n == 1));
});

property!(intra_hub_proportion_is_a_fraction(stops in network_stops(), picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..200)) {
    let clustering = cluster_hubs(&stops, HUB_EPSILON_RAD, 4).unwrap();
    let events: Vec<TransferEvent> = picks
        .iter()
        .map(|(a, b)| TransferEvent {
            chain_id: "c".into(),
            alight: stops[a.index(stops.len())].clone(),
            board: stops[b.index(stops.len())].clone(),
            alight_time: 0,
            board_time: 60,
            from_mode: mobsense_core::Mode::Bus,
            to_mode: mobsense_core::Mode::Tram,
            intervening_legs: 1,
        })
        .collect();
    let all = intra_hub_proportions(&clustering, &events);
    for h in &clustering.hubs {
        let p = intra_hub_proportion(h, &events);
        prop_assert_eq!(p, all[h.hub_id]);
        if let Some(p) = p {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
});
