//! Generator properties: determinism, the obfuscation bound, configuration
//! checks, and the type invariants of generated data.

use crate::common::*;
use mobsense_core::ingest::collate_itineraries;
use mobsense_core::model::validate_leg;
use mobsense_core::synth::{generate_network, synthesize, Obfuscation, SynthConfig};
use mobsense_core::Leg;
use proptest::prelude::*;

use super::property;

fn obfuscation() -> impl Strategy<Value = Obfuscation> {
    prop_oneof![Just(Obfuscation::Random), Just(Obfuscation::Nearest)]
}

property!(generator_is_deterministic(seed in any::<u64>(), p in 0.0f64..=1.0) {
    let config = SynthConfig { p_conjoined: 0.2, p_boarding_shift: 0.2, ..small_synth(seed, p) };
    let a = synthesize(&config).unwrap();
    let b = synthesize(&config).unwrap();
    let rows = |o: &mobsense_core::synth::SynthOutput| {
        o.sensed.records.iter().map(|r| serde_json::to_string(&r.to_row()).unwrap()).collect::<Vec<_>>()
    };
    prop_assert_eq!(rows(&a), rows(&b));
    prop_assert_eq!(a, b);
});

property!(obfuscation_error_is_below_a_quarter_hour(seed in any::<u64>(), mode in obfuscation()) {
    let config = SynthConfig { obfuscation: mode, ..small_synth(seed, 0.0) };
    let out = synthesize(&config).unwrap();
    let sensed = collate_itineraries(out.sensed.records).into_itineraries();
    let mut truth = out.truth.clone();
    truth.sort_by(|a, b| (&a.device_id, a.day).cmp(&(&b.device_id, b.day)));
    prop_assert_eq!(sensed.len(), truth.len());
    for (s, t) in sensed.iter().zip(&truth) {
        prop_assert_eq!(s.leg_count(), t.leg_count());
        for (ls, lt) in s.legs().zip(t.legs()) {
            if let (Leg::Private(a), Leg::Private(b)) = (ls, lt) {
                for (x, y) in [(a.start_time, b.start_time), (a.end_time, b.end_time)] {
                    prop_assert_eq!(x.rem_euclid(900), 0);
                    prop_assert!((x - y).abs() < 900, "sensed {} truth {}", x, y);
                }
            } else {
                prop_assert_eq!(ls, lt);
            }
        }
    }
});

property!(probabilities_outside_unit_interval_are_rejected(p in prop_oneof![-10.0f64..-1e-9, 1.0f64 + 1e-9..10.0]) {
    for c in [
        SynthConfig { p_spurious: p, ..SynthConfig::default() },
        SynthConfig { p_conjoined: p, ..SynthConfig::default() },
        SynthConfig { p_boarding_shift: p, ..SynthConfig::default() },
        SynthConfig { transfer_probability: p, ..SynthConfig::default() },
    ] {
        prop_assert!(c.validate().is_err());
        prop_assert!(synthesize(&c).is_err());
    }
});

property!(network_lines_and_extent(seed in any::<u64>(), stops in 2usize..120, lines in 1usize..10) {
    let config = SynthConfig { seed, stops, lines, hubs: 3, ..SynthConfig::default() };
    let net = generate_network(&config).unwrap();
    prop_assert_eq!(&net, &generate_network(&config).unwrap());
    prop_assert_eq!(net.stops.len(), stops);
    for line in &net.lines {
        prop_assert!(line.stops.len() >= 2);
        prop_assert!(line.mode.is_pt());
    }
    let e = config.extent;
    for s in &net.stops {
        prop_assert!((e.min_lat..=e.max_lat).contains(&s.lat) && (e.min_lon..=e.max_lon).contains(&s.lon));
    }
});

property!(generated_data_meets_type_invariants(seed in any::<u64>(), p in 0.0f64..=1.0) {
    let out = synthesize(&small_synth(seed, p)).unwrap();
    for it in &out.truth {
        for c in &it.chains {
            prop_assert!(!c.legs.is_empty());
            prop_assert!(c.is_time_ordered());
        }
        for w in it.chains.windows(2) {
            prop_assert!(w[0].end_time() <= w[1].start_time());
        }
    }
    for r in &out.sensed.records {
        prop_assert!(validate_leg(&r.leg).is_empty(), "{:?}", r);
    }
    let sensed = collate_itineraries(out.sensed.records);
    prop_assert!(sensed.defects.is_empty(), "{:?}", sensed.defects);
});
