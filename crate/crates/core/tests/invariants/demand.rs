//! Demand analytics properties: coverage, power-law scale covariance, Pearson
//! symmetry and affine invariance, mode shares and hourly totals.

use std::collections::BTreeMap;

use crate::common::*;
use mobsense_core::demand::{
    coverage, fit_power_law_histogram, grid_leg_counts, hourly_profile, mode_share_chains, mode_share_legs, pearson,
    HourlyProfile, ModeGroup,
};
use mobsense_core::{stats, DayType, Itinerary, ReportGroup};
use proptest::prelude::*;

use super::property;

fn group() -> impl Strategy<Value = ModeGroup> {
    prop::sample::select(ModeGroup::ALL.to_vec())
}

fn day_type() -> impl Strategy<Value = DayType> {
    prop::sample::select(DayType::ALL.to_vec())
}

/// A count-frequency histogram with at least three distinct count values.
fn histogram() -> impl Strategy<Value = BTreeMap<u64, u64>> {
    prop::collection::btree_map(1u64..500, 1u64..10_000, 3..30)
}

fn bins() -> impl Strategy<Value = [u64; 24]> {
    prop::array::uniform24(0u64..1000)
}

fn profile(bins: [u64; 24]) -> HourlyProfile {
    HourlyProfile {
        group: ModeGroup::Total,
        day_type: DayType::Weekday,
        bins,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

property!(coverage_is_a_monotone_percentage(its in itineraries(), more in itineraries(), g in group()) {
    let zones = zones();
    let legs: Vec<_> = its.iter().flat_map(Itinerary::legs).collect();
    let before = grid_leg_counts(legs.iter().copied(), g, &zones);
    let c0 = coverage(&before).unwrap();
    prop_assert!((0.0..=100.0).contains(&c0));
    let after = grid_leg_counts(legs.iter().copied().chain(more.iter().flat_map(Itinerary::legs)), g, &zones);
    let c1 = coverage(&after).unwrap();
    prop_assert!((0.0..=100.0).contains(&c1));
    prop_assert!(c1 >= c0);
    prop_assert!(before.counts.values().all(|&n| n >= 1));
    prop_assert!(after.total_cells >= after.counts.len());
});

property!(power_law_is_scale_covariant(freq in histogram(), k in 2u64..1000) {
    let fit = fit_power_law_histogram(&freq).unwrap();
    let scaled: BTreeMap<u64, u64> = freq.iter().map(|(&n, &f)| (n, f * k)).collect();
    let fit_k = fit_power_law_histogram(&scaled).unwrap();
    prop_assert!(close(fit.alpha, fit_k.alpha, 1e-9), "{} vs {}", fit.alpha, fit_k.alpha);
    prop_assert!(close(fit.r_squared, fit_k.r_squared, 1e-9));
    prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    prop_assert!(fit.support >= 3);
});

property!(pearson_symmetric_and_affine_invariant(a in bins(), b in bins(), scale in 1u64..50, shift in 0u64..1000) {
    let (pa, pb) = (profile(a), profile(b));
    match (pearson(&pa, &pb), pearson(&pb, &pa)) {
        (Ok(r), Ok(s)) => {
            prop_assert_eq!(r.to_bits(), s.to_bits());
            prop_assert!((-1.0..=1.0).contains(&r));
            let t = profile(a.map(|x| scale * x + shift));
            prop_assert!(close(pearson(&t, &pb).unwrap(), r, 1e-9));
            // Non-integer transforms on the raw series as well.
            let xs = pa.as_f64().map(|x| 0.37 * x - 12.5);
            prop_assert!(close(stats::pearson(&xs, &pb.as_f64()).unwrap(), r, 1e-9));
        }
        (Err(_), Err(_)) => {}
        (x, y) => prop_assert!(false, "asymmetric outcome {:?} {:?}", x, y),
    }
});

property!(mode_shares_sum_to_100_and_count_each_leg_once(its in itineraries()) {
    let legs = mode_share_legs(&its).unwrap();
    let n_legs: usize = its.iter().map(Itinerary::leg_count).sum();
    prop_assert_eq!(legs.total as usize, n_legs);
    prop_assert!((legs.percent.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    let chains = mode_share_chains(&its).unwrap();
    let n_chains: usize = its.iter().map(|it| it.chains.len()).sum();
    prop_assert_eq!(chains.total as usize, n_chains);
    prop_assert!((chains.percent.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    for g in ReportGroup::ALL {
        prop_assert!(legs.get(g) >= 0.0 && chains.get(g) >= 0.0);
    }
});

property!(hourly_bins_sum_to_filtered_legs(its in itineraries(), g in group(), dt in day_type(), offset in -12i64..14) {
    let p = hourly_profile(&its, g, dt, offset * 3600);
    let expected = its
        .iter()
        .filter(|it| it.day.day_type() == dt)
        .flat_map(Itinerary::legs)
        .filter(|l| g.contains(l.mode()))
        .count();
    prop_assert_eq!(p.bins.len(), 24);
    prop_assert_eq!(p.total() as usize, expected);
});
