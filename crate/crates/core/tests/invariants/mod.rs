//! Every invariant of the library as a randomized property over
//! [`CASES`](super::common::CASES) cases.
//!
//! Properties are plain functions so that both the per-module test targets
//! and the acceptance report can run them.

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub mod cleaning;
pub mod demand;
pub mod ingest;
pub mod model;
pub mod od;
pub mod synth;
pub mod transfer;

/// Runs `test` on [`CASES`](super::common::CASES) random inputs drawn from
/// `strategy`, shrinking on failure.
pub fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases: super::common::CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config).run(&strategy, test).map_err(|e| e.to_string())
}

/// Defines `pub fn $name() -> Result<(), String>` checking `$body` over the
/// listed strategies.
macro_rules! property {
    ($(#[$doc:meta])* $name:ident($($pat:pat in $strat:expr),+ $(,)?) $body:block) => {
        $(#[$doc])*
        pub fn $name() -> Result<(), String> {
            $crate::invariants::check(($($strat,)+), |($($pat,)+)| {
                $body
                Ok(())
            })
        }
    };
}
pub(crate) use property;

pub type Property = (&'static str, &'static str, fn() -> Result<(), String>);

/// (module, invariant, check) for every invariant.
pub const ALL: &[Property] = &[
    (
        "core_model",
        "mode_category is total and deterministic",
        model::mode_category_is_total_and_deterministic,
    ),
    (
        "core_model",
        "Leg serialization round-trips",
        model::leg_serde_round_trips,
    ),
    (
        "core_model",
        "well-formed legs and chains satisfy type invariants",
        model::well_formed_legs_validate_clean,
    ),
    (
        "core_model",
        "off-quarter private times are reported",
        model::off_quarter_private_times_are_reported,
    ),
    (
        "ingest",
        "collate is independent of input order",
        ingest::collate_ignores_input_order,
    ),
    (
        "ingest",
        "records = collated legs + duplicates",
        ingest::records_are_conserved,
    ),
    (
        "ingest",
        "collate reconstructs itineraries",
        ingest::collate_reconstructs_itineraries,
    ),
    (
        "cleaning",
        "merging preserves chain span",
        cleaning::merging_preserves_chain_span,
    ),
    (
        "cleaning",
        "leg count never increases; drop matches absorbed legs",
        cleaning::each_merge_removes_legs,
    ),
    ("cleaning", "merging is idempotent", cleaning::merging_is_idempotent),
    (
        "cleaning",
        "merging recovers ground-truth PT legs",
        cleaning::cleaning_recovers_ground_truth,
    ),
    (
        "synthgen",
        "generator is deterministic",
        synth::generator_is_deterministic,
    ),
    (
        "synthgen",
        "obfuscation error below 900 s",
        synth::obfuscation_error_is_below_a_quarter_hour,
    ),
    (
        "synthgen",
        "probabilities outside [0,1] are rejected",
        synth::probabilities_outside_unit_interval_are_rejected,
    ),
    ("synthgen", "network lines and extent", synth::network_lines_and_extent),
    (
        "synthgen",
        "generated data meets type invariants",
        synth::generated_data_meets_type_invariants,
    ),
    (
        "demand_analytics",
        "coverage in [0,100] and monotone",
        demand::coverage_is_a_monotone_percentage,
    ),
    (
        "demand_analytics",
        "power-law fit is scale covariant",
        demand::power_law_is_scale_covariant,
    ),
    (
        "demand_analytics",
        "pearson symmetric and affine invariant",
        demand::pearson_symmetric_and_affine_invariant,
    ),
    (
        "demand_analytics",
        "mode shares sum to 100, legs counted once",
        demand::mode_shares_sum_to_100_and_count_each_leg_once,
    ),
    (
        "demand_analytics",
        "hourly bins sum to filtered legs",
        demand::hourly_bins_sum_to_filtered_legs,
    ),
    ("od_validation", "OD flows are conserved", od::flows_are_conserved),
    (
        "od_validation",
        "regress_od(X, X) is the identity",
        od::regression_on_itself_is_identity,
    ),
    (
        "od_validation",
        "aggregation is independent of leg order",
        od::aggregation_ignores_leg_order,
    ),
    (
        "transfer_analytics",
        "transfer count law per chain",
        transfer::transfer_count_law,
    ),
    (
        "transfer_analytics",
        "transfer law and matrix on generated data",
        transfer::transfer_law_and_matrix_on_generated_data,
    ),
    (
        "transfer_analytics",
        "DBSCAN independent of stop order; one membership",
        transfer::dbscan_ignores_stop_order,
    ),
    (
        "transfer_analytics",
        "intra-hub proportion in [0,1]",
        transfer::intra_hub_proportion_is_a_fraction,
    ),
];
