//! Randomized invariant checks, one test per module.

mod common;
mod invariants;

fn run_module(module: &str) {
    let mut failures = Vec::new();
    let props = invariants::ALL.iter().filter(|(m, _, _)| *m == module);
    for (_, name, check) in props {
        if let Err(e) = check() {
            failures.push(format!("{name}: {e}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn core_model() {
    run_module("core_model");
}

#[test]
fn ingest() {
    run_module("ingest");
}

#[test]
fn cleaning() {
    run_module("cleaning");
}

#[test]
fn synthgen() {
    run_module("synthgen");
}

#[test]
fn demand_analytics() {
    run_module("demand_analytics");
}

#[test]
fn od_validation() {
    run_module("od_validation");
}

#[test]
fn transfer_analytics() {
    run_module("transfer_analytics");
}
