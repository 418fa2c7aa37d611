//! Command-line invariants over random seeds: manifest record accounting and
//! reproducible outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use mobsense::{run, Command, PipelineConfig};
use proptest::prelude::*;
use serde_json::Value;

use crate::invariants::property;

fn config(out: &Path, seed: u64, p_spurious: f64, p_conjoined: f64) -> PipelineConfig {
    PipelineConfig {
        out_dir: out.to_path_buf(),
        seed,
        devices: 8,
        days: 3,
        stop_count: 80,
        hub_count: 3,
        line_count: 6,
        p_spurious,
        p_conjoined,
        workers: 2,
        ..PipelineConfig::default()
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let name = e.file_name().to_string_lossy().into_owned();
            let mut bytes = fs::read(e.path()).unwrap();
            if name == "manifest.json" {
                let mut v: Value = serde_json::from_slice(&bytes).unwrap();
                // Timings vary, and the worker count must not matter.
                v.as_object_mut().unwrap().remove("timings_ms");
                v["config"].as_object_mut().unwrap().remove("workers");
                bytes = serde_json::to_vec(&v).unwrap();
            }
            (name, bytes)
        })
        .collect()
}

property!(manifest_counts_balance(
    seed in any::<u64>(),
    extra in prop::collection::vec((any::<prop::sample::Index>(), any::<bool>()), 0..10),
) {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    run(Command::Synth, &config(&data, seed, 0.1, 0.0)).unwrap();
    // Duplicate some records and add garbage lines.
    let legs = data.join("legs.jsonl");
    let text = fs::read_to_string(&legs).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut out = text.clone();
    for (i, garbage) in &extra {
        if *garbage {
            out.push_str("{\"mode\": \"teleport\"}\n");
        } else {
            out.push_str(lines[i.index(lines.len())]);
            out.push('\n');
        }
    }
    fs::write(&legs, out).unwrap();

    let cfg = PipelineConfig { legs: Some(legs), ..config(&tmp.path().join("ingest"), seed, 0.0, 0.0) };
    let m = run(Command::Ingest, &cfg).unwrap();
    let c = |k: &str| m.counts[k];
    prop_assert_eq!(c("ingest.lines"), c("ingest.collated_legs") + c("ingest.duplicates") + c("ingest.parse_errors"));
    prop_assert_eq!(c("ingest.parse_errors"), extra.iter().filter(|e| e.1).count() as u64);
    prop_assert_eq!(c("ingest.duplicates"), extra.iter().filter(|e| !e.1).count() as u64);
});

property!(reruns_reproduce_outputs(seed in any::<u64>(), p in 0.0f64..0.5, q in 0.0f64..0.5) {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("all");
    let cfg = config(&dir, seed, p, q);
    run(Command::All { synth: true }, &cfg).unwrap();
    let first = snapshot(&dir);
    fs::remove_dir_all(&dir).unwrap();
    run(Command::All { synth: true }, &PipelineConfig { workers: 1, ..cfg }).unwrap();
    prop_assert!(first == snapshot(&dir), "outputs differ between runs");
});

pub const ALL: &[crate::invariants::Property] = &[
    (
        "cli",
        "parsed lines = collated legs + duplicates + parse errors",
        manifest_counts_balance,
    ),
    (
        "cli",
        "re-running reproduces identical outputs",
        reruns_reproduce_outputs,
    ),
];
