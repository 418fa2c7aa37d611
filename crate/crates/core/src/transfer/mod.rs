//! PT transfers: detection, the intermodal transfer matrix, stop hubs and the
//! density of transfer boardings.
//!
//! A transfer is any pair of successive PT legs in one chain, whatever other
//! legs lie between them. Chains should be cleaned first, since spurious
//! same-vehicle splits would otherwise count as transfers.

mod dbscan;
mod kde;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Leg, Mode, PtLeg, StopRef, Timestamp, TripChain};

pub use dbscan::{
    cluster_hubs, cluster_with_neighbors, neighbor_lists, prepare_stops, validate_params, HubCluster, HubClustering,
    NeighborIndex, HUB_EPSILON_RAD, HUB_MIN_POINTS,
};
pub use kde::{kde_raster, kde_rows, transfer_kde, transfer_points, DensityRaster, RasterSpec, DEFAULT_BANDWIDTH_M};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEvent {
    pub chain_id: String,
    pub alight: StopRef,
    pub board: StopRef,
    pub alight_time: Timestamp,
    pub board_time: Timestamp,
    pub from_mode: Mode,
    pub to_mode: Mode,
    /// Non-PT legs between the two PT legs.
    pub intervening_legs: usize,
}

/// One event per pair of successive PT legs; `k` PT legs give `k - 1` events.
pub fn detect_transfers(chain: &TripChain) -> Vec<TransferEvent> {
    let mut events = Vec::new();
    let mut prev: Option<(usize, &PtLeg)> = None;
    for (i, leg) in chain.legs.iter().enumerate() {
        let Leg::Pt(pt) = leg else { continue };
        if let Some((j, from)) = prev {
            events.push(TransferEvent {
                chain_id: chain.chain_id.clone(),
                alight: from.alight.clone(),
                board: pt.board.clone(),
                alight_time: from.end_time,
                board_time: pt.start_time,
                from_mode: from.mode,
                to_mode: pt.mode,
                intervening_legs: i - j - 1,
            });
        }
        prev = Some((i, pt));
    }
    events
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub counts: BTreeMap<(Mode, Mode), u64>,
    pub total: u64,
}

impl TransferMatrix {
    pub fn proportion(&self, from: Mode, to: Mode) -> f64 {
        self.counts.get(&(from, to)).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn proportions(&self) -> BTreeMap<(Mode, Mode), f64> {
        self.counts
            .iter()
            .map(|(&k, &n)| (k, n as f64 / self.total as f64))
            .collect()
    }
}

pub fn transfer_matrix<'a>(events: impl IntoIterator<Item = &'a TransferEvent>) -> Result<TransferMatrix> {
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for e in events {
        *counts.entry((e.from_mode, e.to_mode)).or_insert(0) += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Empty("no transfer events"));
    }
    Ok(TransferMatrix { counts, total })
}

/// Share of hub-touching transfers that both alight and board inside the hub.
/// `None` when no transfer touches the hub.
pub fn intra_hub_proportion<'a>(hub: &HubCluster, events: impl IntoIterator<Item = &'a TransferEvent>) -> Option<f64> {
    let members: BTreeSet<&str> = hub.members.iter().map(String::as_str).collect();
    let (mut inside, mut touching) = (0u64, 0u64);
    for e in events {
        let a = members.contains(e.alight.id.as_str());
        let b = members.contains(e.board.id.as_str());
        if a || b {
            touching += 1;
        }
        if a && b {
            inside += 1;
        }
    }
    (touching > 0).then(|| inside as f64 / touching as f64)
}

/// Intra-hub proportions of every hub in one pass over the events.
pub fn intra_hub_proportions(clustering: &HubClustering, events: &[TransferEvent]) -> Vec<Option<f64>> {
    let mut hub_of: BTreeMap<&str, usize> = BTreeMap::new();
    for hub in &clustering.hubs {
        for m in &hub.members {
            hub_of.insert(m.as_str(), hub.hub_id);
        }
    }
    let mut inside = alloc::vec![0u64; clustering.hubs.len()];
    let mut touching = alloc::vec![0u64; clustering.hubs.len()];
    for e in events {
        let a = hub_of.get(e.alight.id.as_str()).copied();
        let b = hub_of.get(e.board.id.as_str()).copied();
        if let Some(h) = a {
            touching[h] += 1;
        }
        if let Some(h) = b {
            if a != Some(h) {
                touching[h] += 1;
            }
        }
        if let (Some(x), Some(y)) = (a, b) {
            if x == y {
                inside[x] += 1;
            }
        }
    }
    inside
        .iter()
        .zip(&touching)
        .map(|(&i, &t)| (t > 0).then(|| i as f64 / t as f64))
        .collect()
}
