//! Repair of spurious PT legs.
//!
//! Beacon sensing sometimes splits one ride into several legs on the same
//! vehicle, with other legs recorded in between. Successive PT legs of a chain
//! that share a vehicle id are merged, together with every leg between them,
//! into a single PT leg.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Itinerary, Leg, PtLeg, Timestamp, TripChain};

/// One merge performed on a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeEvent {
    /// Indices into the input chain of every absorbed leg, ascending.
    pub merged_from: Vec<usize>,
    /// Index of the merged leg in the output chain.
    pub result_index: usize,
    /// Largest gap between successive same-vehicle PT legs in the run.
    pub max_gap_s: Timestamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub chain: TripChain,
    pub events: Vec<MergeEvent>,
}

impl MergeOutcome {
    pub fn merge_count(&self) -> usize {
        self.events.len()
    }
}

/// Maximal runs of successive PT legs (in PT order) sharing a vehicle id, as
/// (first, last) positions in the chain. Only runs with at least two PT legs.
fn same_vehicle_runs(legs: &[Leg]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut current: Option<(usize, usize, &str)> = None;
    for (i, leg) in legs.iter().enumerate() {
        let Leg::Pt(pt) = leg else { continue };
        match current {
            Some((first, _, vehicle)) if vehicle == pt.vehicle_id => {
                current = Some((first, i, vehicle));
            }
            _ => {
                if let Some((first, last, _)) = current {
                    if last > first {
                        runs.push((first, last));
                    }
                }
                current = Some((i, i, pt.vehicle_id.as_str()));
            }
        }
    }
    if let Some((first, last, _)) = current {
        if last > first {
            runs.push((first, last));
        }
    }
    runs
}

fn merge_run(legs: &[Leg], first: usize, last: usize) -> (PtLeg, Timestamp) {
    let pts: Vec<&PtLeg> = legs[first..=last].iter().filter_map(Leg::as_pt).collect();
    let head = pts[0];
    let tail = pts[pts.len() - 1];
    let max_gap = pts
        .windows(2)
        .map(|w| w[1].start_time - w[0].end_time)
        .max()
        .unwrap_or(0);
    let mut merged = PtLeg {
        start_time: pts.iter().map(|l| l.start_time).min().unwrap_or(head.start_time),
        end_time: pts.iter().map(|l| l.end_time).max().unwrap_or(tail.end_time),
        board: head.board.clone(),
        alight: tail.alight.clone(),
        mode: head.mode,
        line_id: head.line_id.clone(),
        direction: head.direction.clone(),
        vehicle_id: head.vehicle_id.clone(),
        merged_from: (first..=last).collect(),
        circular: false,
    };
    merged.circular = merged.board.id == merged.alight.id;
    (merged, max_gap)
}

/// Merges every maximal same-vehicle run of successive PT legs, together with
/// the legs between them, into one PT leg.
///
/// Times of the merged leg span the PT legs of the run; boarding comes from
/// the earliest and alighting from the latest PT leg. Chains with fewer than
/// two PT legs come back unchanged. Applying the function twice gives the same
/// chain as applying it once.
pub fn merge_spurious_legs(chain: &TripChain) -> MergeOutcome {
    let runs = same_vehicle_runs(&chain.legs);
    if runs.is_empty() {
        return MergeOutcome {
            chain: chain.clone(),
            events: Vec::new(),
        };
    }
    let mut legs = Vec::with_capacity(chain.legs.len());
    let mut events = Vec::with_capacity(runs.len());
    let mut next = 0;
    for (first, last) in runs {
        legs.extend_from_slice(&chain.legs[next..first]);
        let (merged, max_gap_s) = merge_run(&chain.legs, first, last);
        events.push(MergeEvent {
            merged_from: merged.merged_from.clone(),
            result_index: legs.len(),
            max_gap_s,
        });
        legs.push(Leg::Pt(merged));
        next = last + 1;
    }
    legs.extend_from_slice(&chain.legs[next..]);
    MergeOutcome {
        chain: TripChain {
            chain_id: chain.chain_id.clone(),
            legs,
        },
        events,
    }
}

/// A merge applied to one chain of one itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeAuditRow {
    pub itinerary: usize,
    pub chain_id: alloc::string::String,
    pub event: MergeEvent,
}

/// Itineraries after merging, with the merge audit and the counts behind the
/// spurious-leg rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanedDataset {
    pub itineraries: Vec<Itinerary>,
    pub audit: Vec<MergeAuditRow>,
    pub pt_chains: usize,
    pub merged_chains: usize,
}

impl CleanedDataset {
    pub fn spurious_rate(&self) -> Result<f64> {
        if self.pt_chains == 0 {
            return Err(Error::NoPtChains);
        }
        Ok(self.merged_chains as f64 / self.pt_chains as f64)
    }
}

/// Result of cleaning one itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanedItinerary {
    pub itinerary: Itinerary,
    pub audit: Vec<(alloc::string::String, MergeEvent)>,
    pub pt_chains: usize,
    pub merged_chains: usize,
}

pub fn clean_itinerary(itinerary: &Itinerary) -> CleanedItinerary {
    let mut chains = Vec::with_capacity(itinerary.chains.len());
    let mut audit = Vec::new();
    let (mut pt_chains, mut merged_chains) = (0, 0);
    for chain in &itinerary.chains {
        if chain.has_pt() {
            pt_chains += 1;
        }
        let outcome = merge_spurious_legs(chain);
        if outcome.merge_count() > 0 {
            merged_chains += 1;
        }
        audit.extend(outcome.events.into_iter().map(|e| (chain.chain_id.clone(), e)));
        chains.push(outcome.chain);
    }
    CleanedItinerary {
        itinerary: Itinerary {
            device_id: itinerary.device_id.clone(),
            day: itinerary.day,
            chains,
        },
        audit,
        pt_chains,
        merged_chains,
    }
}

/// Cleans every chain of every itinerary.
pub fn clean_dataset(itineraries: &[Itinerary]) -> CleanedDataset {
    assemble(itineraries.iter().map(clean_itinerary))
}

/// Combines per-itinerary results, in itinerary order.
pub fn assemble(parts: impl IntoIterator<Item = CleanedItinerary>) -> CleanedDataset {
    let mut out = CleanedDataset {
        itineraries: Vec::new(),
        audit: Vec::new(),
        pt_chains: 0,
        merged_chains: 0,
    };
    for (idx, part) in parts.into_iter().enumerate() {
        out.itineraries.push(part.itinerary);
        out.audit
            .extend(part.audit.into_iter().map(|(chain_id, event)| MergeAuditRow {
                itinerary: idx,
                chain_id,
                event,
            }));
        out.pt_chains += part.pt_chains;
        out.merged_chains += part.merged_chains;
    }
    out
}

/// Fraction of chains with at least one PT leg that needed a merge.
pub fn spurious_rate(itineraries: &[Itinerary]) -> Result<f64> {
    let (mut pt_chains, mut merged) = (0usize, 0usize);
    for chain in itineraries.iter().flat_map(|it| it.chains.iter()) {
        if chain.has_pt() {
            pt_chains += 1;
            if !same_vehicle_runs(&chain.legs).is_empty() {
                merged += 1;
            }
        }
    }
    if pt_chains == 0 {
        return Err(Error::NoPtChains);
    }
    Ok(merged as f64 / pt_chains as f64)
}
