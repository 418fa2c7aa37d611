//! DBSCAN over PT stops with great-circle distances.
//!
//! Stops are processed in stop-id order, which makes the result independent of
//! input order. A border stop reachable from several clusters joins the cluster
//! of its core neighbour with the lowest stop id.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{central_angle, valid_wgs84};
use crate::model::StopRef;

/// Roughly 80 m on the Earth's surface.
pub const HUB_EPSILON_RAD: f64 = 1.255e-5;
pub const HUB_MIN_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubCluster {
    pub hub_id: usize,
    /// Member stop ids, sorted.
    pub members: Vec<String>,
    /// Mean (lat, lon) of the members.
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubClustering {
    /// Ordered by lowest member id; `hub_id` is the position.
    pub hubs: Vec<HubCluster>,
    /// Stops in no hub, sorted.
    pub noise: Vec<String>,
}

fn check_params(epsilon: f64, min_points: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    if min_points < 2 {
        return Err(Error::param("min_points", "must be at least 2"));
    }
    Ok(())
}

/// Validates stops and returns them sorted by id.
pub fn prepare_stops(stops: &[StopRef]) -> Result<Vec<StopRef>> {
    let mut sorted = stops.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for w in sorted.windows(2) {
        if w[0].id == w[1].id {
            return Err(Error::DuplicateStopId(w[0].id.clone()));
        }
    }
    if let Some(bad) = sorted.iter().find(|s| !valid_wgs84(s.lat, s.lon)) {
        return Err(Error::InvalidCoordinates(bad.id.clone()));
    }
    Ok(sorted)
}

/// Latitude-sorted index for epsilon-neighbourhood queries. The central angle
/// between two points is at least their latitude difference, so only a
/// latitude window needs to be scanned.
pub struct NeighborIndex<'a> {
    stops: &'a [StopRef],
    by_lat: Vec<usize>,
    lats: Vec<f64>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(stops: &'a [StopRef]) -> Self {
        let mut by_lat: Vec<usize> = (0..stops.len()).collect();
        by_lat.sort_by(|&a, &b| stops[a].lat.total_cmp(&stops[b].lat).then(a.cmp(&b)));
        let lats = by_lat.iter().map(|&i| stops[i].lat).collect();
        NeighborIndex { stops, by_lat, lats }
    }

    /// Indices within `epsilon` radians of stop `i`, itself included, ascending.
    pub fn neighbors(&self, i: usize, epsilon: f64) -> Vec<usize> {
        let p = &self.stops[i];
        let window = epsilon.to_degrees() * (1.0 + 1e-9);
        let lo = self.lats.partition_point(|&l| l < p.lat - window);
        let hi = self.lats.partition_point(|&l| l <= p.lat + window);
        let mut out: Vec<usize> = self.by_lat[lo..hi]
            .iter()
            .copied()
            .filter(|&j| {
                let q = &self.stops[j];
                central_angle(p.lat, p.lon, q.lat, q.lon) <= epsilon
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Neighbour lists of every stop, serially.
pub fn neighbor_lists(stops: &[StopRef], epsilon: f64) -> Vec<Vec<usize>> {
    let index = NeighborIndex::new(stops);
    (0..stops.len()).map(|i| index.neighbors(i, epsilon)).collect()
}

/// DBSCAN labelling from precomputed neighbour lists over id-sorted stops.
pub fn cluster_with_neighbors(stops: &[StopRef], neighbors: &[Vec<usize>], min_points: usize) -> HubClustering {
    let n = stops.len();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_points).collect();
    let mut label: Vec<Option<usize>> = alloc::vec![None; n];
    let mut clusters = 0;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || label[seed].is_some() {
            continue;
        }
        label[seed] = Some(clusters);
        stack.push(seed);
        while let Some(p) = stack.pop() {
            for &q in &neighbors[p] {
                if core[q] && label[q].is_none() {
                    label[q] = Some(clusters);
                    stack.push(q);
                }
            }
        }
        clusters += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        // neighbour lists are ascending, so the first core neighbour has the lowest id
        label[i] = neighbors[i].iter().find(|&&j| core[j]).and_then(|&j| label[j]);
    }

    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); clusters];
    let mut noise = Vec::new();
    for (i, l) in label.iter().enumerate() {
        match l {
            Some(c) => members[*c].push(i),
            None => noise.push(stops[i].id.clone()),
        }
    }
    let hubs = members
        .into_iter()
        .enumerate()
        .map(|(hub_id, idx)| {
            let k = idx.len() as f64;
            let lat = idx.iter().map(|&i| stops[i].lat).sum::<f64>() / k;
            let lon = idx.iter().map(|&i| stops[i].lon).sum::<f64>() / k;
            HubCluster {
                hub_id,
                members: idx.iter().map(|&i| stops[i].id.clone()).collect(),
                centroid: (lat, lon),
            }
        })
        .collect();
    HubClustering { hubs, noise }
}

/// Clusters stops into hubs. A core stop has at least `min_points` stops,
/// itself included, within `epsilon` radians of central angle.
pub fn cluster_hubs(stops: &[StopRef], epsilon: f64, min_points: usize) -> Result<HubClustering> {
    check_params(epsilon, min_points)?;
    let sorted = prepare_stops(stops)?;
    let neighbors = neighbor_lists(&sorted, epsilon);
    Ok(cluster_with_neighbors(&sorted, &neighbors, min_points))
}

/// Parameter checks shared with parallel drivers.
pub fn validate_params(epsilon: f64, min_points: usize) -> Result<()> {
    check_params(epsilon, min_points)
}
