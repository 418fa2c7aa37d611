use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{label, stream_rng, SynthConfig};
use crate::error::{Error, Result};
use crate::geo::GridSpec;
use crate::model::{Mode, StopRef};

const NETWORK_SALT: u64 = 0x4E45_5457_4F52_4B00;

/// A PT line: an ordered sequence of distinct stops served by one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub mode: Mode,
    /// Indices into [`Network::stops`].
    pub stops: Vec<usize>,
}

impl Line {
    pub fn position(&self, stop: usize) -> Option<usize> {
        self.stops.iter().position(|&s| s == stop)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub stops: Vec<StopRef>,
    pub lines: Vec<Line>,
    /// Planted hub centres, WGS84 (lat, lon).
    pub hub_centers: Vec<(f64, f64)>,
    /// Planar coordinates of every stop in the configured grid.
    pub stop_xy: Vec<(f64, f64)>,
    stop_index: BTreeMap<String, usize>,
    line_index: BTreeMap<String, usize>,
}

impl Network {
    pub fn new(stops: Vec<StopRef>, lines: Vec<Line>, hub_centers: Vec<(f64, f64)>, grid: &GridSpec) -> Self {
        let stop_xy = stops.iter().map(|s| grid.project(s.lat, s.lon)).collect();
        let stop_index = stops.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        let line_index = lines.iter().enumerate().map(|(i, l)| (l.id.clone(), i)).collect();
        Network {
            stops,
            lines,
            hub_centers,
            stop_xy,
            stop_index,
            line_index,
        }
    }

    pub fn stop(&self, id: &str) -> Option<usize> {
        self.stop_index.get(id).copied()
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.line_index.get(id).map(|&i| &self.lines[i])
    }
}

fn line_modes(config: &SynthConfig) -> Vec<Mode> {
    let weighted: Vec<Mode> = Mode::PT
        .iter()
        .copied()
        .filter(|&m| config.mode_weights.get(m) > 0.0)
        .collect();
    if weighted.is_empty() {
        alloc::vec![Mode::Bus, Mode::Tram, Mode::Subway, Mode::Train]
    } else {
        weighted
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1)
}

/// Stops (uniform, plus clusters around planted hub centres) and lines built as
/// randomized nearest-neighbour walks over the stops.
///
/// Hub stops lie within `hub_radius_m` of their centre, so with a radius under
/// half the clustering distance every pair of stops of a hub is within it.
pub fn generate_network(config: &SynthConfig) -> Result<Network> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, NETWORK_SALT, 0);
    let grid = &config.grid;
    let (x0, y0, x1, y1) = config.planar_bounds();
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::DegenerateExtent);
    }

    let margin_x = (x1 - x0) * 0.05;
    let margin_y = (y1 - y0) * 0.05;
    let centers_xy: Vec<(f64, f64)> = (0..config.hubs)
        .map(|_| {
            (
                rng.random_range(x0 + margin_x..=x1 - margin_x),
                rng.random_range(y0 + margin_y..=y1 - margin_y),
            )
        })
        .collect();
    let hub_stops = if config.hubs == 0 {
        0
    } else {
        libm::round(config.stops as f64 * config.hub_fraction) as usize
    };

    let width = if config.stops < 100_000 { 5 } else { 7 };
    let mut stops = Vec::with_capacity(config.stops);
    for i in 0..config.stops {
        let (x, y) = if i < hub_stops {
            let (cx, cy) = centers_xy[i % config.hubs];
            let r = config.hub_radius_m * libm::sqrt(rng.random::<f64>());
            let theta = 2.0 * core::f64::consts::PI * rng.random::<f64>();
            (cx + r * libm::cos(theta), cy + r * libm::sin(theta))
        } else {
            (rng.random_range(x0..x1), rng.random_range(y0..y1))
        };
        let (lat, lon) = grid.unproject(x, y);
        stops.push(StopRef::new(label("S", i, width), lat, lon));
    }
    let xy: Vec<(f64, f64)> = stops.iter().map(|s| grid.project(s.lat, s.lon)).collect();

    let modes = line_modes(config);
    let mut lines = Vec::with_capacity(config.lines);
    for k in 0..config.lines {
        let len = config.stops_per_line.min(config.stops);
        let mut visited = alloc::vec![false; config.stops];
        let mut current = rng.random_range(0..config.stops);
        visited[current] = true;
        let mut seq = alloc::vec![current];
        while seq.len() < len {
            let mut candidates: Vec<(f64, usize)> = (0..config.stops)
                .filter(|&s| !visited[s])
                .map(|s| (dist2(xy[current], xy[s]), s))
                .collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let pick = rng.random_range(0..candidates.len().min(3));
            current = candidates[pick].1;
            visited[current] = true;
            seq.push(current);
        }
        lines.push(Line {
            id: label("L", k, 3),
            mode: modes[k % modes.len()],
            stops: seq,
        });
    }

    let hub_centers = centers_xy.iter().map(|&(x, y)| grid.unproject(x, y)).collect();
    Ok(Network::new(stops, lines, hub_centers, grid))
}
