//! Great-circle distances, the planar grid projection and convex hulls.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::GridCell;

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

pub const DEFAULT_CELL_SIZE_M: f64 = 250.0;

/// Central angle in radians between two WGS84 points, by the haversine formula
/// on the unit sphere.
pub fn central_angle(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = p2 - p1;
    let dlambda = (lon2 - lon1).to_radians();
    let s1 = libm::sin(dphi / 2.0);
    let s2 = libm::sin(dlambda / 2.0);
    let h = s1 * s1 + libm::cos(p1) * libm::cos(p2) * s2 * s2;
    2.0 * libm::asin(libm::sqrt(h.clamp(0.0, 1.0)))
}

pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    central_angle(lat1, lon1, lat2, lon2) * EARTH_RADIUS_M
}

pub fn valid_wgs84(lat: f64, lon: f64) -> bool {
    lat.is_finite() && lon.is_finite() && (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)
}

/// Local equirectangular projection anchored at a WGS84 origin, with a square
/// cell grid whose cell (0, 0) has its lower-left corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub cell_size_m: f64,
}

impl GridSpec {
    pub fn new(origin_lat: f64, origin_lon: f64) -> Self {
        GridSpec {
            origin_lat,
            origin_lon,
            cell_size_m: DEFAULT_CELL_SIZE_M,
        }
    }

    fn cos_origin(&self) -> f64 {
        libm::cos(self.origin_lat.to_radians())
    }

    /// Planar (x east, y north) metres relative to the origin.
    pub fn project(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = EARTH_RADIUS_M * (lon - self.origin_lon).to_radians() * self.cos_origin();
        let y = EARTH_RADIUS_M * (lat - self.origin_lat).to_radians();
        (x, y)
    }

    pub fn unproject(&self, x: f64, y: f64) -> (f64, f64) {
        let lat = self.origin_lat + (y / EARTH_RADIUS_M).to_degrees();
        let lon = self.origin_lon + (x / (EARTH_RADIUS_M * self.cos_origin())).to_degrees();
        (lat, lon)
    }

    pub fn cell_of_xy(&self, x: f64, y: f64) -> GridCell {
        GridCell::new(
            libm::floor(x / self.cell_size_m) as i64,
            libm::floor(y / self.cell_size_m) as i64,
        )
    }

    pub fn cell_of(&self, lat: f64, lon: f64) -> GridCell {
        let (x, y) = self.project(lat, lon);
        self.cell_of_xy(x, y)
    }

    /// Planar centre of a cell.
    pub fn cell_center_xy(&self, cell: GridCell) -> (f64, f64) {
        (
            (cell.col as f64 + 0.5) * self.cell_size_m,
            (cell.row as f64 + 0.5) * self.cell_size_m,
        )
    }

    pub fn cell_center(&self, cell: GridCell) -> (f64, f64) {
        let (x, y) = self.cell_center_xy(cell);
        self.unproject(x, y)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by the monotone chain algorithm, counter-clockwise, without the
/// closing point. Degenerate inputs return the distinct extreme points.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}
