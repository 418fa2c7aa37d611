//! Gaussian kernel density of transfer locations on a metric raster.
//!
//! Each cell holds the exact share of the kernel mass that falls inside it,
//! from products of 1-D normal CDF differences. The raster therefore sums to
//! one when it covers every kernel, whatever the cell size.

use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use super::TransferEvent;
use crate::error::{Error, Result};
use crate::geo::GridSpec;

pub const DEFAULT_BANDWIDTH_M: f64 = 100.0;

/// Kernels are truncated this many bandwidths from their centre; the
/// neglected mass is below 1e-14.
const TRUNCATION: f64 = 8.0;

/// Upper bound on raster size, to fail early on absurd extents.
const MAX_CELLS: usize = 50_000_000;

/// Cell `(col, row)` covers `[origin_x + col*cell_size, origin_x + (col+1)*cell_size)`
/// and the same along y, in metres of the projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
}

impl RasterSpec {
    /// Smallest raster aligned to multiples of `cell_size` that covers every
    /// point plus `margin` metres on each side.
    pub fn covering(points: &[(f64, f64)], margin: f64, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::param("cell_size", "must be positive"));
        }
        if points.is_empty() {
            return Err(Error::Empty("no points to cover"));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let origin_x = libm::floor((x0 - margin) / cell_size) * cell_size;
        let origin_y = libm::floor((y0 - margin) / cell_size) * cell_size;
        let cols = libm::ceil((x1 + margin - origin_x) / cell_size).max(1.0) as usize;
        let rows = libm::ceil((y1 + margin - origin_y) / cell_size).max(1.0) as usize;
        let spec = RasterSpec {
            origin_x,
            origin_y,
            cell_size,
            cols,
            rows,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::param("cell_size", "must be positive"));
        }
        if self.cols == 0 || self.rows == 0 {
            return Err(Error::ZeroTotalCells);
        }
        if self.cols.saturating_mul(self.rows) > MAX_CELLS {
            return Err(Error::param("raster", "too many cells"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    /// Centre of a cell in projected metres.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRaster {
    pub spec: RasterSpec,
    pub bandwidth: f64,
    /// Row-major share of total kernel mass per cell.
    pub values: Vec<f64>,
}

impl DensityRaster {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.spec.cols + col]
    }

    /// Total mass on the raster.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mass in cells whose centre lies within `radius` metres of `(x, y)`.
    pub fn mass_near(&self, x: f64, y: f64, radius: f64) -> f64 {
        let mut m = 0.0;
        for row in 0..self.spec.rows {
            for col in 0..self.spec.cols {
                let (cx, cy) = self.spec.cell_center(col, row);
                if (cx - x) * (cx - x) + (cy - y) * (cy - y) <= radius * radius {
                    m += self.get(col, row);
                }
            }
        }
        m
    }

    /// Cell with the largest value; ties go to the first in row-major order.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| (i % self.spec.cols, i / self.spec.cols))
    }

    /// Density per square metre of a cell.
    pub fn density(&self, col: usize, row: usize) -> f64 {
        self.get(col, row) / (self.spec.cell_size * self.spec.cell_size)
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2))
}

/// Kernel mass per cell along one axis, for the cells of `range` within the
/// truncation window. Returns the first cell index and the weights.
fn axis_weights(centre: f64, origin: f64, cell: f64, range: Range<usize>, bandwidth: f64) -> (usize, Vec<f64>) {
    let lo = libm::floor((centre - TRUNCATION * bandwidth - origin) / cell).max(range.start as f64);
    let hi = libm::floor((centre + TRUNCATION * bandwidth - origin) / cell).min(range.end as f64 - 1.0);
    if hi < lo {
        return (range.start, Vec::new());
    }
    let (lo, hi) = (lo as usize, hi as usize);
    let w = (lo..=hi)
        .map(|i| {
            let a = origin + i as f64 * cell;
            normal_cdf((a + cell - centre) / bandwidth) - normal_cdf((a - centre) / bandwidth)
        })
        .collect();
    (lo, w)
}

fn check_inputs(points: &[(f64, f64)], bandwidth: f64, raster: &RasterSpec) -> Result<()> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::param("bandwidth", "must be positive"));
    }
    raster.check()?;
    if points.is_empty() {
        return Err(Error::Empty("no points for density"));
    }
    Ok(())
}

/// Values of raster rows `rows`, row-major. Rows are independent, so a raster
/// can be computed in tiles that concatenate to exactly the full result.
pub fn kde_rows(points: &[(f64, f64)], bandwidth: f64, raster: &RasterSpec, rows: Range<usize>) -> Result<Vec<f64>> {
    check_inputs(points, bandwidth, raster)?;
    if rows.end > raster.rows || rows.start > rows.end {
        return Err(Error::param("rows", "outside the raster"));
    }
    let mut values = alloc::vec![0.0; rows.len() * raster.cols];
    let share = 1.0 / points.len() as f64;
    for &(x, y) in points {
        let (c0, wx) = axis_weights(x, raster.origin_x, raster.cell_size, 0..raster.cols, bandwidth);
        let (r0, wy) = axis_weights(y, raster.origin_y, raster.cell_size, rows.clone(), bandwidth);
        for (dr, &vy) in wy.iter().enumerate() {
            let row = (r0 + dr - rows.start) * raster.cols;
            for (dc, &vx) in wx.iter().enumerate() {
                values[row + c0 + dc] += share * vx * vy;
            }
        }
    }
    Ok(values)
}

/// Kernel density of points (projected metres) with an isotropic Gaussian of
/// standard deviation `bandwidth`; every point carries mass `1 / n`.
pub fn kde_raster(points: &[(f64, f64)], bandwidth: f64, raster: &RasterSpec) -> Result<DensityRaster> {
    let values = kde_rows(points, bandwidth, raster, 0..raster.rows)?;
    Ok(DensityRaster {
        spec: *raster,
        bandwidth,
        values,
    })
}

/// Projected boarding stop of each transfer, where the transfer takes place.
pub fn transfer_points(events: &[TransferEvent], grid: &GridSpec) -> Vec<(f64, f64)> {
    events.iter().map(|e| grid.project(e.board.lat, e.board.lon)).collect()
}

/// Density of transfer boardings over `raster`.
pub fn transfer_kde(
    events: &[TransferEvent],
    bandwidth: f64,
    grid: &GridSpec,
    raster: &RasterSpec,
) -> Result<DensityRaster> {
    kde_raster(&transfer_points(events, grid), bandwidth, raster)
}
