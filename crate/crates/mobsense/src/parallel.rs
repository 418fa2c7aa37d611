//! Parallel drivers over the core algorithms.
//!
//! Every driver splits work along the same boundaries the core uses for its
//! random streams or merges, and reassembles results in input order, so the
//! output equals the serial computation exactly.

use mobsense_core::cleaning::{assemble, clean_itinerary, CleanedDataset};
use mobsense_core::demand::{GridModeCounts, ModeGroup};
use mobsense_core::error::Result;
use mobsense_core::ingest::{itinerary_records, RawLegRecord};
use mobsense_core::model::{DayType, Itinerary, StopRef};
use mobsense_core::od::{tally_od, OdBasis, OdCounts, ZoneTable};
use mobsense_core::synth::{generate_device, sense_itinerary, Network, Sensed, SynthConfig};
use mobsense_core::transfer::{
    cluster_with_neighbors, detect_transfers, kde_rows, prepare_stops, validate_params, DensityRaster, HubClustering,
    NeighborIndex, RasterSpec, TransferEvent,
};
use rayon::prelude::*;

/// Itineraries per parallel work unit in the reducing drivers.
const CHUNK: usize = 4096;

/// Ground-truth population, generated per device.
pub fn generate_population(config: &SynthConfig, network: &Network) -> Result<Vec<Itinerary>> {
    config.validate()?;
    let per_device: Vec<Vec<Itinerary>> = (0..config.devices)
        .into_par_iter()
        .map(|d| generate_device(config, network, d))
        .collect();
    Ok(per_device.into_iter().flatten().collect())
}

/// Sensing pass, per itinerary.
pub fn apply_sensing(config: &SynthConfig, network: &Network, truth: &[Itinerary]) -> Result<Sensed> {
    config.validate()?;
    let parts: Vec<_> = truth
        .par_iter()
        .enumerate()
        .map(|(i, it)| sense_itinerary(config, network, it, i))
        .collect();
    let mut sensed = Sensed::default();
    for p in parts {
        sensed.records.extend(p.records);
        sensed.defects.extend(p.defects);
    }
    Ok(sensed)
}

/// Leg records of itineraries, in itinerary order.
pub fn records_of(itineraries: &[Itinerary]) -> Vec<RawLegRecord> {
    itineraries.par_iter().flat_map_iter(itinerary_records).collect()
}

pub fn clean_dataset(itineraries: &[Itinerary]) -> CleanedDataset {
    let parts: Vec<_> = itineraries.par_iter().map(clean_itinerary).collect();
    assemble(parts)
}

/// Per-cell leg counts of one mode group, merged from chunk partials.
pub fn grid_counts(itineraries: &[Itinerary], group: ModeGroup, zones: &ZoneTable) -> GridModeCounts {
    itineraries
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut c = GridModeCounts::empty(group, zones.len());
            for leg in chunk.iter().flat_map(Itinerary::legs) {
                c.add_leg(leg, zones);
            }
            c
        })
        .reduce(
            || GridModeCounts::empty(group, zones.len()),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}

pub fn od_counts(
    itineraries: &[Itinerary],
    zones: &ZoneTable,
    day_type: DayType,
    utc_offset_s: i64,
    basis: OdBasis,
) -> OdCounts {
    itineraries
        .par_chunks(CHUNK)
        .map(|chunk| tally_od(chunk, zones, day_type, utc_offset_s, basis))
        .reduce(OdCounts::new, |mut a, b| {
            for (k, n) in b {
                *a.entry(k).or_insert(0) += n;
            }
            a
        })
}

/// Transfer events of every chain, in chain order.
pub fn transfers(itineraries: &[Itinerary]) -> Vec<TransferEvent> {
    itineraries
        .par_iter()
        .flat_map_iter(|it| it.chains.iter().flat_map(detect_transfers))
        .collect()
}

/// DBSCAN with the neighbour search spread over workers. Neighbour lists are
/// computed per stop by the same routine as the serial path, so the result is
/// identical to [`mobsense_core::transfer::cluster_hubs`].
pub fn cluster_hubs(stops: &[StopRef], epsilon: f64, min_points: usize) -> Result<HubClustering> {
    validate_params(epsilon, min_points)?;
    let sorted = prepare_stops(stops)?;
    let index = NeighborIndex::new(&sorted);
    let neighbors: Vec<Vec<usize>> = (0..sorted.len())
        .into_par_iter()
        .map(|i| index.neighbors(i, epsilon))
        .collect();
    Ok(cluster_with_neighbors(&sorted, &neighbors, min_points))
}

/// Rows per raster tile.
const TILE_ROWS: usize = 16;

/// Kernel density computed per horizontal tile of the raster; tiles
/// concatenate to exactly the serial result.
pub fn kde(points: &[(f64, f64)], bandwidth: f64, raster: &RasterSpec) -> Result<DensityRaster> {
    let tiles: Vec<Result<Vec<f64>>> = (0..raster.rows.div_ceil(TILE_ROWS).max(1))
        .into_par_iter()
        .map(|t| {
            let r0 = (t * TILE_ROWS).min(raster.rows);
            kde_rows(points, bandwidth, raster, r0..(r0 + TILE_ROWS).min(raster.rows))
        })
        .collect();
    let mut values = Vec::with_capacity(raster.cell_count());
    for t in tiles {
        values.extend(t?);
    }
    Ok(DensityRaster {
        spec: *raster,
        bandwidth,
        values,
    })
}
