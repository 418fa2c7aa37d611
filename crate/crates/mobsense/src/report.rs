//! CSV and GeoJSON tables emitted by the pipeline stages.

use std::io::{self, Write};

use mobsense_core::cleaning::CleanedDataset;
use mobsense_core::demand::{GridModeCounts, HourlyProfile, ModeShares};
use mobsense_core::geo::convex_hull;
use mobsense_core::ingest::{CollateDefect, PrivacyViolation};
use mobsense_core::model::{DayType, Itinerary, Leg, ReportGroup, StopRef};
use mobsense_core::od::RegressionResult;
use mobsense_core::transfer::{DensityRaster, HubClustering, TransferEvent, TransferMatrix};
use serde::Serialize;
use serde_json::json;

use crate::formats::records::LineError;

fn write_rows<T: Serialize>(w: impl Write, rows: impl IntoIterator<Item = T>) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()
}

/// Like [`write_rows`], but writes the header even when there are no rows.
fn write_table<T: Serialize>(w: impl Write, header: &[&str], rows: impl IntoIterator<Item = T>) -> io::Result<()> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    csv.write_record(header)?;
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()
}

pub fn parse_errors(w: impl Write, errors: &[LineError]) -> io::Result<()> {
    write_table(w, &["line", "reason"], errors.iter().map(|e| (e.line, &e.reason)))
}

pub fn collate_defects(w: impl Write, defects: &[CollateDefect]) -> io::Result<()> {
    let rows = defects.iter().map(|d| match d {
        CollateDefect::DuplicateOrdinal {
            device_id,
            day,
            chain_id,
            leg_ordinal,
        } => (d.kind(), device_id, day.to_string(), chain_id, Some(*leg_ordinal)),
        CollateDefect::TemporalOrder {
            device_id,
            day,
            chain_id,
        } => (d.kind(), device_id, day.to_string(), chain_id, None),
    });
    write_table(w, &["kind", "device_id", "day", "chain_id", "leg_ordinal"], rows)
}

pub fn privacy_report(w: impl Write, rows: &[(&Itinerary, PrivacyViolation)]) -> io::Result<()> {
    let rows = rows.iter().map(|(it, v)| {
        (
            &it.device_id,
            it.day.to_string(),
            &v.chain_id,
            v.leg_index,
            v.endpoint.as_str(),
            v.time,
        )
    });
    write_table(
        w,
        &["device_id", "day", "chain_id", "leg_index", "endpoint", "time"],
        rows,
    )
}

pub fn itinerary_summary(w: impl Write, itineraries: &[Itinerary]) -> io::Result<()> {
    let rows = itineraries.iter().map(|it| {
        (
            &it.device_id,
            it.day.to_string(),
            it.day.day_type().as_str(),
            it.chains.len(),
            it.leg_count(),
            it.chains.iter().map(|c| c.pt_leg_count()).sum::<usize>(),
        )
    });
    write_table(w, &["device_id", "day", "day_type", "chains", "legs", "pt_legs"], rows)
}

#[derive(Serialize)]
struct AuditRow<'a> {
    device_id: &'a str,
    day: String,
    chain_id: &'a str,
    /// Input leg indices, `;`-separated.
    merged_from: String,
    result_index: usize,
    mode: &'a str,
    line_id: &'a str,
    direction: &'a str,
    vehicle_id: &'a str,
    board_stop_id: &'a str,
    alight_stop_id: &'a str,
    start_time: i64,
    end_time: i64,
    max_gap_s: i64,
    long_gap: bool,
}

const AUDIT_HEADER: [&str; 15] = [
    "device_id",
    "day",
    "chain_id",
    "merged_from",
    "result_index",
    "mode",
    "line_id",
    "direction",
    "vehicle_id",
    "board_stop_id",
    "alight_stop_id",
    "start_time",
    "end_time",
    "max_gap_s",
    "long_gap",
];

/// One row per merge with the resulting leg. Merges whose same-vehicle legs
/// lie more than `long_gap_s` apart are flagged for review.
pub fn merge_audit(w: impl Write, cleaned: &CleanedDataset, long_gap_s: i64) -> io::Result<()> {
    let rows = cleaned.audit.iter().map(|row| {
        let it = &cleaned.itineraries[row.itinerary];
        let chain = it
            .chains
            .iter()
            .find(|c| c.chain_id == row.chain_id)
            .expect("audited chain is in its itinerary");
        let Leg::Pt(leg) = &chain.legs[row.event.result_index] else {
            unreachable!("merges produce PT legs")
        };
        let merged_from: Vec<String> = row.event.merged_from.iter().map(ToString::to_string).collect();
        AuditRow {
            device_id: &it.device_id,
            day: it.day.to_string(),
            chain_id: &row.chain_id,
            merged_from: merged_from.join(";"),
            result_index: row.event.result_index,
            mode: leg.mode.as_str(),
            line_id: &leg.line_id,
            direction: &leg.direction,
            vehicle_id: &leg.vehicle_id,
            board_stop_id: &leg.board.id,
            alight_stop_id: &leg.alight.id,
            start_time: leg.start_time,
            end_time: leg.end_time,
            max_gap_s: row.event.max_gap_s,
            long_gap: row.event.max_gap_s > long_gap_s,
        }
    });
    write_table(w, &AUDIT_HEADER, rows)
}

pub fn cell_counts(w: impl Write, counts: &[GridModeCounts]) -> io::Result<()> {
    let rows = counts.iter().flat_map(|c| {
        c.counts
            .iter()
            .map(move |(cell, n)| (cell.col, cell.row, c.group.label(), n))
    });
    write_table(w, &["col", "row", "mode", "count"], rows)
}

/// One line of the per-mode demand summary. Fields are empty where the
/// statistic is undefined, e.g. a power law over fewer than two count values.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub mode: &'static str,
    pub legs: u64,
    pub used_cells: usize,
    pub coverage: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub alpha: Option<f64>,
    pub r2: Option<f64>,
}

pub fn demand_summary(w: impl Write, rows: &[SummaryRow]) -> io::Result<()> {
    write_rows(w, rows)
}

pub fn hourly(w: impl Write, profiles: &[HourlyProfile]) -> io::Result<()> {
    let rows = profiles.iter().flat_map(|p| {
        p.bins
            .iter()
            .enumerate()
            .map(move |(h, n)| (p.group.label(), p.day_type.as_str(), h, n))
    });
    write_table(w, &["mode", "day_type", "hour", "count"], rows)
}

/// A pairwise correlation; `mode_a = mode_b = "mean"` marks the average over
/// pairs, with the number of pairs in `pairs`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub day_type: &'static str,
    pub mode_a: &'static str,
    pub mode_b: &'static str,
    pub pearson: Option<f64>,
    pub pairs: usize,
}

pub fn correlations(w: impl Write, rows: &[CorrelationRow]) -> io::Result<()> {
    write_table(w, &["day_type", "mode_a", "mode_b", "pearson", "pairs"], rows)
}

pub fn mode_shares(w: impl Write, shares: &[(&str, ModeShares)]) -> io::Result<()> {
    let rows = shares.iter().flat_map(|(basis, s)| {
        ReportGroup::ALL
            .iter()
            .map(move |&g| (*basis, g.label(), s.get(g), s.total))
    });
    write_table(w, &["basis", "group", "percent", "total"], rows)
}

pub fn regression(w: impl Write, rows: &[(DayType, RegressionResult)]) -> io::Result<()> {
    let rows = rows
        .iter()
        .map(|(dt, r)| (dt.as_str(), r.alpha, r.beta, r.r_squared, r.n_points, r.alpha_std_err));
    write_table(
        w,
        &["day_type", "alpha", "beta", "r_squared", "n_points", "alpha_std_err"],
        rows,
    )
}

pub fn transfer_events(w: impl Write, events: &[TransferEvent]) -> io::Result<()> {
    let rows = events.iter().map(|e| {
        (
            &e.chain_id,
            &e.alight.id,
            e.alight.lat,
            e.alight.lon,
            &e.board.id,
            e.board.lat,
            e.board.lon,
            e.alight_time,
            e.board_time,
            e.from_mode.as_str(),
            e.to_mode.as_str(),
            e.intervening_legs,
        )
    });
    let header = [
        "chain_id",
        "alight_stop_id",
        "alight_lat",
        "alight_lon",
        "board_stop_id",
        "board_lat",
        "board_lon",
        "alight_time",
        "board_time",
        "from_mode",
        "to_mode",
        "intervening_legs",
    ];
    write_table(w, &header, rows)
}

/// The matrix as (from, to) rows; header only when there were no transfers.
pub fn transfer_matrix(w: impl Write, m: Option<&TransferMatrix>) -> io::Result<()> {
    let rows = m.into_iter().flat_map(|m| {
        m.counts
            .iter()
            .map(|(&(from, to), &n)| (from.as_str(), to.as_str(), n, m.proportion(from, to)))
    });
    write_table(w, &["from_mode", "to_mode", "count", "proportion"], rows)
}

/// Every stop with its hub, empty for noise.
pub fn hub_stops(w: impl Write, stops: &[StopRef], clustering: &HubClustering) -> io::Result<()> {
    let mut hub_of = std::collections::BTreeMap::new();
    for h in &clustering.hubs {
        for m in &h.members {
            hub_of.insert(m.as_str(), h.hub_id);
        }
    }
    let mut sorted: Vec<&StopRef> = stops.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let rows = sorted
        .into_iter()
        .map(|s| (&s.id, s.lat, s.lon, hub_of.get(s.id.as_str()).copied()));
    write_table(w, &["stop_id", "lat", "lon", "hub_id"], rows)
}

/// Hub outlines as a GeoJSON feature collection: the convex hull of the
/// member stops, degenerating to a line or point for collinear members.
pub fn hubs_geojson(clustering: &HubClustering, stops: &[StopRef], proportions: &[Option<f64>]) -> serde_json::Value {
    let coords: std::collections::BTreeMap<&str, (f64, f64)> =
        stops.iter().map(|s| (s.id.as_str(), (s.lon, s.lat))).collect();
    let features: Vec<serde_json::Value> = clustering
        .hubs
        .iter()
        .map(|h| {
            let pts: Vec<(f64, f64)> = h
                .members
                .iter()
                .filter_map(|m| coords.get(m.as_str()).copied())
                .collect();
            let hull = convex_hull(&pts);
            let geometry = match hull.len() {
                0 => serde_json::Value::Null,
                1 => json!({"type": "Point", "coordinates": [hull[0].0, hull[0].1]}),
                2 => json!({"type": "LineString", "coordinates": hull.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>()}),
                _ => {
                    let mut ring: Vec<[f64; 2]> = hull.iter().map(|p| [p.0, p.1]).collect();
                    ring.push(ring[0]);
                    json!({"type": "Polygon", "coordinates": [ring]})
                }
            };
            json!({
                "type": "Feature",
                "geometry": geometry,
                "properties": {
                    "hub_id": h.hub_id,
                    "member_count": h.members.len(),
                    "intra_hub_proportion": proportions.get(h.hub_id).copied().flatten(),
                    "centroid_lat": h.centroid.0,
                    "centroid_lon": h.centroid.1,
                    "members": h.members,
                }
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

/// Raster cells with positive density, per square metre, indexed on the
/// grid whose cells have the raster's size and origin at the projection
/// origin. Header only when there is no raster.
pub fn kde(w: impl Write, raster: Option<&DensityRaster>) -> io::Result<()> {
    let rows = raster.into_iter().flat_map(|raster| {
        let spec = raster.spec;
        let col0 = (spec.origin_x / spec.cell_size).round() as i64;
        let row0 = (spec.origin_y / spec.cell_size).round() as i64;
        (0..spec.rows).flat_map(move |r| {
            (0..spec.cols).filter_map(move |c| {
                let d = raster.density(c, r);
                (d > 0.0).then_some((col0 + c as i64, row0 + r as i64, d))
            })
        })
    });
    write_table(w, &["col", "row", "density"], rows)
}
