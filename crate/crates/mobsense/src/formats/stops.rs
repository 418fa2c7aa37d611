//! PT stop and line tables.

use std::io::{self, Read, Write};

use mobsense_core::model::StopRef;
use mobsense_core::synth::Network;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct StopRow {
    stop_id: String,
    lat: f64,
    lon: f64,
}

#[derive(Debug, Serialize)]
struct LineRow<'a> {
    line_id: &'a str,
    mode: &'a str,
    /// Stop ids in line order, separated by `;`.
    stops: String,
}

/// Reads `stop_id,lat,lon` rows. Duplicate ids and coordinate validity are
/// checked by the clustering stage, which reports them as computation errors.
pub fn read_stops(reader: impl Read) -> io::Result<Vec<StopRef>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    csv.deserialize::<StopRow>()
        .enumerate()
        .map(|(i, r)| {
            r.map(|r| StopRef::new(r.stop_id, r.lat, r.lon))
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("row {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_stops(w: impl Write, stops: &[StopRef]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for s in stops {
        csv.serialize(StopRow {
            stop_id: s.id.clone(),
            lat: s.lat,
            lon: s.lon,
        })?;
    }
    csv.flush()
}

pub fn write_lines(w: impl Write, network: &Network) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for line in &network.lines {
        let stops: Vec<&str> = line.stops.iter().map(|&i| network.stops[i].id.as_str()).collect();
        csv.serialize(LineRow {
            line_id: &line.id,
            mode: line.mode.as_str(),
            stops: stops.join(";"),
        })?;
    }
    csv.flush()
}
