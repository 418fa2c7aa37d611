//! Zone table: a projection header followed by `col,row,zone` rows.
//!
//! ```text
//! # origin_lat=60.1,origin_lon=24.7,cell_m=250
//! col,row,zone
//! 0,0,Helsinki
//! ```

use std::io::{self, BufRead, Write};

use mobsense_core::geo::GridSpec;
use mobsense_core::model::GridCell;
use mobsense_core::od::ZoneTable;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct ZoneRow {
    col: i64,
    row: i64,
    zone: String,
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn parse_header(line: &str) -> io::Result<GridSpec> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| invalid("zone table must start with a '# origin_lat=..,origin_lon=..,cell_m=..' header"))?;
    let (mut lat, mut lon, mut cell) = (None, None, None);
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| invalid(format!("header entry '{}' is not key=value", part.trim())))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("header value '{}' is not a number", v.trim())))?;
        match k.trim() {
            "origin_lat" => lat = Some(v),
            "origin_lon" => lon = Some(v),
            "cell_m" => cell = Some(v),
            other => return Err(invalid(format!("unknown header key '{other}'"))),
        }
    }
    let (Some(origin_lat), Some(origin_lon)) = (lat, lon) else {
        return Err(invalid("header needs origin_lat and origin_lon"));
    };
    if !mobsense_core::geo::valid_wgs84(origin_lat, origin_lon) {
        return Err(invalid("header origin is not a valid WGS84 coordinate"));
    }
    let mut grid = GridSpec::new(origin_lat, origin_lon);
    if let Some(c) = cell {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("cell_m must be positive"));
        }
        grid.cell_size_m = c;
    }
    Ok(grid)
}

/// Reads a zone table. A cell listed twice with different zones is an error.
pub fn read_zone_table(mut reader: impl BufRead) -> io::Result<ZoneTable> {
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let mut table = ZoneTable::new(parse_header(&header)?);
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for (i, row) in csv.deserialize::<ZoneRow>().enumerate() {
        let row = row.map_err(|e| invalid(format!("row {}: {e}", i + 1)))?;
        let cell = GridCell::new(row.col, row.row);
        if let Some(existing) = table.zone_of(cell) {
            if existing != row.zone {
                return Err(invalid(format!(
                    "cell ({}, {}) mapped to both {existing} and {}",
                    row.col, row.row, row.zone
                )));
            }
        }
        table.insert(cell, &row.zone);
    }
    Ok(table)
}

pub fn write_zone_table(w: impl Write, table: &ZoneTable) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    let g = &table.grid;
    writeln!(
        w,
        "# origin_lat={},origin_lon={},cell_m={}",
        g.origin_lat, g.origin_lon, g.cell_size_m
    )?;
    let mut csv = csv::Writer::from_writer(w);
    for (cell, zone) in table.cells() {
        csv.serialize(ZoneRow {
            col: cell.col,
            row: cell.row,
            zone: zone.to_string(),
        })?;
    }
    csv.flush()
}
