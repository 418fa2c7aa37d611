//! OD matrices as `o,d,hour,day_type,flow` rows.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use mobsense_core::model::DayType;
use mobsense_core::od::{OdKey, OdMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct OdRow {
    o: String,
    d: String,
    hour: u8,
    day_type: DayType,
    flow: f64,
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Reads external flows, one matrix per day type present. Repeated keys and
/// negative or non-finite flows are errors.
pub fn read_od(reader: impl Read) -> io::Result<BTreeMap<DayType, OdMatrix>> {
    let mut out: BTreeMap<DayType, OdMatrix> = BTreeMap::new();
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for (i, row) in csv.deserialize::<OdRow>().enumerate() {
        let row = row.map_err(|e| invalid(format!("row {}: {e}", i + 1)))?;
        if row.hour > 23 {
            return Err(invalid(format!("row {}: hour {} outside 0-23", i + 1, row.hour)));
        }
        if !(row.flow >= 0.0 && row.flow.is_finite()) {
            return Err(invalid(format!("row {}: flow must be finite and non-negative", i + 1)));
        }
        let m = out.entry(row.day_type).or_insert_with(|| OdMatrix {
            day_type: row.day_type,
            days: 1,
            entries: BTreeMap::new(),
        });
        let key = OdKey {
            origin: row.o,
            destination: row.d,
            hour: row.hour,
        };
        if m.entries.insert(key, row.flow).is_some() {
            return Err(invalid(format!("row {}: repeated (o, d, hour, day_type)", i + 1)));
        }
    }
    Ok(out)
}

/// Writes matrices in the order given, entries in key order.
pub fn write_od<'a>(w: impl Write, matrices: impl IntoIterator<Item = &'a OdMatrix>) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for m in matrices {
        for (k, &flow) in &m.entries {
            csv.serialize(OdRow {
                o: k.origin.clone(),
                d: k.destination.clone(),
                hour: k.hour,
                day_type: m.day_type,
                flow,
            })?;
        }
    }
    csv.flush()
}
