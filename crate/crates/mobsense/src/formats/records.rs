//! Line-delimited leg records, ground-truth sidecar and defect ledger.

use std::io::{self, BufRead, Write};

use mobsense_core::ingest::{LegRecordRow, RawLegRecord};
use mobsense_core::synth::DefectRecord;
use rayon::prelude::*;
use serde::Serialize;

/// Lines parsed per parallel batch.
const BATCH_LINES: usize = 1 << 16;

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedRecords {
    pub records: Vec<RawLegRecord>,
    pub errors: Vec<LineError>,
    /// Non-blank lines seen, i.e. `records.len() + errors.len()`.
    pub lines: usize,
}

fn parse_line(line: &str) -> Result<RawLegRecord, String> {
    let row: LegRecordRow = serde_json::from_str(line).map_err(|e| e.to_string())?;
    row.into_record().map_err(|e| e.to_string())
}

fn parse_batch(batch: &[(usize, String)], out: &mut ParsedRecords) {
    let parsed: Vec<Result<RawLegRecord, String>> = batch.par_iter().map(|(_, l)| parse_line(l)).collect();
    for ((line, _), r) in batch.iter().zip(parsed) {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.errors.push(LineError { line: *line, reason }),
        }
    }
    out.lines += batch.len();
}

/// Parses every line of a leg-record stream. Blank lines are skipped; bad
/// lines are reported and never abort the parse. Only a failing read does.
/// Batches are parsed in parallel and reassembled in line order.
pub fn parse_leg_records(mut reader: impl BufRead) -> io::Result<ParsedRecords> {
    let mut out = ParsedRecords::default();
    let mut batch: Vec<(usize, String)> = Vec::with_capacity(BATCH_LINES);
    let mut number = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        number += 1;
        if line.trim().is_empty() {
            continue;
        }
        batch.push((number, line));
        if batch.len() == BATCH_LINES {
            parse_batch(&batch, &mut out);
            batch.clear();
        }
    }
    parse_batch(&batch, &mut out);
    Ok(out)
}

/// Writes values as JSON lines; serialization runs in parallel, output order
/// follows the input.
pub fn write_json_lines<T: Serialize + Sync>(mut w: impl Write, items: &[T]) -> io::Result<()> {
    for chunk in items.chunks(BATCH_LINES) {
        let lines: Vec<String> = chunk
            .par_iter()
            .map(|item| serde_json::to_string(item).expect("plain data serializes"))
            .collect();
        for l in lines {
            w.write_all(l.as_bytes())?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()
}

pub fn write_leg_records(w: impl Write, records: &[RawLegRecord]) -> io::Result<()> {
    let rows: Vec<LegRecordRow> = records.par_iter().map(RawLegRecord::to_row).collect();
    write_json_lines(w, &rows)
}

pub fn write_defects(w: impl Write, defects: &[DefectRecord]) -> io::Result<()> {
    write_json_lines(w, defects)
}

/// Reads a defect ledger; the first bad line is an error.
pub fn read_defects(reader: impl BufRead) -> io::Result<Vec<DefectRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(d);
    }
    Ok(out)
}
