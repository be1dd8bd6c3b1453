//! Dataset CSV layout: `AP_1,...,AP_n[,x,y][,zone]`.
//!
//! Zone indices are 1-based in files (human convention) and 0-based in
//! memory; floats are written with up to six decimals, trailing zeros
//! trimmed, so that write -> read -> write is byte-stable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{DatasetSchema, FingerprintDataset, RSS_CEIL_DBM, RSS_FLOOR_DBM};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Canonical decimal rendering of a float: up to six decimals, trailing
/// zeros (and a bare trailing point) trimmed.
pub fn canonical_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn expected_header(schema: &DatasetSchema) -> Vec<String> {
    let mut cols: Vec<String> = (1..=schema.ap_count).map(|i| format!("AP_{i}")).collect();
    if schema.has_coords {
        cols.push("x".into());
        cols.push("y".into());
    }
    if schema.n_zones.is_some() {
        cols.push("zone".into());
    }
    cols
}

pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<FingerprintDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;

    let expected = expected_header(schema);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != expected {
        return Err(Error::Schema(format!(
            "header mismatch: found [{}], expected [{}]",
            header.join(","),
            expected.join(",")
        )));
    }

    let mut rss_rows = Vec::new();
    let mut coords = schema.has_coords.then(Vec::new);
    let mut zones = schema.n_zones.map(|_| Vec::new());

    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 1;
        let record = record.map_err(|e| Error::Csv(format!("row {row_no}: {e}")))?;
        if record.len() != expected.len() {
            return Err(Error::Schema(format!(
                "row {row_no}: {} fields, expected {}",
                record.len(),
                expected.len()
            )));
        }
        let parse = |col: usize| -> Result<f64> {
            record[col].trim().parse::<f64>().map_err(|_| {
                Error::Schema(format!(
                    "row {row_no}: non-numeric value '{}' in column {}",
                    &record[col], expected[col]
                ))
            })
        };

        let mut rss = Vec::with_capacity(schema.ap_count);
        for c in 0..schema.ap_count {
            let v = parse(c)?;
            if !(RSS_FLOOR_DBM..=RSS_CEIL_DBM).contains(&v) {
                return Err(Error::Schema(format!(
                    "row {row_no}: rss {v} outside [{RSS_FLOOR_DBM}, {RSS_CEIL_DBM}] dBm"
                )));
            }
            rss.push(v);
        }
        rss_rows.push(rss);

        let mut col = schema.ap_count;
        if let Some(coords) = &mut coords {
            let x = parse(col)?;
            let y = parse(col + 1)?;
            coords.push((x, y));
            col += 2;
        }
        if let Some(zones) = &mut zones {
            let n = schema.n_zones.unwrap();
            let raw = parse(col)?;
            if raw.fract() != 0.0 || raw < 1.0 || raw > n as f64 {
                return Err(Error::Schema(format!(
                    "row {row_no}: zone {raw} outside 1..={n}"
                )));
            }
            zones.push(raw as usize - 1);
        }
    }

    if rss_rows.is_empty() {
        return Err(Error::Schema(format!(
            "{}: no data rows",
            path.display()
        )));
    }

    FingerprintDataset::new(Matrix::from_rows(&rss_rows)?, coords, zones, schema.clone())
}

pub fn write_csv(dataset: &FingerprintDataset, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", expected_header(dataset.schema()).join(","))?;
    for r in 0..dataset.len() {
        let mut fields: Vec<String> = dataset.rss().row(r).iter().map(|&v| canonical_f64(v)).collect();
        if let Some(coords) = dataset.coords() {
            fields.push(canonical_f64(coords[r].0));
            fields.push(canonical_f64(coords[r].1));
        }
        if let Some(zones) = dataset.zones() {
            fields.push((zones[r] + 1).to_string());
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}
