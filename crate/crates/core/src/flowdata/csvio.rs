use std::io::{Read, Write};

use super::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::{Error, Result};

/// Writes the encoded dataset: a header row of the 15 feature names plus
/// `label`, then one row per flow. Floats use shortest round-trip formatting.
pub fn write_dataset_csv<W: Write>(writer: W, data: &[FeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.push("label");
    w.write_record(&header)?;
    for v in data {
        let mut row: Vec<String> = v.values.iter().map(f64::to_string).collect();
        row.push(v.label.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Vec<FeatureVector>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() != FEATURE_COUNT + 1 {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected {} columns, found {}",
                FEATURE_COUNT + 1,
                header.len()
            ),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |message: String| Error::Parse { line, message };
        if row.len() != FEATURE_COUNT + 1 {
            return Err(bad(format!("expected {} columns", FEATURE_COUNT + 1)));
        }
        let mut values = [0.0; FEATURE_COUNT];
        for (slot, field) in values.iter_mut().zip(row.iter()) {
            *slot = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("not a finite number: `{field}`")))?;
        }
        let label = match row[FEATURE_COUNT].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(format!("label must be 0 or 1, got `{other}`"))),
        };
        out.push(FeatureVector::new(values, label));
    }
    Ok(out)
}
