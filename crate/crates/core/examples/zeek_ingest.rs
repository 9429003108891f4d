//! Parse a labeled Zeek `conn.log`, fit the categorical dictionaries and
//! encode every record into a 15-value feature vector.
//!
//! ```bash
//! cargo run --example zeek_ingest -- path/to/conn.log.labeled
//! ```
//!
//! Without an argument the bundled test capture is used.

use superlearn::flowdata::{class_counts, encode, fit_encoder, parse_zeek_log, FEATURE_NAMES};

const BUNDLED: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/conn.log"));

pub fn run_example() -> superlearn::Result<()> {
    run(None)
}

fn run(arg: Option<String>) -> superlearn::Result<()> {
    let text = match arg {
        Some(path) => std::fs::read_to_string(&path).map_err(|e| superlearn::Error::io(&path, e))?,
        None => BUNDLED.to_string(),
    };
    let log = parse_zeek_log(&text)?;
    for bad in &log.rejected {
        println!("skipped line {}: {}", bad.line, bad.reason);
    }
    let encoder = fit_encoder(&log.records)?;
    let data: Vec<_> = log.records.iter().map(|r| encode(r, &encoder)).collect();
    println!("{} records, [benign, malicious] = {:?}", data.len(), class_counts(&data));

    if let (Some(record), Some(v)) = (log.records.first(), data.first()) {
        println!("{} -> {}:{} ({})", record.id_orig_h, record.id_resp_h, record.id_resp_p, record.label);
        for (name, value) in FEATURE_NAMES.iter().zip(v.values) {
            println!("  {name:<16} {value}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> superlearn::Result<()> {
    run(std::env::args().nth(1))
}
