use std::fmt::Write as _;

use super::FlowRecord;
use crate::{Error, Result};

/// Column layout of IoT-23 `conn.log.labeled` files, used when a file carries
/// no `#fields` header.
const DEFAULT_FIELDS: [&str; 23] = [
    "ts",
    "uid",
    "id.orig_h",
    "id.orig_p",
    "id.resp_h",
    "id.resp_p",
    "proto",
    "service",
    "duration",
    "orig_bytes",
    "resp_bytes",
    "conn_state",
    "local_orig",
    "local_resp",
    "missed_bytes",
    "history",
    "orig_pkts",
    "orig_ip_bytes",
    "resp_pkts",
    "resp_ip_bytes",
    "tunnel_parents",
    "label",
    "detailed-label",
];

const REQUIRED: [&str; 16] = [
    "id.orig_h",
    "id.orig_p",
    "id.resp_h",
    "id.resp_p",
    "proto",
    "service",
    "duration",
    "orig_bytes",
    "resp_bytes",
    "conn_state",
    "history",
    "orig_pkts",
    "orig_ip_bytes",
    "resp_pkts",
    "resp_ip_bytes",
    "label",
];

/// A data line skipped because its column count did not match the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub records: Vec<FlowRecord>,
    pub rejected: Vec<RejectedLine>,
}

fn is_missing(field: &str) -> bool {
    field == "-" || field == "(empty)" || field.is_empty()
}

struct Columns {
    width: usize,
    index: [usize; REQUIRED.len()],
}

impl Columns {
    fn from_names(names: &[&str], line: usize) -> Result<Self> {
        let mut index = [0; REQUIRED.len()];
        for (slot, want) in index.iter_mut().zip(REQUIRED) {
            *slot = names
                .iter()
                .position(|n| *n == want)
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("#fields header lacks column `{want}`"),
                })?;
        }
        Ok(Self {
            width: names.len(),
            index,
        })
    }
}

struct Line<'a> {
    number: usize,
    fields: &'a [&'a str],
    columns: &'a Columns,
}

impl Line<'_> {
    fn raw(&self, slot: usize) -> &str {
        self.fields[self.columns.index[slot]]
    }

    fn err(&self, slot: usize, what: &str) -> Error {
        Error::Parse {
            line: self.number,
            message: format!("{}: {what}, got `{}`", REQUIRED[slot], self.raw(slot)),
        }
    }

    fn text(&self, slot: usize) -> Result<String> {
        let raw = self.raw(slot);
        if is_missing(raw) {
            return Err(self.err(slot, "required value missing"));
        }
        Ok(raw.to_string())
    }

    fn opt_text(&self, slot: usize) -> Option<String> {
        let raw = self.raw(slot);
        (!is_missing(raw)).then(|| raw.to_string())
    }

    fn port(&self, slot: usize) -> Result<u16> {
        self.raw(slot)
            .parse()
            .map_err(|_| self.err(slot, "expected port in 0..=65535"))
    }

    fn count(&self, slot: usize) -> Result<u64> {
        self.raw(slot)
            .parse()
            .map_err(|_| self.err(slot, "expected non-negative integer"))
    }

    fn opt_count(&self, slot: usize) -> Result<Option<u64>> {
        if is_missing(self.raw(slot)) {
            return Ok(None);
        }
        self.count(slot).map(Some)
    }

    fn opt_seconds(&self, slot: usize) -> Result<Option<f64>> {
        let raw = self.raw(slot);
        if is_missing(raw) {
            return Ok(None);
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(Some(v)),
            _ => Err(self.err(slot, "expected non-negative seconds")),
        }
    }

    fn record(&self) -> Result<FlowRecord> {
        Ok(FlowRecord {
            id_orig_h: self.text(0)?,
            id_orig_p: self.port(1)?,
            id_resp_h: self.text(2)?,
            id_resp_p: self.port(3)?,
            proto: self.text(4)?,
            service: self.opt_text(5),
            duration: self.opt_seconds(6)?,
            orig_bytes: self.opt_count(7)?,
            resp_bytes: self.opt_count(8)?,
            conn_state: self.text(9)?,
            history: self.opt_text(10),
            orig_pkts: self.count(11)?,
            orig_ip_bytes: self.count(12)?,
            resp_pkts: self.count(13)?,
            resp_ip_bytes: self.count(14)?,
            label: self.text(15)?,
        })
    }
}

/// Parses a labeled Zeek connection log.
///
/// Fields are split on any run of tabs or spaces, which also covers the
/// IoT-23 files whose trailing label columns are space separated. A
/// `#fields` header, when present, defines the column layout; otherwise the
/// IoT-23 layout is assumed. Lines whose column count does not match are
/// collected in [`ParsedLog::rejected`]; a field that fails to parse aborts
/// with [`Error::Parse`] naming the line.
pub fn parse_zeek_log(text: &str) -> Result<ParsedLog> {
    let mut columns = Columns::from_names(&DEFAULT_FIELDS, 0)?;
    let mut out = ParsedLog::default();
    for (i, line) in text.lines().enumerate() {
        let number = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let mut parts = meta.split_whitespace();
            if parts.next() == Some("fields") {
                let names: Vec<&str> = parts.collect();
                columns = Columns::from_names(&names, number)?;
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != columns.width {
            out.rejected.push(RejectedLine {
                line: number,
                reason: format!(
                    "expected {} columns, found {}",
                    columns.width,
                    fields.len()
                ),
            });
            continue;
        }
        let parsed = Line {
            number,
            fields: &fields,
            columns: &columns,
        };
        out.records.push(parsed.record()?);
    }
    Ok(out)
}

fn or_missing<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

/// Writes records as a tab-separated log with a `#fields` header covering the
/// 15 features and the label. [`parse_zeek_log`] reads it back unchanged.
pub fn write_zeek_log(records: &[FlowRecord]) -> String {
    let mut out = String::from("#separator \\x09\n#fields");
    for name in REQUIRED {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for r in records {
        let row = [
            r.id_orig_h.clone(),
            r.id_orig_p.to_string(),
            r.id_resp_h.clone(),
            r.id_resp_p.to_string(),
            r.proto.clone(),
            or_missing(&r.service),
            or_missing(&r.duration),
            or_missing(&r.orig_bytes),
            or_missing(&r.resp_bytes),
            r.conn_state.clone(),
            or_missing(&r.history),
            r.orig_pkts.to_string(),
            r.orig_ip_bytes.to_string(),
            r.resp_pkts.to_string(),
            r.resp_ip_bytes.to_string(),
            r.label.clone(),
        ];
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "#separator \\x09\n#fields\tts\tuid\tid.orig_h\tid.orig_p\tid.resp_h\tid.resp_p\tproto\tservice\tduration\torig_bytes\tresp_bytes\tconn_state\tlocal_orig\tlocal_resp\tmissed_bytes\thistory\torig_pkts\torig_ip_bytes\tresp_pkts\tresp_ip_bytes\ttunnel_parents   label   detailed-label\n";

    fn line(proto: &str, duration: &str, label: &str) -> String {
        format!(
            "1525879831.015811\tCUmrqr4svHuSXJy5z7\t192.168.100.103\t51524\t65.127.233.163\t23\t{proto}\t-\t{duration}\t0\t0\tS0\t-\t-\t0\tS\t2\t80\t0\t0\t-   {label}   PartOfAHorizontalPortScan\n"
        )
    }

    #[test]
    fn missing_duration_passes_through() {
        let text = format!("{HEADER}{}", line("tcp", "-", "Malicious"));
        let parsed = parse_zeek_log(&text).unwrap();
        assert_eq!(parsed.records.len(), 1);
        let r = &parsed.records[0];
        assert_eq!(r.proto, "tcp");
        assert_eq!(r.duration, None);
        assert_eq!(r.service, None);
        assert_eq!(r.label, "Malicious");
        assert_eq!(r.id_resp_p, 23);
    }

    #[test]
    fn header_lines_contribute_nothing() {
        let parsed = parse_zeek_log("#fields ts uid id.orig_h\n#types time string addr\n").unwrap_err();
        // a #fields line without the required columns is an error
        assert!(matches!(parsed, Error::Parse { line: 1, .. }));
        let parsed = parse_zeek_log(HEADER).unwrap();
        assert!(parsed.records.is_empty());
        assert!(parsed.rejected.is_empty());
    }

    #[test]
    fn wrong_column_count_is_rejected_and_parsing_continues() {
        let text = format!(
            "{HEADER}{}too few columns here\n{}",
            line("tcp", "1.5", "Malicious"),
            line("udp", "2.0", "Benign")
        );
        let parsed = parse_zeek_log(&text).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.rejected.len(), 1);
        assert_eq!(parsed.rejected[0].line, 4);
    }

    #[test]
    fn malformed_value_reports_line() {
        let bad = line("tcp", "-", "Malicious").replace("\t51524\t", "\t99999\t");
        let text = format!("{HEADER}{}{bad}", line("tcp", "-", "Benign"));
        match parse_zeek_log(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("id.orig_p"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn headerless_file_uses_iot23_layout() {
        let parsed = parse_zeek_log(&line("udp", "0.25", "Benign")).unwrap();
        assert_eq!(parsed.records[0].duration, Some(0.25));
        assert_eq!(parsed.records[0].proto, "udp");
    }
}
