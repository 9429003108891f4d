//! Boundary files shared with the compiled C harness.
//!
//! Test vectors (`vectors.csv`):
//!
//! ```text
//! # rows=2 cols=18
//! id.orig_h,id.orig_p,...,history,orig_pkts,...,p0,p1,class
//! 1.0,41040.0,...,0.25,0.75,1
//! ```
//!
//! The first line declares the data row and column counts. Values use the
//! shortest decimal form that parses back to the same double.
//!
//! Harness report (`report.csv`): one row per vector, then a summary line.
//!
//! ```text
//! row,abs_dp0,abs_dp1,expected_class,emitted_class,class_match
//! 0,0,0,1,1,1
//! # rows=1 max_abs_dp=0 mismatches=0 wall_clock_s=1.2e-05
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::flowdata::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::stacker::SuperLearnerModel;
use crate::{Error, Result};

pub const VECTOR_COLUMNS: usize = FEATURE_COUNT + 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TestVector {
    pub features: [f64; FEATURE_COUNT],
    pub proba: [f64; 2],
    pub class: u8,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestVectorFile {
    pub rows: Vec<TestVector>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl TestVectorFile {
    /// Reference predictions of `model` on `data`.
    pub fn from_model(model: &SuperLearnerModel, data: &[FeatureVector]) -> Result<Self> {
        let mut rows = Vec::with_capacity(data.len());
        for v in data {
            let proba = model.predict_proba(&v.values)?;
            rows.push(TestVector {
                features: v.values,
                proba,
                class: crate::learners::predicted_class(proba),
            });
        }
        Ok(Self { rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# rows={} cols={VECTOR_COLUMNS}\n", self.rows.len());
        out.push_str(&FEATURE_NAMES.join(","));
        out.push_str(",p0,p1,class\n");
        for r in &self.rows {
            for v in r.features.iter().chain(&r.proba) {
                let _ = write!(out, "{v:?},");
            }
            let _ = writeln!(out, "{}", r.class);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, decl) = lines.next().ok_or_else(|| parse_err(1, "missing `# rows=N cols=M` line"))?;
        let (rows, cols) = parse_decl(decl).ok_or_else(|| parse_err(1, format!("bad declaration `{decl}`")))?;
        if cols != VECTOR_COLUMNS {
            return Err(parse_err(1, format!("expected {VECTOR_COLUMNS} columns, declared {cols}")));
        }
        lines.next().ok_or_else(|| parse_err(2, "missing column-name line"))?;
        let mut out = Vec::with_capacity(rows);
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(parse_err(n, format!("expected {cols} fields, found {}", fields.len())));
            }
            let mut values = [0.0; FEATURE_COUNT + 2];
            for (slot, f) in values.iter_mut().zip(&fields) {
                *slot = f
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(n, format!("`{f}` is not a finite number")))?;
            }
            let class = match fields[cols - 1].trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(parse_err(n, format!("class `{other}` is not 0 or 1"))),
            };
            let mut features = [0.0; FEATURE_COUNT];
            features.copy_from_slice(&values[..FEATURE_COUNT]);
            out.push(TestVector {
                features,
                proba: [values[FEATURE_COUNT], values[FEATURE_COUNT + 1]],
                class,
            });
        }
        if out.len() != rows {
            return Err(Error::Data(format!("declared {rows} rows, found {}", out.len())));
        }
        Ok(Self { rows: out })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

fn parse_decl(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix('#')?;
    let mut rows = None;
    let mut cols = None;
    for part in rest.split_whitespace() {
        match part.split_once('=')? {
            ("rows", v) => rows = v.parse().ok(),
            ("cols", v) => cols = v.parse().ok(),
            _ => return None,
        }
    }
    Some((rows?, cols?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessRow {
    pub row: usize,
    pub abs_dp: [f64; 2],
    pub expected_class: u8,
    pub emitted_class: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessSummary {
    pub rows: usize,
    pub max_abs_dp: f64,
    pub mismatches: usize,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub rows: Vec<HarnessRow>,
    pub summary: HarnessSummary,
}

fn field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{s}`")))
}

impl HarnessReport {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut summary = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut s = HarnessSummary {
                    rows: 0,
                    max_abs_dp: 0.0,
                    mismatches: 0,
                    wall_clock_s: 0.0,
                };
                for part in rest.split_whitespace() {
                    let (k, v) = part
                        .split_once('=')
                        .ok_or_else(|| parse_err(n, format!("bad summary item `{part}`")))?;
                    match k {
                        "rows" => s.rows = field(v, n, k)?,
                        "max_abs_dp" => s.max_abs_dp = field(v, n, k)?,
                        "mismatches" => s.mismatches = field(v, n, k)?,
                        "wall_clock_s" => s.wall_clock_s = field(v, n, k)?,
                        _ => return Err(parse_err(n, format!("unknown summary key `{k}`"))),
                    }
                }
                summary = Some(s);
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(parse_err(n, format!("expected 6 fields, found {}", f.len())));
            }
            rows.push(HarnessRow {
                row: field(f[0], n, "row")?,
                abs_dp: [field(f[1], n, "abs_dp0")?, field(f[2], n, "abs_dp1")?],
                expected_class: field(f[3], n, "expected_class")?,
                emitted_class: field(f[4], n, "emitted_class")?,
            });
        }
        let summary = summary.ok_or_else(|| Error::Data("harness report has no summary line".into()))?;
        if summary.rows != rows.len() {
            return Err(Error::Data(format!(
                "harness summary claims {} rows but lists {}",
                summary.rows,
                rows.len()
            )));
        }
        Ok(Self { rows, summary })
    }
}

/// Outcome of comparing emitted-code predictions with the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rows: usize,
    pub class_mismatches: usize,
    pub max_abs_dp: f64,
    pub tolerance: f64,
    pub harness_wall_clock_s: f64,
    pub passed: bool,
}

impl EquivalenceReport {
    /// Recomputes the verdict from the per-row data rather than trusting
    /// the harness summary.
    pub fn check(vectors: &TestVectorFile, report: &HarnessReport, tolerance: f64) -> Result<Self> {
        if report.rows.len() != vectors.rows.len() {
            return Err(Error::Equivalence(format!(
                "harness scored {} rows, expected {}",
                report.rows.len(),
                vectors.rows.len()
            )));
        }
        let mut max_abs_dp: f64 = 0.0;
        let mut class_mismatches = 0;
        for (i, r) in report.rows.iter().enumerate() {
            if r.row != i || r.expected_class != vectors.rows[i].class {
                return Err(Error::Equivalence(format!("harness row {i} does not match the vectors file")));
            }
            for d in r.abs_dp {
                // NaN counts as the worst possible deviation
                max_abs_dp = if d.is_nan() { f64::INFINITY } else { max_abs_dp.max(d) };
            }
            class_mismatches += usize::from(r.emitted_class != r.expected_class);
        }
        Ok(Self {
            rows: vectors.rows.len(),
            class_mismatches,
            max_abs_dp,
            tolerance,
            harness_wall_clock_s: report.summary.wall_clock_s,
            passed: class_mismatches == 0 && max_abs_dp <= tolerance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TestVectorFile {
        let mut f = [0.0; FEATURE_COUNT];
        f[3] = 0.1;
        f[6] = 1e-7;
        TestVectorFile {
            rows: vec![
                TestVector {
                    features: f,
                    proba: [0.25, 0.75],
                    class: 1,
                },
                TestVector {
                    features: [2.0; FEATURE_COUNT],
                    proba: [1.0 / 3.0, 2.0 / 3.0],
                    class: 1,
                },
            ],
        }
    }

    #[test]
    fn vectors_round_trip_exactly() {
        let v = sample();
        let text = v.to_csv();
        assert!(text.starts_with("# rows=2 cols=18\n"));
        assert_eq!(TestVectorFile::parse(&text).unwrap(), v);
    }

    #[test]
    fn empty_file_has_zero_rows() {
        let v = TestVectorFile::default();
        assert_eq!(TestVectorFile::parse(&v.to_csv()).unwrap().rows.len(), 0);
    }

    #[test]
    fn declared_count_is_enforced() {
        let text = sample().to_csv().replace("rows=2", "rows=3");
        assert!(TestVectorFile::parse(&text).is_err());
        let text = sample().to_csv().replace("0.75", "inf");
        assert!(matches!(TestVectorFile::parse(&text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn report_parses_and_checks() {
        let text = "row,abs_dp0,abs_dp1,expected_class,emitted_class,class_match\n\
                    0,0,0,1,1,1\n1,0,2.5e-13,1,1,1\n\
                    # rows=2 max_abs_dp=2.5e-13 mismatches=0 wall_clock_s=0.001\n";
        let r = HarnessReport::parse(text).unwrap();
        assert_eq!(r.summary.rows, 2);
        let eq = EquivalenceReport::check(&sample(), &r, 1e-12).unwrap();
        assert!(eq.passed);
        assert_eq!(eq.max_abs_dp, 2.5e-13);
        let eq = EquivalenceReport::check(&sample(), &r, 1e-13).unwrap();
        assert!(!eq.passed);
        let flipped = text.replace("1,0,2.5e-13,1,1,1", "1,0,2.5e-13,1,0,0");
        let eq = EquivalenceReport::check(&sample(), &HarnessReport::parse(&flipped).unwrap(), 1e-12).unwrap();
        assert_eq!(eq.class_mismatches, 1);
        assert!(!eq.passed);
    }

    #[test]
    fn report_without_summary_is_rejected() {
        assert!(HarnessReport::parse("row,a,b,c,d,e\n0,0,0,1,1,1\n").is_err());
    }
}
