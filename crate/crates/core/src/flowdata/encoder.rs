use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{FeatureVector, FlowRecord, BENIGN, FEATURE_COUNT, MALICIOUS};
use crate::{Error, Result};

/// Category → code dictionary in first-seen order. Codes start at 1; code 0
/// is reserved for missing and unseen values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct CategoryDict {
    values: Vec<String>,
    index: HashMap<String, u32>,
}

impl PartialEq for CategoryDict {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl From<Vec<String>> for CategoryDict {
    fn from(values: Vec<String>) -> Self {
        let mut dict = CategoryDict::default();
        for v in values {
            dict.insert(&v);
        }
        dict
    }
}

impl From<CategoryDict> for Vec<String> {
    fn from(dict: CategoryDict) -> Self {
        dict.values
    }
}

impl CategoryDict {
    fn insert(&mut self, value: &str) {
        if !self.index.contains_key(value) {
            self.values.push(value.to_string());
            self.index.insert(value.to_string(), self.values.len() as u32);
        }
    }

    pub fn code(&self, value: Option<&str>) -> u32 {
        value.and_then(|v| self.index.get(v).copied()).unwrap_or(0)
    }

    /// Categories ordered by code (code = position + 1).
    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Label encoders for the six categorical features.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub id_orig_h: CategoryDict,
    pub id_resp_h: CategoryDict,
    pub proto: CategoryDict,
    pub service: CategoryDict,
    pub conn_state: CategoryDict,
    pub history: CategoryDict,
}

impl Encoder {
    /// `(feature index, dictionary)` for every categorical feature.
    pub fn dictionaries(&self) -> [(usize, &'static str, &CategoryDict); 6] {
        [
            (0, "id.orig_h", &self.id_orig_h),
            (2, "id.resp_h", &self.id_resp_h),
            (4, "proto", &self.proto),
            (5, "service", &self.service),
            (9, "conn_state", &self.conn_state),
            (10, "history", &self.history),
        ]
    }
}

pub fn fit_encoder(records: &[FlowRecord]) -> Result<Encoder> {
    if records.is_empty() {
        return Err(Error::Data("cannot fit an encoder on zero records".into()));
    }
    let mut enc = Encoder::default();
    for r in records {
        enc.id_orig_h.insert(&r.id_orig_h);
        enc.id_resp_h.insert(&r.id_resp_h);
        enc.proto.insert(&r.proto);
        if let Some(s) = &r.service {
            enc.service.insert(s);
        }
        enc.conn_state.insert(&r.conn_state);
        if let Some(h) = &r.history {
            enc.history.insert(h);
        }
    }
    Ok(enc)
}

fn label_of(raw: &str) -> u8 {
    if raw.trim().eq_ignore_ascii_case("benign") {
        BENIGN
    } else {
        MALICIOUS
    }
}

pub fn encode(record: &FlowRecord, enc: &Encoder) -> FeatureVector {
    let code = |dict: &CategoryDict, v: Option<&str>| f64::from(dict.code(v));
    let count = |v: Option<u64>| v.map_or(0.0, |c| c as f64);
    let values: [f64; FEATURE_COUNT] = [
        code(&enc.id_orig_h, Some(&record.id_orig_h)),
        f64::from(record.id_orig_p),
        code(&enc.id_resp_h, Some(&record.id_resp_h)),
        f64::from(record.id_resp_p),
        code(&enc.proto, Some(&record.proto)),
        code(&enc.service, record.service.as_deref()),
        record.duration.unwrap_or(0.0),
        count(record.orig_bytes),
        count(record.resp_bytes),
        code(&enc.conn_state, Some(&record.conn_state)),
        code(&enc.history, record.history.as_deref()),
        record.orig_pkts as f64,
        record.orig_ip_bytes as f64,
        record.resp_pkts as f64,
        record.resp_ip_bytes as f64,
    ];
    FeatureVector {
        values,
        label: label_of(&record.label),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(proto: &str, service: Option<&str>, label: &str) -> FlowRecord {
        FlowRecord {
            id_orig_h: "192.168.1.5".into(),
            id_orig_p: 40000,
            id_resp_h: "10.0.0.1".into(),
            id_resp_p: 80,
            proto: proto.into(),
            service: service.map(Into::into),
            duration: None,
            orig_bytes: Some(12),
            resp_bytes: None,
            conn_state: "SF".into(),
            history: None,
            orig_pkts: 3,
            orig_ip_bytes: 180,
            resp_pkts: 2,
            resp_ip_bytes: 120,
            label: label.into(),
        }
    }

    #[test]
    fn first_seen_codes() {
        let recs = vec![
            record("tcp", None, "Benign"),
            record("udp", Some("dns"), "Benign"),
            record("tcp", None, "Benign"),
        ];
        let enc = fit_encoder(&recs).unwrap();
        assert_eq!(enc.proto.code(Some("tcp")), 1);
        assert_eq!(enc.proto.code(Some("udp")), 2);
        assert_eq!(enc.service.values(), ["dns".to_string()]);
        assert_eq!(fit_encoder(&recs).unwrap(), enc);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(fit_encoder(&[]).is_err());
    }

    #[test]
    fn encode_rules() {
        let enc = fit_encoder(&[record("tcp", None, "x"), record("udp", None, "x")]).unwrap();
        let v = encode(&record("icmp", None, "Benign"), &enc);
        assert_eq!(v.values[4], 0.0);
        assert_eq!(v.values[6], 0.0);
        assert_eq!(v.values[8], 0.0);
        assert_eq!(v.values[7], 12.0);
        assert_eq!(v.label, 0);
        assert_eq!(encode(&record("tcp", None, "Malicious  C&C"), &enc).label, 1);
        assert_eq!(encode(&record("tcp", None, "benign"), &enc).label, 0);
        assert_eq!(encode(&record("tcp", None, "tcp"), &enc).values[4], 1.0);
    }

    #[test]
    fn dictionary_serde_roundtrip() {
        let enc = fit_encoder(&[record("tcp", Some("http"), "x")]).unwrap();
        let json = serde_json::to_string(&enc).unwrap();
        let back: Encoder = serde_json::from_str(&json).unwrap();
        assert_eq!(back, enc);
        assert_eq!(back.service.code(Some("http")), 1);
    }
}
