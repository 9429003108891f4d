//! Flow records, the 15-feature encoding, synthetic data and stratified
//! sampling.

mod csvio;
mod encoder;
mod split;
mod synth;
mod zeek;

use serde::{Deserialize, Serialize};

pub use csvio::{read_dataset_csv, write_dataset_csv};
pub use encoder::{encode, fit_encoder, CategoryDict, Encoder};
pub use split::{
    stratified_kfold, stratified_kfold_labels, stratified_split, stratified_split_indices,
    FoldPlan,
};
pub use synth::{synth_generate, synth_generate_with, SynthConfig};
pub use zeek::{parse_zeek_log, write_zeek_log, ParsedLog, RejectedLine};

/// Number of model input features per flow.
pub const FEATURE_COUNT: usize = 15;

/// Feature names in encoding order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
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
];

/// One labeled Zeek connection record. `None` marks a Zeek missing value
/// (`-` or `(empty)`).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub id_orig_h: String,
    pub id_orig_p: u16,
    pub id_resp_h: String,
    pub id_resp_p: u16,
    pub proto: String,
    pub service: Option<String>,
    pub duration: Option<f64>,
    pub orig_bytes: Option<u64>,
    pub resp_bytes: Option<u64>,
    pub conn_state: String,
    pub history: Option<String>,
    pub orig_pkts: u64,
    pub orig_ip_bytes: u64,
    pub resp_pkts: u64,
    pub resp_ip_bytes: u64,
    pub label: String,
}

/// Binary class label.
pub const BENIGN: u8 = 0;
pub const MALICIOUS: u8 = 1;

/// A numerically encoded flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
    /// 0 = benign, 1 = malicious.
    pub label: u8,
}

impl FeatureVector {
    pub fn new(values: [f64; FEATURE_COUNT], label: u8) -> Self {
        Self { values, label }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Per-class example counts `[benign, malicious]`.
pub fn class_counts(data: &[FeatureVector]) -> [usize; 2] {
    data.iter().fold([0, 0], |mut acc, v| {
        acc[usize::from(v.label.min(1))] += 1;
        acc
    })
}
