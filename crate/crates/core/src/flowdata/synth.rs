//! Desk-scale stand-in for IoT-23: two parameterized flow populations.
//!
//! Benign flows look like household device traffic (DNS, HTTP(S), NTP to a
//! small set of servers, completed `SF` connections with real payloads).
//! Malicious flows look like Mirai-style scanning (telnet and exploit ports on
//! thousands of random hosts, `S0`/`REJ` states, a few packets, no payload).
//! A `camouflage` fraction of malicious flows imitates benign HTTP C&C
//! polling; those flows differ from benign ones only in their byte-count and
//! destination distributions, which overlap, so the Bayes error is small but
//! non-zero.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::{FeatureVector, BENIGN, FEATURE_COUNT, MALICIOUS};
use crate::seed;

// categorical codes used by the generator
const TCP: f64 = 1.0;
const UDP: f64 = 2.0;
const SVC_NONE: f64 = 0.0;
const SVC_DNS: f64 = 1.0;
const SVC_HTTP: f64 = 2.0;
const SVC_SSL: f64 = 3.0;
const SVC_NTP: f64 = 4.0;
const STATE_SF: f64 = 1.0;
const STATE_S0: f64 = 2.0;
const STATE_REJ: f64 = 3.0;
const STATE_RSTO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    /// Fraction of flows labeled malicious.
    pub class_balance: f64,
    /// Fraction of malicious flows drawn from the benign-looking C&C population.
    pub camouflage: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            class_balance: 0.69,
            camouflage: 0.06,
            seed: 7,
        }
    }
}

fn lognormal(rng: &mut ChaCha8Rng, median: f64, sigma: f64) -> f64 {
    LogNormal::new(median.ln(), sigma)
        .expect("valid lognormal")
        .sample(rng)
}

fn ephemeral_port(rng: &mut ChaCha8Rng) -> f64 {
    f64::from(rng.random_range(32768u16..61000))
}

fn finish(v: &mut [f64; FEATURE_COUNT], orig_payload: f64, resp_payload: f64, pkts: (f64, f64)) {
    v[7] = orig_payload.round();
    v[8] = resp_payload.round();
    v[11] = pkts.0;
    v[12] = (orig_payload + 40.0 * pkts.0).round();
    v[13] = pkts.1;
    v[14] = (resp_payload + 40.0 * pkts.1).round();
}

fn benign(rng: &mut ChaCha8Rng) -> [f64; FEATURE_COUNT] {
    let mut v = [0.0; FEATURE_COUNT];
    v[0] = f64::from(rng.random_range(1u8..=8));
    v[1] = ephemeral_port(rng);
    v[2] = f64::from(rng.random_range(1u16..=40));
    let (port, proto, service) = match rng.random_range(0..10) {
        0..=2 => (53.0, UDP, SVC_DNS),
        3..=5 => (443.0, TCP, SVC_SSL),
        6..=8 => (80.0, TCP, SVC_HTTP),
        _ => (123.0, UDP, SVC_NTP),
    };
    v[3] = port;
    v[4] = proto;
    v[5] = service;
    v[6] = lognormal(rng, 0.8, 1.2);
    v[9] = if rng.random::<f64>() < 0.92 {
        STATE_SF
    } else {
        STATE_RSTO
    };
    v[10] = f64::from(rng.random_range(1u8..=4));
    let (orig, resp) = if proto == UDP {
        (lognormal(rng, 48.0, 0.3), lognormal(rng, 90.0, 0.5))
    } else {
        (lognormal(rng, 420.0, 0.9), lognormal(rng, 3500.0, 1.3))
    };
    let orig_pkts = (orig / 300.0).ceil() + f64::from(rng.random_range(0u8..3));
    let resp_pkts = (resp / 1200.0).ceil() + f64::from(rng.random_range(0u8..3));
    finish(&mut v, orig, resp, (orig_pkts, resp_pkts));
    v
}

fn scanner(rng: &mut ChaCha8Rng) -> [f64; FEATURE_COUNT] {
    const PORTS: [f64; 6] = [23.0, 2323.0, 8080.0, 37215.0, 52869.0, 80.0];
    let mut v = [0.0; FEATURE_COUNT];
    v[0] = f64::from(rng.random_range(1u8..=8));
    v[1] = ephemeral_port(rng);
    v[2] = f64::from(rng.random_range(41u16..=5000));
    v[3] = PORTS[rng.random_range(0..PORTS.len())];
    v[4] = TCP;
    v[5] = SVC_NONE;
    v[6] = if rng.random::<f64>() < 0.6 {
        0.0
    } else {
        lognormal(rng, 2.5, 0.6)
    };
    let r = rng.random::<f64>();
    v[9] = if r < 0.8 {
        STATE_S0
    } else if r < 0.95 {
        STATE_REJ
    } else {
        STATE_SF
    };
    v[10] = if v[9] == STATE_S0 { 5.0 } else { 6.0 };
    let orig_pkts = f64::from(rng.random_range(1u8..=3));
    let resp_pkts = if v[9] == STATE_S0 { 0.0 } else { 1.0 };
    finish(&mut v, 0.0, 0.0, (orig_pkts, resp_pkts));
    v
}

fn command_and_control(rng: &mut ChaCha8Rng) -> [f64; FEATURE_COUNT] {
    let mut v = [0.0; FEATURE_COUNT];
    v[0] = f64::from(rng.random_range(1u8..=8));
    v[1] = ephemeral_port(rng);
    v[2] = f64::from(rng.random_range(30u16..=60));
    v[3] = 80.0;
    v[4] = TCP;
    v[5] = SVC_HTTP;
    v[6] = lognormal(rng, 5.0, 1.0);
    v[9] = STATE_SF;
    v[10] = f64::from(rng.random_range(1u8..=4));
    let orig = lognormal(rng, 150.0, 0.6);
    let resp = lognormal(rng, 400.0, 0.8);
    let orig_pkts = (orig / 300.0).ceil() + f64::from(rng.random_range(0u8..3));
    let resp_pkts = (resp / 1200.0).ceil() + f64::from(rng.random_range(0u8..3));
    finish(&mut v, orig, resp, (orig_pkts, resp_pkts));
    v
}

pub fn synth_generate_with(config: &SynthConfig) -> Vec<FeatureVector> {
    let n_malicious = (config.n as f64 * config.class_balance).round() as usize;
    let n_malicious = n_malicious.min(config.n);
    let mut rng = seed::derived_rng(config.seed, "synth", 0);
    let mut out = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let values = if i < n_malicious {
            if rng.random::<f64>() < config.camouflage {
                command_and_control(&mut rng)
            } else {
                scanner(&mut rng)
            }
        } else {
            benign(&mut rng)
        };
        let label = if i < n_malicious { MALICIOUS } else { BENIGN };
        out.push(FeatureVector::new(values, label));
    }
    out.shuffle(&mut rng);
    out
}

/// Generates `n` flows, `round(n * class_balance)` of them malicious.
pub fn synth_generate(n: usize, class_balance: f64, seed: u64) -> Vec<FeatureVector> {
    synth_generate_with(&SynthConfig {
        n,
        class_balance,
        seed,
        ..SynthConfig::default()
    })
}
