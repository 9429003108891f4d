#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superlearn::codegen::EmittedArtifact;
use superlearn::flowdata::{stratified_split, synth_generate, FeatureVector, FEATURE_COUNT};
use superlearn::stacker::{train_super_learner, StackConfig};
use superlearn::{Encoder, SuperLearnerModel};

/// Reads every input as 15 hex-encoded f64 bit patterns and prints the
/// returned class and both probabilities as bit patterns.
pub const BITS_DRIVER: &str = r#"
#include <stdio.h>
#include <string.h>
#include "superlearner_model.h"

int main(void)
{
    unsigned long long bits;
    double x[SL_N_FEATURES], p[2];
    int i, c;
    for (;;) {
        for (i = 0; i < SL_N_FEATURES; ++i) {
            if (scanf("%llx", &bits) != 1) {
                return 0;
            }
            memcpy(&x[i], &bits, sizeof bits);
        }
        c = sl_predict(x, p);
        printf("%d", c);
        for (i = 0; i < 2; ++i) {
            memcpy(&bits, &p[i], sizeof bits);
            printf(" %llx", bits);
        }
        printf("\n");
    }
}
"#;

pub fn c_compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    let ok = Command::new(&cc)
        .arg("--version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false);
    ok.then_some(cc)
}

/// Writes the artifact plus `extra` sources into `dir` and builds `name`.
pub fn compile(
    cc: &str,
    artifact: &EmittedArtifact,
    dir: &Path,
    extra: &[(&str, &str)],
    name: &str,
) -> PathBuf {
    artifact.write_to(dir).unwrap();
    let mut args: Vec<String> = [
        "-std=c99",
        "-O2",
        "-ffp-contract=off",
        "-Wall",
        "-Wextra",
        "-Werror",
        "-pedantic",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for (file, src) in extra {
        std::fs::write(dir.join(file), src).unwrap();
        args.push(dir.join(file).display().to_string());
    }
    args.push(dir.join("superlearner_model.c").display().to_string());
    let exe = dir.join(name);
    args.extend(["-o".to_string(), exe.display().to_string(), "-lm".to_string()]);
    let out = Command::new(cc).args(&args).output().unwrap();
    assert!(
        out.status.success(),
        "C compile failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    exe
}

/// Runs the bit driver over `inputs`, returning (class, [p0, p1]) per row.
pub fn run_bits(exe: &Path, inputs: &[[f64; FEATURE_COUNT]]) -> Vec<(u8, [f64; 2])> {
    let mut child = Command::new(exe)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut text = String::new();
    for x in inputs {
        for v in x {
            text.push_str(&format!("{:x} ", v.to_bits()));
        }
        text.push('\n');
    }
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || stdin.write_all(text.as_bytes()).unwrap());
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            let bits = |s: &str| f64::from_bits(u64::from_str_radix(s, 16).unwrap());
            (f[0].parse().unwrap(), [bits(f[1]), bits(f[2])])
        })
        .collect()
}

pub fn small_model(seed: u64) -> (SuperLearnerModel, Vec<FeatureVector>, Vec<FeatureVector>) {
    let data = synth_generate(600, 0.69, seed);
    let (train, valid) = stratified_split(&data, 0.8, seed).unwrap();
    let model = train_super_learner(&train, Encoder::default(), &StackConfig::with_seed(seed)).unwrap();
    (model, train, valid)
}

/// Dataset rows followed by random perturbations and wide random vectors.
pub fn probe_inputs(data: &[FeatureVector], n: usize, seed: u64) -> Vec<[f64; FEATURE_COUNT]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<[f64; FEATURE_COUNT]> = data.iter().map(|v| v.values).collect();
    while out.len() < n {
        let mut x = data[rng.random_range(0..data.len())].values;
        if rng.random_bool(0.5) {
            for v in &mut x {
                *v *= rng.random_range(0.5..1.5);
            }
        } else {
            for v in &mut x {
                *v = rng.random_range(-1e4..1e5);
            }
        }
        out.push(x);
    }
    out.truncate(n);
    out
}

/// Random ReLU MLP with every weight and bias bounded away from zero.
pub fn random_mlp(rng: &mut ChaCha8Rng, sizes: &[usize]) -> superlearn::learners::MlpModel {
    use superlearn::learners::{Activation, DenseLayer, MlpModel};
    let mut layers = Vec::new();
    for (k, w) in sizes.windows(2).enumerate() {
        let act = if k + 2 == sizes.len() { Activation::Softmax } else { Activation::Relu };
        let mut l = DenseLayer::zeros(w[0], w[1], act);
        for v in l.weights.iter_mut().chain(l.biases.iter_mut()) {
            let mag = rng.random_range(0.1..1.0);
            *v = if rng.random_bool(0.5) { mag } else { -mag };
        }
        layers.push(l);
    }
    MlpModel::from_layers(layers).unwrap()
}

/// Kills up to `n` hidden units, leaving at least one live unit per layer:
/// either every outgoing weight is zeroed, or every incoming weight and the
/// bias. Returns the number killed.
pub fn inject_dead(rng: &mut ChaCha8Rng, mlp: &mut superlearn::learners::MlpModel, n: usize) -> usize {
    let hidden = mlp.layers.len() - 1;
    let mut dead: Vec<Vec<bool>> = (0..hidden).map(|k| vec![false; mlp.layers[k].n_out]).collect();
    let mut killed = 0;
    for _ in 0..n * 4 {
        if killed == n {
            break;
        }
        let k = rng.random_range(0..hidden);
        let j = rng.random_range(0..dead[k].len());
        let live = dead[k].iter().filter(|d| !**d).count();
        if dead[k][j] || live <= 1 {
            continue;
        }
        dead[k][j] = true;
        killed += 1;
        if rng.random_bool(0.5) {
            let next = &mut mlp.layers[k + 1];
            for o in 0..next.n_out {
                next.weights[o * next.n_in + j] = 0.0;
            }
        } else {
            let layer = &mut mlp.layers[k];
            for i in 0..layer.n_in {
                layer.weights[j * layer.n_in + i] = 0.0;
            }
            layer.biases[j] = 0.0;
        }
    }
    killed
}

/// Zeros, signed large magnitudes, unit corners and random points.
pub fn adversarial_probes(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim], vec![1e6; dim], vec![-1e6; dim], vec![-1.0; dim]];
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1e3;
        out.push(e);
    }
    while out.len() < n {
        let scale = [1.0, 10.0, 1e4][rng.random_range(0..3)];
        out.push((0..dim).map(|_| rng.random_range(-scale..scale)).collect());
    }
    out
}
