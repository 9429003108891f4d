//! Generate synthetic flows, train the three-layer stack and score it on a
//! held-out split.
//!
//! ```bash
//! cargo run --release --example gen_and_train
//! ```

use superlearn::flowdata::{class_counts, stratified_split, synth_generate};
use superlearn::metrics::evaluate;
use superlearn::stacker::{train_super_learner, StackConfig};
use superlearn::Encoder;

pub fn run_example() -> superlearn::Result<()> {
    let data = synth_generate(1000, 0.69, 7);
    let [benign, malicious] = class_counts(&data);
    println!("{} flows: {benign} benign, {malicious} malicious", data.len());

    let (train, valid) = stratified_split(&data, 0.8, 7)?;
    let model = train_super_learner(&train, Encoder::default(), &StackConfig::with_seed(7))?;
    println!("layer widths {:?}, {} parameters", model.layer_dims(), model.parameter_count());

    let report = evaluate(&model, &valid, 3)?;
    print!("{}", report.table("super learner"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> superlearn::Result<()> {
    run_example()
}
