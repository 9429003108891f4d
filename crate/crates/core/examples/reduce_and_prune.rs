//! Shrink a trained stack under an accuracy gate, then strip dead MLP units.
//!
//! ```bash
//! cargo run --release --example reduce_and_prune
//! ```

use superlearn::flowdata::{stratified_split, synth_generate};
use superlearn::optimizer::{feature_reduction_loop, ReductionSchedule};
use superlearn::stacker::StackConfig;
use superlearn::Encoder;

pub fn run_example() -> superlearn::Result<()> {
    let data = synth_generate(600, 0.69, 3);
    let (train, valid) = stratified_split(&data, 0.8, 3)?;
    let schedule = ReductionSchedule {
        forest_sizes: vec![20, 10],
        timing_repetitions: 1,
        ..ReductionSchedule::default()
    };
    let (model, report) = feature_reduction_loop(&train, &valid, &Encoder::default(), &StackConfig::with_seed(3), &schedule)?;
    print!("{}", report.table());
    println!(
        "kept {} trees, hidden {:?} / {:?}, {} parameters",
        report.final_n_trees,
        report.final_intermediate_hidden,
        report.final_meta_hidden,
        model.parameter_count()
    );
    for (stage, stats) in [("intermediate", &report.intermediate_pruning), ("meta", &report.meta_pruning)] {
        if let Some(s) = stats {
            println!("{stage}: pruned {} units in {} passes", s.removed(), s.passes);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> superlearn::Result<()> {
    run_example()
}
