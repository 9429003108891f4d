//! Find structurally identical trees in a forest.
//!
//! ```bash
//! cargo run --example duplicate_trees
//! ```

use superlearn::flowdata::synth_generate;
use superlearn::learners::{train_forest, ForestParams, MaxFeatures, Samples, TreeParams};
use superlearn::optimizer::{find_duplicate_trees, structural_hash};

pub fn run_example() -> superlearn::Result<()> {
    // shallow unbagged trees differ only through their feature draws, so
    // many of them coincide
    let params = ForestParams {
        n_trees: 30,
        tree: TreeParams {
            max_depth: Some(2),
            max_features: MaxFeatures::Sqrt,
            ..TreeParams::default()
        },
        bootstrap: false,
    };
    let samples = Samples::from_vectors(&synth_generate(300, 0.69, 1));
    let forest = train_forest(&samples, &params, 1)?;
    let groups = find_duplicate_trees(&forest);
    println!("{} trees, {} duplicate groups", forest.n_trees(), groups.len());
    for g in &groups {
        println!("  {:016x}: trees {g:?}", structural_hash(&forest.trees[g[0]]));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> superlearn::Result<()> {
    run_example()
}
