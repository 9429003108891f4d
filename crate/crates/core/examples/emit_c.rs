//! Transpile a trained stack to dependency-free C.
//!
//! ```bash
//! cargo run --release --example emit_c -- out/
//! cc -std=c99 -O2 -ffp-contract=off -c out/superlearner_model.c
//! ```

use superlearn::codegen::{emit_super_learner, EmitOptions, TreeStyle};
use superlearn::flowdata::synth_generate;
use superlearn::stacker::{train_super_learner, StackConfig};
use superlearn::Encoder;

pub fn run_example() -> superlearn::Result<()> {
    run(None)
}

fn run(arg: Option<String>) -> superlearn::Result<()> {
    let data = synth_generate(400, 0.69, 5);
    let model = train_super_learner(&data, Encoder::default(), &StackConfig::with_seed(5))?;

    let nested = emit_super_learner(&model, &EmitOptions::default())?;
    let table = emit_super_learner(
        &model,
        &EmitOptions {
            tree_style: TreeStyle::NodeTable,
            ..EmitOptions::default()
        },
    )?;
    for (label, a) in [("nested branches", &nested), ("node tables", &table)] {
        let m = &a.manifest;
        println!(
            "{label}: {} source bytes, {} static data bytes, entry `{}`",
            m.source_bytes, m.static_data_bytes, m.entry_symbol
        );
    }
    if let Some(header) = nested.file("superlearner_model.h") {
        print!("{header}");
    }

    let scratch;
    let dir = match arg {
        Some(d) => std::path::PathBuf::from(d),
        None => {
            scratch = tempfile::tempdir().map_err(|e| superlearn::Error::io(std::env::temp_dir(), e))?;
            scratch.path().to_path_buf()
        }
    };
    nested.write_to(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> superlearn::Result<()> {
    run(std::env::args().nth(1))
}
