//! Confusion counts, rates and the ROC curve for a trained model.
//!
//! ```bash
//! cargo run --release --example evaluate_roc
//! ```

use superlearn::flowdata::{stratified_split, synth_generate_with, SynthConfig};
use superlearn::metrics::{confusion, roc_auc};
use superlearn::stacker::{train_super_learner, StackConfig};
use superlearn::Encoder;

pub fn run_example() -> superlearn::Result<()> {
    // heavier camouflage makes the curve worth looking at
    let data = synth_generate_with(&SynthConfig {
        n: 800,
        camouflage: 0.3,
        seed: 9,
        ..SynthConfig::default()
    });
    let (train, valid) = stratified_split(&data, 0.7, 9)?;
    let model = train_super_learner(&train, Encoder::default(), &StackConfig::with_seed(9))?;

    let mut scores = Vec::with_capacity(valid.len());
    for v in &valid {
        scores.push(model.predict_proba(&v.values)?[1]);
    }
    let labels: Vec<u8> = valid.iter().map(|v| v.label).collect();

    for threshold in [0.25, 0.5, 0.75] {
        let c = confusion(&scores, &labels, threshold)?;
        println!(
            "threshold {threshold:.2}: tp {} fp {} tn {} fn {}  accuracy {:.2}%",
            c.tp,
            c.fp,
            c.tn,
            c.fn_,
            c.accuracy()
        );
    }
    let roc = roc_auc(&scores, &labels)?;
    println!("AUC {:.4} over {} curve points", roc.auc, roc.points.len());
    for (fpr, tpr) in roc.points.iter().step_by((roc.points.len() / 8).max(1)) {
        println!("  fpr {fpr:.3}  tpr {tpr:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> superlearn::Result<()> {
    run_example()
}
