//! Versioned JSON model file.
//!
//! Layout (keys in this order):
//!
//! ```text
//! {
//!   "format": "superlearn-model",
//!   "format_version": 1,
//!   "created": "...",
//!   "seed": 7,
//!   "config": { StackConfig },
//!   "provenance": { "input_sha256": ..., "run_config": ... },
//!   "learner_order": { "base": [...], "intermediate": [...], "meta": [...] },
//!   "encoder": { feature: [categories in code order] },
//!   "base": { "random_forest": ..., "logistic_regression": ... },
//!   "intermediate": { "decision_tree": ..., "mlp": ... },
//!   "meta": { "mlp": ... },
//!   "finalized": true
//! }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so `save → load → save` is byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{BaseLayer, IntermediateLayer, Provenance, SuperLearnerModel};
use super::{StackConfig, BASE_LEARNERS, INTERMEDIATE_LEARNERS, META_LEARNERS};
use crate::flowdata::Encoder;
use crate::learners::MlpModel;
use crate::{Error, Result};

pub const FORMAT_NAME: &str = "superlearn-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LearnerOrder {
    base: Vec<String>,
    intermediate: Vec<String>,
    meta: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MetaLayer {
    mlp: MlpModel,
}

#[derive(Serialize, Deserialize)]
struct FileProvenance {
    input_sha256: Option<String>,
    run_config: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    format_version: u32,
    created: String,
    seed: u64,
    config: StackConfig,
    provenance: FileProvenance,
    learner_order: LearnerOrder,
    encoder: Encoder,
    base: BaseLayer,
    intermediate: IntermediateLayer,
    meta: MetaLayer,
    finalized: bool,
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Canonical model file bytes.
pub fn model_to_json(model: &SuperLearnerModel) -> Result<Vec<u8>> {
    if !model.is_finalized() {
        return Err(Error::NotFinalized);
    }
    let file = ModelFile {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION,
        created: model.provenance.created.clone(),
        seed: model.config.seed,
        config: model.config.clone(),
        provenance: FileProvenance {
            input_sha256: model.provenance.input_sha256.clone(),
            run_config: model.provenance.run_config.clone(),
        },
        learner_order: LearnerOrder {
            base: names(&BASE_LEARNERS),
            intermediate: names(&INTERMEDIATE_LEARNERS),
            meta: names(&META_LEARNERS),
        },
        encoder: model.encoder.clone(),
        base: model.base.clone(),
        intermediate: model.intermediate.clone(),
        meta: MetaLayer {
            mlp: model.meta.clone(),
        },
        finalized: true,
    };
    let mut bytes = serde_json::to_vec(&file)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn expect_eq(field: &str, expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Schema {
            field: field.into(),
            expected: expected.into(),
            found: found.into(),
        })
    }
}

pub fn model_from_json(bytes: &[u8]) -> Result<SuperLearnerModel> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| Error::Model(e.to_string()))?;
    let header = |key: &str| value.get(key).map_or_else(|| "<missing>".to_string(), |v| v.to_string());
    expect_eq("format", &format!("\"{FORMAT_NAME}\""), &header("format"))?;
    expect_eq("format_version", &FORMAT_VERSION.to_string(), &header("format_version"))?;

    let file: ModelFile = serde_json::from_slice(bytes).map_err(|e| Error::Model(e.to_string()))?;
    expect_eq("learner_order.base", &BASE_LEARNERS.join(","), &file.learner_order.base.join(","))?;
    expect_eq(
        "learner_order.intermediate",
        &INTERMEDIATE_LEARNERS.join(","),
        &file.learner_order.intermediate.join(","),
    )?;
    expect_eq("learner_order.meta", &META_LEARNERS.join(","), &file.learner_order.meta.join(","))?;
    if file.seed != file.config.seed {
        return Err(Error::Schema {
            field: "seed".into(),
            expected: file.config.seed.to_string(),
            found: file.seed.to_string(),
        });
    }
    if !file.finalized {
        return Err(Error::NotFinalized);
    }
    let model = SuperLearnerModel::from_parts(
        file.encoder,
        file.base,
        file.intermediate,
        file.meta.mlp,
        file.config,
    )
    .with_provenance(Provenance {
        created: file.created,
        input_sha256: file.provenance.input_sha256,
        run_config: file.provenance.run_config,
    });
    model.finalize()
}

pub fn save_model(model: &SuperLearnerModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = model_to_json(model)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SuperLearnerModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::synth_generate;
    use crate::stacker::train_super_learner;

    fn model() -> SuperLearnerModel {
        let mut c = StackConfig::with_seed(4);
        c.forest.n_trees = 3;
        c.intermediate_mlp.epochs = 5;
        c.meta_mlp.epochs = 5;
        train_super_learner(&synth_generate(120, 0.5, 3), Encoder::default(), &c).unwrap()
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let m = model();
        let a = model_to_json(&m).unwrap();
        let back = model_from_json(&a).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_json(&back).unwrap(), a);
    }

    #[test]
    fn version_mismatch_names_both_versions() {
        let text = String::from_utf8(model_to_json(&model()).unwrap()).unwrap();
        let bumped = text.replacen("\"format_version\":1", "\"format_version\":2", 1);
        match model_from_json(bumped.as_bytes()) {
            Err(Error::Schema { field, expected, found }) => {
                assert_eq!(field, "format_version");
                assert_eq!(expected, "1");
                assert_eq!(found, "2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corrupted_fields_are_errors() {
        let text = String::from_utf8(model_to_json(&model()).unwrap()).unwrap();
        for (from, to) in [
            ("\"n_in\":4", "\"n_in\":\"four\""),
            ("\"k_base\":2", "\"k_base\":-1"),
            ("\"logistic_regression\":{\"weights\":[", "\"logistic_regression\":{\"weights\":[1.0,"),
            ("\"decision_tree\"", "\"decision_trees\""),
            ("\"random_forest\",\"logistic_regression\"]", "\"logistic_regression\",\"random_forest\"]"),
        ] {
            assert!(text.contains(from), "fixture lacks {from}");
            let bad = text.replacen(from, to, 1);
            assert!(model_from_json(bad.as_bytes()).is_err(), "accepted corruption {to}");
        }
        assert!(model_from_json(&text.as_bytes()[..text.len() / 2]).is_err());
    }
}
