//! A stacked super-learner ensemble for classifying Zeek network flows as
//! benign or malicious, sized for low-end AIoT devices.
//!
//! The pipeline has four stages, each in its own module:
//!
//! - [`flowdata`]: Zeek `conn.log.labeled` parsing, the 15-feature encoding,
//!   a synthetic flow generator, and stratified splits/folds.
//! - [`learners`] and [`stacker`]: random forest + logistic regression in the
//!   base layer, decision tree + MLP in the intermediate layer, and an MLP
//!   meta learner, trained with out-of-fold probability stacking.
//! - [`optimizer`]: accuracy-gated shrinking of the forest and the MLP hidden
//!   layers, duplicate-tree detection, and exact dead-node pruning.
//! - [`codegen`]: transpiles a trained model to a dependency-free C99
//!   translation unit with a single `sl_predict` entry point.
//!
//! [`metrics`] holds the evaluation harness (confusion rates, ROC/AUC,
//! timing, model size) and [`cli`] wires everything into the `superlearn`
//! binary.

pub mod cli;
pub mod codegen;
pub mod error;
pub mod flowdata;
pub mod learners;
pub mod metrics;
pub mod optimizer;
pub mod seed;
pub mod stacker;

pub use error::{Error, Result};
pub use flowdata::{Encoder, FeatureVector, FlowRecord, FEATURE_COUNT};
pub use stacker::{StackConfig, SuperLearnerModel};
