//! The three-layer super learner: random forest + logistic regression, then
//! decision tree + MLP, then an MLP meta learner. Each layer consumes the
//! concatenated `[p0, p1]` outputs of the layer before it.

mod config;
mod model;
mod persist;
mod train;

pub use config::StackConfig;
pub use model::{layer_transform, BaseLayer, IntermediateLayer, Provenance, SuperLearnerModel};
pub use persist::{load_model, model_from_json, model_to_json, save_model, FORMAT_NAME, FORMAT_VERSION};
pub use train::{train_super_learner, train_super_learner_traced, StackTrace, StackedFeatures};

/// Learner names in layer order, as recorded in the model file.
pub const BASE_LEARNERS: [&str; 2] = ["random_forest", "logistic_regression"];
pub const INTERMEDIATE_LEARNERS: [&str; 2] = ["decision_tree", "mlp"];
pub const META_LEARNERS: [&str; 1] = ["mlp"];

/// Width of every inter-layer feature vector: two learners × two classes.
pub const STACK_WIDTH: usize = 4;
