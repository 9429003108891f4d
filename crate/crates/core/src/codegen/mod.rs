//! Transpiles a trained super learner into a freestanding C99 translation
//! unit plus header.
//!
//! The emitted code mirrors the reference engine operation for operation:
//! dot products accumulate from the bias in input order, the forest sums tree
//! probabilities in tree order and divides by the tree count, and sigmoid and
//! softmax use the same expressions. Compiled with `-ffp-contract=off` (no
//! fused multiply-add), 64-bit output matches the reference bit for bit.
//!
//! The only external symbol is `exp` (`expf` in 32-bit mode) from `<math.h>`.
//! There is no heap use, no recursion and no mutable global state.

mod c;
mod fragments;

use serde::{Deserialize, Serialize};

pub use c::emit_super_learner;
pub use fragments::{emit_forest, emit_logreg, emit_mlp, emit_tree};

/// File name of the emitted translation unit.
pub const SOURCE_FILE: &str = "superlearner_model.c";
/// File name of the emitted header.
pub const HEADER_FILE: &str = "superlearner_model.h";
/// Prediction entry point.
pub const ENTRY_SYMBOL: &str = "sl_predict";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloatWidth {
    F64,
    /// Internal arithmetic in `float`; expect ~1e-4 agreement, not bit
    /// equality.
    F32,
}

impl FloatWidth {
    pub(crate) fn ctype(self) -> &'static str {
        match self {
            FloatWidth::F64 => "double",
            FloatWidth::F32 => "float",
        }
    }

    pub(crate) fn exp(self) -> &'static str {
        match self {
            FloatWidth::F64 => "exp",
            FloatWidth::F32 => "expf",
        }
    }

    pub(crate) fn bytes(self) -> usize {
        match self {
            FloatWidth::F64 => 8,
            FloatWidth::F32 => 4,
        }
    }

    /// C literal that parses back to exactly `v` (after rounding to float
    /// in 32-bit mode).
    pub(crate) fn literal(self, v: f64) -> String {
        match self {
            FloatWidth::F64 => {
                let s = format!("{v:?}");
                if s.contains(['.', 'e', 'E']) {
                    s
                } else {
                    format!("{s}.0")
                }
            }
            FloatWidth::F32 => {
                let s = format!("{:?}", v as f32);
                if s.contains(['.', 'e', 'E']) {
                    format!("{s}f")
                } else {
                    format!("{s}.0f")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeStyle {
    /// Nested `if`/`else` over feature comparisons.
    Nested,
    /// Static node arrays walked by a bounded loop.
    NodeTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitOptions {
    pub float: FloatWidth,
    pub tree_style: TreeStyle,
    /// Deepest tree accepted in nested mode.
    pub max_nested_depth: usize,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            float: FloatWidth::F64,
            tree_style: TreeStyle::Nested,
            max_nested_depth: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub entry_symbol: String,
    pub files: Vec<String>,
    pub float_width: FloatWidth,
    pub tree_style: TreeStyle,
    pub parameter_count: usize,
    /// Source plus header bytes.
    pub source_bytes: usize,
    /// Bytes of `static const` tables (weights, node arrays, category
    /// strings and their pointer tables, at 8-byte pointers).
    pub static_data_bytes: usize,
    /// Rough upper bound on stack bytes used by one `sl_predict` call.
    pub stack_depth_estimate: usize,
    /// SHA-256 of the canonical model file the code was generated from.
    pub model_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedArtifact {
    pub source_files: Vec<SourceFile>,
    pub entry_symbol: String,
    pub manifest: Manifest,
}

impl EmittedArtifact {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.source_files
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.contents.as_str())
    }

    /// Writes every source file and `manifest.json` into `dir`.
    pub fn write_to(&self, dir: &std::path::Path) -> crate::Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
        for f in &self.source_files {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(|e| crate::Error::io(&path, e))?;
        }
        let path = dir.join("manifest.json");
        let mut json = serde_json::to_vec_pretty(&self.manifest)?;
        json.push(b'\n');
        std::fs::write(&path, json).map_err(|e| crate::Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        for v in [0.0, 1.0, 0.1, -2.5, 1e-300, 123456789.0, 1.0 / 3.0, f64::MIN_POSITIVE] {
            let s = FloatWidth::F64.literal(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(FloatWidth::F64.literal(3.0), "3.0");
        assert_eq!(FloatWidth::F32.literal(0.5), "0.5f");
    }
}
