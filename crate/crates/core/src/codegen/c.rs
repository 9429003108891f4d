use std::fmt::Write as _;

use super::fragments::{
    emit_forest_counted, emit_logreg_counted, emit_mlp_counted, emit_tree_counted, DataUse,
};
use super::{
    EmitOptions, EmittedArtifact, Manifest, SourceFile, ENTRY_SYMBOL, HEADER_FILE, SOURCE_FILE,
};
use crate::flowdata::{Encoder, FEATURE_COUNT};
use crate::optimizer::sha256_hex;
use crate::stacker::{model_to_json, SuperLearnerModel, STACK_WIDTH};
use crate::Result;

/// Escapes `s` as the body of a C string literal. Anything outside printable
/// ASCII becomes a three-digit octal escape, which cannot swallow the
/// following character.
fn c_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for b in s.bytes() {
        match b {
            b'"' => out.push_str("\\\""),
            b'\\' => out.push_str("\\\\"),
            b'?' => out.push_str("\\?"),
            0x20..=0x7e => out.push(b as char),
            _ => {
                let _ = write!(out, "\\{b:03o}");
            }
        }
    }
    out.push('"');
    out
}

fn emit_encoder(enc: &Encoder) -> (String, usize) {
    let mut out = String::new();
    let mut bytes = 0;
    let mut cases = String::new();
    for (feature, name, dict) in enc.dictionaries() {
        let ident = format!("sl_cat_{}", name.replace('.', "_"));
        let _ = writeln!(out, "/* feature {feature}: {name} */");
        if dict.is_empty() {
            let _ = writeln!(out, "static const char *const {ident}[1] = {{ 0 }};");
            bytes += 8;
        } else {
            let _ = write!(out, "static const char *const {ident}[{}] = {{", dict.len());
            for v in dict.values() {
                let _ = write!(out, "\n    {},", c_string(v));
                bytes += 8 + v.len() + 1;
            }
            out.push_str("\n};\n");
        }
        let _ = writeln!(
            cases,
            "    case {feature}: return sl_lookup({ident}, {}, value);",
            dict.len()
        );
    }
    let _ = write!(
        out,
        "\nstatic int sl_streq(const char *a, const char *b)\n{{\n    \
         while (*a != '\\0' && *a == *b) {{\n        ++a;\n        ++b;\n    }}\n    \
         return *a == *b;\n}}\n\n\
         static int sl_lookup(const char *const *table, int n, const char *value)\n{{\n    \
         int i;\n    \
         if (value == 0) {{\n        return 0;\n    }}\n    \
         for (i = 0; i < n; ++i) {{\n        \
         if (sl_streq(table[i], value)) {{\n            return i + 1;\n        }}\n    }}\n    \
         return 0;\n}}\n\n\
         int sl_encode_category(int feature_index, const char *value)\n{{\n    \
         switch (feature_index) {{\n{cases}    default: return -1;\n    }}\n}}\n"
    );
    (out, bytes)
}

fn header(opts: &EmitOptions, hash: &str) -> String {
    let f = opts.float;
    format!(
        "/* Generated by superlearn {ver}; do not edit.\n \
         * model sha256: {hash}\n \
         * arithmetic: {real}\n \
         */\n\
         #ifndef SUPERLEARNER_MODEL_H\n\
         #define SUPERLEARNER_MODEL_H\n\n\
         #define SL_N_FEATURES {FEATURE_COUNT}\n\
         #define SL_N_CLASSES 2\n\n\
         /* Writes [P(benign), P(malicious)] to proba_out and returns the\n \
         * predicted class (1 only when P(malicious) > P(benign)).\n \
         * features are the encoded flow features in the fixed column order. */\n\
         int {ENTRY_SYMBOL}(const double features[SL_N_FEATURES], double proba_out[SL_N_CLASSES]);\n\n\
         /* Code of a categorical value for feature_index (0, 2, 4, 5, 9 or 10):\n \
         * 1-based position in the training dictionary, 0 when unseen or NULL,\n \
         * -1 when feature_index is not categorical. */\n\
         int sl_encode_category(int feature_index, const char *value);\n\n\
         #endif\n",
        ver = env!("CARGO_PKG_VERSION"),
        real = f.ctype(),
    )
}

/// Emits `superlearner_model.h` and `superlearner_model.c` for a finalized
/// model. Output depends only on the model and options.
pub fn emit_super_learner(model: &SuperLearnerModel, opts: &EmitOptions) -> Result<EmittedArtifact> {
    let hash = sha256_hex(&model_to_json(model)?);
    let f = opts.float;
    let real = f.ctype();
    let mut data = DataUse::default();
    let mut add = |d: DataUse| {
        data.reals += d.reals;
        data.ints += d.ints;
    };

    let (forest, d) = emit_forest_counted(&model.base().random_forest, "sl_base_forest", opts)?;
    add(d);
    let (logreg, d) = emit_logreg_counted(&model.base().logistic_regression, "sl_base_logreg", opts);
    add(d);
    let (tree, d) = emit_tree_counted(&model.intermediate().decision_tree, "sl_mid_tree", opts)?;
    add(d);
    let (mid_mlp, d) = emit_mlp_counted(&model.intermediate().mlp, "sl_mid_mlp", opts);
    add(d);
    let (meta, d) = emit_mlp_counted(model.meta(), "sl_meta_mlp", opts);
    add(d);
    let (encoder, string_bytes) = emit_encoder(model.encoder());

    let mut src = String::new();
    let _ = write!(
        src,
        "/* Generated by superlearn {ver}; do not edit.\n \
         * model sha256: {hash}\n \
         * Build with floating-point contraction disabled (for example\n \
         * -ffp-contract=off) to reproduce the reference probabilities exactly. */\n\
         #include <math.h>\n\n\
         #include \"{HEADER_FILE}\"\n\n",
        ver = env!("CARGO_PKG_VERSION"),
    );
    for (title, code) in [
        ("base layer: random forest", &forest),
        ("base layer: logistic regression", &logreg),
        ("intermediate layer: decision tree", &tree),
        ("intermediate layer: mlp", &mid_mlp),
        ("meta layer: mlp", &meta),
        ("categorical encoders", &encoder),
    ] {
        let _ = writeln!(src, "/* {title} */\n{code}");
    }
    let w = STACK_WIDTH;
    let (load, store) = match f {
        super::FloatWidth::F64 => (
            "    const double *x = features;\n".to_string(),
            "    proba_out[0] = p[0];\n    proba_out[1] = p[1];\n",
        ),
        super::FloatWidth::F32 => (
            format!(
                "    float x[{FEATURE_COUNT}];\n    int i;\n    \
                 for (i = 0; i < {FEATURE_COUNT}; ++i) {{\n        x[i] = (float)features[i];\n    }}\n"
            ),
            "    proba_out[0] = (double)p[0];\n    proba_out[1] = (double)p[1];\n",
        ),
    };
    let _ = write!(
        src,
        "int {ENTRY_SYMBOL}(const double features[SL_N_FEATURES], double proba_out[SL_N_CLASSES])\n{{\n\
         {load}    \
         {real} s1[{w}], s2[{w}], p[2];\n    \
         sl_base_forest(x, p);\n    s1[0] = p[0];\n    s1[1] = p[1];\n    \
         sl_base_logreg(x, p);\n    s1[2] = p[0];\n    s1[3] = p[1];\n    \
         sl_mid_tree(s1, p);\n    s2[0] = p[0];\n    s2[1] = p[1];\n    \
         sl_mid_mlp(s1, p);\n    s2[2] = p[0];\n    s2[3] = p[1];\n    \
         sl_meta_mlp(s2, p);\n\
         {store}    \
         return proba_out[1] > proba_out[0] ? 1 : 0;\n}}\n"
    );

    let hdr = header(opts, &hash);
    let source_bytes = src.len() + hdr.len();
    let width = model.intermediate().mlp.max_width().max(model.meta().max_width());
    // entry locals + one mlp frame (two buffers, softmax temporaries) + the
    // forest accumulators, plus ~32 bytes of frame overhead per call level
    let stack_depth_estimate = (FEATURE_COUNT + 2 * w + 2) * f.bytes()
        + (2 * width + 5) * f.bytes()
        + 4 * f.bytes()
        + 3 * 32;
    let manifest = Manifest {
        entry_symbol: ENTRY_SYMBOL.into(),
        files: vec![HEADER_FILE.into(), SOURCE_FILE.into()],
        float_width: f,
        tree_style: opts.tree_style,
        parameter_count: model.parameter_count(),
        source_bytes,
        static_data_bytes: data.bytes(f) + string_bytes,
        stack_depth_estimate,
        model_hash: hash,
    };
    Ok(EmittedArtifact {
        source_files: vec![
            SourceFile {
                name: HEADER_FILE.into(),
                contents: hdr,
            },
            SourceFile {
                name: SOURCE_FILE.into(),
                contents: src,
            },
        ],
        entry_symbol: ENTRY_SYMBOL.into(),
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strings_are_escaped() {
        assert_eq!(c_string("tcp"), "\"tcp\"");
        assert_eq!(c_string("a\"b\\c"), "\"a\\\"b\\\\c\"");
        assert_eq!(c_string("é"), "\"\\303\\251\"");
        assert_eq!(c_string("??="), "\"\\?\\?=\"");
    }
}
