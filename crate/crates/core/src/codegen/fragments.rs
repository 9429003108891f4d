use std::fmt::Write as _;

use super::{EmitOptions, FloatWidth, TreeStyle};
use crate::learners::{
    Activation, DecisionTreeModel, LogisticRegressionModel, MlpModel, Node, RandomForestModel,
};
use crate::{Error, Result};

/// Static data emitted for one fragment, for manifest accounting.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct DataUse {
    pub reals: usize,
    pub ints: usize,
}

impl DataUse {
    pub fn bytes(self, float: FloatWidth) -> usize {
        self.reals * float.bytes() + self.ints * 4
    }

    fn add(&mut self, other: DataUse) {
        self.reals += other.reals;
        self.ints += other.ints;
    }
}

fn indent(depth: usize) -> String {
    "    ".repeat(depth)
}

fn array(out: &mut String, ctype: &str, name: &str, values: impl Iterator<Item = String>) {
    let values: Vec<String> = values.collect();
    let _ = write!(out, "static const {ctype} {name}[{}] = {{", values.len());
    for (i, v) in values.iter().enumerate() {
        if i % 6 == 0 {
            out.push_str("\n    ");
        } else {
            out.push(' ');
        }
        out.push_str(v);
        out.push(',');
    }
    out.push_str("\n};\n");
}

fn nested(out: &mut String, tree: &DecisionTreeModel, node: usize, depth: usize, float: FloatWidth) {
    let pad = indent(depth);
    match tree.nodes[node] {
        Node::Leaf { counts } => {
            let p = Node::leaf_proba(counts);
            let _ = writeln!(
                out,
                "{pad}out[0] = {}; out[1] = {};",
                float.literal(p[0]),
                float.literal(p[1])
            );
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let _ = writeln!(out, "{pad}if (x[{feature}] < {}) {{", float.literal(threshold));
            nested(out, tree, left, depth + 1, float);
            let _ = writeln!(out, "{pad}}} else {{");
            nested(out, tree, right, depth + 1, float);
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

pub(crate) fn emit_tree_counted(
    tree: &DecisionTreeModel,
    name: &str,
    opts: &EmitOptions,
) -> Result<(String, DataUse)> {
    tree.validate()?;
    let real = opts.float.ctype();
    let mut out = String::new();
    match opts.tree_style {
        TreeStyle::Nested => {
            let depth = tree.depth();
            if depth > opts.max_nested_depth {
                return Err(Error::Codegen(format!(
                    "tree `{name}` has depth {depth}, above the nested-conditional limit of {}; \
                     emit with the node-table tree style instead",
                    opts.max_nested_depth
                )));
            }
            let _ = writeln!(out, "static void {name}(const {real} *x, {real} out[2])\n{{");
            if depth == 0 {
                out.push_str("    (void)x;\n");
            }
            nested(&mut out, tree, 0, 1, opts.float);
            out.push_str("}\n");
            Ok((out, DataUse::default()))
        }
        TreeStyle::NodeTable => {
            let n = tree.nodes.len();
            let (mut feature, mut threshold, mut left, mut right, mut p0, mut p1) =
                (vec![], vec![], vec![], vec![], vec![], vec![]);
            for node in &tree.nodes {
                match *node {
                    Node::Split {
                        feature: f,
                        threshold: t,
                        left: l,
                        right: r,
                    } => {
                        feature.push(f.to_string());
                        threshold.push(opts.float.literal(t));
                        left.push(l.to_string());
                        right.push(r.to_string());
                        p0.push(opts.float.literal(0.0));
                        p1.push(opts.float.literal(0.0));
                    }
                    Node::Leaf { counts } => {
                        let p = Node::leaf_proba(counts);
                        feature.push("-1".into());
                        threshold.push(opts.float.literal(0.0));
                        left.push("0".into());
                        right.push("0".into());
                        p0.push(opts.float.literal(p[0]));
                        p1.push(opts.float.literal(p[1]));
                    }
                }
            }
            array(&mut out, "int", &format!("{name}_feature"), feature.into_iter());
            array(&mut out, real, &format!("{name}_threshold"), threshold.into_iter());
            array(&mut out, "int", &format!("{name}_left"), left.into_iter());
            array(&mut out, "int", &format!("{name}_right"), right.into_iter());
            array(&mut out, real, &format!("{name}_p0"), p0.into_iter());
            array(&mut out, real, &format!("{name}_p1"), p1.into_iter());
            let _ = write!(
                out,
                "static void {name}(const {real} *x, {real} out[2])\n{{\n    \
                 int i = 0;\n    \
                 /* children always follow their parent, so this visits at most {n} nodes */\n    \
                 while ({name}_feature[i] >= 0) {{\n        \
                 i = x[{name}_feature[i]] < {name}_threshold[i] ? {name}_left[i] : {name}_right[i];\n    \
                 }}\n    \
                 out[0] = {name}_p0[i];\n    \
                 out[1] = {name}_p1[i];\n}}\n"
            );
            Ok((out, DataUse { reals: 3 * n, ints: 3 * n }))
        }
    }
}

/// C function `static void NAME(const double *x, double out[2])` returning
/// the leaf probability pair reached by `x`.
pub fn emit_tree(tree: &DecisionTreeModel, name: &str, opts: &EmitOptions) -> Result<String> {
    emit_tree_counted(tree, name, opts).map(|(s, _)| s)
}

pub(crate) fn emit_forest_counted(
    forest: &RandomForestModel,
    name: &str,
    opts: &EmitOptions,
) -> Result<(String, DataUse)> {
    let real = opts.float.ctype();
    let mut out = String::new();
    let mut data = DataUse::default();
    for (i, tree) in forest.trees.iter().enumerate() {
        let (code, d) = emit_tree_counted(tree, &format!("{name}_tree_{i}"), opts)?;
        out.push_str(&code);
        out.push('\n');
        data.add(d);
    }
    let zero = opts.float.literal(0.0);
    let _ = writeln!(
        out,
        "static void {name}(const {real} *x, {real} out[2])\n{{\n    {real} t[2];\n    {real} s0 = {zero}, s1 = {zero};"
    );
    for i in 0..forest.trees.len() {
        let _ = writeln!(out, "    {name}_tree_{i}(x, t); s0 += t[0]; s1 += t[1];");
    }
    let n = opts.float.literal(forest.trees.len() as f64);
    let _ = writeln!(out, "    out[0] = s0 / {n};\n    out[1] = s1 / {n};\n}}");
    Ok((out, data))
}

/// Mean of the emitted tree functions, summed in tree order.
pub fn emit_forest(forest: &RandomForestModel, name: &str, opts: &EmitOptions) -> Result<String> {
    emit_forest_counted(forest, name, opts).map(|(s, _)| s)
}

pub(crate) fn emit_logreg_counted(
    model: &LogisticRegressionModel,
    name: &str,
    opts: &EmitOptions,
) -> (String, DataUse) {
    let f = opts.float;
    let real = f.ctype();
    let mut out = String::new();
    array(&mut out, real, &format!("{name}_w"), model.weights.iter().map(|&w| f.literal(w)));
    let one = f.literal(1.0);
    let _ = write!(
        out,
        "static void {name}(const {real} *x, {real} out[2])\n{{\n    \
         {real} z = {bias};\n    \
         int i;\n    \
         for (i = 0; i < {d}; ++i) {{\n        z += {name}_w[i] * x[i];\n    }}\n    \
         out[1] = {one} / ({one} + {exp}(-z));\n    \
         out[0] = {one} - out[1];\n}}\n",
        bias = f.literal(model.bias),
        d = model.weights.len(),
        exp = f.exp(),
    );
    (out, DataUse {
        reals: model.weights.len() + 1,
        ints: 0,
    })
}

/// Dot product plus sigmoid over raw features (standardization is already
/// folded into the stored weights).
pub fn emit_logreg(model: &LogisticRegressionModel, name: &str, opts: &EmitOptions) -> String {
    emit_logreg_counted(model, name, opts).0
}

pub(crate) fn emit_mlp_counted(mlp: &MlpModel, name: &str, opts: &EmitOptions) -> (String, DataUse) {
    let f = opts.float;
    let real = f.ctype();
    let one = f.literal(1.0);
    let zero = f.literal(0.0);
    let mut out = String::new();
    let mut data = DataUse::default();
    for (k, layer) in mlp.layers.iter().enumerate() {
        array(&mut out, real, &format!("{name}_w{k}"), layer.weights.iter().map(|&w| f.literal(w)));
        array(&mut out, real, &format!("{name}_b{k}"), layer.biases.iter().map(|&b| f.literal(b)));
        data.reals += layer.parameter_count();
    }
    let width = mlp.max_width();
    let _ = write!(
        out,
        "static void {name}(const {real} *x, {real} out[2])\n{{\n    \
         {real} a[{width}], b[{width}], z;\n    \
         int i, j;\n    \
         for (i = 0; i < {n_in}; ++i) {{\n        a[i] = x[i];\n    }}\n",
        n_in = mlp.layers[0].n_in,
    );
    // buffers alternate a -> b -> a ...
    let mut src = "a";
    let mut dst = "b";
    for (k, layer) in mlp.layers.iter().enumerate() {
        let act = match layer.activation {
            Activation::Relu => format!("z > {zero} ? z : {zero}"),
            Activation::Sigmoid => format!("{one} / ({one} + {}(-z))", f.exp()),
            Activation::Softmax => "z".to_string(),
        };
        let _ = write!(
            out,
            "    /* layer {k}: {n_in} -> {n_out} */\n    \
             for (j = 0; j < {n_out}; ++j) {{\n        \
             z = {name}_b{k}[j];\n        \
             for (i = 0; i < {n_in}; ++i) {{\n            z += {name}_w{k}[j * {n_in} + i] * {src}[i];\n        }}\n        \
             {dst}[j] = {act};\n    }}\n",
            n_in = layer.n_in,
            n_out = layer.n_out,
        );
        std::mem::swap(&mut src, &mut dst);
    }
    let exp = f.exp();
    let _ = write!(
        out,
        "    {{\n        \
         {real} m = {src}[0] > {src}[1] ? {src}[0] : {src}[1];\n        \
         {real} e0 = {exp}({src}[0] - m);\n        \
         {real} e1 = {exp}({src}[1] - m);\n        \
         {real} s = e0 + e1;\n        \
         out[0] = e0 / s;\n        \
         out[1] = e1 / s;\n    }}\n}}\n"
    );
    (out, data)
}

/// Static weight arrays and a fixed pair of activation buffers sized to the
/// widest layer.
pub fn emit_mlp(mlp: &MlpModel, name: &str, opts: &EmitOptions) -> String {
    emit_mlp_counted(mlp, name, opts).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{DenseLayer, TreeParams};

    #[test]
    fn single_leaf_is_unconditional() {
        let code = emit_tree(&DecisionTreeModel::leaf([3, 1], 2), "t", &EmitOptions::default()).unwrap();
        assert!(code.contains("out[0] = 0.75; out[1] = 0.25;"));
        assert!(!code.contains("if ("));
    }

    #[test]
    fn stump_has_one_comparison() {
        let tree = DecisionTreeModel {
            nodes: vec![
                Node::Split {
                    feature: 1,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { counts: [1, 0] },
                Node::Leaf { counts: [0, 1] },
            ],
            n_features: 2,
            params: TreeParams::default(),
        };
        let code = emit_tree(&tree, "t", &EmitOptions::default()).unwrap();
        assert_eq!(code.matches(" < ").count(), 1);
        assert!(code.contains("if (x[1] < 0.5)"));
        let too_deep = EmitOptions {
            max_nested_depth: 0,
            ..EmitOptions::default()
        };
        let err = emit_tree(&tree, "t", &too_deep).unwrap_err().to_string();
        assert!(err.contains("node-table"), "{err}");
        let table = EmitOptions {
            tree_style: TreeStyle::NodeTable,
            max_nested_depth: 0,
            ..EmitOptions::default()
        };
        assert!(emit_tree(&tree, "t", &table).unwrap().contains("t_threshold[3]"));
    }

    #[test]
    fn zero_logreg_emits_zero_weights() {
        let code = emit_logreg(&LogisticRegressionModel::zeros(3), "lr", &EmitOptions::default());
        assert!(code.contains("double z = 0.0;"));
        assert!(code.contains("lr_w[3]"));
    }

    #[test]
    fn mlp_buffers_use_max_width() {
        let mlp = MlpModel::from_layers(vec![
            DenseLayer::zeros(4, 7, Activation::Relu),
            DenseLayer::zeros(7, 3, Activation::Relu),
            DenseLayer::zeros(3, 2, Activation::Softmax),
        ])
        .unwrap();
        let code = emit_mlp(&mlp, "m", &EmitOptions::default());
        assert!(code.contains("double a[7], b[7], z;"));
        assert!(!code.contains("malloc"));
    }
}
