// Each example is compiled into this test crate as a module and run in-process.

macro_rules! example {
    ($module:ident, $test:ident, $file:literal) => {
        #[allow(dead_code)]
        #[path = $file]
        mod $module;

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(gen_and_train, gen_and_train_runs, "../examples/gen_and_train.rs");
example!(zeek_ingest, zeek_ingest_runs, "../examples/zeek_ingest.rs");
example!(reduce_and_prune, reduce_and_prune_runs, "../examples/reduce_and_prune.rs");
example!(emit_c, emit_c_runs, "../examples/emit_c.rs");
example!(evaluate_roc, evaluate_roc_runs, "../examples/evaluate_roc.rs");
example!(duplicate_trees, duplicate_trees_runs, "../examples/duplicate_trees.rs");
