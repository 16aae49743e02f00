//! Criterion benchmarks for the hot paths of fluxlab; run with `cargo bench -p fluxlab-bench`.
