//! Criterion benchmarks for `bernoulli-core`; run with `cargo bench -p bernoulli-bench`.
