//! Benchmarks for the sparsification pipeline live under `benches/`.
