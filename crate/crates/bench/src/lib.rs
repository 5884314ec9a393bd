//! Criterion benchmarks for the simulation engines; see `benches/`.
