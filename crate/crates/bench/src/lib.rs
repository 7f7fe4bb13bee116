//! Criterion benchmarks for ecrank-core; see `benches/`.
