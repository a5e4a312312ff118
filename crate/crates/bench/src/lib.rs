//! Criterion benchmarks for galdist-core; see `benches/`.
