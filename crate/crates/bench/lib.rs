//! Criterion benchmarks for the selconv workspace live in `benches/`.
