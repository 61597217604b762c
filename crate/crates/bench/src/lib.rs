//! Criterion benchmarks for `mehpp-core` live under `benches/`.
