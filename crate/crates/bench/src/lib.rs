//! Criterion benchmarks for `levymap`; see `benches/`.
