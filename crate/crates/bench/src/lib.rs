//! Criterion benchmarks for `contextium`; see `benches/`.
