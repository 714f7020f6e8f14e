//! Criterion benchmarks for the `hmcsplit` kernels. See `benches/`.
