//! Benchmarks for the solver kernels; see `benches/`.
