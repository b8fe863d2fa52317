//! Criterion benchmarks for `quasiloc-core`; see `benches/kernels.rs`.
