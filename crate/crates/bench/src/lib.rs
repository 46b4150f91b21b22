//! Criterion benchmarks for the sieve, the statistics pipeline and the exact oracle live under `benches/`.
