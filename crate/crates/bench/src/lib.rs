//! Benchmarks for holoshear live in `benches/`.
