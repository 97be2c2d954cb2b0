//! Benchmarks for the pipeline stages live in `benches/`.
