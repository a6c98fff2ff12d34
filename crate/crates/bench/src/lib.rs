//! Criterion benchmarks for the solver and learners; see `benches/`.
