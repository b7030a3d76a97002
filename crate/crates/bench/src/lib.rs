//! Benchmark-only crate; see `benches/learner.rs`. No library code.
