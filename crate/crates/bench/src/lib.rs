//! Benchmarks for the workbench live in `benches/`; run them with
//! `cargo bench -p dawb-bench`.
