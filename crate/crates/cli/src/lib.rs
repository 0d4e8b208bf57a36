//! Benchmark harness and instance generation behind the `qastel` CLI.

pub mod bench;
pub mod gen;
