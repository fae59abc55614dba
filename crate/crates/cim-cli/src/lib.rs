//! Library half of the `cim` command-line tool: dataset fetching and the
//! experiment harness. The binary in `main.rs` is a thin argument parser
//! over these functions, which keeps them testable in-process.

pub mod dataset;
pub mod experiment;
