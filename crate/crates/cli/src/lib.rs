//! Library surface of the `klab` command-line tool: configuration,
//! scenario execution, verification battery, artifact writers.

pub mod artifacts;
pub mod config;
pub mod scenario;
pub mod verify;
