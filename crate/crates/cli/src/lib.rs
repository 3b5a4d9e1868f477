//! Harness library: synthetic workload generation, file formats, benchmark
//! drivers, and the statistical verification suites used both by the CLI
//! and the acceptance tests.

pub mod bench;
pub mod formats;
pub mod pprcheck;
pub mod rmat;
pub mod stats;
pub mod verify;
