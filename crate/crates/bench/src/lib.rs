//! Driver, generators, report format and brute-force oracle for `gpm-core`.

pub mod app;
pub mod cli;
pub mod gen;
pub mod oracle;
pub mod report;
