//! File formats and command implementations behind the `zsar` binary.
//!
//! The math and the data model live in `zsar-core`; this crate owns
//! everything that touches the filesystem: the on-disk formats, the atomic
//! write discipline, and the subcommand drivers. Kept as a library so
//! integration tests can exercise formats and commands in-process.

pub mod commands;
pub mod formats;
pub mod fsutil;
