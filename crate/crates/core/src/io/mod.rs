//! Run configuration, the binary snapshot format and the diagnostics CSV.

pub mod config;
pub mod csv;
pub mod snapshot;

pub use config::{parse_config, InitKind, RunConfig, Solver, Subcommand};
pub use csv::{diagnostics_csv, diagnostics_header, format_number};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, FORMAT_VERSION, HEADER_LEN,
    MAGIC,
};
