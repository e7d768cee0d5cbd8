//! Snapshot serialization, CSV export and config files.

pub mod config;
pub mod csv;
pub mod snapshot;

pub use config::{emit_config, parse_config, parse_config_with, ConfigError, Origin};
pub use csv::{export_csv, CSV_HEADER};
pub use snapshot::{read_snapshot, snapshot_bytes, write_checkpoint, write_snapshot, Snapshot, SnapshotError};
