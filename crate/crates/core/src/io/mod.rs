//! Project configuration and file formats.

mod config;
mod files;

pub use config::{ChannelSpec, DecorrelationConfig, ProjectConfig, RECEIVER_SPACING_M, SCHEMA_VERSION};
pub use files::{csv_string, read_wav, write_atomic, write_csv, write_json, write_wav};
