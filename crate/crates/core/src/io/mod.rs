//! Run manifests and output writers.

pub mod manifest;
pub mod output;

pub use manifest::{grid_keys, manifest_to_toml, parse_manifest, OutputSpec, RunManifest};
pub use output::{
    format_value, spectrum_table, write_csv, write_outputs, write_table, WrittenFiles,
};
