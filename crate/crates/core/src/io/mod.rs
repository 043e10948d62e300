//! Table and network ingestion, and run configuration.

mod config;
mod network;
mod table;

pub use config::RunConfig;
pub use network::{network_groups, network_to_table, LabeledGroup, NetworkInput, NetworkMode};
pub use table::{parse_table, parse_table_str, table_to_json, TableFormat};
