//! Command-line driver: family catalog, configuration parsing and result files.

pub mod catalog;
pub mod commands;
pub mod config;
pub mod output;
pub mod polyparse;

pub use commands::{execute, resolve_family, Execution};
pub use config::{parse_family, FamilyConfig};
