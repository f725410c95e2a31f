//! Built-in families.

use crate::config::{ConfigError, FamilyConfig};

pub struct CatalogEntry {
    pub name: &'static str,
    pub text: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry { name: "c2-cubic", text: include_str!("catalog/c2-cubic.toml") },
    CatalogEntry { name: "trinomial-3", text: include_str!("catalog/trinomial-3.toml") },
    CatalogEntry { name: "trinomial-4", text: include_str!("catalog/trinomial-4.toml") },
    CatalogEntry { name: "trinomial-5", text: include_str!("catalog/trinomial-5.toml") },
    CatalogEntry { name: "belyi-sn-5", text: include_str!("catalog/belyi-sn-5.toml") },
    CatalogEntry { name: "an-5", text: include_str!("catalog/an-5.toml") },
];

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

impl CatalogEntry {
    pub fn config(&self) -> Result<FamilyConfig, ConfigError> {
        FamilyConfig::parse(self.text)
    }
}
