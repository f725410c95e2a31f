//! Family configuration files.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use discspec_core::exactalg::{BiPoly, UniPoly, Var};
use discspec_core::specialize::{CertificateTarget, Family, InfinityBranch};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("malformed number {0:?}")]
    Number(String),
    #[error("term {0:?} must be a triple (i, j, c)")]
    Term(Vec<Coefficient>),
    #[error("{0}")]
    Family(#[from] discspec_core::error::Error),
}

/// An integer written either as a TOML integer or as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Int(i64),
    Text(String),
}

impl Coefficient {
    pub fn to_bigint(&self) -> Result<BigInt, ConfigError> {
        match self {
            Coefficient::Int(v) => Ok(BigInt::from(*v)),
            Coefficient::Text(s) => s.trim().parse().map_err(|_| ConfigError::Number(s.clone())),
        }
    }

    fn to_exponent(&self) -> Result<u32, ConfigError> {
        let v = self.to_bigint()?;
        u32::try_from(&v).map_err(|_| ConfigError::Number(v.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default)]
    pub survey_primes: Vec<u64>,
    #[serde(default)]
    pub include_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub provenance: Option<String>,
    /// Triples (i, j, c) for the term c·X^i·T^j.
    pub terms: Vec<Vec<Coefficient>>,
    #[serde(default)]
    pub infinity_branch: Option<InfinityBranch>,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub group_order: Option<u64>,
    #[serde(default)]
    pub certificate: CertificateTarget,
    #[serde(default)]
    pub inertia_indices: Option<Vec<u32>>,
    #[serde(default)]
    pub s0_override: Option<Vec<u64>>,
    #[serde(default)]
    pub s0_extra: Vec<u64>,
    #[serde(default)]
    pub unconditional: bool,
    #[serde(default)]
    pub perfect: bool,
    /// Polynomials in T, coefficients ascending.
    #[serde(default)]
    pub branch_factors: Option<Vec<Vec<Coefficient>>>,
    #[serde(default)]
    pub expected: Option<Expected>,
}

impl FamilyConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn polynomial(&self) -> Result<BiPoly, ConfigError> {
        let mut acc: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
        for t in &self.terms {
            let [i, j, c] = t.as_slice() else {
                return Err(ConfigError::Term(t.clone()));
            };
            *acc.entry((i.to_exponent()?, j.to_exponent()?)).or_default() += c.to_bigint()?;
        }
        Ok(BiPoly::from_terms(acc, (Var::X, Var::T)))
    }

    /// Validated family; branch data is computed so that an undetectable
    /// infinity branch is reported here rather than mid-search.
    pub fn to_family(&self) -> Result<Family, ConfigError> {
        let mut fam = Family::new(self.name.clone(), self.polynomial()?)?;
        fam.infinity = self.infinity_branch.unwrap_or_default();
        fam.group = self.group.clone();
        fam.group_order = self.group_order;
        fam.certificate = self.certificate;
        fam.inertia_indices = self.inertia_indices.clone();
        fam.s0_override = self.s0_override.clone();
        fam.s0_extra = self.s0_extra.clone();
        fam.unconditional = self.unconditional;
        fam.perfect = self.perfect;
        if let Some(bfs) = &self.branch_factors {
            let polys = bfs
                .iter()
                .map(|c| Ok(UniPoly::new(c.iter().map(Coefficient::to_bigint).collect::<Result<_, _>>()?, Var::T)))
                .collect::<Result<Vec<_>, ConfigError>>()?;
            fam.branch_factors = Some(polys);
        }
        fam.branch_data()?;
        Ok(fam)
    }
}

pub fn parse_family(text: &str) -> Result<Family, ConfigError> {
    FamilyConfig::parse(text)?.to_family()
}
