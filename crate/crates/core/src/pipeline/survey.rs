//! Coverage of all residue classes modulo one prime.

use crate::error::{Error, Result};
use crate::exactalg::integer::is_prime_u64;

use super::scan::{targeted_search, ScanStats, SpecializationRecord};
use super::target::{ResidueConstraint, TargetSpec};
use super::SearchContext;

#[derive(Debug, Clone, PartialEq)]
pub enum SurveyOutcome {
    Found(Box<SpecializationRecord>),
    /// No witness within budget.
    Miss,
    /// The residue targeting step itself failed (e.g. no point on F ≡ c mod p).
    Unreachable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyEntry {
    pub k: u64,
    pub outcome: SurveyOutcome,
    pub stats: ScanStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Survey {
    pub p: u64,
    pub budget: u64,
    pub seed: u64,
    pub entries: Vec<SurveyEntry>,
}

impl Survey {
    pub fn misses(&self) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|e| !matches!(e.outcome, SurveyOutcome::Found(_)))
            .map(|e| e.k)
            .collect()
    }

    pub fn label(outcome: &SurveyOutcome, budget: u64) -> String {
        match outcome {
            SurveyOutcome::Found(_) => "found".into(),
            SurveyOutcome::Miss => format!("no witness within budget {budget} (empirical obstruction candidate at budget B = {budget})"),
            SurveyOutcome::Unreachable(why) => format!("no witness: {why}"),
        }
    }
}

/// Classes k = 1..p−1, then k = 0 if requested, each searched independently.
pub fn run_survey(ctx: &SearchContext, p: u64, include_zero: bool, budget: u64, seed: u64) -> Result<Survey> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidTarget(format!("{p} is not prime")));
    }
    if ctx.pf.s0.contains(p) {
        return Err(Error::InvalidTarget(format!("{p} lies in S0")));
    }
    let mut ks: Vec<u64> = (1..p).collect();
    if include_zero {
        ks.push(0);
    }
    let mut entries = Vec::new();
    for k in ks {
        let spec = TargetSpec {
            residues: vec![ResidueConstraint { p, e: 1, k }],
            max_candidates: budget,
            seed,
            ..Default::default()
        };
        let res = targeted_search(ctx, &spec)?;
        let outcome = match res.records.into_iter().next() {
            Some(r) => SurveyOutcome::Found(Box::new(r)),
            None if res.scanned.is_empty() => {
                let why = res.failures.first().map(|(_, f)| f.to_string()).unwrap_or_default();
                SurveyOutcome::Unreachable(format!("{why} in any neighbourhood or sign"))
            }
            None => SurveyOutcome::Miss,
        };
        entries.push(SurveyEntry { k, outcome, stats: res.stats });
    }
    Ok(Survey { p, budget, seed, entries })
}
