//! Result files: one JSON record per line, a text summary and a run manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use discspec_core::exactalg::{UniPoly, Var};
use discspec_core::pipeline::scan::ConstraintCheck;
use discspec_core::pipeline::{ScanStats, SpecializationRecord, TargetSpec};
use discspec_core::specialize::{GroupCertificate, PrimeSource, PrimeStatus, Ramification};

pub const RECORD_SCHEMA: &str = "discspec-record/1";
pub const MANIFEST_SCHEMA: &str = "discspec-manifest/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeLine {
    pub p: String,
    pub in_s0: bool,
    pub ramified: bool,
    pub source: String,
    /// v_p of the field discriminant, when determined.
    pub disc_exponent: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckLine {
    pub kind: String,
    pub p: u64,
    pub expected: String,
    pub observed: String,
    pub ok: bool,
}

/// One line of results.jsonl. Integers of unbounded size are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLine {
    pub schema: String,
    pub family: String,
    pub label: String,
    pub t0: [String; 2],
    pub working_t0: [String; 2],
    /// Coefficients of g, ascending in X.
    pub g: Vec<String>,
    pub f_value: String,
    pub delta: String,
    pub nonreduced: Option<String>,
    pub primes: Vec<PrimeLine>,
    pub certificate: String,
    pub certificate_detail: GroupCertificate,
    pub fingerprint: String,
    pub checks: Vec<CheckLine>,
    pub target: TargetSpec,
}

fn source_name(s: PrimeSource) -> &'static str {
    match s {
        PrimeSource::SitPredicted => "sit",
        PrimeSource::OracleConfirmed => "oracle",
        PrimeSource::OracleUndetermined => "krasner",
    }
}

fn parse_source(s: &str) -> anyhow::Result<PrimeSource> {
    Ok(match s {
        "sit" => PrimeSource::SitPredicted,
        "oracle" => PrimeSource::OracleConfirmed,
        "krasner" => PrimeSource::OracleUndetermined,
        _ => anyhow::bail!("unknown prime source {s:?}"),
    })
}

fn big(s: &str) -> anyhow::Result<BigInt> {
    s.parse().map_err(|_| anyhow::anyhow!("malformed integer {s:?}"))
}

impl RecordLine {
    pub fn new(rec: &SpecializationRecord, label: &str, spec: &TargetSpec) -> Self {
        RecordLine {
            schema: RECORD_SCHEMA.into(),
            family: rec.family.clone(),
            label: label.into(),
            t0: [rec.t0.0.to_string(), rec.t0.1.to_string()],
            working_t0: [rec.working_t0.0.to_string(), rec.working_t0.1.to_string()],
            g: rec.g.coeffs().iter().map(|c| c.to_string()).collect(),
            f_value: rec.f_value.to_string(),
            delta: rec.delta.to_string(),
            nonreduced: rec.nonreduced.as_ref().map(|d| d.to_string()),
            primes: rec
                .primes
                .iter()
                .map(|s| PrimeLine {
                    p: s.p.to_string(),
                    in_s0: s.in_s0,
                    ramified: s.ramified,
                    source: source_name(s.source).into(),
                    disc_exponent: s.disc_exponent,
                })
                .collect(),
            certificate: rec.certificate.label(),
            certificate_detail: rec.certificate.clone(),
            fingerprint: rec.fingerprint.clone(),
            checks: rec
                .checks
                .iter()
                .map(|c| CheckLine {
                    kind: c.kind.clone(),
                    p: c.p,
                    expected: c.expected.clone(),
                    observed: c.observed.clone(),
                    ok: c.ok,
                })
                .collect(),
            target: spec.clone(),
        }
    }

    /// Rebuild the record for re-verification. Local oracle details that are
    /// not serialized are left undetermined; the verifier recomputes them.
    pub fn to_record(&self) -> anyhow::Result<SpecializationRecord> {
        anyhow::ensure!(self.schema == RECORD_SCHEMA, "unsupported record schema {:?}", self.schema);
        let g = UniPoly::new(self.g.iter().map(|c| big(c)).collect::<anyhow::Result<_>>()?, Var::X);
        let primes = self
            .primes
            .iter()
            .map(|l| {
                Ok(PrimeStatus {
                    p: l.p.parse::<BigUint>().map_err(|_| anyhow::anyhow!("malformed prime {:?}", l.p))?,
                    in_s0: l.in_s0,
                    predicted: None,
                    oracle: Ramification::Undetermined,
                    ramified: l.ramified,
                    source: parse_source(&l.source)?,
                    disc_exponent: l.disc_exponent,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(SpecializationRecord {
            family: self.family.clone(),
            working_t0: (big(&self.working_t0[0])?, big(&self.working_t0[1])?),
            t0: (big(&self.t0[0])?, big(&self.t0[1])?),
            g,
            f_value: big(&self.f_value)?,
            delta: big(&self.delta)?,
            primes,
            nonreduced: self.nonreduced.as_deref().map(big).transpose()?,
            certificate: self.certificate_detail.clone(),
            fingerprint: self.fingerprint.clone(),
            checks: self
                .checks
                .iter()
                .map(|c| ConstraintCheck {
                    kind: c.kind.clone(),
                    p: c.p,
                    expected: c.expected.clone(),
                    observed: c.observed.clone(),
                    ok: c.ok,
                })
                .collect(),
            contradictions: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsLine {
    pub tried: u64,
    pub coprime: u64,
    pub squarefree_hits: u64,
    pub squarefree_undetermined: u64,
    pub residue_hits: u64,
    pub certified_hits: u64,
    pub oracle_undetermined: u64,
}

impl From<&ScanStats> for StatsLine {
    fn from(s: &ScanStats) -> Self {
        StatsLine {
            tried: s.tried,
            coprime: s.coprime,
            squarefree_hits: s.squarefree_hits,
            squarefree_undetermined: s.squarefree_undetermined,
            residue_hits: s.residue_hits,
            certified_hits: s.certified_hits,
            oracle_undetermined: s.oracle_undetermined,
        }
    }
}

impl std::ops::AddAssign<&ScanStats> for StatsLine {
    fn add_assign(&mut self, s: &ScanStats) {
        self.tried += s.tried;
        self.coprime += s.coprime;
        self.squarefree_hits += s.squarefree_hits;
        self.squarefree_undetermined += s.squarefree_undetermined;
        self.residue_hits += s.residue_hits;
        self.certified_hits += s.certified_hits;
        self.oracle_undetermined += s.oracle_undetermined;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// Budget exhausted with at least one target unmet.
    Misses,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub command: Vec<String>,
    pub family: Option<String>,
    /// sha256 of the family configuration text.
    pub config_hash: Option<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub budget: Option<u64>,
    pub version: String,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Krasner exponent m, basepoint and S_0 used (stand-ins for the
    /// non-effective thresholds).
    pub krasner_m: Option<u32>,
    pub basepoint: Option<[String; 2]>,
    pub s0: Vec<u64>,
    pub s0_override: Option<Vec<u64>>,
    pub stats: StatsLine,
    pub records: usize,
    /// sha256 of results.jsonl.
    pub results_hash: String,
    pub elapsed_ms: u128,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialize records, one per line.
pub fn results_payload(lines: &[RecordLine]) -> anyhow::Result<String> {
    let mut out = String::new();
    for l in lines {
        out.push_str(&serde_json::to_string(l)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_results(path: &Path) -> anyhow::Result<Vec<RecordLine>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1)))
        .collect()
}

pub fn write_artifacts(dir: &Path, payload: &str, summary: &str, manifest: &Manifest) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.jsonl"), payload)?;
    fs::write(dir.join("summary.txt"), summary)?;
    let mut f = fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    writeln!(f)?;
    Ok(())
}
