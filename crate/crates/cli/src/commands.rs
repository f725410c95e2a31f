//! Subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use discspec_core::binforms::PrimeCertificate;
use discspec_core::exactalg::integer::{squarefree_kernel, FactorBudget};
use discspec_core::exactalg::{squarefree_part, BiPoly, UniPoly, Var};
use discspec_core::pipeline::survey::SurveyOutcome;
use discspec_core::pipeline::{
    density_report, nonreduced_survey, run_survey, squarefree_scan, target_residues, targeted_search, verify_record,
    FrobeniusConstraint, ResidueConstraint, SearchContext, SignRequirement, SpecializationRecord, Survey, TargetSpec,
};
use discspec_core::specialize::{CertificateTarget, Family, InfinityBranch};

use crate::catalog::{lookup, CATALOG};
use crate::config::FamilyConfig;
use crate::output::{
    read_results, results_payload, sha256_hex, write_artifacts, Manifest, RecordLine, RunStatus, StatsLine,
    MANIFEST_SCHEMA,
};
use crate::polyparse::parse_poly;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "discspec", version, about = "Specializations of parametric Galois families with prescribed discriminant residues")]
pub struct Cli {
    /// Seed for all randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for results.jsonl, summary.txt and manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Re-verify every emitted record from its parameter alone.
    #[arg(long, global = true)]
    pub verify: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List built-in families.
    Catalog,
    /// Branch data, fixed divisors, S_0 and Krasner neighbourhood of a family.
    Analyze { family: String },
    /// Search for specializations with prescribed discriminant classes.
    Target {
        family: String,
        /// Residue constraint p:k or p^e:k on the reduced discriminant (k = 0 for strict divisibility).
        #[arg(long = "residue")]
        residues: Vec<String>,
        /// Frobenius constraint p:d1,d2,... (factor degrees of g mod p).
        #[arg(long = "frobenius")]
        frobenius: Vec<String>,
        #[arg(long, value_enum, default_value_t = Sign::Any)]
        sign: Sign,
        #[arg(long, default_value_t = 1)]
        records: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Accept records without the family's group certificate.
        #[arg(long)]
        no_certificate: bool,
    },
    /// One witness per residue class modulo a prime.
    Survey {
        family: String,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        include_zero: bool,
        /// Candidates per class.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Quadratic twists: squarefree d with Q(sqrt d) discriminant in a class, via X^2 - f(T).
    Twist {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        residue: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Growth of the number of distinct specializations by reduced discriminant.
    Density {
        family: String,
        #[arg(long, default_value_t = 200)]
        records: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Comma-separated bounds B; default powers of ten.
        #[arg(long, value_delimiter = ',')]
        bounds: Vec<String>,
    },
    /// Image of the non-reduced discriminant modulo A against e-th power cosets.
    NonreducedSurvey {
        family: String,
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        e: Option<u32>,
        #[arg(long, default_value_t = 200)]
        records: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Re-verify a results.jsonl file.
    Verify {
        results: PathBuf,
        /// Family config for records whose family is not in the catalog.
        #[arg(long)]
        family: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Sign {
    Any,
    Positive,
    Negative,
}

/// A failed precondition (exit code 2).
#[derive(Debug)]
pub struct Precondition(pub anyhow::Error);

struct Run {
    summary: String,
    lines: Vec<RecordLine>,
    status: RunStatus,
    stats: StatsLine,
    family: Option<String>,
    config_hash: Option<String>,
    budget: Option<u64>,
    context: Option<SearchContext>,
}

impl Run {
    fn new(family: Option<&Resolved>, budget: Option<u64>) -> Self {
        Run {
            summary: String::new(),
            lines: Vec::new(),
            status: RunStatus::Ok,
            stats: StatsLine::default(),
            family: family.map(|r| r.family.name.clone()),
            config_hash: family.map(|r| sha256_hex(r.text.as_bytes())),
            budget,
            context: None,
        }
    }
}

pub struct Resolved {
    pub family: Family,
    pub text: String,
}

/// Catalog name, path to a config file, or `twist:<poly>`.
pub fn resolve_family(arg: &str) -> anyhow::Result<Resolved> {
    if let Some(poly) = arg.strip_prefix("twist:") {
        let family = twist_family(poly)?;
        return Ok(Resolved { family, text: arg.to_string() });
    }
    let text = match lookup(arg) {
        Some(e) => e.text.to_string(),
        None if Path::new(arg).exists() => std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?,
        None => bail!("unknown family {arg:?}: not a catalog entry or a config file"),
    };
    let family = FamilyConfig::parse(&text)?.to_family()?;
    Ok(Resolved { family, text })
}

/// The family X^2 − f(T) for squarefree f.
pub fn twist_family(poly: &str) -> anyhow::Result<Family> {
    let f = parse_poly(poly, Var::T)?;
    if f.is_zero() || f.deg() == 0 {
        bail!("twist polynomial must be non-constant");
    }
    if squarefree_part(&f)?.deg() != f.deg() {
        bail!("twist polynomial {poly} is not squarefree");
    }
    let mut terms = vec![((2u32, 0u32), BigInt::from(1))];
    for (j, c) in f.coeffs().iter().enumerate() {
        if !c.is_zero() {
            terms.push(((0, j as u32), -c));
        }
    }
    let mut fam = Family::new(format!("twist:{poly}"), BiPoly::from_terms(terms, (Var::X, Var::T)))?;
    fam.infinity = if f.deg() % 2 == 1 { InfinityBranch::Yes } else { InfinityBranch::No };
    fam.group = Some("C2".into());
    fam.group_order = Some(2);
    fam.certificate = CertificateTarget::C2;
    fam.inertia_indices = Some(vec![1]);
    fam.branch_data()?;
    Ok(fam)
}

fn parse_residue(s: &str) -> anyhow::Result<ResidueConstraint> {
    let (m, k) = s.split_once(':').ok_or_else(|| anyhow!("residue {s:?} must be p:k or p^e:k"))?;
    let (p, e) = match m.split_once('^') {
        Some((p, e)) => (p.trim().parse()?, e.trim().parse()?),
        None => (m.trim().parse()?, 1),
    };
    Ok(ResidueConstraint { p, e, k: k.trim().parse()? })
}

fn parse_frobenius(s: &str) -> anyhow::Result<FrobeniusConstraint> {
    let (p, c) = s.split_once(':').ok_or_else(|| anyhow!("frobenius {s:?} must be p:d1,d2,..."))?;
    let mut cycle_type = c.split(',').map(|d| d.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>()?;
    cycle_type.sort_unstable();
    Ok(FrobeniusConstraint { p: p.trim().parse()?, cycle_type })
}

fn context(r: &Resolved, seed: u64) -> Result<SearchContext, Precondition> {
    SearchContext::new(&r.family, seed).map_err(|e| Precondition(anyhow!("{}: {e}", r.family.name)))
}

fn poly_str(g: &UniPoly) -> String {
    g.to_string()
}

fn record_row(rec: &SpecializationRecord) -> String {
    format!(
        "t0 = {}/{}  delta = {}  cert = {}  g = {}",
        rec.t0.0,
        rec.t0.1,
        rec.delta,
        rec.certificate.label(),
        poly_str(&rec.g)
    )
}

fn analyze(r: &Resolved, seed: u64) -> Result<Run, Precondition> {
    let mut run = Run::new(Some(r), None);
    let fam = &r.family;
    let bd = fam.branch_data().map_err(|e| Precondition(e.into()))?;
    let ctx = context(r, seed)?;
    let pf = &ctx.pf;
    let kr = &ctx.krasner;
    let s = &mut run.summary;
    let _ = writeln!(s, "family          {}", fam.name);
    let _ = writeln!(s, "f               {}", fam.f);
    let _ = writeln!(s, "degree          {} in X, {} in T", fam.degree(), fam.t_degree());
    if let Some(g) = &fam.group {
        let _ = writeln!(s, "group (declared) {g} of order {}", fam.group_order.map_or("?".into(), |o| o.to_string()));
    }
    let _ = writeln!(s, "disc_X(f)       {}", bd.disc);
    let _ = writeln!(s, "branch radical  {}", bd.radical);
    let _ = writeln!(s, "infinity        {}", if bd.infinity { "branch point" } else { "unramified" });
    let _ = writeln!(s, "branch points   {}", bd.branch_count);
    let _ = writeln!(s, "F(X,Y)          {}", bd.form);
    let _ = writeln!(s, "fixed primes    {:?}", pf.fixed.fixed_primes);
    let _ = writeln!(s, "fixed squares   {:?}", pf.fixed.fixed_squares);
    for (p, c) in &pf.fixed.certificates {
        match c {
            PrimeCertificate::Witness { x, y, value } => {
                let _ = writeln!(s, "  p = {p}: F({x}, {y}) = {value} mod {p}");
            }
            PrimeCertificate::VanishesIdentically => {
                let _ = writeln!(s, "  p = {p}: F vanishes on all of F_{p}^2");
            }
        }
    }
    if let Some(t) = &pf.transform {
        let _ = writeln!(s, "working         S = {} * T, content removed {}", pf.n0, t.content);
        for st in &t.steps {
            let _ = writeln!(
                s,
                "  step {}: multiplier {}, content {}",
                st.prime.map_or("lc".into(), |p| p.to_string()),
                st.multiplier,
                st.content_removed
            );
        }
    } else {
        let _ = writeln!(s, "working         S = T (no fixed prime divisors)");
    }
    let _ = writeln!(s, "working form    {}", pf.form);
    let _ = writeln!(s, "S0");
    for (p, reasons) in &pf.s0.primes {
        let rs: Vec<String> = reasons.iter().map(|r| format!("{r:?}")).collect();
        let _ = writeln!(s, "  {p:>6}  {}", rs.join(", "));
    }
    if let Some(o) = &pf.s0.override_set {
        let _ = writeln!(s, "S0 override     {:?} (informational)", o);
    }
    let _ = writeln!(s, "basepoint       ({} : {})", kr.basepoint.0, kr.basepoint.1);
    let _ = writeln!(s, "Krasner m       {} (modulus N^m with N = {})", kr.m, kr.n);
    let _ = writeln!(s, "N'              {}", kr.n_prime);
    for (p, st) in &kr.statuses {
        let _ = writeln!(s, "  {p:>6}  {st:?}");
    }
    run.context = Some(ctx);
    Ok(run)
}

fn target(
    r: &Resolved,
    seed: u64,
    spec: TargetSpec,
) -> Result<Run, Precondition> {
    let mut run = Run::new(Some(r), Some(spec.max_candidates));
    let ctx = context(r, seed)?;
    let res = targeted_search(&ctx, &spec).map_err(|e| Precondition(e.into()))?;
    let s = &mut run.summary;
    let _ = writeln!(s, "family {}  budget {}  records wanted {}", r.family.name, spec.max_candidates, spec.max_records);
    for c in &spec.residues {
        let _ = writeln!(s, "  residue  delta = {} mod {}^{}", c.k, c.p, c.e);
    }
    for c in &spec.frobenius {
        let _ = writeln!(s, "  frobenius at {}: {:?}", c.p, c.cycle_type);
    }
    for (route, fail) in &res.failures {
        let _ = writeln!(s, "  route {} {:?}: {fail}", route.neighbourhood, route.sign);
    }
    for (route, found) in &res.scanned {
        let kr = ctx.neighbourhood(route.neighbourhood);
        let _ = writeln!(
            s,
            "  route {} {:?}: basepoint ({} : {}), N' = {}, {found} records",
            route.neighbourhood, route.sign, kr.basepoint.0, kr.basepoint.1, kr.n_prime
        );
    }
    for rec in &res.records {
        let _ = writeln!(s, "  {}", record_row(rec));
        run.lines.push(RecordLine::new(rec, "target", &spec));
    }
    if res.records.len() < spec.max_records {
        let why = if res.scanned.is_empty() { "no reachable residue class" } else { "budget exhausted" };
        let _ = writeln!(
            s,
            "no witness within budget {} for {} of {} records ({why})",
            spec.max_candidates,
            spec.max_records - res.records.len(),
            spec.max_records
        );
        run.status = RunStatus::Misses;
    }
    run.stats += &res.stats;
    let _ = writeln!(s, "{}", stats_row(&run.stats));
    run.context = Some(ctx);
    Ok(run)
}

fn stats_row(s: &StatsLine) -> String {
    format!(
        "tried {}  coprime {}  squarefree {}  sqf-undetermined {}  residue-hits {}  certified {}  oracle-undetermined {}",
        s.tried, s.coprime, s.squarefree_hits, s.squarefree_undetermined, s.residue_hits, s.certified_hits, s.oracle_undetermined
    )
}

pub fn survey_lines(survey: &Survey) -> (String, Vec<RecordLine>, StatsLine, usize) {
    let mut s = String::new();
    let mut lines = Vec::new();
    let mut stats = StatsLine::default();
    let _ = writeln!(s, "{:>6}  {:>10}  {:<32}  {:<14}  outcome", "k", "tried", "t0", "delta");
    for e in &survey.entries {
        stats += &e.stats;
        match &e.outcome {
            SurveyOutcome::Found(rec) => {
                let t0 = format!("{}/{}", rec.t0.0, rec.t0.1);
                let _ = writeln!(s, "{:>6}  {:>10}  {:<32}  {:<14}  {}", e.k, e.stats.tried, t0, rec.delta.to_string(), rec.certificate.label());
                let spec = TargetSpec {
                    residues: vec![ResidueConstraint { p: survey.p, e: 1, k: e.k }],
                    max_candidates: survey.budget,
                    seed: survey.seed,
                    ..Default::default()
                };
                lines.push(RecordLine::new(rec, &format!("survey p={} k={}", survey.p, e.k), &spec));
            }
            other => {
                let _ = writeln!(s, "{:>6}  {:>10}  {:<32}  {:<14}  {}", e.k, e.stats.tried, "-", "-", Survey::label(other, survey.budget));
            }
        }
    }
    let misses = survey.misses();
    if misses.is_empty() {
        let _ = writeln!(s, "all {} classes covered", survey.entries.len());
    } else {
        let _ = writeln!(s, "no witness within budget {} for classes {:?}", survey.budget, misses);
    }
    (s, lines, stats, misses.len())
}

fn survey(r: &Resolved, seed: u64, p: u64, include_zero: bool, budget: u64) -> Result<Run, Precondition> {
    let mut run = Run::new(Some(r), Some(budget));
    let ctx = context(r, seed)?;
    let sv = run_survey(&ctx, p, include_zero, budget, seed).map_err(|e| Precondition(e.into()))?;
    let (table, lines, stats, misses) = survey_lines(&sv);
    let _ = writeln!(run.summary, "survey of {} modulo {p}, budget {budget} per class", r.family.name);
    run.summary.push_str(&table);
    run.lines = lines;
    run.stats = stats;
    if misses > 0 {
        run.status = RunStatus::Misses;
    }
    run.context = Some(ctx);
    Ok(run)
}

/// Squarefree d with g ~ X^2 − d·s^2, and s.
pub fn twist_witness(rec: &SpecializationRecord) -> Option<(BigInt, BigInt)> {
    let (e, c) = (rec.g.coeff(0), rec.g.coeff(2));
    let prod = -(&e * &c);
    let d = squarefree_kernel(&prod, FactorBudget::default())?;
    let (q, rem) = prod.div_rem(&d);
    if !rem.is_zero() || q.is_negative() {
        return None;
    }
    let s = q.sqrt();
    (&s * &s == q).then_some((d, s))
}

fn twist(poly: &str, seed: u64, p: u64, k: u64, budget: u64) -> Result<Run, Precondition> {
    let r = resolve_family(&format!("twist:{poly}")).map_err(Precondition)?;
    let spec = TargetSpec {
        residues: vec![ResidueConstraint { p, e: 1, k }],
        max_candidates: budget,
        seed,
        ..Default::default()
    };
    let mut run = target(&r, seed, spec)?;
    let f = parse_poly(poly, Var::T).map_err(|e| Precondition(e.into()))?;
    for line in &run.lines {
        let rec = line.to_record().map_err(Precondition)?;
        let Some((d, s)) = twist_witness(&rec) else {
            return Err(Precondition(anyhow!("record at t0 = {}/{} has no quadratic witness", rec.t0.0, rec.t0.1)));
        };
        let (a, b) = &rec.t0;
        let fv = f.eval_homogeneous(a, b, f.deg());
        let c = rec.g.coeff(2);
        // f(a/b)·c^2 = d·s^2, checked as F(a, b)·c^2 = d·s^2·b^deg.
        let ok = &fv * &c * &c == &d * &s * &s * num_traits::pow(b.clone(), f.deg());
        let _ = writeln!(
            run.summary,
            "d = {d}  t0 = {a}/{b}  f(t0)*{c}^2 = {d}*{s}^2  {}",
            if ok { "verified" } else { "MISMATCH" }
        );
        if !ok {
            run.status = RunStatus::Failed;
        }
    }
    Ok(run)
}

fn default_bounds(max: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut b = BigInt::from(10);
    loop {
        out.push(b.clone());
        if &b >= max {
            break;
        }
        b *= 10;
    }
    out
}

fn density(r: &Resolved, seed: u64, records: usize, budget: u64, bounds: &[String]) -> Result<Run, Precondition> {
    let mut run = Run::new(Some(r), Some(budget));
    let ctx = context(r, seed)?;
    let spec = TargetSpec { max_candidates: budget, max_records: records, seed, ..Default::default() };
    let l = target_residues(&ctx.pf, &ctx.krasner, &spec)
        .map_err(|e| Precondition(e.into()))?
        .map_err(|f| Precondition(anyhow!("{f}")))?;
    let res = squarefree_scan(&ctx, &l, &spec);
    let grid: Vec<BigInt> = if bounds.is_empty() {
        let max = res.records.iter().map(|r| r.delta.abs()).max().unwrap_or_else(|| BigInt::from(10));
        default_bounds(&max)
    } else {
        bounds
            .iter()
            .map(|b| b.trim().parse::<BigInt>().map_err(|_| Precondition(anyhow!("malformed bound {b:?}"))))
            .collect::<Result<_, _>>()?
    };
    let rep = density_report(&res.records, &grid);
    let s = &mut run.summary;
    let _ = writeln!(s, "density of {}: {} records from {} candidates", r.family.name, res.records.len(), res.stats.tried);
    let _ = writeln!(s, "{:>24}  {:>10}", "B", "distinct");
    for (b, c) in &rep.rows {
        let _ = writeln!(s, "{b:>24}  {c:>10}");
    }
    match rep.slope {
        Some(sl) if rep.usable => {
            let _ = writeln!(s, "log-log slope {sl:.4}");
        }
        _ => {
            let _ = writeln!(s, "log-log slope unavailable: too few nonzero rows");
        }
    }
    for rec in &res.records {
        run.lines.push(RecordLine::new(rec, "density", &spec));
    }
    run.stats += &res.stats;
    if res.records.len() < records {
        run.status = RunStatus::Misses;
    }
    run.context = Some(ctx);
    Ok(run)
}

fn nonreduced(r: &Resolved, seed: u64, a: u64, e: Option<u32>, records: usize, budget: u64) -> Result<Run, Precondition> {
    let mut run = Run::new(Some(r), Some(budget));
    let ctx = context(r, seed)?;
    let rep = nonreduced_survey(&ctx, a, e, budget, records).map_err(|e| Precondition(e.into()))?;
    let s = &mut run.summary;
    let _ = writeln!(s, "non-reduced discriminants of {} modulo {a}", r.family.name);
    let _ = writeln!(s, "e = {} ({}), e-th power subgroup of size {}", rep.e, rep.e_source, rep.subgroup_size);
    let _ = writeln!(s, "records used {}, excluded {}", rep.records_used, rep.records_excluded);
    let _ = writeln!(s, "observed classes {:?}", rep.observed);
    for c in &rep.cosets {
        let _ = writeln!(s, "  coset of {:>6}: {} of {} classes observed", c.representative, c.observed, c.size);
    }
    let _ = writeln!(s, "all observed classes in the subgroup: {}", rep.within_subgroup);
    let _ = writeln!(s, "observed cosets complete: {}", rep.cosets_closed());
    run.stats += &rep.stats;
    if rep.records_used == 0 {
        run.status = RunStatus::Misses;
    }
    run.context = Some(ctx);
    Ok(run)
}

/// Verify serialized records; returns (summary, failures).
pub fn verify_lines(lines: &[RecordLine], seed: u64, family_override: Option<&str>) -> anyhow::Result<(String, usize)> {
    let mut contexts: BTreeMap<String, SearchContext> = BTreeMap::new();
    let mut s = String::new();
    let mut failures = 0;
    for (i, line) in lines.iter().enumerate() {
        if !contexts.contains_key(&line.family) {
            let r = match family_override {
                Some(f) => resolve_family(f)?,
                None => resolve_family(&line.family)?,
            };
            let ctx = SearchContext::new(&r.family, seed).map_err(|e| anyhow!("{}: {e}", line.family))?;
            contexts.insert(line.family.clone(), ctx);
        }
        let ctx = &contexts[&line.family];
        let rec = line.to_record()?;
        let rep = verify_record(ctx, &rec, &line.target);
        if rep.ok() {
            let note = if rep.assumed.is_empty() { String::new() } else { format!(" (S0 statuses taken from the record at {:?})", rep.assumed) };
            let _ = writeln!(s, "record {}: ok{note}", i + 1);
        } else {
            failures += 1;
            let _ = writeln!(s, "record {}: FAILED {}", i + 1, rep.failures.join("; "));
        }
    }
    let _ = writeln!(s, "{} of {} records verified", lines.len() - failures, lines.len());
    Ok((s, failures))
}

fn catalog() -> Run {
    let mut run = Run::new(None, None);
    for e in CATALOG {
        let desc = e.config().ok().and_then(|c| c.description).unwrap_or_default();
        let _ = writeln!(run.summary, "{:<14} {desc}", e.name);
    }
    run
}

fn build_spec(
    seed: u64,
    residues: &[String],
    frobenius: &[String],
    sign: Sign,
    records: usize,
    budget: u64,
    no_certificate: bool,
) -> anyhow::Result<TargetSpec> {
    Ok(TargetSpec {
        residues: residues.iter().map(|r| parse_residue(r)).collect::<anyhow::Result<_>>()?,
        frobenius: frobenius.iter().map(|r| parse_frobenius(r)).collect::<anyhow::Result<_>>()?,
        sign: match sign {
            Sign::Any => SignRequirement::Any,
            Sign::Positive => SignRequirement::Positive,
            Sign::Negative => SignRequirement::Negative,
        },
        max_candidates: budget,
        max_records: records,
        seed,
        require_certificate: !no_certificate,
        ..Default::default()
    })
}

fn dispatch(cli: &Cli) -> Result<Run, Precondition> {
    let pre = Precondition;
    let seed = cli.seed;
    match &cli.command {
        Command::Catalog => Ok(catalog()),
        Command::Analyze { family } => analyze(&resolve_family(family).map_err(pre)?, seed),
        Command::Target { family, residues, frobenius, sign, records, budget, no_certificate } => {
            let r = resolve_family(family).map_err(pre)?;
            let spec = build_spec(seed, residues, frobenius, *sign, *records, *budget, *no_certificate).map_err(pre)?;
            target(&r, seed, spec)
        }
        Command::Survey { family, prime, include_zero, budget } => {
            survey(&resolve_family(family).map_err(pre)?, seed, *prime, *include_zero, *budget)
        }
        Command::Twist { poly, prime, residue, budget } => twist(poly, seed, *prime, *residue, *budget),
        Command::Density { family, records, budget, bounds } => {
            density(&resolve_family(family).map_err(pre)?, seed, *records, *budget, bounds)
        }
        Command::NonreducedSurvey { family, modulus, e, records, budget } => {
            nonreduced(&resolve_family(family).map_err(pre)?, seed, *modulus, *e, *records, *budget)
        }
        Command::Verify { results, family } => {
            let lines = read_results(results).map_err(pre)?;
            let (summary, failures) = verify_lines(&lines, seed, family.as_deref()).map_err(pre)?;
            let mut run = Run::new(None, None);
            run.summary = summary;
            if failures > 0 {
                run.status = RunStatus::Failed;
            }
            Ok(run)
        }
    }
}

/// Result of one invocation: exit code plus the text printed to stdout and stderr.
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let command: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Execution { code, stdout: text, stderr: String::new() }
            } else {
                Execution { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let start = Instant::now();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Precondition(e.into())),
        },
        None => dispatch(&cli),
    };
    let mut stderr = String::new();
    let mut run = match result {
        Ok(run) => run,
        Err(Precondition(e)) => {
            stderr = format!("error: {e:#}\n");
            let mut run = Run::new(None, None);
            run.status = RunStatus::Failed;
            run
        }
    };
    let payload = match results_payload(&run.lines) {
        Ok(p) => p,
        Err(e) => {
            stderr.push_str(&format!("error: {e:#}\n"));
            run.status = RunStatus::Failed;
            String::new()
        }
    };
    if cli.verify && !run.lines.is_empty() {
        let reparsed: anyhow::Result<Vec<RecordLine>> =
            payload.lines().map(|l| serde_json::from_str(l).map_err(anyhow::Error::from)).collect();
        match reparsed.and_then(|lines| verify_lines(&lines, cli.seed, None)) {
            Ok((text, failures)) => {
                run.summary.push_str(&text);
                if failures > 0 {
                    run.status = RunStatus::Failed;
                }
            }
            Err(e) => {
                stderr.push_str(&format!("verification error: {e:#}\n"));
                run.status = RunStatus::Failed;
            }
        }
    }
    if let Some(dir) = &cli.out {
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA.into(),
            command,
            family: run.family.clone(),
            config_hash: run.config_hash.clone(),
            seed: cli.seed,
            threads: cli.threads,
            budget: run.budget,
            version: env!("CARGO_PKG_VERSION").into(),
            status: run.status,
            error: (!stderr.is_empty()).then(|| stderr.trim().to_string()),
            krasner_m: run.context.as_ref().map(|c| c.krasner.m),
            basepoint: run.context.as_ref().map(|c| [c.krasner.basepoint.0.to_string(), c.krasner.basepoint.1.to_string()]),
            s0: run.context.as_ref().map(|c| c.pf.s0.list()).unwrap_or_default(),
            s0_override: run.context.as_ref().and_then(|c| c.pf.s0.override_set.as_ref().map(|o| o.iter().copied().collect())),
            stats: run.stats.clone(),
            records: run.lines.len(),
            results_hash: sha256_hex(payload.as_bytes()),
            elapsed_ms: start.elapsed().as_millis(),
        };
        if let Err(e) = write_artifacts(dir, &payload, &run.summary, &manifest) {
            stderr.push_str(&format!("error writing {}: {e:#}\n", dir.display()));
            run.status = RunStatus::Failed;
        }
    }
    let code = match run.status {
        RunStatus::Ok => 0,
        RunStatus::Misses => 3,
        RunStatus::Failed => 2,
    };
    Execution { code, stdout: run.summary, stderr }
}
