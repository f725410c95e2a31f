//! Expanding-shell scan of a lattice class for squarefree F-values.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::exactalg::fp::reduce_big;
use crate::exactalg::integer::{squarefree_integer, FactorBudget, SquarefreeVerdict};
use crate::exactalg::UniPoly;
use crate::specialize::certificate::{fingerprint_panel, group_certificate, DEFAULT_PRIME_BUDGET};
use crate::specialize::discriminant::{reduced_discriminant, DiscMode, PrimeStatus};
use crate::specialize::local::{frobenius_cycle_type, FrobeniusType, Ramification};
use crate::specialize::{CertificateTarget, GroupCertificate};

use crate::error::Result;

use super::target::{target_route, Lattice, Route, SignRequirement, TargetFailure, TargetSpec};
use super::{Krasner, SearchContext};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub kind: String,
    pub p: u64,
    pub expected: String,
    pub observed: String,
    pub ok: bool,
}

/// A certified specialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecializationRecord {
    pub family: String,
    /// Parameter (x : y) of the working family S = N_0·T.
    pub working_t0: (BigInt, BigInt),
    /// Parameter (a : b) of the original family.
    pub t0: (BigInt, BigInt),
    pub g: UniPoly,
    /// Working branch form at (x, y).
    pub f_value: BigInt,
    pub delta: BigInt,
    pub primes: Vec<PrimeStatus>,
    pub nonreduced: Option<BigInt>,
    pub certificate: GroupCertificate,
    pub fingerprint: String,
    pub checks: Vec<ConstraintCheck>,
    pub contradictions: Vec<BigUint>,
}

impl SpecializationRecord {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanStats {
    pub tried: u64,
    pub coprime: u64,
    pub squarefree_hits: u64,
    pub squarefree_undetermined: u64,
    pub residue_hits: u64,
    pub certified_hits: u64,
    pub oracle_undetermined: u64,
}

impl std::ops::AddAssign<&ScanStats> for ScanStats {
    fn add_assign(&mut self, o: &ScanStats) {
        self.tried += o.tried;
        self.coprime += o.coprime;
        self.squarefree_hits += o.squarefree_hits;
        self.squarefree_undetermined += o.squarefree_undetermined;
        self.residue_hits += o.residue_hits;
        self.certified_hits += o.certified_hits;
        self.oracle_undetermined += o.oracle_undetermined;
    }
}

impl ScanStats {
    pub fn hit_rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.squarefree_hits as f64 / self.tried as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub records: Vec<SpecializationRecord>,
    pub stats: ScanStats,
    pub lattice: Lattice,
    /// Budget ran out before `max_records` were found.
    pub exhausted: bool,
    /// (B, number of records with |δ| ≤ B).
    pub count_vs_bound: Vec<(BigInt, usize)>,
}

enum Outcome {
    NotCoprime,
    Rejected,
    NotSquarefree,
    SquarefreeUndetermined,
    /// Squarefree but failed a residue/sign/strictness check.
    Squarefree,
    /// Squarefree and residues fine, failed later checks.
    Residue { undetermined: u64 },
    Certified(Box<SpecializationRecord>, u64),
    /// Passed every cheap filter; full certification still to run.
    Pending,
}

pub(crate) fn certificate_ok(target: CertificateTarget, n: usize, c: &GroupCertificate) -> bool {
    match target {
        CertificateTarget::Sn => c.is_proven_sn(n),
        CertificateTarget::C2 => matches!(c, GroupCertificate::ProvenC2 { .. }),
        CertificateTarget::Fingerprint => !matches!(c, GroupCertificate::Inconclusive { .. }),
    }
}

fn pow_u64(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Residue checks of δ against the target.
pub(crate) fn residue_checks(delta: &BigInt, spec: &TargetSpec) -> Vec<ConstraintCheck> {
    spec.residues
        .iter()
        .map(|c| {
            let q = pow_u64(c.p, c.e);
            let observed = delta.mod_floor(&q);
            let ok = if c.is_zero_class() {
                let p = BigInt::from(c.p);
                (delta % &p).is_zero() && !(delta % (&p * &p)).is_zero()
            } else {
                observed == BigInt::from(c.k)
            };
            ConstraintCheck {
                kind: if c.is_zero_class() { "strict-divisibility".into() } else { "residue".into() },
                p: c.p,
                expected: format!("{} mod {}", c.k, q),
                observed: observed.to_string(),
                ok,
            }
        })
        .collect()
}

pub(crate) fn frobenius_checks(g: &UniPoly, spec: &TargetSpec) -> Vec<ConstraintCheck> {
    spec.frobenius
        .iter()
        .map(|fc| {
            let t = frobenius_cycle_type(g, fc.p).ok();
            let observed = match &t {
                Some(FrobeniusType::Cycle(c)) => format!("{c:?}"),
                _ => "ramified".into(),
            };
            ConstraintCheck {
                kind: "frobenius".into(),
                p: fc.p,
                expected: format!("{:?}", fc.cycle_type),
                observed,
                ok: t == Some(FrobeniusType::Cycle(fc.cycle_type.clone())),
            }
        })
        .collect()
}

/// Full certification of one parameter; `None` on any hard failure.
pub fn build_record(
    ctx: &SearchContext,
    kr: &Krasner,
    x: &BigInt,
    y: &BigInt,
    spec: &TargetSpec,
    budget: FactorBudget,
) -> Option<SpecializationRecord> {
    let pf = &ctx.pf;
    let (_, rd) = reduced_discriminant(
        &pf.working,
        &pf.s0,
        x,
        y,
        DiscMode::Audited,
        Some(&kr.statuses),
        budget,
    )
    .ok()?;
    let t0 = pf.original_t0(x, y);
    // The same field from the original family at (a : b).
    let g = crate::specialize::specialize_at(&pf.original, &t0.0, &t0.1).ok()?;
    let certificate = group_certificate(&g, DEFAULT_PRIME_BUDGET);
    let mut checks = residue_checks(&rd.delta, spec);
    checks.extend(frobenius_checks(&g, spec));
    Some(SpecializationRecord {
        family: pf.original.name.clone(),
        working_t0: (x.clone(), y.clone()),
        t0,
        fingerprint: fingerprint_panel(&g),
        f_value: pf.form.evaluate(x, y),
        delta: rd.delta.clone(),
        nonreduced: rd.nonreduced(),
        primes: rd.primes.clone(),
        certificate,
        checks,
        contradictions: rd.contradictions.clone(),
        g,
    })
}

fn prefilter(ctx: &SearchContext, l: &Lattice, spec: &TargetSpec, x: &BigInt, y: &BigInt, budget: FactorBudget) -> Outcome {
    let pf = &ctx.pf;
    if !x.gcd(y).is_one() {
        return Outcome::NotCoprime;
    }
    let v = pf.form.evaluate(x, y);
    if v.is_zero() {
        return Outcome::Rejected;
    }
    for sign in [spec.sign, l.route.sign] {
        match sign {
            SignRequirement::Positive if !v.is_positive() => return Outcome::Rejected,
            SignRequirement::Negative if !v.is_negative() => return Outcome::Rejected,
            _ => {}
        }
    }
    if let Some(c) = spec.coprime_to {
        if !v.gcd(&BigInt::from(c)).is_one() {
            return Outcome::Rejected;
        }
    }
    // Cheap residue prefilter with the predicted δ = N'·|v|/u, u the S_0-part
    // of v, which is constant on the neighbourhood.
    let kr = ctx.neighbourhood(l.route.neighbourhood);
    let (u, w) = pf.s0.split(&v);
    if u != kr.s0_part {
        return Outcome::Rejected;
    }
    let verdict = squarefree_integer(&w, budget);
    let predicted = &kr.n_prime * w.abs();
    let residues_ok = residue_checks(&predicted, spec).iter().all(|c| c.ok);
    match verdict {
        SquarefreeVerdict::Squarefree(_) if !residues_ok => return Outcome::Squarefree,
        SquarefreeVerdict::Squarefree(_) => {}
        SquarefreeVerdict::NotSquarefree(_) => return Outcome::NotSquarefree,
        SquarefreeVerdict::Undetermined => return Outcome::SquarefreeUndetermined,
    }
    // Frobenius prefilter on the working specialization.
    for fc in &spec.frobenius {
        let Ok(g) = crate::specialize::specialize_at(&pf.working, x, y) else {
            return Outcome::Squarefree;
        };
        if frobenius_cycle_type(&g, fc.p).ok() != Some(FrobeniusType::Cycle(fc.cycle_type.clone())) {
            return Outcome::Residue { undetermined: 0 };
        }
    }
    Outcome::Pending
}

fn certify(ctx: &SearchContext, l: &Lattice, spec: &TargetSpec, x: &BigInt, y: &BigInt, budget: FactorBudget) -> Outcome {
    let pf = &ctx.pf;
    let Some(rec) = build_record(ctx, ctx.neighbourhood(l.route.neighbourhood), x, y, spec, budget) else {
        return Outcome::Squarefree;
    };
    let undetermined = rec
        .primes
        .iter()
        .filter(|s| s.oracle == Ramification::Undetermined)
        .count() as u64;
    if !rec.all_checks_pass() || !rec.contradictions.is_empty() {
        return Outcome::Residue { undetermined };
    }
    if spec.require_certificate && !certificate_ok(pf.original.certificate, pf.original.degree(), &rec.certificate) {
        return Outcome::Residue { undetermined };
    }
    Outcome::Certified(Box::new(rec), undetermined)
}

/// Lattice points of shell r in scan order (x ascending, then y).
fn shell(l: &Lattice, r: u64) -> Vec<(BigInt, BigInt)> {
    let r = r as i64;
    let jmin = if l.b.is_zero() { 1 } else { 0 };
    let mut out = Vec::new();
    for i in -r..=r {
        for jj in 0..=r {
            if i.abs().max(jj) != r {
                continue;
            }
            let j = jj + jmin;
            out.push((&l.a + &l.modulus * i, &l.b + &l.modulus * j));
        }
    }
    out
}

const FIRST_BATCH: usize = 64;
const MAX_BATCH: usize = 2048;

/// Scan the lattice in expanding shells; work is split across the current
/// rayon pool and merged in shell order.
pub fn squarefree_scan(ctx: &SearchContext, lattice: &Lattice, spec: &TargetSpec) -> SearchResult {
    let budget = FactorBudget::default();
    let mut stats = ScanStats::default();
    let mut records = Vec::new();
    let mut r = 0u64;
    let mut exhausted = true;
    let mut batch_size = FIRST_BATCH;
    'outer: loop {
        if spec.max_height.is_some_and(|h| r > h) || stats.tried >= spec.max_candidates {
            break;
        }
        let mut batch = Vec::new();
        while batch.len() < batch_size && spec.max_height.is_none_or(|h| r <= h) {
            batch.extend(shell(lattice, r));
            r += 1;
        }
        batch_size = (batch_size * 2).min(MAX_BATCH);
        let remaining = (spec.max_candidates - stats.tried) as usize;
        batch.truncate(remaining);
        let mut outcomes: Vec<Option<Outcome>> = batch
            .par_iter()
            .map(|(x, y)| Some(prefilter(ctx, lattice, spec, x, y, budget)))
            .collect();
        let pending: Vec<usize> = (0..outcomes.len())
            .filter(|&i| matches!(outcomes[i], Some(Outcome::Pending)))
            .collect();
        let chunk = rayon::current_num_threads().max(1);
        let mut next_pending = 0;
        for i in 0..outcomes.len() {
            if matches!(outcomes[i], Some(Outcome::Pending)) {
                // Certify the next few pending candidates together; results
                // past the stopping point are discarded unseen.
                let ids = &pending[next_pending..(next_pending + chunk).min(pending.len())];
                let done: Vec<Outcome> = ids
                    .par_iter()
                    .map(|&j| certify(ctx, lattice, spec, &batch[j].0, &batch[j].1, budget))
                    .collect();
                for (&j, o) in ids.iter().zip(done) {
                    outcomes[j] = Some(o);
                }
                next_pending += ids.len();
            }
            stats.tried += 1;
            match outcomes[i].take().expect("outcome computed") {
                Outcome::NotCoprime => continue,
                Outcome::Rejected | Outcome::NotSquarefree => {}
                Outcome::SquarefreeUndetermined => stats.squarefree_undetermined += 1,
                Outcome::Squarefree => stats.squarefree_hits += 1,
                Outcome::Residue { undetermined } => {
                    stats.squarefree_hits += 1;
                    stats.residue_hits += 1;
                    stats.oracle_undetermined += undetermined;
                }
                Outcome::Certified(rec, undetermined) => {
                    stats.squarefree_hits += 1;
                    stats.residue_hits += 1;
                    stats.certified_hits += 1;
                    stats.oracle_undetermined += undetermined;
                    records.push(*rec);
                }
                Outcome::Pending => unreachable!("pending candidates are certified before use"),
            }
            stats.coprime += 1;
            if records.len() >= spec.max_records {
                exhausted = false;
                break 'outer;
            }
        }
    }
    let count_vs_bound = count_vs_bound(&records);
    SearchResult { records, stats, lattice: lattice.clone(), exhausted, count_vs_bound }
}

/// Records gathered over several routes under one candidate budget.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutedSearch {
    pub records: Vec<SpecializationRecord>,
    pub stats: ScanStats,
    /// Routes scanned, in order, with the number of records each produced.
    pub scanned: Vec<(Route, usize)>,
    /// Routes whose residue targets had no solution.
    pub failures: Vec<(Route, TargetFailure)>,
}

/// Signs tried for the F-value. A nonzero residue target can be met with
/// either sign of F, by aiming F̂ at ±k·N'^{-1}.
fn route_signs(spec: &TargetSpec) -> Vec<SignRequirement> {
    let nonzero = spec.residues.iter().any(|c| !c.is_zero_class());
    match spec.sign {
        SignRequirement::Any if nonzero => vec![SignRequirement::Positive, SignRequirement::Negative],
        s => vec![s],
    }
}

/// Scan the primary Krasner neighbourhood with each admissible sign, then the
/// alternative neighbourhoods (other values of N'), until `max_records` are
/// found or the shared candidate budget is spent.
pub fn targeted_search(ctx: &SearchContext, spec: &TargetSpec) -> Result<RoutedSearch> {
    let signs = route_signs(spec);
    let mut out = RoutedSearch::default();
    let mut i = 0;
    while let Some(kr) = ctx.try_neighbourhood(i) {
        for &sign in &signs {
            if out.records.len() >= spec.max_records || out.stats.tried >= spec.max_candidates {
                return Ok(out);
            }
            let route = Route { neighbourhood: i, sign };
            match target_route(&ctx.pf, kr, spec, route)? {
                Err(f) => out.failures.push((route, f)),
                Ok(l) => {
                    let sub = TargetSpec {
                        max_candidates: spec.max_candidates - out.stats.tried,
                        max_records: spec.max_records - out.records.len(),
                        ..spec.clone()
                    };
                    let res = squarefree_scan(ctx, &l, &sub);
                    out.stats += &res.stats;
                    out.scanned.push((route, res.records.len()));
                    out.records.extend(res.records);
                }
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Counts of records with |δ| ≤ 10^j for j up to the largest δ.
pub fn count_vs_bound(records: &[SpecializationRecord]) -> Vec<(BigInt, usize)> {
    let Some(max) = records.iter().map(|r| r.delta.abs()).max() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut b = BigInt::from(10);
    loop {
        out.push((b.clone(), records.iter().filter(|r| r.delta.abs() <= b).count()));
        if b >= max {
            break;
        }
        b *= 10;
    }
    out
}

/// δ mod q for reporting.
pub fn delta_mod(rec: &SpecializationRecord, q: u64) -> u64 {
    reduce_big(&rec.delta, q)
}

/// Whether δ is divisible by a given prime.
pub fn delta_divisible(rec: &SpecializationRecord, p: u64) -> bool {
    (&rec.delta % BigInt::from(p)).is_zero()
}

pub fn bits(n: &BigInt) -> u64 {
    n.bits()
}

pub fn to_u64(n: &BigInt) -> Option<u64> {
    n.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::target::{target_residues, ResidueConstraint};
    use crate::pipeline::testfam::*;
    use crate::pipeline::SearchContext;

    #[test]
    fn shells_cover_box() {
        let l = Lattice {
            route: Default::default(),
            modulus: BigInt::from(10),
            a: BigInt::from(3),
            b: BigInt::from(0),
            solutions: vec![],
            frobenius_classes: vec![],
        };
        assert_eq!(shell(&l, 0), vec![(BigInt::from(3), BigInt::from(10))]);
        assert_eq!(shell(&l, 1).len(), 5);
        assert_eq!(shell(&l, 2).len(), 9);
    }

    #[test]
    fn trinomial_scan_finds_class() {
        let ctx = SearchContext::new(&trinomial5(), 0).unwrap();
        let spec = TargetSpec { residues: vec![ResidueConstraint { p: 7, e: 1, k: 3 }], ..Default::default() };
        let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
        let res = squarefree_scan(&ctx, &l, &spec);
        assert_eq!(res.records.len(), 1, "{:?}", res.stats);
        let rec = &res.records[0];
        assert_eq!(delta_mod(rec, 7), 3);
        assert!(rec.certificate.is_proven_sn(5));
        assert!(rec.all_checks_pass());
    }

    #[test]
    fn c2_scan_zero_class() {
        let ctx = SearchContext::new(&c2(), 0).unwrap();
        let spec = TargetSpec { residues: vec![ResidueConstraint { p: 11, e: 1, k: 0 }], ..Default::default() };
        let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
        let res = squarefree_scan(&ctx, &l, &spec);
        let rec = &res.records[0];
        assert!(delta_divisible(rec, 11));
        assert!(matches!(rec.certificate, GroupCertificate::ProvenC2 { .. }));
    }
}
