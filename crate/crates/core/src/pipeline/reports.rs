//! Growth-rate and non-reduced discriminant reports over collections of records.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::exactalg::fp::reduce_big;

use super::scan::{squarefree_scan, ScanStats, SpecializationRecord};
use super::target::{target_residues, TargetSpec};
use super::SearchContext;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// (B, distinct extensions with |δ| ≤ B).
    pub rows: Vec<(BigInt, usize)>,
    /// Least-squares slope of log count against log B.
    pub slope: Option<f64>,
    pub usable: bool,
}

/// Least-squares slope of log y against log x over points with y > 0.
pub fn fit_growth(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Distinct extensions are separated by (δ, fingerprint panel).
pub fn density_report(records: &[SpecializationRecord], grid: &[BigInt]) -> DensityReport {
    let distinct: BTreeSet<(BigInt, String)> = records
        .iter()
        .map(|r| (r.delta.abs(), r.fingerprint.clone()))
        .collect();
    let mut grid = grid.to_vec();
    grid.sort();
    let rows: Vec<(BigInt, usize)> = grid
        .iter()
        .map(|b| (b.clone(), distinct.iter().filter(|(d, _)| d <= b).count()))
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|(b, c)| Some((b.to_f64()?, *c as f64)))
        .collect();
    let nonzero = points.iter().filter(|p| p.1 > 0.0).count();
    let slope = fit_growth(&points);
    DensityReport { rows, slope, usable: nonzero >= 2 && slope.is_some() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosetCount {
    /// Least element of the coset u·H.
    pub representative: u64,
    pub observed: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonreducedReport {
    pub modulus: u64,
    pub e: u32,
    pub e_source: String,
    pub records_used: usize,
    pub records_excluded: usize,
    pub observed: BTreeSet<u64>,
    /// Size of the subgroup of e-th powers of units mod A.
    pub subgroup_size: usize,
    pub cosets: Vec<CosetCount>,
    /// Every observed class lies in the e-th power subgroup.
    pub within_subgroup: bool,
    pub stats: ScanStats,
}

impl NonreducedReport {
    /// Every coset met by the observations is observed in full.
    pub fn cosets_closed(&self) -> bool {
        self.cosets.iter().all(|c| c.observed == c.size)
    }
}

fn powmod_small(a: u64, e: u32, m: u64) -> u64 {
    let mut acc = 1u128 % m as u128;
    for _ in 0..e {
        acc = acc * a as u128 % m as u128;
    }
    acc as u64
}

/// Image of the non-reduced discriminant mod A among scanned specializations,
/// compared with the cosets of the e-th powers of (Z/AZ)^×.
pub fn nonreduced_survey(
    ctx: &SearchContext,
    a: u64,
    e_declared: Option<u32>,
    budget: u64,
    max_records: usize,
) -> Result<NonreducedReport> {
    if a < 2 {
        return Err(Error::InvalidTarget("modulus must be at least 2".into()));
    }
    let ab = BigInt::from(a);
    if !ctx.krasner.n_prime.gcd(&ab).is_one() {
        return Err(Error::InvalidTarget(format!(
            "modulus {a} shares a prime with the ramified S0 part {}",
            ctx.krasner.n_prime
        )));
    }
    let spec = TargetSpec {
        max_candidates: budget,
        max_records,
        coprime_to: Some(a),
        ..Default::default()
    };
    let lattice = target_residues(&ctx.pf, &ctx.krasner, &spec)?
        .map_err(|f| Error::InvalidTarget(f.to_string()))?;
    let res = squarefree_scan(ctx, &lattice, &spec);
    let (e, e_source) = match e_declared.or_else(|| {
        ctx.pf.original.inertia_indices.as_ref().map(|v| v.iter().fold(0u32, |g, &x| g.gcd(&x)))
    }) {
        Some(e) if e > 0 => (e, "declared".to_string()),
        _ => {
            let g = res
                .records
                .iter()
                .flat_map(|r| r.primes.iter().filter(|s| s.ramified && !s.in_s0))
                .filter_map(|s| s.disc_exponent)
                .fold(0u32, |g, x| g.gcd(&x));
            if g == 0 {
                return Err(Error::InsufficientData("no tame exponents to estimate e".into()));
            }
            (g, "estimated from tame exponents".to_string())
        }
    };
    let mut observed = BTreeSet::new();
    let mut used = 0;
    let mut excluded = 0;
    for r in &res.records {
        match &r.nonreduced {
            Some(d) if d.gcd(&ab).is_one() => {
                observed.insert(reduce_big(&d.mod_floor(&ab), a));
                used += 1;
            }
            _ => excluded += 1,
        }
    }
    let units: Vec<u64> = (1..a).filter(|u| u.gcd(&a) == 1).collect();
    let h: BTreeSet<u64> = units.iter().map(|&u| powmod_small(u, e, a)).collect();
    let mut cosets: BTreeMap<u64, CosetCount> = BTreeMap::new();
    for &c in &observed {
        let coset: BTreeSet<u64> = h.iter().map(|&x| (x as u128 * c as u128 % a as u128) as u64).collect();
        let rep = *coset.iter().next().unwrap();
        let entry = cosets.entry(rep).or_insert(CosetCount { representative: rep, observed: 0, size: coset.len() });
        entry.observed += 1;
    }
    let within_subgroup = observed.iter().all(|c| h.contains(c));
    Ok(NonreducedReport {
        modulus: a,
        e,
        e_source,
        records_used: used,
        records_excluded: excluded,
        observed,
        subgroup_size: h.len(),
        cosets: cosets.into_values().collect(),
        within_subgroup,
        stats: res.stats,
    })
}
