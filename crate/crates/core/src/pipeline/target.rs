//! Residue and Frobenius constraints combined into one lattice class.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::binforms::BinaryForm;
use crate::exactalg::fp::{factor_fp, invmod, FpPoly};
use crate::exactalg::integer::{crt, is_prime_u64};
use crate::modcurves::{hensel_lift, residue_points, solve_simple_zero, LiftDirection, ResiduePoint};

use super::{Krasner, PreparedFamily};

/// δ ≡ k mod p^e; k = 0 (with e = 1) asks for p to divide δ exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueConstraint {
    pub p: u64,
    pub e: u32,
    pub k: u64,
}

impl ResidueConstraint {
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.e)
    }

    pub fn is_zero_class(&self) -> bool {
        self.k == 0
    }
}

/// Frobenius at p must have the given cycle type (sorted factor degrees).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusConstraint {
    pub p: u64,
    pub cycle_type: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignRequirement {
    #[default]
    Any,
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub residues: Vec<ResidueConstraint>,
    pub frobenius: Vec<FrobeniusConstraint>,
    /// Sign of the working F-value.
    pub sign: SignRequirement,
    pub max_candidates: u64,
    /// Largest lattice shell index scanned.
    pub max_height: Option<u64>,
    /// Stop after this many records.
    pub max_records: usize,
    pub seed: u64,
    /// Records must carry the family's declared certificate.
    pub require_certificate: bool,
    /// Only accept F-values coprime to this integer.
    pub coprime_to: Option<u64>,
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec {
            residues: Vec::new(),
            frobenius: Vec::new(),
            sign: SignRequirement::Any,
            max_candidates: 1_000_000,
            max_height: None,
            max_records: 1,
            seed: 0,
            require_certificate: true,
            coprime_to: None,
        }
    }
}

impl TargetSpec {
    pub fn validate(&self, pf: &PreparedFamily) -> Result<()> {
        let n = pf.working.degree();
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.residues {
            if !is_prime_u64(c.p) {
                return Err(Error::InvalidTarget(format!("{} is not prime", c.p)));
            }
            if !seen.insert(c.p) {
                return Err(Error::InvalidTarget(format!("prime {} constrained twice", c.p)));
            }
            if c.e == 0 || c.p.checked_pow(c.e).is_none_or(|q| q >= 1 << 62) {
                return Err(Error::InvalidTarget(format!("bad exponent {} for {}", c.e, c.p)));
            }
            if pf.s0.contains(c.p) {
                return Err(Error::InvalidTarget(format!("{} lies in S0", c.p)));
            }
            if c.k >= c.modulus() {
                return Err(Error::InvalidTarget(format!("class {} not reduced mod {}", c.k, c.modulus())));
            }
            if c.k % c.p == 0 && (c.k != 0 || c.e != 1) {
                return Err(Error::InvalidTarget("zero class needs k = 0 and e = 1".into()));
            }
        }
        for fc in &self.frobenius {
            if !is_prime_u64(fc.p) || pf.s0.contains(fc.p) {
                return Err(Error::InvalidTarget(format!("Frobenius prime {} is not prime outside S0", fc.p)));
            }
            if seen.contains(&fc.p) && !pf.original.perfect {
                return Err(Error::InvalidTarget(format!(
                    "Frobenius prime {} overlaps a residue prime and the group is not declared perfect",
                    fc.p
                )));
            }
            if fc.cycle_type.iter().sum::<usize>() != n {
                return Err(Error::InvalidTarget(format!("cycle type must sum to {n}")));
            }
        }
        Ok(())
    }
}

/// One lattice class (a*, b*) mod M with the per-constraint solutions it reduces to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub route: Route,
    pub modulus: BigInt,
    pub a: BigInt,
    pub b: BigInt,
    pub solutions: Vec<ResiduePoint>,
    pub frobenius_classes: Vec<(u64, u64, u64)>,
}

/// Krasner neighbourhood (0 = primary) and required sign of the F-value
/// under which the residue targets were solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Route {
    pub neighbourhood: usize,
    pub sign: SignRequirement,
}

/// Failure to produce a class for one constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetFailure {
    /// No point on F̂ ≡ c mod p: an empirical exceptional pair (p, k).
    NoResiduePoint { p: u64, k: u64 },
    NoSimpleZero { p: u64 },
    /// No nonsingular point to lift to p^e.
    NoLift { p: u64, e: u32 },
    NoFrobeniusClass { p: u64, cycle_type: Vec<usize> },
}

impl std::fmt::Display for TargetFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetFailure::NoResiduePoint { p, k } => write!(f, "no residue point for class {k} mod {p}"),
            TargetFailure::NoSimpleZero { p } => write!(f, "no simple zero mod {p}"),
            TargetFailure::NoLift { p, e } => write!(f, "no liftable point mod {p}^{e}"),
            TargetFailure::NoFrobeniusClass { p, cycle_type } => {
                write!(f, "no parameter class mod {p} with cycle type {cycle_type:?}")
            }
        }
    }
}

/// First class (x : y) mod p whose specialization factors with the given type.
fn frobenius_class(pf: &PreparedFamily, fc: &FrobeniusConstraint) -> Option<(u64, u64)> {
    let p = fc.p;
    let n = pf.working.degree();
    let candidates = (0..p).map(|x| (x, 1u64)).chain(std::iter::once((1, 0)));
    for (x, y) in candidates {
        if BinaryForm::eval_mod_with(&pf.form.coeffs_mod(p), x, y, p) == 0 {
            continue;
        }
        let g = pf.working.f.specialize_projective(&BigInt::from(x), &BigInt::from(y));
        let gp = FpPoly::from_unipoly(&g, p);
        if gp.deg() != n || gp.is_zero() {
            continue;
        }
        let Ok(fac) = factor_fp(&gp, 0) else { continue };
        if fac.is_squarefree() && fac.degree_multiset() == fc.cycle_type {
            return Some((x, y));
        }
    }
    None
}

/// Solve each constraint mod p^e and merge everything, including the Krasner
/// class (a1, b1) mod N^m, into one lattice class.
pub fn target_residues(
    pf: &PreparedFamily,
    kr: &Krasner,
    spec: &TargetSpec,
) -> Result<std::result::Result<Lattice, TargetFailure>> {
    target_route(pf, kr, spec, Route { neighbourhood: 0, sign: spec.sign })
}

/// As `target_residues` in the given neighbourhood. There δ = N'·|F|/u with u
/// the S_0-part of F, so F̂ is aimed at k·u·N'^{-1}, or at its negative for a
/// negative route sign.
pub fn target_route(
    pf: &PreparedFamily,
    kr: &Krasner,
    spec: &TargetSpec,
    route: Route,
) -> Result<std::result::Result<Lattice, TargetFailure>> {
    spec.validate(pf)?;
    let negative = route.sign == SignRequirement::Negative;
    let fb = pf.form.to_bipoly();
    let mut xs = vec![(kr.basepoint.0.clone(), kr.modulus.clone())];
    let mut ys = vec![(kr.basepoint.1.clone(), kr.modulus.clone())];
    let mut solutions = Vec::new();
    for c in &spec.residues {
        let p = c.p;
        let pt = if c.is_zero_class() {
            // Nonsingular zero lifted to value p mod p^2: exact divisibility.
            let Some(z) = solve_simple_zero(&fb, p, |_, _| true) else {
                return Ok(Err(TargetFailure::NoSimpleZero { p }));
            };
            hensel_lift(&fb, &z, p, 2, LiftDirection::Auto)?
        } else {
            let q = c.modulus();
            let np = (&kr.n_prime % BigInt::from(q)).to_u64().unwrap();
            let inv = invmod(np, q).ok_or_else(|| Error::InvalidTarget(format!("N' not invertible mod {q}")))?;
            let u = (&kr.s0_part % BigInt::from(q)).to_u64().unwrap();
            let mut target = ((c.k as u128 * inv as u128) % q as u128 * u as u128 % q as u128) as u64;
            if negative {
                target = (q - target) % q;
            }
            let mut pts = residue_points(&fb, target % p, p).peekable();
            if pts.peek().is_none() {
                return Ok(Err(TargetFailure::NoResiduePoint { p, k: c.k }));
            }
            if c.e == 1 {
                pts.next().unwrap()
            } else {
                match pts.find_map(|pt| hensel_lift(&fb, &pt, target, c.e, LiftDirection::Auto).ok()) {
                    Some(l) => l,
                    None => return Ok(Err(TargetFailure::NoLift { p, e: c.e })),
                }
            }
        };
        let q = BigInt::from(pt.modulus());
        xs.push((BigInt::from(pt.x), q.clone()));
        ys.push((BigInt::from(pt.y), q));
        solutions.push(pt);
    }
    let mut frobenius_classes = Vec::new();
    for fc in &spec.frobenius {
        let Some((x, y)) = frobenius_class(pf, fc) else {
            return Ok(Err(TargetFailure::NoFrobeniusClass { p: fc.p, cycle_type: fc.cycle_type.clone() }));
        };
        // Projective class: any (x, y) up to scaling works; use the representative.
        xs.push((BigInt::from(x), BigInt::from(fc.p)));
        ys.push((BigInt::from(y), BigInt::from(fc.p)));
        frobenius_classes.push((fc.p, x, y));
    }
    let (a, m) = crt(&xs).ok_or_else(|| Error::InvalidTarget("incompatible moduli".into()))?;
    let (b, m2) = crt(&ys).ok_or_else(|| Error::InvalidTarget("incompatible moduli".into()))?;
    debug_assert_eq!(m, m2);
    Ok(Ok(Lattice { route, modulus: m, a: a.mod_floor(&m2), b: b.mod_floor(&m2), solutions, frobenius_classes }))
}

/// Check that the class reduces to every per-prime solution.
pub fn lattice_consistent(l: &Lattice) -> bool {
    l.solutions.iter().all(|pt| {
        let q = BigInt::from(pt.modulus());
        (&l.a - BigInt::from(pt.x)).mod_floor(&q).is_zero() && (&l.b - BigInt::from(pt.y)).mod_floor(&q).is_zero()
    }) && !l.modulus.is_zero()
        && l.a.gcd(&l.b).gcd(&l.modulus).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::fp::reduce_big;
    use crate::pipeline::testfam::*;
    use crate::pipeline::SearchContext;

    #[test]
    fn crt_combination() {
        let (x, m) = crt(&[(BigInt::from(2), BigInt::from(5)), (BigInt::from(3), BigInt::from(7))]).unwrap();
        assert_eq!((x.mod_floor(&m), m), (BigInt::from(17), BigInt::from(35)));
    }

    #[test]
    fn trinomial_targets() {
        let ctx = SearchContext::new(&trinomial5(), 0).unwrap();
        let spec = TargetSpec { residues: vec![ResidueConstraint { p: 11, e: 1, k: 1 }], ..Default::default() };
        let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
        assert!(lattice_consistent(&l));
        let v = ctx.pf.form.evaluate(&l.a, &l.b);
        let np = reduce_big(&ctx.krasner.n_prime, 11);
        assert_eq!(reduce_big(&v, 11) * np % 11, 1);

        let spec = TargetSpec { residues: vec![ResidueConstraint { p: 13, e: 1, k: 0 }], ..Default::default() };
        let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
        let v = ctx.pf.form.evaluate(&l.a, &l.b);
        assert_eq!(reduce_big(&v, 169), 13);

        let spec = TargetSpec { residues: vec![ResidueConstraint { p: 11, e: 2, k: 40 }], ..Default::default() };
        let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
        let v = ctx.pf.form.evaluate(&l.a, &l.b);
        let np = reduce_big(&ctx.krasner.n_prime, 121);
        assert_eq!(reduce_big(&v, 121) * np % 121, 40);
    }

    #[test]
    fn invalid_targets() {
        let ctx = SearchContext::new(&trinomial5(), 0).unwrap();
        let bad = |r: Vec<ResidueConstraint>| {
            let spec = TargetSpec { residues: r, ..Default::default() };
            target_residues(&ctx.pf, &ctx.krasner, &spec).is_err()
        };
        assert!(bad(vec![ResidueConstraint { p: 5, e: 1, k: 1 }]));
        assert!(bad(vec![ResidueConstraint { p: 7, e: 1, k: 1 }, ResidueConstraint { p: 7, e: 1, k: 2 }]));
        assert!(bad(vec![ResidueConstraint { p: 9, e: 1, k: 1 }]));
        assert!(bad(vec![ResidueConstraint { p: 7, e: 2, k: 7 }]));
    }
}
