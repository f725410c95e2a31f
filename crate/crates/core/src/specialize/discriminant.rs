//! Reduced and non-reduced discriminants of specializations.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::integer::{factor_integer, squarefree_integer, FactorBudget, SquarefreeVerdict};
use crate::exactalg::{discriminant_z, UniPoly};

use super::family::{specialize_at, BadPrimes, Family};
use super::local::{analyze_with_disc, LocalAnalysis, LocalMethod, Ramification};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscMode {
    /// Primes outside S_0 taken from the F-value; the oracle only fills in exponents.
    SitPredicted,
    /// Additionally checks that disc(g) primes outside S_0 not dividing the
    /// F-value are oracle-unramified.
    Audited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimeSource {
    SitPredicted,
    OracleConfirmed,
    OracleUndetermined,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeStatus {
    pub p: BigUint,
    pub in_s0: bool,
    /// SIT prediction, absent for S_0 primes.
    pub predicted: Option<Ramification>,
    pub oracle: Ramification,
    pub ramified: bool,
    pub source: PrimeSource,
    /// v_p of the field discriminant when determined.
    pub disc_exponent: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedDisc {
    pub delta: BigInt,
    pub primes: Vec<PrimeStatus>,
    /// Primes where the oracle contradicts the SIT prediction.
    pub contradictions: Vec<BigUint>,
    /// Cofactors of disc(g) that could not be factored during auditing.
    pub unaudited: Vec<BigUint>,
    pub disc_g: BigInt,
}

impl ReducedDisc {
    /// All ramified primes have a determined field-discriminant exponent.
    pub fn exponents_complete(&self) -> bool {
        self.primes.iter().filter(|s| s.ramified).all(|s| s.disc_exponent.is_some())
    }

    /// Signed non-reduced field discriminant when all exponents are known.
    /// The sign is that of disc(g).
    pub fn nonreduced(&self) -> Option<BigInt> {
        if !self.exponents_complete() {
            return None;
        }
        let mut d = BigInt::one();
        for s in self.primes.iter().filter(|s| s.ramified) {
            d *= num_traits::pow(BigInt::from(s.p.clone()), s.disc_exponent.unwrap() as usize);
        }
        Some(if self.disc_g.is_negative() { -d } else { d })
    }
}

/// Local analysis at an arbitrary-size prime: exact for u64-sized primes,
/// otherwise only the v_p(disc) = 0, 1 shortcuts.
fn local_status(g: &UniPoly, p: &BigUint, disc: &BigInt) -> (Ramification, Option<u32>) {
    if let Some(ps) = p.to_u64().filter(|&q| q < (1u64 << 63)) {
        return match analyze_with_disc(g, ps, disc) {
            Ok(LocalAnalysis { status, disc_exponent, .. }) => (status, disc_exponent),
            Err(_) => (Ramification::Undetermined, None),
        };
    }
    let pb = BigInt::from(p.clone());
    let mut v = 0u32;
    let mut d = disc.clone();
    while v < 2 && (&d % &pb).is_zero() {
        d /= &pb;
        v += 1;
    }
    match v {
        0 => (Ramification::Unramified, Some(0)),
        1 => (Ramification::Ramified, Some(1)),
        _ => (Ramification::Undetermined, None),
    }
}

/// δ of the specialization at (a : b): ramified S_0 primes times the primes
/// of the F-value outside S_0, whose S_0-free part must be certified squarefree.
///
/// `inherited` gives the ramification status of S_0 primes at a basepoint in
/// the same Krasner neighbourhood; it is used where the oracle is undetermined.
pub fn reduced_discriminant(
    fam: &Family,
    s0: &BadPrimes,
    a: &BigInt,
    b: &BigInt,
    mode: DiscMode,
    inherited: Option<&BTreeMap<u64, Ramification>>,
    budget: FactorBudget,
) -> Result<(UniPoly, ReducedDisc)> {
    let bd = fam.branch_data()?;
    let value = bd.form.evaluate(a, b);
    let (_, cofactor) = s0.split(&value);
    let SquarefreeVerdict::Squarefree(vprimes) = squarefree_integer(&cofactor, budget) else {
        return Err(Error::NotCertifiedSquarefree);
    };
    let g = specialize_at(fam, a, b)?;
    let disc = discriminant_z(&g);
    let mut primes = Vec::new();
    let mut contradictions = Vec::new();
    for &p in s0.primes.keys() {
        let pb = BigUint::from(p);
        let (oracle, exp) = local_status(&g, &pb, &disc);
        let (ramified, source) = match oracle {
            Ramification::Ramified => (true, PrimeSource::OracleConfirmed),
            Ramification::Unramified => (false, PrimeSource::OracleConfirmed),
            Ramification::Undetermined => {
                let r = inherited.and_then(|m| m.get(&p)).copied();
                (r == Some(Ramification::Ramified), PrimeSource::OracleUndetermined)
            }
        };
        primes.push(PrimeStatus {
            p: pb,
            in_s0: true,
            predicted: None,
            oracle,
            ramified,
            source,
            disc_exponent: exp.filter(|_| oracle != Ramification::Undetermined),
        });
    }
    for p in vprimes.iter().filter(|p| !s0.contains_big(p)) {
        let (oracle, exp) = local_status(&g, p, &disc);
        let source = match oracle {
            Ramification::Ramified => PrimeSource::OracleConfirmed,
            Ramification::Unramified => {
                contradictions.push(p.clone());
                PrimeSource::SitPredicted
            }
            Ramification::Undetermined => PrimeSource::SitPredicted,
        };
        primes.push(PrimeStatus {
            p: p.clone(),
            in_s0: false,
            predicted: Some(Ramification::Ramified),
            oracle,
            ramified: true,
            source,
            disc_exponent: exp,
        });
    }
    let mut unaudited = Vec::new();
    if mode == DiscMode::Audited {
        // Remove S_0 and F-value primes from disc(g); what remains must be unramified.
        let mut rest = disc.magnitude().clone();
        for s in &primes {
            while (&rest % &s.p).is_zero() {
                rest /= &s.p;
            }
        }
        if !rest.is_one() {
            let fac = factor_integer(&BigInt::from(rest), budget);
            unaudited = fac.unfactored.clone();
            for (p, _) in fac.primes {
                let (oracle, _) = local_status(&g, &p, &disc);
                if oracle == Ramification::Ramified {
                    contradictions.push(p.clone());
                }
                primes.push(PrimeStatus {
                    p,
                    in_s0: false,
                    predicted: Some(Ramification::Unramified),
                    oracle,
                    ramified: false,
                    source: match oracle {
                        Ramification::Undetermined => PrimeSource::SitPredicted,
                        _ => PrimeSource::OracleConfirmed,
                    },
                    disc_exponent: match oracle {
                        Ramification::Unramified => Some(0),
                        _ => None,
                    },
                });
            }
        }
    }
    primes.sort_by(|x, y| x.p.cmp(&y.p));
    let delta: BigInt = primes
        .iter()
        .filter(|s| s.ramified)
        .map(|s| BigInt::from(s.p.clone()))
        .product();
    Ok((g, ReducedDisc { delta, primes, contradictions, unaudited, disc_g: disc }))
}

/// Reduced discriminant of Q[X]/(g) from a full factorization of disc(g).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyDisc {
    pub delta: BigInt,
    pub statuses: Vec<(BigUint, Ramification)>,
    /// All primes of disc(g) found and decided.
    pub complete: bool,
}

pub fn polynomial_reduced_discriminant(g: &UniPoly, budget: FactorBudget) -> PolyDisc {
    let disc = discriminant_z(g);
    let fac = factor_integer(&disc, budget);
    let mut complete = fac.is_complete() && !disc.is_zero();
    let mut delta = BigInt::one();
    let mut statuses = Vec::new();
    for (p, _) in fac.primes {
        let (r, _) = local_status(g, &p, &disc);
        match r {
            Ramification::Ramified => delta *= BigInt::from(p.clone()),
            Ramification::Undetermined => complete = false,
            Ramification::Unramified => {}
        }
        statuses.push((p, r));
    }
    PolyDisc { delta, statuses, complete }
}

/// Method used at a prime, for reports.
pub fn method_at(g: &UniPoly, p: u64) -> Option<LocalMethod> {
    super::local::analyze(g, p).ok().map(|a| a.method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{BiPoly, Var};
    use crate::specialize::family::{bad_primes, InfinityBranch};

    fn x(c: &[i64]) -> UniPoly {
        UniPoly::from_i64(c, Var::X)
    }

    #[test]
    fn polynomial_deltas() {
        let b = FactorBudget::default();
        assert_eq!(polynomial_reduced_discriminant(&x(&[-6, 0, 1]), b).delta, BigInt::from(6));
        assert_eq!(polynomial_reduced_discriminant(&x(&[1, 1, 0, 1]), b).delta, BigInt::from(31));
        assert_eq!(polynomial_reduced_discriminant(&x(&[1, 0, 1]), b).delta, BigInt::from(2));
        assert_eq!(polynomial_reduced_discriminant(&x(&[-5, 0, 1]), b).delta, BigInt::from(5));
        let pd = polynomial_reduced_discriminant(&x(&[-1, -1, 0, 1]), b);
        assert_eq!(pd.delta, BigInt::from(23));
        assert!(pd.complete);
    }

    #[test]
    fn c2_family_delta() {
        let mut c2 = Family::new(
            "c2",
            BiPoly::from_i64(&[(2, 0, 1), (0, 3, -1), (0, 1, 1)], (Var::X, Var::T)),
        )
        .unwrap();
        c2.infinity = InfinityBranch::Yes;
        c2.group_order = Some(2);
        let s0 = bad_primes(&c2, c2.branch_data().unwrap()).unwrap();
        let (g, rd) = reduced_discriminant(
            &c2,
            &s0,
            &BigInt::from(2),
            &BigInt::one(),
            DiscMode::Audited,
            None,
            FactorBudget::default(),
        )
        .unwrap();
        assert_eq!(g, x(&[-6, 0, 1]));
        assert_eq!(rd.delta, BigInt::from(6));
        assert!(rd.contradictions.is_empty());
        assert_eq!(rd.nonreduced(), Some(BigInt::from(24)));
    }

    #[test]
    fn trinomial_delta() {
        let mut f = Family::new(
            "x3",
            BiPoly::from_i64(&[(3, 0, 1), (1, 1, 1), (0, 1, 1)], (Var::X, Var::T)),
        )
        .unwrap();
        f.infinity = InfinityBranch::Yes;
        f.group_order = Some(6);
        let s0 = bad_primes(&f, f.branch_data().unwrap()).unwrap();
        // F(1,1) = 1*1*(4+27)... F = XY(4X+27Y) up to sign
        let (g, rd) = reduced_discriminant(
            &f,
            &s0,
            &BigInt::one(),
            &BigInt::one(),
            DiscMode::Audited,
            None,
            FactorBudget::default(),
        )
        .unwrap();
        assert_eq!(g, x(&[1, 1, 0, 1]));
        assert_eq!(rd.delta, BigInt::from(31));
        // F(4, 1) = 4·43: the square sits in S_0 and is allowed.
        let (_, rd) = reduced_discriminant(&f, &s0, &BigInt::from(4), &BigInt::one(), DiscMode::Audited, None, FactorBudget::default())
            .unwrap();
        assert!(rd.primes.iter().any(|s| s.p == BigUint::from(43u32) && s.ramified));
        // F(49, 1) = 7^2·223 with 7 outside S_0 is refused.
        assert!(!s0.contains(7));
        let err = reduced_discriminant(
            &f,
            &s0,
            &BigInt::from(49),
            &BigInt::one(),
            DiscMode::Audited,
            None,
            FactorBudget::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::NotCertifiedSquarefree);
    }
}
