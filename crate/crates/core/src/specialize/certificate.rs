//! Galois group certificates from Frobenius cycle types.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exactalg::fp::reduce_big;
use crate::exactalg::integer::{is_prime_u64, small_primes};
use crate::exactalg::{discriminant_z, factor_mod_p, UniPoly};

use super::local::{frobenius_cycle_type, FrobeniusType};

/// Default number of unramified primes sampled.
pub const DEFAULT_PRIME_BUDGET: usize = 300;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub p: u64,
    pub cycle_type: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupCertificate {
    /// Irreducible, primitive (for composite n) and containing a transposition.
    ProvenSn {
        n: usize,
        irreducible: Witness,
        /// Absent when n is prime: transitivity already implies primitivity.
        primitivity: Option<Witness>,
        transposition: Witness,
    },
    ProvenC2 { irreducible: Witness },
    CycleTypeFingerprint {
        sample_size: usize,
        irreducible: Witness,
        counts: Vec<(Vec<usize>, u32)>,
    },
    Inconclusive { sample_size: usize },
}

impl GroupCertificate {
    pub fn label(&self) -> String {
        match self {
            GroupCertificate::ProvenSn { n, .. } => format!("ProvenS{n}"),
            GroupCertificate::ProvenC2 { .. } => "ProvenC2".into(),
            GroupCertificate::CycleTypeFingerprint { .. } => "Fingerprint".into(),
            GroupCertificate::Inconclusive { .. } => "Inconclusive".into(),
        }
    }

    pub fn is_proven_sn(&self, n: usize) -> bool {
        matches!(self, GroupCertificate::ProvenSn { n: m, .. } if *m == n)
    }

    /// Re-derive every witness pattern by factoring modulo its prime.
    pub fn verify(&self, g: &UniPoly) -> bool {
        let n = g.deg();
        let check = |w: &Witness| observed_type(g, w.p).is_some_and(|t| t == w.cycle_type);
        match self {
            GroupCertificate::ProvenSn { n: m, irreducible, primitivity, transposition } => {
                *m == n
                    && check(irreducible)
                    && irreducible.cycle_type == [n]
                    && check(transposition)
                    && is_transposition_power(&transposition.cycle_type)
                    && match primitivity {
                        None => is_prime_u64(n as u64),
                        Some(w) => check(w) && is_primitivity_witness(&w.cycle_type, n),
                    }
            }
            GroupCertificate::ProvenC2 { irreducible } => {
                n == 2 && check(irreducible) && irreducible.cycle_type == [2]
            }
            GroupCertificate::CycleTypeFingerprint { irreducible, .. } => {
                check(irreducible) && irreducible.cycle_type == [n]
            }
            GroupCertificate::Inconclusive { .. } => true,
        }
    }
}

/// Cycle type at p computed directly with `factor_mod_p`; `None` if p divides
/// the leading coefficient or the reduction is not squarefree.
fn observed_type(g: &UniPoly, p: u64) -> Option<Vec<usize>> {
    if reduce_big(&g.lc(), p) == 0 {
        return None;
    }
    let fac = factor_mod_p(g, p).ok()?;
    fac.is_squarefree().then(|| fac.degree_multiset())
}

/// A power of this permutation is a transposition.
pub fn is_transposition_power(t: &[usize]) -> bool {
    t.iter().filter(|&&c| c == 2).count() == 1 && t.iter().all(|&c| c == 2 || c % 2 == 1)
}

/// In a transitive group of degree n, an element of this type forces primitivity.
pub fn is_primitivity_witness(t: &[usize], n: usize) -> bool {
    if t.len() == 2 && t.contains(&1) && t.contains(&(n - 1)) {
        return true;
    }
    // Some power is an l-cycle with l prime and n/2 < l.
    t.iter().any(|&l| {
        2 * l > n
            && l < n
            && is_prime_u64(l as u64)
            && t.iter().filter(|&&c| c % l == 0).count() == 1
    })
}

/// Scan unramified primes in increasing order, up to `budget` of them.
pub fn group_certificate(g: &UniPoly, budget: usize) -> GroupCertificate {
    let n = g.deg();
    let disc = discriminant_z(g);
    let lc = g.lc();
    let bad = |p: u64| {
        let pb = BigInt::from(p);
        (&disc % &pb).is_zero() || (&lc % &pb).is_zero()
    };
    let mut irreducible: Option<Witness> = None;
    let mut primitivity: Option<Witness> = None;
    let mut transposition: Option<Witness> = None;
    let mut counts: std::collections::BTreeMap<Vec<usize>, u32> = Default::default();
    let mut sampled = 0;
    let need_primitivity = !is_prime_u64(n as u64);
    for &p in small_primes() {
        if sampled >= budget {
            break;
        }
        if bad(p) {
            continue;
        }
        let Ok(FrobeniusType::Cycle(t)) = frobenius_cycle_type(g, p) else {
            continue;
        };
        sampled += 1;
        *counts.entry(t.clone()).or_default() += 1;
        if irreducible.is_none() && t == [n] {
            irreducible = Some(Witness { p, cycle_type: t.clone() });
            if n == 2 {
                return GroupCertificate::ProvenC2 { irreducible: irreducible.unwrap() };
            }
        }
        if need_primitivity && primitivity.is_none() && is_primitivity_witness(&t, n) {
            primitivity = Some(Witness { p, cycle_type: t.clone() });
        }
        if transposition.is_none() && is_transposition_power(&t) {
            transposition = Some(Witness { p, cycle_type: t });
        }
        if irreducible.is_some() && transposition.is_some() && (!need_primitivity || primitivity.is_some()) {
            return GroupCertificate::ProvenSn {
                n,
                irreducible: irreducible.unwrap(),
                primitivity,
                transposition: transposition.unwrap(),
            };
        }
    }
    match irreducible {
        Some(w) => GroupCertificate::CycleTypeFingerprint {
            sample_size: sampled,
            irreducible: w,
            counts: counts.into_iter().collect(),
        },
        None => GroupCertificate::Inconclusive { sample_size: sampled },
    }
}

/// Cycle types on a fixed prime panel, used to separate non-isomorphic fields
/// sharing a reduced discriminant. Ramified or degenerate primes show as "r".
pub fn fingerprint_panel(g: &UniPoly) -> String {
    const PANEL: [u64; 12] = [7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    PANEL
        .iter()
        .map(|&p| match frobenius_cycle_type(g, p) {
            Ok(FrobeniusType::Cycle(t)) => t.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(""),
            _ => "r".into(),
        })
        .collect::<Vec<_>>()
        .join(".")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::Var;

    fn x(c: &[i64]) -> UniPoly {
        UniPoly::from_i64(c, Var::X)
    }

    #[test]
    fn certificates() {
        let c = group_certificate(&x(&[1, 1, 0, 1]), DEFAULT_PRIME_BUDGET);
        assert!(c.is_proven_sn(3), "{c:?}");
        assert!(c.verify(&x(&[1, 1, 0, 1])));
        let c = group_certificate(&x(&[-6, 0, 1]), DEFAULT_PRIME_BUDGET);
        assert!(matches!(c, GroupCertificate::ProvenC2 { .. }));
        assert!(c.verify(&x(&[-6, 0, 1])));
        let g = x(&[-2, 0, 0, 0, 0, 1]);
        let c = group_certificate(&g, DEFAULT_PRIME_BUDGET);
        assert!(matches!(c, GroupCertificate::CycleTypeFingerprint { .. }), "{c:?}");
        assert!(c.verify(&g));
        // Reducible: never an irreducibility witness.
        let c = group_certificate(&x(&[-1, 0, 1]), 50);
        assert!(matches!(c, GroupCertificate::Inconclusive { .. }));
    }

    #[test]
    fn quartic_d4_is_not_s4() {
        // X^4 - 2 has group D4, which contains a 4-cycle and a transposition.
        let g = x(&[-2, 0, 0, 0, 1]);
        let c = group_certificate(&g, DEFAULT_PRIME_BUDGET);
        assert!(!c.is_proven_sn(4), "{c:?}");
        // X^4 - X - 1 has group S4.
        let g = x(&[-1, -1, 0, 0, 1]);
        let c = group_certificate(&g, DEFAULT_PRIME_BUDGET);
        assert!(c.is_proven_sn(4), "{c:?}");
        assert!(c.verify(&g));
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let g = x(&[1, 1, 0, 1]);
        let mut c = group_certificate(&g, DEFAULT_PRIME_BUDGET);
        if let GroupCertificate::ProvenSn { irreducible, .. } = &mut c {
            irreducible.p = 3;
        }
        assert!(!c.verify(&g));
    }

    #[test]
    fn witness_patterns() {
        assert!(is_transposition_power(&[2, 1, 1, 1]));
        assert!(is_transposition_power(&[2, 3]));
        assert!(!is_transposition_power(&[2, 2, 1]));
        assert!(!is_transposition_power(&[4, 2]));
        assert!(is_primitivity_witness(&[1, 3], 4));
        assert!(is_primitivity_witness(&[5, 1, 1], 7));
        assert!(!is_primitivity_witness(&[4], 4));
    }
}
