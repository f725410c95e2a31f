//! Search pipeline: fixed-divisor preparation, basepoint and Krasner
//! neighbourhood, residue targeting, squarefree scanning and surveys.

pub mod reports;
pub mod scan;
pub mod survey;
pub mod target;
pub mod verify;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binforms::{eliminate_fixed_divisors, fixed_prime_divisors, BinaryForm, FixedDivisorReport, TransformRecord};
use crate::error::{Error, Result};
use crate::exactalg::integer::crt;
use crate::specialize::local::analyze;
use crate::specialize::{bad_primes, specialize_at, BadPrimes, Family, Ramification};

pub use reports::{density_report, nonreduced_survey, DensityReport, NonreducedReport};
pub use scan::{squarefree_scan, targeted_search, RoutedSearch, ScanStats, SearchResult, SpecializationRecord};
pub use survey::{run_survey, Survey, SurveyEntry};
pub use target::{target_residues, target_route, Route, FrobeniusConstraint, Lattice, ResidueConstraint, SignRequirement, TargetSpec};
pub use verify::{verify_record, VerifyReport};

/// A family together with its working reparametrization S = N_0·T whose
/// branch form has no fixed prime divisor.
#[derive(Debug, Clone)]
pub struct PreparedFamily {
    pub original: Family,
    pub working: Family,
    pub n0: BigInt,
    /// Fixed-divisor report of the original branch form.
    pub fixed: FixedDivisorReport,
    pub transform: Option<TransformRecord>,
    /// Branch form of the working family.
    pub form: BinaryForm,
    pub s0: BadPrimes,
}

impl PreparedFamily {
    /// Original projective parameter for working coordinates (x : y).
    pub fn original_t0(&self, x: &BigInt, y: &BigInt) -> (BigInt, BigInt) {
        let b = y * &self.n0;
        let g = x.gcd(&b);
        let (mut a, mut b) = if g.is_zero() { (x.clone(), b) } else { (x / &g, b / &g) };
        if b.is_negative() || (b.is_zero() && a.is_negative()) {
            a = -a;
            b = -b;
        }
        (a, b)
    }
}

pub fn prepare(fam: &Family) -> Result<PreparedFamily> {
    let bd = fam.branch_data()?;
    let fixed = fixed_prime_divisors(&bd.form)?;
    let mut s0 = bad_primes(fam, bd)?;
    if fixed.fixed_primes.is_empty() {
        return Ok(PreparedFamily {
            original: fam.clone(),
            working: fam.clone(),
            n0: BigInt::one(),
            fixed,
            transform: None,
            form: bd.form.clone(),
            s0,
        });
    }
    let rec = eliminate_fixed_divisors(&bd.form)?;
    let working = fam.reparametrize(&rec.n)?;
    let wbd = working.branch_data()?;
    if wbd.form != rec.form && wbd.form != rec.form.neg() {
        return Err(Error::Invalid(format!(
            "reparametrized branch form {} differs from {}",
            wbd.form, rec.form
        )));
    }
    s0.merge(&bad_primes(&working, wbd)?);
    let form = wbd.form.clone();
    Ok(PreparedFamily {
        original: fam.clone(),
        working,
        n0: rec.n.clone(),
        fixed,
        transform: Some(rec),
        form,
        s0,
    })
}

/// Largest basepoint height searched.
const BASEPOINT_HEIGHT: i64 = 200;

/// Least-height coprime (a1, b1), b1 ≥ 0, with F(a1, b1) prime to every S_0
/// prime and a valid specialization.
pub fn choose_basepoint(pf: &PreparedFamily) -> Result<(BigInt, BigInt)> {
    // Existence of a class mod ∏S_0 with nonzero value (no fixed divisors).
    let mut classes = Vec::new();
    for p in pf.s0.list() {
        let (x, y, _) = pf.form.nonvanishing_witness(p).ok_or(Error::NoBasepoint)?;
        classes.push((BigInt::from(x), BigInt::from(y), BigInt::from(p)));
    }
    let xs: Vec<_> = classes.iter().map(|(x, _, p)| (x.clone(), p.clone())).collect();
    let ys: Vec<_> = classes.iter().map(|(_, y, p)| (y.clone(), p.clone())).collect();
    crt(&xs).ok_or(Error::NoBasepoint)?;
    crt(&ys).ok_or(Error::NoBasepoint)?;

    let n = pf.s0.product();
    basepoint_candidates(BASEPOINT_HEIGHT)
        .find(|&(a, b)| basepoint_ok(pf, Some(&n), a, b))
        .map(|(a, b)| (BigInt::from(a), BigInt::from(b)))
        .ok_or(Error::NoBasepoint)
}

/// Coprime (a, b) with b ≥ 0 by increasing height, starting with (1, 0).
fn basepoint_candidates(height: i64) -> impl Iterator<Item = (i64, i64)> {
    std::iter::once((1, 0)).chain((1..=height).flat_map(|h| {
        (-h..=h).flat_map(move |a| (1..=h).map(move |b| (a, b))).filter(move |&(a, b)| a.abs().max(b) == h)
    }))
}

/// With `coprime_to`, F(a, b) must also be prime to it.
fn basepoint_ok(pf: &PreparedFamily, coprime_to: Option<&BigInt>, a: i64, b: i64) -> bool {
    if a.gcd(&b) != 1 {
        return false;
    }
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    let v = pf.form.evaluate(&a, &b);
    !v.is_zero() && coprime_to.is_none_or(|n| v.gcd(n).is_one()) && specialize_at(&pf.working, &a, &b).is_ok()
}

/// Height searched for alternative neighbourhoods.
const ALTERNATE_HEIGHT: i64 = 40;
/// Largest number of alternative neighbourhoods kept.
const MAX_ALTERNATES: usize = 24;

/// Stabilized neighbourhoods around small basepoints, one for each further
/// ratio N'/u (u the S_0-part of F at the basepoint). Each ratio gives a
/// different coset of reachable δ-classes. Basepoints with undetermined S_0
/// statuses are skipped.
pub fn alternate_neighbourhoods(pf: &PreparedFamily, primary: &Krasner, seed: u64) -> Vec<Krasner> {
    let ratio = |np: &BigInt, u: &BigInt| {
        let g = np.gcd(u);
        (np / &g, u / &g)
    };
    let mut seen = std::collections::BTreeSet::from([ratio(&primary.n_prime, &primary.s0_part)]);
    let mut out = Vec::new();
    for (a, b) in basepoint_candidates(ALTERNATE_HEIGHT) {
        if out.len() >= MAX_ALTERNATES {
            break;
        }
        if !basepoint_ok(pf, None, a, b) {
            continue;
        }
        let (a, b) = (BigInt::from(a), BigInt::from(b));
        let Ok(st) = s0_statuses(pf, &a, &b) else { continue };
        if st.values().any(|s| *s == Ramification::Undetermined) {
            continue;
        }
        let np: BigInt = st.iter().filter(|(_, s)| **s == Ramification::Ramified).map(|(p, _)| BigInt::from(*p)).product();
        let (u, _) = pf.s0.split(&pf.form.evaluate(&a, &b));
        let key = ratio(&np, &u);
        if seen.contains(&key) {
            continue;
        }
        if let Ok(kr) = stabilize_krasner(pf, (a, b), KRASNER_SAMPLES, KRASNER_CAP, seed) {
            if kr.n_prime == np {
                seen.insert(key);
                out.push(kr);
            }
        }
    }
    out
}

/// Frozen S_0 behaviour on the neighbourhood (x, y) ≡ (a1, b1) mod N^m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Krasner {
    pub basepoint: (BigInt, BigInt),
    pub m: u32,
    /// N = ∏ S_0.
    pub n: BigInt,
    /// N^m.
    pub modulus: BigInt,
    /// Product of S_0 primes ramified at the basepoint.
    pub n_prime: BigInt,
    /// S_0-part of F at the basepoint, shared by the whole neighbourhood.
    pub s0_part: BigInt,
    pub statuses: BTreeMap<u64, Ramification>,
    /// S_0 primes the oracle could not decide at the basepoint.
    pub undetermined: Vec<u64>,
    pub samples: usize,
}

pub const KRASNER_CAP: u32 = 12;

fn s0_statuses(pf: &PreparedFamily, a: &BigInt, b: &BigInt) -> Result<BTreeMap<u64, Ramification>> {
    let g = specialize_at(&pf.working, a, b)?;
    pf.s0
        .list()
        .into_iter()
        .map(|p| Ok((p, analyze(&g, p)?.status)))
        .collect()
}

/// Smallest m ≥ 2 such that `samples` random parameters congruent to the
/// basepoint mod N^m agree with it at every oracle-determined S_0 prime.
pub fn stabilize_krasner(
    pf: &PreparedFamily,
    basepoint: (BigInt, BigInt),
    samples: usize,
    cap: u32,
    seed: u64,
) -> Result<Krasner> {
    if samples == 0 {
        return Err(Error::Invalid("Krasner stabilization needs at least one sample".into()));
    }
    let (a1, b1) = basepoint.clone();
    let base = s0_statuses(pf, &a1, &b1)?;
    let n = pf.s0.product();
    let value = pf.form.evaluate(&a1, &b1);
    if value.is_zero() {
        return Err(Error::NoBasepoint);
    }
    let (s0_part, _) = pf.s0.split(&value);
    // N^m must exceed every S_0 valuation of F(a1, b1) to freeze it.
    let min_m = pf.s0.list().iter().map(|&p| crate::exactalg::integer::valuation(&s0_part, p) + 1).max().unwrap_or(0).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b72_6173_6e65_72);
    for m in min_m..=cap {
        let modulus = num_traits::pow(n.clone(), m as usize);
        let mut agreed = 0;
        let mut attempts = 0;
        let mut stable = true;
        while agreed < samples && attempts < 50 * samples {
            attempts += 1;
            let u = BigInt::from(rng.gen_range(-1000i64..=1000));
            let v = BigInt::from(rng.gen_range(0i64..=1000));
            let x = &a1 + &modulus * u;
            let y = &b1 + &modulus * v;
            if !x.gcd(&y).is_one() || y.is_negative() {
                continue;
            }
            let Ok(st) = s0_statuses(pf, &x, &y) else { continue };
            agreed += 1;
            let clash = st.iter().any(|(p, s)| {
                let b = base[p];
                *s != Ramification::Undetermined && b != Ramification::Undetermined && *s != b
            });
            if clash {
                stable = false;
                break;
            }
        }
        if stable && agreed == samples {
            let n_prime = base
                .iter()
                .filter(|(_, s)| **s == Ramification::Ramified)
                .map(|(p, _)| BigInt::from(*p))
                .product();
            let undetermined = base
                .iter()
                .filter(|(_, s)| **s == Ramification::Undetermined)
                .map(|(p, _)| *p)
                .collect();
            return Ok(Krasner {
                basepoint,
                m,
                n: n.clone(),
                modulus,
                n_prime,
                s0_part,
                statuses: base,
                undetermined,
                samples,
            });
        }
    }
    Err(Error::KrasnerFailed)
}

/// Prepared family with its basepoint and Krasner data.
#[derive(Debug, Clone)]
pub struct SearchContext {
    pub pf: PreparedFamily,
    /// Primary neighbourhood.
    pub krasner: Krasner,
    seed: u64,
    /// Neighbourhoods with other values of N', found on first use.
    alternates: OnceLock<Vec<Krasner>>,
}

pub const KRASNER_SAMPLES: usize = 8;

impl SearchContext {
    pub fn new(fam: &Family, seed: u64) -> Result<Self> {
        let pf = prepare(fam)?;
        let bp = choose_basepoint(&pf)?;
        let krasner = stabilize_krasner(&pf, bp, KRASNER_SAMPLES, KRASNER_CAP, seed)?;
        Ok(SearchContext { pf, krasner, seed, alternates: OnceLock::new() })
    }

    pub fn alternates(&self) -> &[Krasner] {
        self.alternates.get_or_init(|| alternate_neighbourhoods(&self.pf, &self.krasner, self.seed))
    }

    /// Neighbourhood i: 0 is the primary one, then the alternates.
    pub fn try_neighbourhood(&self, i: usize) -> Option<&Krasner> {
        match i {
            0 => Some(&self.krasner),
            _ => self.alternates().get(i - 1),
        }
    }

    pub fn neighbourhood(&self, i: usize) -> &Krasner {
        self.try_neighbourhood(i).expect("route refers to a known neighbourhood")
    }
}

#[cfg(test)]
pub(crate) mod testfam {
    use crate::exactalg::{BiPoly, Var};
    use crate::specialize::{CertificateTarget, Family, InfinityBranch};

    pub fn family(name: &str, terms: &[(u32, u32, i64)], order: u64, cert: CertificateTarget) -> Family {
        let mut f = Family::new(name, BiPoly::from_i64(terms, (Var::X, Var::T))).unwrap();
        f.infinity = InfinityBranch::Yes;
        f.group_order = Some(order);
        f.certificate = cert;
        f
    }

    pub fn c2() -> Family {
        family("c2-cubic", &[(2, 0, 1), (0, 3, -1), (0, 1, 1)], 2, CertificateTarget::C2)
    }

    pub fn trinomial5() -> Family {
        family("trinomial-5", &[(5, 0, 1), (1, 1, 1), (0, 1, 1)], 120, CertificateTarget::Sn)
    }

    pub fn belyi5() -> Family {
        family("belyi-sn-5", &[(5, 0, 1), (1, 1, -5), (0, 1, 4)], 120, CertificateTarget::Sn)
    }
}

#[cfg(test)]
mod tests {
    use super::testfam::*;
    use super::*;

    #[test]
    fn prepare_examples() {
        let pf = prepare(&trinomial5()).unwrap();
        assert!(pf.n0.is_one());
        assert_eq!(pf.form, BinaryForm::from_i64(&[0, 256, 3125, 0]));
        assert_eq!(pf.s0.list(), vec![2, 3, 5]);

        let pf = prepare(&belyi5()).unwrap();
        assert_eq!(pf.fixed.fixed_primes, vec![2]);
        assert_eq!(pf.n0, BigInt::from(2));
        assert_eq!(pf.form, BinaryForm::from_i64(&[0, 1, -2, 0]));

        let pf = prepare(&c2()).unwrap();
        assert_eq!(pf.n0, BigInt::from(6));
        assert!(fixed_prime_divisors(&pf.form).unwrap().fixed_primes.is_empty());
    }

    #[test]
    fn basepoints() {
        let pf = prepare(&belyi5()).unwrap();
        let (a, b) = choose_basepoint(&pf).unwrap();
        assert_eq!((a.clone(), b.clone()), (BigInt::one(), BigInt::one()));
        assert_eq!(pf.form.evaluate(&a, &b), BigInt::from(-1));
        let pf = prepare(&trinomial5()).unwrap();
        let (a, b) = choose_basepoint(&pf).unwrap();
        assert!(pf.form.evaluate(&a, &b).gcd(&BigInt::from(30)).is_one());
    }

    #[test]
    fn krasner_runs() {
        let pf = prepare(&trinomial5()).unwrap();
        let bp = choose_basepoint(&pf).unwrap();
        let k = stabilize_krasner(&pf, bp.clone(), 8, KRASNER_CAP, 0).unwrap();
        assert!(k.m >= 2);
        assert_eq!(stabilize_krasner(&pf, bp, 0, KRASNER_CAP, 0).unwrap_err(), Error::Invalid("Krasner stabilization needs at least one sample".into()));
    }

    #[test]
    fn original_coordinates() {
        let pf = prepare(&belyi5()).unwrap();
        let (a, b) = pf.original_t0(&BigInt::from(3), &BigInt::from(1));
        assert_eq!((a, b), (BigInt::from(3), BigInt::from(2)));
        let (a, b) = pf.original_t0(&BigInt::from(4), &BigInt::from(1));
        assert_eq!((a, b), (BigInt::from(2), BigInt::from(1)));
    }
}
