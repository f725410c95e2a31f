//! Families f(X; T), their branch data and bad primes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::binforms::BinaryForm;
use crate::error::{Error, Result};
use crate::exactalg::integer::{factor_integer, primes_up_to, FactorBudget};
use crate::exactalg::{discriminant_in_x, discriminant_z, squarefree_part, BiPoly, UniPoly, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InfinityBranch {
    #[default]
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CertificateTarget {
    #[serde(rename = "Sn")]
    Sn,
    #[serde(rename = "C2")]
    C2,
    #[default]
    #[serde(rename = "fingerprint")]
    Fingerprint,
}

/// A parametric polynomial f(X; T) together with the user's declarations
/// about the extension it defines.
#[derive(Debug, Clone)]
pub struct Family {
    pub name: String,
    pub f: BiPoly,
    pub infinity: InfinityBranch,
    pub group: Option<String>,
    pub group_order: Option<u64>,
    pub certificate: CertificateTarget,
    pub inertia_indices: Option<Vec<u32>>,
    /// Sharper exceptional set claimed for this family (informational).
    pub s0_override: Option<Vec<u64>>,
    pub s0_extra: Vec<u64>,
    pub unconditional: bool,
    /// Group declared perfect: Frobenius and residue constraints may share primes.
    pub perfect: bool,
    /// Irreducible factors of the discriminant that are genuine branch points,
    /// when some discriminant roots are not branch points.
    pub branch_factors: Option<Vec<UniPoly>>,
    cache: OnceLock<std::result::Result<BranchData, Error>>,
}

impl Family {
    /// Validated family with default declarations.
    pub fn new(name: impl Into<String>, f: BiPoly) -> Result<Self> {
        if f.vars() != (Var::X, Var::T) {
            return Err(Error::Invalid("family must be a polynomial in X and T".into()));
        }
        if f.deg_first() < 2 {
            return Err(Error::DegreeTooSmall);
        }
        if f.deg_second() == 0 {
            return Err(Error::Invalid("family does not depend on T".into()));
        }
        if !f.content().is_one() {
            return Err(Error::Invalid(format!("family content is {}, expected 1", f.content())));
        }
        if discriminant_in_x(&f)?.is_zero() {
            return Err(Error::Inseparable);
        }
        Ok(Family {
            name: name.into(),
            f,
            infinity: InfinityBranch::Auto,
            group: None,
            group_order: None,
            certificate: CertificateTarget::Fingerprint,
            inertia_indices: None,
            s0_override: None,
            s0_extra: Vec::new(),
            unconditional: false,
            perfect: false,
            branch_factors: None,
            cache: OnceLock::new(),
        })
    }

    pub fn degree(&self) -> usize {
        self.f.deg_first() as usize
    }

    pub fn t_degree(&self) -> usize {
        self.f.deg_second() as usize
    }

    /// Branch data, computed once.
    pub fn branch_data(&self) -> Result<&BranchData> {
        self.cache
            .get_or_init(|| branch_form(self))
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Family in the parameter S = N·T: primitive part of N^d f(X, S/N).
    pub fn reparametrize(&self, n: &BigInt) -> Result<Family> {
        if n.is_one() {
            return Ok(self.clone());
        }
        let d = self.t_degree() as u32;
        let scaled = BiPoly::from_terms(
            self.f
                .terms()
                .map(|(&(i, j), c)| ((i, j), c * num_traits::pow(n.clone(), (d - j) as usize))),
            self.f.vars(),
        );
        let (_, prim) = scaled.content_primitive()?;
        let mut out = self.clone();
        out.name = format!("{}[T<-{}T]", self.name, n);
        out.f = prim;
        out.infinity = match self.branch_data()?.infinity {
            true => InfinityBranch::Yes,
            false => InfinityBranch::No,
        };
        out.branch_factors = self
            .branch_factors
            .as_ref()
            .map(|fs| fs.iter().map(|p| scale_root(p, n)).collect());
        out.cache = OnceLock::new();
        Ok(out)
    }
}

/// Primitive polynomial whose roots are N times the roots of p.
fn scale_root(p: &UniPoly, n: &BigInt) -> UniPoly {
    let d = p.deg();
    let cs: Vec<BigInt> = (0..=d)
        .map(|i| p.coeff(i) * num_traits::pow(n.clone(), d - i))
        .collect();
    UniPoly::new(cs, p.var()).primitive_positive()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchData {
    /// disc_X(f) as a polynomial in T.
    pub disc: UniPoly,
    /// Radical of the finite branch locus.
    pub radical: UniPoly,
    pub infinity: bool,
    pub form: BinaryForm,
    pub branch_count: usize,
}

/// Resolve branching at infinity for the two recognized shapes q(X) − cT and
/// q(X) − cTX.
fn detect_infinity(f: &BiPoly) -> Result<bool> {
    let t_terms: Vec<(u32, u32)> = f.terms().filter(|(k, _)| k.1 > 0).map(|(k, _)| *k).collect();
    if t_terms == [(0, 1)] {
        return Ok(true);
    }
    if t_terms == [(1, 1)] {
        return Ok(f.deg_first() >= 3);
    }
    Err(Error::InfinityUndetected(f.to_string()))
}

pub fn branch_form(fam: &Family) -> Result<BranchData> {
    let disc = discriminant_in_x(&fam.f)?;
    if disc.is_zero() {
        return Err(Error::Inseparable);
    }
    let radical = match &fam.branch_factors {
        Some(fs) => {
            let mut acc = UniPoly::one(Var::T);
            for p in fs {
                if p.is_constant() || disc.pseudo_rem(p).coeffs().iter().any(|c| !c.is_zero()) {
                    return Err(Error::Invalid(format!("branch factor {p} does not divide the discriminant")));
                }
                acc = &acc * &p.primitive_positive();
            }
            squarefree_part(&acc)?
        }
        None => squarefree_part(&disc)?,
    };
    let infinity = match fam.infinity {
        InfinityBranch::Yes => true,
        InfinityBranch::No => false,
        InfinityBranch::Auto => detect_infinity(&fam.f)?,
    };
    let d = radical.deg();
    let mut form = BinaryForm::homogenize(&radical, d);
    if infinity {
        form = form.mul(&BinaryForm::y());
    }
    let branch_count = d + usize::from(infinity);
    Ok(BranchData { disc, radical, infinity, form, branch_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum S0Reason {
    GroupOrder,
    DegreeFactorial,
    LeadingCoefficient,
    TrailingCoefficient,
    BranchDiscriminant,
    FixedDivisorRange,
    LeadingXContent,
    UserExtra,
}

/// Conservative set S_0 of bad primes with the reasons each one is present.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BadPrimes {
    pub primes: BTreeMap<u64, BTreeSet<S0Reason>>,
    /// Sharper set declared by the family, kept for reporting.
    pub override_set: Option<BTreeSet<u64>>,
}

impl BadPrimes {
    pub fn contains(&self, p: u64) -> bool {
        self.primes.contains_key(&p)
    }

    pub fn contains_big(&self, p: &BigUint) -> bool {
        p.to_u64().is_some_and(|p| self.contains(p))
    }

    pub fn list(&self) -> Vec<u64> {
        self.primes.keys().copied().collect()
    }

    pub fn product(&self) -> BigInt {
        self.primes.keys().map(|&p| BigInt::from(p)).product()
    }

    /// (S_0-part, cofactor) of v: the S_0-part is positive, the cofactor
    /// keeps the sign of v and is prime to every S_0 prime. Zero maps to (1, 0).
    pub fn split(&self, v: &BigInt) -> (BigInt, BigInt) {
        let mut part = BigInt::one();
        let mut rest = v.clone();
        if rest.is_zero() {
            return (part, rest);
        }
        for &p in self.primes.keys() {
            let pb = BigInt::from(p);
            while (&rest % &pb).is_zero() {
                rest /= &pb;
                part *= &pb;
            }
        }
        (part, rest)
    }

    fn add(&mut self, p: u64, r: S0Reason) {
        self.primes.entry(p).or_default().insert(r);
    }

    fn add_divisors(&mut self, n: &BigInt, r: S0Reason) -> Result<()> {
        if n.is_zero() {
            return Err(Error::Invalid(format!("zero coefficient for {r:?}")));
        }
        let fac = factor_integer(n, FactorBudget::default());
        if !fac.is_complete() {
            return Err(Error::BudgetExceeded(format!("factoring {n} for S0")));
        }
        for (p, _) in fac.primes {
            let p = p
                .to_u64()
                .ok_or_else(|| Error::Invalid(format!("bad prime {p} exceeds 64 bits")))?;
            self.add(p, r);
        }
        Ok(())
    }

    /// Union with another set, keeping all reasons.
    pub fn merge(&mut self, other: &BadPrimes) {
        for (&p, rs) in &other.primes {
            self.primes.entry(p).or_default().extend(rs.iter().copied());
        }
    }
}

pub fn bad_primes(fam: &Family, bd: &BranchData) -> Result<BadPrimes> {
    let mut s = BadPrimes {
        override_set: fam.s0_override.as_ref().map(|v| v.iter().copied().collect()),
        ..Default::default()
    };
    match fam.group_order {
        Some(g) => s.add_divisors(&BigInt::from(g), S0Reason::GroupOrder)?,
        None => {
            for p in primes_up_to(fam.degree() as u64) {
                s.add(p, S0Reason::DegreeFactorial);
            }
        }
    }
    let delta = &bd.radical;
    if delta.deg() > 0 {
        s.add_divisors(&delta.lc(), S0Reason::LeadingCoefficient)?;
        let (_, tc) = delta.trailing().expect("nonzero radical");
        s.add_divisors(tc, S0Reason::TrailingCoefficient)?;
        if delta.deg() > 1 {
            s.add_divisors(&discriminant_z(delta), S0Reason::BranchDiscriminant)?;
        }
    }
    for p in primes_up_to(bd.form.degree() as u64) {
        s.add(p, S0Reason::FixedDivisorRange);
    }
    s.add_divisors(&fam.f.lc_first().content(), S0Reason::LeadingXContent)?;
    for &p in &fam.s0_extra {
        s.add(p, S0Reason::UserExtra);
    }
    Ok(s)
}

/// Primitive part of b^d f(X; a/b), positive leading coefficient.
pub fn specialize_at(fam: &Family, a: &BigInt, b: &BigInt) -> Result<UniPoly> {
    if !a.gcd(b).is_one() {
        return Err(Error::Invalid(format!("({a} : {b}) is not a coprime pair")));
    }
    let bd = fam.branch_data()?;
    if bd.form.evaluate(a, b).is_zero() {
        return Err(Error::BranchPoint);
    }
    let g = fam.f.specialize_projective(a, b);
    if g.deg() < fam.degree() {
        return Err(Error::DegreeDrop(a.to_string(), b.to_string()));
    }
    let g = g.primitive_positive();
    if discriminant_z(&g).is_zero() {
        // A root of disc_X that is not a declared branch point.
        return Err(Error::BranchPoint);
    }
    Ok(g)
}
