//! Homogeneous binary forms over Z: evaluation, fixed prime divisors, the
//! fixed-divisor elimination transform, affine substitution and local densities.

pub mod sieve;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::fp::reduce_big;
use crate::exactalg::integer::primes_up_to;
use crate::exactalg::unipoly::{fmt_terms, mono_str};
use crate::exactalg::{squarefree_part, BiPoly, UniPoly, Var};

pub use sieve::{roots_mod_prime_square, squarefree_box_count, BoxCount};

/// `F(X,Y) = Σ c_i X^(n-i) Y^i` with explicit degree `n = coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    coeffs: Vec<BigInt>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "binary form needs at least one coefficient");
        BinaryForm { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// `Y^d p(X/Y)` for a polynomial `p` in one variable of degree ≤ d.
    pub fn homogenize(p: &UniPoly, d: usize) -> Self {
        assert!(p.deg() <= d);
        Self::new((0..=d).map(|i| p.coeff(d - i)).collect())
    }

    /// The forms X and Y.
    pub fn x() -> Self {
        Self::from_i64(&[1, 0])
    }

    pub fn y() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn evaluate(&self, a: &BigInt, b: &BigInt) -> BigInt {
        // Homogeneous Horner: after step i the sum is Σ_{k≤i} c_k a^(i-k) b^k.
        let mut acc = BigInt::zero();
        let mut bpow = BigInt::one();
        for c in &self.coeffs {
            acc = acc * a + c * &bpow;
            bpow *= b;
        }
        acc
    }

    pub fn evaluate_i64(&self, a: i64, b: i64) -> BigInt {
        self.evaluate(&BigInt::from(a), &BigInt::from(b))
    }

    /// Coefficients reduced mod m (m ≥ 1).
    pub fn coeffs_mod(&self, m: u64) -> Vec<u64> {
        self.coeffs.iter().map(|c| reduce_big(c, m)).collect()
    }

    /// `F(x, y) mod m` for residues x, y < m, coefficients pre-reduced.
    pub fn eval_mod_with(cm: &[u64], x: u64, y: u64, m: u64) -> u64 {
        let mm = m as u128;
        let mut acc: u128 = 0;
        let mut ypow: u128 = 1 % mm;
        for &c in cm {
            acc = (acc * x as u128 % mm + c as u128 * ypow % mm) % mm;
            ypow = ypow * y as u128 % mm;
        }
        acc as u64
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn content_primitive(&self) -> Result<(BigInt, Self)> {
        if self.is_zero() {
            return Err(Error::ZeroContent);
        }
        let c = self.content();
        Ok((c.clone(), Self::new(self.coeffs.iter().map(|v| v / &c).collect())))
    }

    /// `F(T, 1)` as a polynomial in T.
    pub fn dehomogenize(&self) -> UniPoly {
        let n = self.degree();
        UniPoly::new((0..=n).map(|k| self.coeffs[n - k].clone()).collect(), Var::T)
    }

    /// `F(1, S)` as a polynomial in S (tagged T).
    pub fn dehomogenize_at_x(&self) -> UniPoly {
        UniPoly::new(self.coeffs.clone(), Var::T)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `F(X, s Y)`.
    pub fn scale_y(&self, s: &BigInt) -> Self {
        let mut pw = BigInt::one();
        let mut c = Vec::with_capacity(self.coeffs.len());
        for v in &self.coeffs {
            c.push(v * &pw);
            pw *= s;
        }
        Self::new(c)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn to_bipoly(&self) -> BiPoly {
        let n = self.degree() as u32;
        BiPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| ((n - i as u32, i as u32), c.clone())),
            (Var::X, Var::Y),
        )
    }

    /// Multiplicity of Y as a factor (number of leading zero coefficients).
    pub fn y_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// True when F has no repeated factor over Q (Y counted as a factor).
    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        if self.y_multiplicity() > 1 {
            return false;
        }
        let f = self.dehomogenize();
        if f.deg() <= 1 {
            return true;
        }
        match squarefree_part(&f) {
            Ok(r) => r.deg() == f.deg(),
            Err(_) => false,
        }
    }

    pub fn is_normalized(&self) -> bool {
        !self.is_zero() && self.content().is_one() && self.is_squarefree()
    }

    /// True if F vanishes at every point of F_p^2.
    pub fn vanishes_identically_mod(&self, p: u64) -> bool {
        self.nonvanishing_witness(p).is_none()
    }

    /// First (x, y) in F_p^2 (x outer, y inner, ascending) with F(x,y) ≢ 0.
    pub fn nonvanishing_witness(&self, p: u64) -> Option<(u64, u64, u64)> {
        let cm = self.coeffs_mod(p);
        for x in 0..p {
            for y in 0..p {
                let v = Self::eval_mod_with(&cm, x, y, p);
                if v != 0 {
                    return Some((x, y, v));
                }
            }
        }
        None
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let terms: Vec<(BigInt, String)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let a = mono_str(Var::X, n - i);
                let b = mono_str(Var::Y, i);
                let m = match (a.is_empty(), b.is_empty()) {
                    (true, _) => b,
                    (_, true) => a,
                    _ => format!("{a}*{b}"),
                };
                (c.clone(), m)
            })
            .collect();
        fmt_terms(f, &terms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimeCertificate {
    /// A point of F_p^2 where F is nonzero, with the value mod p.
    Witness { x: u64, y: u64, value: u64 },
    VanishesIdentically,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedDivisorReport {
    pub fixed_primes: Vec<u64>,
    pub fixed_squares: Vec<u64>,
    /// One entry per tested prime p ≤ deg − 1.
    pub certificates: Vec<(u64, PrimeCertificate)>,
}

impl FixedDivisorReport {
    pub fn is_clean(&self) -> bool {
        self.fixed_primes.is_empty()
    }
}

/// True if p^2 divides F(x, y) for all (x, y) in (Z/p^2)^2.
fn fixed_square(f: &BinaryForm, p: u64) -> bool {
    let q = p * p;
    let cm = f.coeffs_mod(q);
    (0..q).all(|x| (0..q).all(|y| BinaryForm::eval_mod_with(&cm, x, y, q) == 0))
}

/// Exact fixed prime divisors of a content-1 form. A nonzero form of degree d
/// that vanishes on all of F_p^2 has d ≥ p + 1, so only p ≤ d − 1 are tested.
pub fn fixed_prime_divisors(f: &BinaryForm) -> Result<FixedDivisorReport> {
    if f.is_zero() || !f.content().is_one() {
        return Err(Error::NotNormalized);
    }
    let d = f.degree() as u64;
    let mut report = FixedDivisorReport {
        fixed_primes: Vec::new(),
        fixed_squares: Vec::new(),
        certificates: Vec::new(),
    };
    if d < 2 {
        return Ok(report);
    }
    for p in primes_up_to(d - 1) {
        match f.nonvanishing_witness(p) {
            Some((x, y, value)) => {
                report.certificates.push((p, PrimeCertificate::Witness { x, y, value }))
            }
            None => {
                report.fixed_primes.push(p);
                report.certificates.push((p, PrimeCertificate::VanishesIdentically));
                if fixed_square(f, p) {
                    report.fixed_squares.push(p);
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformStep {
    /// `None` for the initial leading-coefficient substitution.
    pub prime: Option<u64>,
    pub multiplier: String,
    pub content_removed: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformRecord {
    /// Accumulated multiplier: result = F(X, N·Y)/content.
    pub n: BigInt,
    pub content: BigInt,
    pub form: BinaryForm,
    pub steps: Vec<TransformStep>,
}

/// Remove fixed prime divisors: first `F(X, αY)/content` with α the leading
/// X-coefficient, then `F(X, pY)/content` for fixed primes p until none remain.
pub fn eliminate_fixed_divisors(f: &BinaryForm) -> Result<TransformRecord> {
    if f.is_zero() || !f.content().is_one() {
        return Err(Error::NotNormalized);
    }
    if !f.is_squarefree() {
        return Err(Error::RepeatedFactors);
    }
    let alpha = if !f.coeff(0).is_zero() {
        f.coeff(0).abs()
    } else {
        f.coeff(1).abs()
    };
    let (c0, mut form) = f.scale_y(&alpha).content_primitive()?;
    let mut n = alpha.clone();
    let mut steps = vec![TransformStep {
        prime: None,
        multiplier: alpha.to_string(),
        content_removed: c0.to_string(),
    }];
    loop {
        let rep = fixed_prime_divisors(&form)?;
        let Some(&p) = rep.fixed_primes.first() else {
            break;
        };
        let pb = BigInt::from(p);
        let (c, next) = form.scale_y(&pb).content_primitive()?;
        n *= &pb;
        steps.push(TransformStep {
            prime: Some(p),
            multiplier: p.to_string(),
            content_removed: c.to_string(),
        });
        form = next;
    }
    let (content, check) = f.scale_y(&n).content_primitive()?;
    debug_assert_eq!(check, form);
    Ok(TransformRecord { n, content, form, steps })
}

/// Exact expansion of `F(a1 + M X, b1 + M Y)`.
pub fn substitute_affine(f: &BinaryForm, a1: &BigInt, b1: &BigInt, m: &BigInt) -> BiPoly {
    let vars = (Var::X, Var::Y);
    let lx = BiPoly::linear(a1.clone(), m.clone(), BigInt::zero(), vars);
    let ly = BiPoly::linear(b1.clone(), BigInt::zero(), m.clone(), vars);
    let n = f.degree();
    let mut xp = vec![BiPoly::from_terms([((0, 0), BigInt::one())], vars)];
    let mut yp = xp.clone();
    for k in 1..=n {
        xp.push(&xp[k - 1] * &lx);
        yp.push(&yp[k - 1] * &ly);
    }
    let mut out = BiPoly::zero(vars);
    for (i, c) in f.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        out = &out + &(&xp[n - i] * &yp[i]).scale(c);
    }
    out
}

pub const DENSITY_BUDGET: u64 = 100_000_000;

fn count_divisible(f: &BinaryForm, q: u64, skip_both_divisible_by: Option<u64>) -> u64 {
    // For each x, walk y with forward differences of G(y) = F(x, y) mod q.
    let n = f.degree();
    let cm = f.coeffs_mod(q);
    let mut total = 0u64;
    for x in 0..q {
        let mut diffs: Vec<u64> = (0..=n)
            .map(|y| BinaryForm::eval_mod_with(&cm, x, y as u64 % q, q))
            .collect();
        for k in 1..=n {
            for j in (k..=n).rev() {
                diffs[j] = (diffs[j] + q - diffs[j - 1]) % q;
            }
        }
        let x_div = skip_both_divisible_by.is_some_and(|p| x % p == 0);
        for y in 0..q {
            if diffs[0] == 0 && !(x_div && y % skip_both_divisible_by.unwrap() == 0) {
                total += 1;
            }
            for j in 0..n {
                diffs[j] = (diffs[j] + diffs[j + 1]) % q;
            }
        }
    }
    total
}

/// `#{(x,y) mod p^e : p^e | F(x,y)} / p^(2e)` by exhaustive count.
pub fn local_density(f: &BinaryForm, p: u64, e: u32) -> Result<BigRational> {
    let q = p
        .checked_pow(e)
        .filter(|q| q.checked_mul(*q).is_some_and(|qq| qq <= DENSITY_BUDGET))
        .ok_or_else(|| Error::BudgetExceeded(format!("{p}^{e} squared exceeds 10^8")))?;
    let hits = count_divisible(f, q, None);
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(q * q)))
}

/// Same count restricted to pairs not both divisible by p.
pub fn local_density_coprime(f: &BinaryForm, p: u64, e: u32) -> Result<BigRational> {
    let q = p
        .checked_pow(e)
        .filter(|q| q.checked_mul(*q).is_some_and(|qq| qq <= DENSITY_BUDGET))
        .ok_or_else(|| Error::BudgetExceeded(format!("{p}^{e} squared exceeds 10^8")))?;
    let hits = count_divisible(f, q, Some(p));
    let total = q * q - (q / p) * (q / p);
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(c: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(c)
    }

    // XY(X−Y) = X^2 Y − X Y^2
    fn belyi() -> BinaryForm {
        bf(&[0, 1, -1, 0])
    }

    #[test]
    fn evaluation() {
        assert_eq!(belyi().evaluate_i64(3, 1), BigInt::from(6));
        assert_eq!(bf(&[0, 1, -2, 0]).evaluate_i64(1, 1), BigInt::from(-1));
        assert_eq!(belyi().evaluate_i64(0, 0), BigInt::zero());
        assert_eq!(bf(&[2, 3, 5]).evaluate_i64(7, -2), BigInt::from(2 * 49 - 42 + 20));
    }

    #[test]
    fn fixed_divisors() {
        let r = fixed_prime_divisors(&belyi()).unwrap();
        assert_eq!(r.fixed_primes, vec![2]);
        assert!(r.fixed_squares.is_empty());
        let r = fixed_prime_divisors(&bf(&[0, 1, -2, 0])).unwrap();
        assert!(r.fixed_primes.is_empty());
        // XY(X−Y)(X+Y) = X^3 Y − X Y^3
        let r = fixed_prime_divisors(&bf(&[0, 1, 0, -1, 0])).unwrap();
        assert_eq!(r.fixed_primes, vec![2, 3]);
        assert_eq!(fixed_prime_divisors(&bf(&[0, 2, -2, 0])), Err(Error::NotNormalized));
    }

    #[test]
    fn degree_bound_lemma_is_sharp() {
        // X^p Y − X Y^p has degree p + 1 and vanishes on all of F_p^2.
        for p in [2u64, 3, 5, 7] {
            let mut c = vec![0i64; p as usize + 2];
            c[1] = 1;
            c[p as usize] = -1;
            let f = bf(&c);
            assert!(f.vanishes_identically_mod(p));
            // Any nonzero form of degree ≤ p with content 1 has a witness.
            let g = bf(&c[1..]);
            assert!(!g.vanishes_identically_mod(p) || g.degree() as u64 >= p + 1);
        }
    }

    #[test]
    fn elimination() {
        let t = eliminate_fixed_divisors(&belyi()).unwrap();
        assert_eq!(t.form, bf(&[0, 1, -2, 0]));
        assert_eq!(t.n, BigInt::from(2));
        let t = eliminate_fixed_divisors(&bf(&[0, 1, -2, 0])).unwrap();
        assert_eq!(t.form, bf(&[0, 1, -2, 0]));
        assert_eq!(t.n, BigInt::one());
        let t = eliminate_fixed_divisors(&bf(&[0, 1, 0, -1, 0])).unwrap();
        assert_eq!(t.n, BigInt::from(6));
        assert_eq!(t.form, bf(&[0, 1, 0, -36, 0]));
        assert!(fixed_prime_divisors(&t.form).unwrap().is_clean());
        assert_eq!(eliminate_fixed_divisors(&bf(&[0, 0, 1])), Err(Error::RepeatedFactors));
    }

    #[test]
    fn affine_substitution() {
        let xy = bf(&[0, 1, 0]);
        let s = substitute_affine(&xy, &1.into(), &1.into(), &2.into());
        let expect = BiPoly::from_i64(
            &[(0, 0, 1), (1, 0, 2), (0, 1, 2), (1, 1, 4)],
            (Var::X, Var::Y),
        );
        assert_eq!(s, expect);
        let s = substitute_affine(&bf(&[1, 0, 0]), &0.into(), &0.into(), &3.into());
        assert_eq!(s, BiPoly::from_i64(&[(2, 0, 9)], (Var::X, Var::Y)));
        let f = bf(&[0, 1, -2, 0]);
        let s = substitute_affine(&f, &1.into(), &1.into(), &4.into());
        assert_eq!(s.eval(&1.into(), &0.into()), BigInt::from(15));
        assert_eq!(f.evaluate_i64(5, 1), BigInt::from(15));
    }

    #[test]
    fn densities() {
        let d = local_density(&bf(&[1, 0]), 3, 2).unwrap();
        assert_eq!(d, BigRational::new(1.into(), 9.into()));
        let d = local_density(&bf(&[0, 1, -2, 0]), 3, 2).unwrap();
        assert_eq!(d, BigRational::new(27.into(), 81.into()));
        let d = local_density(&belyi(), 2, 1).unwrap();
        assert_eq!(d, BigRational::one());
        assert!(local_density(&belyi(), 101, 2).is_err());
    }

    #[test]
    fn squarefree_forms() {
        assert!(belyi().is_squarefree());
        assert!(!bf(&[1, 2, 1]).is_squarefree());
        assert!(!bf(&[1, 0, 0]).is_squarefree());
        assert!(bf(&[0, 1]).is_squarefree());
        assert!(belyi().is_normalized());
    }

    #[test]
    fn display() {
        assert_eq!(bf(&[0, 1, -2, 0]).to_string(), "X^2*Y - 2*X*Y^2");
    }
}
