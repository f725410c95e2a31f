//! Polynomials over F_p for word-size primes and their factorization
//! (squarefree, distinct-degree, Cantor–Zassenhaus equal-degree).

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::integer::is_prime_u64;
use super::unipoly::UniPoly;
use crate::error::{Error, Result};

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

pub fn invmod(a: u64, p: u64) -> Option<u64> {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(p as i128) as u64)
}

/// Reduce a big integer into [0, p).
pub fn reduce_big(c: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = ((c % &m) + &m) % &m;
    r.to_u64().unwrap()
}

/// Dense polynomial over F_p, p < 2^63 prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    pub p: u64,
    c: Vec<u64>,
}

impl FpPoly {
    pub fn new(mut c: Vec<u64>, p: u64) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, c }
    }

    pub fn from_unipoly(f: &UniPoly, p: u64) -> Self {
        Self::new(f.coeffs().iter().map(|c| reduce_big(c, p)).collect(), p)
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, c: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Self::new(vec![1], p)
    }

    pub fn x(p: u64) -> Self {
        Self::new(vec![0, 1], p)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lc(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0;
        for &c in self.c.iter().rev() {
            acc = addmod(mulmod(acc, x, self.p), c, self.p);
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new(
            (0..n).map(|i| addmod(self.coeff(i), o.coeff(i), self.p)).collect(),
            self.p,
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new(
            (0..n).map(|i| submod(self.coeff(i), o.coeff(i), self.p)).collect(),
            self.p,
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let p = self.p;
        let mut acc = vec![0u128; self.c.len() + o.c.len() - 1];
        let pp = p as u128;
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % pp;
            }
        }
        Self::new(acc.into_iter().map(|v| v as u64).collect(), p)
    }

    pub fn scale(&self, s: u64) -> Self {
        Self::new(self.c.iter().map(|&c| mulmod(c, s, self.p)).collect(), self.p)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = invmod(self.lc(), self.p).unwrap();
        self.scale(inv)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mulmod(c, (i as u64) % self.p, self.p))
                .collect(),
            self.p,
        )
    }

    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero in F_p[X]");
        let p = self.p;
        if self.deg() < d.deg() || self.is_zero() {
            return (Self::zero(p), self.clone());
        }
        let inv = invmod(d.lc(), p).unwrap();
        let dd = d.deg();
        let mut r = self.c.clone();
        let mut q = vec![0u64; self.deg() - dd + 1];
        for i in (0..q.len()).rev() {
            let t = r[i + dd];
            if t == 0 {
                continue;
            }
            let qi = mulmod(t, inv, p);
            q[i] = qi;
            for (j, &dc) in d.c.iter().enumerate() {
                r[i + j] = submod(r[i + j], mulmod(qi, dc, p), p);
            }
        }
        (Self::new(q, p), Self::new(r, p))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn mulmod_poly(&self, o: &Self, m: &Self) -> Self {
        self.mul(o).rem(m)
    }

    /// `self^e mod m` for a big exponent.
    pub fn powmod_big(&self, e: &BigUint, m: &Self) -> Self {
        let mut acc = Self::one(self.p).rem(m);
        let base = self.rem(m);
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = acc.mulmod_poly(&acc, m);
            if e.bit(i) {
                acc = acc.mulmod_poly(&base, m);
            }
        }
        acc
    }

    pub fn powmod_u64(&self, e: u64, m: &Self) -> Self {
        self.powmod_big(&BigUint::from(e), m)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.p);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficients as signed integers in [0, p).
    pub fn to_unipoly(&self, var: super::unipoly::Var) -> UniPoly {
        UniPoly::new(self.c.iter().map(|&c| BigInt::from(c)).collect(), var)
    }

    /// Distinct roots in F_p, sorted ascending.
    pub fn roots(&self, rng: &mut ChaCha8Rng) -> Vec<u64> {
        let p = self.p;
        if self.is_zero() {
            return Vec::new();
        }
        if self.deg() == 0 {
            return Vec::new();
        }
        let f = self.monic();
        let xp = Self::x(p).powmod_u64(p, &f);
        let g = f.gcd(&xp.sub(&Self::x(p)));
        let mut out: Vec<u64> = equal_degree_split(&g, 1, rng)
            .into_iter()
            .map(|h| submod(0, h.coeff(0), p))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Factorization of a polynomial over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModPolyFactorization {
    pub p: u64,
    pub unit: u64,
    /// Monic irreducible factors (coefficients ascending) with multiplicities.
    pub factors: Vec<(Vec<u64>, u32)>,
}

impl ModPolyFactorization {
    pub fn factor_polys(&self) -> Vec<(FpPoly, u32)> {
        self.factors
            .iter()
            .map(|(c, e)| (FpPoly::new(c.clone(), self.p), *e))
            .collect()
    }

    /// Degrees with multiplicity, sorted ascending.
    pub fn degree_multiset(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for (c, e) in &self.factors {
            for _ in 0..*e {
                v.push(c.len() - 1);
            }
        }
        v.sort_unstable();
        v
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    pub fn product(&self) -> FpPoly {
        let mut acc = FpPoly::new(vec![self.unit], self.p);
        for (f, e) in self.factor_polys() {
            acc = acc.mul(&f.pow(e as usize));
        }
        acc
    }
}

fn frobenius_root(f: &FpPoly) -> FpPoly {
    // f = h(X^p); return h. Coefficients are their own p-th roots in F_p.
    let p = f.p as usize;
    let n = f.deg() / p;
    FpPoly::new((0..=n).map(|i| f.coeff(i * p)).collect(), f.p)
}

/// Squarefree decomposition of a monic polynomial: (squarefree factor, multiplicity).
fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.p;
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let d = f.derivative();
    if d.is_zero() {
        for (g, e) in squarefree_decomposition(&frobenius_root(f)) {
            out.push((g, e * p as u32));
        }
        return out;
    }
    let mut c = f.gcd(&d);
    let mut w = f.divrem(&c).0;
    let mut i = 1u32;
    while w.deg() > 0 {
        let y = w.gcd(&c);
        let z = w.divrem(&y).0;
        if z.deg() > 0 {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.divrem(&w).0;
    }
    if c.deg() > 0 {
        for (g, e) in squarefree_decomposition(&frobenius_root(&c.monic())) {
            out.push((g, e * p as u32));
        }
    }
    out
}

/// Distinct-degree factorization of a squarefree monic polynomial.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.clone();
    let mut d = 0;
    while rest.deg() >= 2 * (d + 1) {
        d += 1;
        h = h.powmod_u64(p, &rest);
        let g = rest.gcd(&h.sub(&x));
        if g.deg() > 0 {
            rest = rest.divrem(&g).0.monic();
            h = h.rem(&rest);
            out.push((g, d));
        }
    }
    if rest.deg() > 0 {
        let dd = rest.deg();
        out.push((rest, dd));
    }
    out
}

fn random_poly(deg_bound: usize, p: u64, rng: &mut ChaCha8Rng) -> FpPoly {
    FpPoly::new((0..deg_bound).map(|_| rng.gen_range(0..p)).collect(), p)
}

/// Split a squarefree monic product of irreducibles of degree `d` into its factors.
pub(crate) fn equal_degree_split(f: &FpPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
    let p = f.p;
    let n = f.deg();
    if n == 0 {
        return Vec::new();
    }
    if n == d {
        return vec![f.monic()];
    }
    if p < 64 && d == 1 {
        // Tiny fields: roots by evaluation.
        let roots: Vec<FpPoly> = (0..p)
            .filter(|&r| f.eval(r) == 0)
            .map(|r| FpPoly::new(vec![submod(0, r, p), 1], p))
            .collect();
        return roots;
    }
    let mut stack = vec![f.monic()];
    let mut out = Vec::new();
    while let Some(g) = stack.pop() {
        if g.deg() == d {
            out.push(g);
            continue;
        }
        loop {
            let a = random_poly(g.deg(), p, rng);
            if a.deg() == 0 {
                continue;
            }
            let b = if p == 2 {
                // Trace map a + a^2 + ... + a^(2^(d-1)).
                let mut t = a.rem(&g);
                let mut acc = t.clone();
                for _ in 1..d {
                    t = t.mulmod_poly(&t, &g);
                    acc = acc.add(&t);
                }
                acc
            } else {
                let e = (num_traits::pow(BigUint::from(p), d) - BigUint::one()) >> 1;
                a.powmod_big(&e, &g).sub(&FpPoly::one(p))
            };
            let h = g.gcd(&b);
            if h.deg() > 0 && h.deg() < g.deg() {
                let q = g.divrem(&h).0.monic();
                stack.push(h);
                stack.push(q);
                break;
            }
        }
    }
    out
}

fn check_prime(p: u64) -> Result<()> {
    if p >= (1u64 << 63) || !is_prime_u64(p) {
        return Err(Error::BadModulus(p.to_string()));
    }
    Ok(())
}

/// Complete factorization of `f mod p` into monic irreducibles, sorted by
/// (degree, coefficients) for determinism.
pub fn factor_mod_p(f: &UniPoly, p: u64) -> Result<ModPolyFactorization> {
    factor_mod_p_seeded(f, p, 0)
}

pub fn factor_mod_p_seeded(f: &UniPoly, p: u64, seed: u64) -> Result<ModPolyFactorization> {
    check_prime(p)?;
    let fp = FpPoly::from_unipoly(f, p);
    factor_fp(&fp, seed)
}

pub fn factor_fp(fp: &FpPoly, seed: u64) -> Result<ModPolyFactorization> {
    let p = fp.p;
    if fp.is_zero() {
        return Err(Error::VanishingReduction(p));
    }
    let unit = fp.lc();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p.rotate_left(17));
    let mut factors = Vec::new();
    for (sf, mult) in squarefree_decomposition(&fp.monic()) {
        for (g, d) in distinct_degree(&sf) {
            for h in equal_degree_split(&g, d, &mut rng) {
                factors.push((h.coeffs().to_vec(), mult));
            }
        }
    }
    factors.sort_by(|a, b| {
        a.0.len()
            .cmp(&b.0.len())
            .then_with(|| a.0.iter().rev().cmp(b.0.iter().rev()))
            .then(a.1.cmp(&b.1))
    });
    Ok(ModPolyFactorization { p, unit, factors })
}

/// True if `f mod p` is squarefree of the same degree as `f`.
pub fn is_squarefree_mod_p(f: &UniPoly, p: u64) -> bool {
    let fp = FpPoly::from_unipoly(f, p);
    if fp.deg() != f.deg() || fp.is_zero() {
        return false;
    }
    fp.gcd(&fp.derivative()).deg() == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::unipoly::Var;

    fn x(c: &[i64]) -> UniPoly {
        UniPoly::from_i64(c, Var::X)
    }

    /// Brute-force irreducibility over small F_p: no factor of degree ≤ n/2.
    fn brute_irreducible(f: &FpPoly) -> bool {
        let p = f.p;
        let n = f.deg();
        for d in 1..=n / 2 {
            let count = p.pow(d as u32);
            for k in 0..count {
                let mut c = Vec::with_capacity(d + 1);
                let mut t = k;
                for _ in 0..d {
                    c.push(t % p);
                    t /= p;
                }
                c.push(1);
                if f.rem(&FpPoly::new(c, p)).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn spec_examples() {
        let f = factor_mod_p(&x(&[-1, -1, 0, 1]), 5).unwrap();
        assert_eq!(f.factors, vec![(vec![3, 1], 1), (vec![3, 2, 1], 1)]);
        let f = factor_mod_p(&x(&[-1, -1, 0, 1]), 23).unwrap();
        assert_eq!(f.factors, vec![(vec![13, 1], 2), (vec![20, 1], 1)]);
        let f = factor_mod_p(&x(&[1, 0, 1]), 2).unwrap();
        assert_eq!(f.factors, vec![(vec![1, 1], 2)]);
        assert_eq!(factor_mod_p(&x(&[5, 10]), 5), Err(Error::VanishingReduction(5)));
    }

    #[test]
    fn inseparable_pieces() {
        // (X^3 + 1)^3 * (X+2) mod 3 = (X+1)^9 (X+2)
        let g = x(&[1, 0, 0, 1]).pow(3);
        let f = &g * &x(&[2, 1]);
        let fac = factor_mod_p(&f, 3).unwrap();
        assert_eq!(fac.factors, vec![(vec![1, 1], 9), (vec![2, 1], 1)]);
        assert_eq!(fac.product(), FpPoly::from_unipoly(&f, 3));
    }

    #[test]
    fn brute_force_agreement_small_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &p in &[2u64, 3, 5, 7] {
            for _ in 0..60 {
                let n = rng.gen_range(1..=6);
                let mut c: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
                c.push(rng.gen_range(1..p));
                let fp = FpPoly::new(c, p);
                let fac = factor_fp(&fp, 3).unwrap();
                assert_eq!(fac.product(), fp);
                for (g, _) in fac.factor_polys() {
                    assert_eq!(g.lc(), 1);
                    assert!(brute_irreducible(&g));
                }
                let total: usize = fac.degree_multiset().iter().sum();
                assert_eq!(total, fp.deg());
            }
        }
    }

    #[test]
    fn large_prime_roots() {
        let p = 2305843009213693951u64;
        // (X - 5)(X - 12345678901)(X^2 + 1) mod p
        let f = FpPoly::new(vec![p - 5, 1], p)
            .mul(&FpPoly::new(vec![p - 12345678901, 1], p))
            .mul(&FpPoly::new(vec![1, 0, 1], p));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = f.roots(&mut rng);
        // p ≡ 3 mod 4, so X^2 + 1 has no roots
        assert_eq!(r, vec![5, 12345678901]);
        let fac = factor_fp(&f, 0).unwrap();
        assert_eq!(fac.degree_multiset(), vec![1, 1, 2]);
    }

    #[test]
    fn inverse_and_pow() {
        assert_eq!(invmod(3, 7), Some(5));
        assert_eq!(invmod(0, 7), None);
        assert_eq!(powmod(2, 10, 1000), 24);
    }
}
