//! Integer primality, factoring and squarefreeness under an explicit budget.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Primes up to `n` (inclusive) by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(k, _)| k as u64)
        .collect()
}

pub const SMALL_PRIME_BOUND: u64 = 100_000;

/// Cached primes up to 10^5.
pub fn small_primes() -> &'static [u64] {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    CACHE.get_or_init(|| primes_up_to(SMALL_PRIME_BOUND))
}

fn mulmod64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod64(r, a, m);
        }
        a = mulmod64(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod64(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primality: deterministic below 2^64, Miller–Rabin with the first 24 prime
/// bases above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'outer: for &a in small_primes().iter().take(24) {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime_u64(k) {
        k += 1;
    }
    k
}

/// If `n = r^k` for some k ≥ 2, returns the smallest such root r.
pub fn perfect_power_root(n: &BigUint) -> Option<BigUint> {
    if *n < BigUint::from(4u32) {
        return None;
    }
    let bits = n.bits();
    let mut best = None;
    for k in 2..=bits as u32 {
        let r = n.nth_root(k);
        if r < BigUint::from(2u32) {
            break;
        }
        if num_traits::pow(r.clone(), k as usize) == *n {
            best = Some(r);
        }
    }
    best
}

/// Work limits for integer factoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBudget {
    pub trial_bound: u64,
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { trial_bound: SMALL_PRIME_BOUND, rho_iterations: 200_000 }
    }
}

fn gcd64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Brent's variant of Pollard rho on u64; returns a nontrivial factor.
fn rho_u64(n: u64, c: u64, iters: &mut u64) -> Option<u64> {
    let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let m = 64u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let lim = m.min(r - k);
            for _ in 0..lim {
                y = f(y);
                q = mulmod64(q, x.abs_diff(y), n);
            }
            if *iters < lim {
                return None;
            }
            *iters -= lim;
            g = gcd64(q, n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd64(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

fn rho_big(n: &BigUint, c: u64, iters: &mut u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r = 1u64;
    let mut q = BigUint::one();
    let m = 64u64;
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let lim = m.min(r - k);
            for _ in 0..lim {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            if *iters < lim {
                return None;
            }
            *iters -= lim;
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

/// One nontrivial split of a composite `n`, or `None` when the budget runs out.
fn split(n: &BigUint, iters: &mut u64) -> Option<BigUint> {
    for c in 1..64u64 {
        if *iters == 0 {
            return None;
        }
        let r = match n.to_u64() {
            Some(v) => rho_u64(v, c, iters).map(BigUint::from),
            None => rho_big(n, c, iters),
        };
        if r.is_some() {
            return r;
        }
    }
    None
}

/// Partial factorization of |n|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// Prime factors with exponents, ascending.
    pub primes: Vec<(BigUint, u32)>,
    /// Cofactors that could not be split within budget (composite, not prime).
    pub unfactored: Vec<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    fn push(&mut self, p: BigUint, e: u32) {
        if let Some(entry) = self.primes.iter_mut().find(|(q, _)| *q == p) {
            entry.1 += e;
        } else {
            self.primes.push((p, e));
        }
    }
}

/// Factor |n| as far as the budget allows. `n = 0` yields an empty factorization.
pub fn factor_integer(n: &BigInt, budget: FactorBudget) -> Factorization {
    let mut out = Factorization { primes: Vec::new(), unfactored: Vec::new() };
    let mut m = n.magnitude().clone();
    if m.is_zero() {
        return out;
    }
    for &p in small_primes().iter().take_while(|&&p| p <= budget.trial_bound) {
        if m.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push(pb, e);
        }
    }
    let mut iters = budget.rho_iterations;
    let mut stack = vec![m];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        let tb = BigUint::from(budget.trial_bound);
        if m <= &tb * &tb || is_prime(&m) {
            out.push(m, 1);
            continue;
        }
        if let Some(r) = perfect_power_root(&m) {
            let mut k = 0;
            let mut t = m.clone();
            while !t.is_one() {
                t /= &r;
                k += 1;
            }
            for _ in 0..k {
                stack.push(r.clone());
            }
            continue;
        }
        match split(&m, &mut iters) {
            Some(d) => {
                let q = &m / &d;
                stack.push(d);
                stack.push(q);
            }
            None => out.unfactored.push(m),
        }
    }
    out.primes.sort();
    out.unfactored.sort();
    out
}

/// Witness that n is not squarefree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareWitness {
    /// p prime with p^2 | n.
    Prime(BigUint),
    /// d > 1 (not known prime) with d^2 | n.
    Composite(BigUint),
    /// n = 0.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquarefreeVerdict {
    /// Certified squarefree; carries the prime factors of |n| ascending.
    Squarefree(Vec<BigUint>),
    NotSquarefree(SquareWitness),
    Undetermined,
}

impl SquarefreeVerdict {
    pub fn is_squarefree(&self) -> bool {
        matches!(self, SquarefreeVerdict::Squarefree(_))
    }
}

/// Three-valued squarefree test with early exit on the first square divisor.
pub fn squarefree_integer(n: &BigInt, budget: FactorBudget) -> SquarefreeVerdict {
    if n.sign() == Sign::NoSign {
        return SquarefreeVerdict::NotSquarefree(SquareWitness::Zero);
    }
    let mut m = n.magnitude().clone();
    let mut primes = Vec::new();
    if let Some(v) = m.to_u64() {
        // Word-size fast path.
        let mut v = v;
        for &p in small_primes().iter().take_while(|&&p| p <= budget.trial_bound) {
            if p * p > v {
                break;
            }
            if v % p == 0 {
                v /= p;
                if v % p == 0 {
                    return SquarefreeVerdict::NotSquarefree(SquareWitness::Prime(p.into()));
                }
                primes.push(BigUint::from(p));
            }
        }
        m = BigUint::from(v);
    } else {
        for &p in small_primes().iter().take_while(|&&p| p <= budget.trial_bound) {
            let pb = BigUint::from(p);
            if &pb * &pb > m {
                break;
            }
            if (&m % &pb).is_zero() {
                m /= &pb;
                if (&m % &pb).is_zero() {
                    return SquarefreeVerdict::NotSquarefree(SquareWitness::Prime(pb));
                }
                primes.push(pb);
            }
        }
    }
    let tb = BigUint::from(budget.trial_bound);
    let mut iters = budget.rho_iterations;
    let mut stack = vec![m];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if m <= &tb * &tb || is_prime(&m) {
            primes.push(m);
            continue;
        }
        if let Some(r) = perfect_power_root(&m) {
            let w = if is_prime(&r) {
                SquareWitness::Prime(r)
            } else {
                SquareWitness::Composite(r)
            };
            return SquarefreeVerdict::NotSquarefree(w);
        }
        match split(&m, &mut iters) {
            Some(d) => {
                let q = &m / &d;
                let g = d.gcd(&q);
                if !g.is_one() {
                    let w = if is_prime(&g) {
                        SquareWitness::Prime(g)
                    } else {
                        SquareWitness::Composite(g)
                    };
                    return SquarefreeVerdict::NotSquarefree(w);
                }
                stack.push(d);
                stack.push(q);
            }
            None => return SquarefreeVerdict::Undetermined,
        }
    }
    primes.sort();
    // A prime could repeat only through an undetected square, which the gcd
    // checks above exclude; keep the guard anyway.
    for w in primes.windows(2) {
        if w[0] == w[1] {
            return SquarefreeVerdict::NotSquarefree(SquareWitness::Prime(w[0].clone()));
        }
    }
    SquarefreeVerdict::Squarefree(primes)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Prime factors of a small nonzero integer by trial division.
pub fn prime_factors_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Chinese remainder for coprime moduli: x ≡ r_i mod m_i.
pub fn crt(residues: &[(BigInt, BigInt)]) -> Option<(BigInt, BigInt)> {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in residues {
        let g = m.extended_gcd(mi);
        if !g.gcd.is_one() {
            return None;
        }
        // x + m*t ≡ r mod mi  =>  t ≡ (r - x) * m^{-1}
        let t = ((r - &x) * &g.x).mod_floor(mi);
        x += &m * t;
        m *= mi;
        x = x.mod_floor(&m);
    }
    Some((x, m))
}

/// Modular inverse for big integers.
pub fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.mod_floor(m).extended_gcd(m);
    if g.gcd.is_one() {
        Some(g.x.mod_floor(m))
    } else {
        None
    }
}

/// Squarefree kernel of a nonzero integer when fully factorable within budget:
/// (sign * product of primes with odd exponent, primes).
pub fn squarefree_kernel(n: &BigInt, budget: FactorBudget) -> Option<BigInt> {
    let f = factor_integer(n, budget);
    if !f.is_complete() || n.is_zero() {
        return None;
    }
    let mut k = BigInt::one();
    for (p, e) in &f.primes {
        if e % 2 == 1 {
            k *= BigInt::from(p.clone());
        }
    }
    if n.sign() == Sign::Minus {
        k = -k;
    }
    Some(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(n: i64) -> SquarefreeVerdict {
        squarefree_integer(&BigInt::from(n), FactorBudget::default())
    }

    #[test]
    fn spec_examples() {
        assert!(sf(30).is_squarefree());
        assert_eq!(sf(12), SquarefreeVerdict::NotSquarefree(SquareWitness::Prime(2u32.into())));
        assert!(sf(2305843009213693951).is_squarefree());
        assert_eq!(sf(0), SquarefreeVerdict::NotSquarefree(SquareWitness::Zero));
        assert!(sf(-1).is_squarefree());
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 1..=1_000_000u64 {
            let mut m = n;
            let mut square_free = true;
            let mut d = 2;
            while d * d <= m {
                if m % d == 0 {
                    m /= d;
                    if m % d == 0 {
                        square_free = false;
                        break;
                    }
                }
                d += 1;
            }
            let v = squarefree_integer(&BigInt::from(n), FactorBudget::default());
            assert_eq!(v.is_squarefree(), square_free, "n = {n}");
            if let SquarefreeVerdict::NotSquarefree(SquareWitness::Prime(p)) = v {
                let p = p.to_u64().unwrap();
                assert_eq!(n % (p * p), 0);
            }
        }
    }

    #[test]
    fn large_values() {
        let p1 = BigInt::from(1_000_000_007u64);
        let p2 = BigInt::from(998_244_353u64);
        let p3 = BigInt::from(2305843009213693951u64);
        let sq = &p1 * &p1 * &p2;
        assert_eq!(
            squarefree_integer(&sq, FactorBudget::default()),
            SquarefreeVerdict::NotSquarefree(SquareWitness::Prime(BigUint::from(1_000_000_007u64)))
        );
        let n = &p1 * &p2 * &p3;
        let v = squarefree_integer(&n, FactorBudget::default());
        assert!(v.is_squarefree());
        let f = factor_integer(&(&n * &p2), FactorBudget::default());
        assert!(f.is_complete());
        assert_eq!(f.primes.len(), 3);
        assert_eq!(f.primes.iter().find(|(q, _)| *q == p2.magnitude().clone()).unwrap().1, 2);
    }

    #[test]
    fn budget_exhaustion_is_undetermined() {
        let p1 = BigInt::from(4_611_686_018_427_388_039u64);
        let p2 = BigInt::from(4_611_686_018_427_387_847u64);
        let n = &p1 * &p2;
        let tight = FactorBudget { trial_bound: 1000, rho_iterations: 10 };
        assert_eq!(squarefree_integer(&n, tight), SquarefreeVerdict::Undetermined);
    }

    #[test]
    fn perfect_powers() {
        assert_eq!(perfect_power_root(&BigUint::from(1u32 << 20)), Some(BigUint::from(2u32)));
        assert_eq!(perfect_power_root(&BigUint::from(36u32)), Some(BigUint::from(6u32)));
        assert_eq!(perfect_power_root(&BigUint::from(35u32)), None);
    }

    #[test]
    fn crt_small() {
        let (x, m) = crt(&[(2.into(), 5.into()), (3.into(), 7.into())]).unwrap();
        assert_eq!((x, m), (BigInt::from(17), BigInt::from(35)));
        assert_eq!(inverse_mod(&BigInt::from(3), &BigInt::from(7)), Some(BigInt::from(5)));
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&BigInt::from(-48), 2), 4);
        assert_eq!(valuation(&BigInt::from(7), 3), 0);
        assert_eq!(prime_factors_u64(360), vec![2, 3, 5]);
        assert_eq!(next_prime(100), 101);
    }
}
