//! Exact squarefree-value counts of a binary form over a box by sieving with
//! the roots of the form modulo p^2.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BinaryForm;
use crate::error::{Error, Result};
use crate::exactalg::fp::{invmod, reduce_big, FpPoly};
use crate::exactalg::integer::primes_up_to;
use crate::exactalg::UniPoly;

fn eval_mod(c: &[u64], x: u64, q: u64) -> u64 {
    let qq = q as u128;
    let mut acc: u128 = 0;
    for &a in c.iter().rev() {
        acc = (acc * x as u128 + a as u128) % qq;
    }
    acc as u64
}

/// All residues r mod p^2 with f(r) ≡ 0 mod p^2, ascending.
pub fn roots_mod_prime_square(f: &UniPoly, p: u64) -> Vec<u64> {
    let q = p * p;
    let cq: Vec<u64> = f.coeffs().iter().map(|c| reduce_big(c, q)).collect();
    if p < 64 {
        return (0..q).filter(|&r| eval_mod(&cq, r, q) == 0).collect();
    }
    let fp = FpPoly::from_unipoly(f, p);
    if fp.is_zero() {
        return (0..q).filter(|&r| eval_mod(&cq, r, q) == 0).collect();
    }
    let dq: Vec<u64> = f.derivative().coeffs().iter().map(|c| reduce_big(c, p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let mut out = Vec::new();
    for r0 in fp.roots(&mut rng) {
        let v = eval_mod(&cq, r0, q);
        let d = eval_mod(&dq, r0, p);
        if d != 0 {
            let t = ((p - (v / p) % p) % p) as u128 * invmod(d, p).unwrap() as u128 % p as u128;
            out.push(r0 + p * t as u64);
        } else if v == 0 {
            out.extend((0..p).map(|t| r0 + p * t));
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxCount {
    pub bound: u64,
    pub total_pairs: u64,
    pub coprime_pairs: u64,
    /// Coprime pairs with F(x,y) nonzero and squarefree. For deg F ≥ 2 these
    /// are all squarefree values in the box.
    pub squarefree_coprime: u64,
}

impl BoxCount {
    pub fn coprime_density(&self) -> f64 {
        self.squarefree_coprime as f64 / self.coprime_pairs as f64
    }

    pub fn all_pairs_density(&self) -> f64 {
        self.squarefree_coprime as f64 / self.total_pairs as f64
    }
}

/// Count coprime (x, y) in [1, B]^2 with F(x, y) squarefree, exactly.
pub fn squarefree_box_count(f: &BinaryForm, bound: u64) -> Result<BoxCount> {
    let b = bound as usize;
    let n = f.degree();
    let coeffs: Vec<i128> = f
        .coeffs()
        .iter()
        .map(|c| c.to_i128().ok_or_else(|| Error::Invalid("coefficient too large".into())))
        .collect::<Result<_>>()?;
    let maxabs: BigInt = f.coeffs().iter().map(|c| c.abs()).sum::<BigInt>()
        * num_traits::pow(BigInt::from(bound), n);
    if maxabs.bits() > 120 {
        return Err(Error::BudgetExceeded("form values exceed 120 bits".into()));
    }
    let sqrt_max = maxabs.sqrt().to_u64().unwrap();
    let mut bad = vec![false; b * b];
    let idx = |x: u64, y: u64| (x as usize - 1) * b + (y as usize - 1);

    let fx = f.dehomogenize();
    let fy = f.dehomogenize_at_x();
    for p in primes_up_to(sqrt_max) {
        let q = p * p;
        for r in roots_mod_prime_square(&fx, p) {
            // x ≡ r y mod p^2 with p ∤ y
            for y in 1..=bound {
                if y % p == 0 {
                    continue;
                }
                let x0 = ((r as u128 * y as u128) % q as u128) as u64;
                let mut x = if x0 == 0 { q } else { x0 };
                while x <= bound {
                    bad[idx(x, y)] = true;
                    x += q;
                }
            }
        }
        if (f.coeff(0) % BigInt::from(p)).is_zero() {
            for s in roots_mod_prime_square(&fy, p).into_iter().filter(|s| s % p == 0) {
                // y ≡ s x mod p^2 with p ∤ x
                for x in 1..=bound {
                    if x % p == 0 {
                        continue;
                    }
                    let y0 = ((s as u128 * x as u128) % q as u128) as u64;
                    let mut y = if y0 == 0 { q } else { y0 };
                    while y <= bound {
                        bad[idx(x, y)] = true;
                        y += q;
                    }
                }
            }
        }
    }

    let mut count = BoxCount {
        bound,
        total_pairs: bound * bound,
        coprime_pairs: 0,
        squarefree_coprime: 0,
    };
    for x in 1..=bound {
        for y in 1..=bound {
            if x.gcd(&y) != 1 {
                continue;
            }
            count.coprime_pairs += 1;
            if bad[idx(x, y)] {
                continue;
            }
            let (xi, yi) = (x as i128, y as i128);
            let mut acc: i128 = 0;
            let mut yp: i128 = 1;
            for &c in &coeffs {
                acc = acc * xi + c * yp;
                yp *= yi;
            }
            if acc != 0 {
                count.squarefree_coprime += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::integer::{squarefree_integer, FactorBudget};

    #[test]
    fn roots_mod_square_match_brute_force() {
        let f = UniPoly::from_i64(&[0, -2, 1], crate::exactalg::Var::T); // T(T - 2)
        for p in [67u64, 71, 101, 2] {
            let q = p * p;
            let brute: Vec<u64> = (0..q)
                .filter(|&r| {
                    let v = f.eval(&BigInt::from(r));
                    (v % BigInt::from(q)).is_zero()
                })
                .collect();
            assert_eq!(roots_mod_prime_square(&f, p), brute, "p = {p}");
        }
        // Singular root: T^2 (T - 1) mod 67^2 has 67 lifts of 0.
        let g = UniPoly::from_i64(&[0, 0, -1, 1], crate::exactalg::Var::T);
        assert_eq!(roots_mod_prime_square(&g, 67).len(), 68);
    }

    #[test]
    fn box_count_matches_direct_factoring() {
        let f = BinaryForm::from_i64(&[0, 1, -2, 0]);
        let c = squarefree_box_count(&f, 60).unwrap();
        let mut direct = 0;
        let mut coprime = 0;
        for x in 1..=60i64 {
            for y in 1..=60i64 {
                if x.gcd(&y) != 1 {
                    continue;
                }
                coprime += 1;
                let v = f.evaluate_i64(x, y);
                if squarefree_integer(&v, FactorBudget::default()).is_squarefree() {
                    direct += 1;
                }
            }
        }
        assert_eq!(c.coprime_pairs, coprime);
        assert_eq!(c.squarefree_coprime, direct);
    }
}
