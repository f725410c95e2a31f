//! Subresultant resultants and discriminants over Z and Z[T], plus gcd and
//! squarefree parts over Z.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::bipoly::BiPoly;
use super::unipoly::{UniPoly, Var};
use crate::error::{Error, Result};

/// Minimal integral-domain interface needed by the subresultant chain.
pub(crate) trait Ring: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact division; the divisor is known to divide.
    fn div_exact(&self, o: &Self) -> Self;

    fn pow(&self, e: usize) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl Ring for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert!(Zero::is_zero(&(self % o)));
        self / o
    }
}

impl Ring for UniPoly {
    fn zero_like(&self) -> Self {
        UniPoly::zero(self.var())
    }
    fn one_like(&self) -> Self {
        UniPoly::one(self.var())
    }
    fn is_zero(&self) -> bool {
        UniPoly::is_zero(self)
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, o: &Self) -> Self {
        UniPoly::div_exact(self, o).expect("inexact division in subresultant chain")
    }
}

fn trim<R: Ring>(mut v: Vec<R>) -> Vec<R> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn prem<R: Ring>(a: &[R], b: &[R]) -> Vec<R> {
    let db = b.len() - 1;
    let lcb = &b[db];
    let mut r: Vec<R> = a.to_vec();
    let delta = a.len() - b.len();
    let mut steps = 0;
    while r.len() > db {
        let lr = r.last().unwrap().clone();
        let k = r.len() - 1 - db;
        let mut next: Vec<R> = r.iter().map(|c| c.mul(lcb)).collect();
        for (j, bc) in b.iter().enumerate() {
            next[k + j] = next[k + j].sub(&lr.mul(bc));
        }
        next.pop();
        r = trim(next);
        steps += 1;
    }
    if steps < delta + 1 {
        let f = lcb.pow(delta + 1 - steps);
        r = r.iter().map(|c| c.mul(&f)).collect();
    }
    r
}

/// Resultant of two polynomials given by coefficient vectors (index = exponent).
pub(crate) fn resultant_generic<R: Ring>(a: &[R], b: &[R], zero: &R) -> R {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    if a.is_empty() || b.is_empty() {
        return zero.zero_like();
    }
    let mut s_neg = false;
    if a.len() < b.len() {
        if (a.len() - 1) % 2 == 1 && (b.len() - 1) % 2 == 1 {
            s_neg = true;
        }
        std::mem::swap(&mut a, &mut b);
    }
    let sign = |v: R, neg: bool| if neg { v.neg() } else { v };
    if b.len() == 1 {
        return sign(b[0].pow(a.len() - 1), s_neg);
    }
    let mut g = zero.one_like();
    let mut h = zero.one_like();
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s_neg = !s_neg;
        }
        let r = prem(&a, &b);
        a = b;
        if r.is_empty() {
            return zero.zero_like();
        }
        let div = g.mul(&h.pow(delta));
        b = r.iter().map(|c| c.div_exact(&div)).collect();
        g = a.last().unwrap().clone();
        if delta > 0 {
            h = g.pow(delta).div_exact(&h.pow(delta - 1));
        }
        if b.len() == 1 {
            break;
        }
    }
    let da = a.len() - 1;
    let res = b[0].pow(da).div_exact(&h.pow(da - 1));
    sign(res, s_neg)
}

/// Resultant of two integer polynomials.
pub fn resultant_z(f: &UniPoly, g: &UniPoly) -> BigInt {
    resultant_generic(f.coeffs(), g.coeffs(), &BigInt::zero())
}

/// `res_X(f, g)` for polynomials in X over Z[T]; the result is a polynomial in T.
pub fn resultant(f: &BiPoly, g: &BiPoly) -> Result<UniPoly> {
    if f.deg_first() == 0 && g.deg_first() == 0 {
        return Err(Error::ConstantResultant);
    }
    let t = f.vars().1;
    let fc = f.uni_coeffs();
    let gc = g.uni_coeffs();
    Ok(resultant_generic(&fc, &gc, &UniPoly::zero(t)))
}

/// Discriminant of an integer polynomial of degree ≥ 1.
pub fn discriminant_z(f: &UniPoly) -> BigInt {
    let n = f.deg();
    if n == 0 {
        return BigInt::zero();
    }
    let r = resultant_z(f, &f.derivative());
    let d = r / f.lc();
    if (n * (n - 1) / 2) % 2 == 1 {
        -d
    } else {
        d
    }
}

/// `disc_X(f)` for a family f(X, T), as a polynomial in T.
pub fn discriminant_in_x(f: &BiPoly) -> Result<UniPoly> {
    let n = f.deg_first() as usize;
    if n < 2 {
        return Err(Error::DegreeTooSmall);
    }
    let r = resultant(f, &f.derivative_first())?;
    let lc = f.lc_first();
    let d = r.div_exact(&lc).expect("lc_X divides res(f, f')");
    Ok(if (n * (n - 1) / 2) % 2 == 1 { -d } else { d })
}

/// Gcd over Z[X] by primitive PRS, normalized to positive leading coefficient.
pub fn gcd_z(f: &UniPoly, g: &UniPoly) -> UniPoly {
    if f.is_zero() {
        return g.primitive_positive().scale(&g.content());
    }
    if g.is_zero() {
        return f.primitive_positive().scale(&f.content());
    }
    let c = f.content().gcd(&g.content());
    let (mut a, mut b) = if f.deg() >= g.deg() {
        (f.primitive_positive(), g.primitive_positive())
    } else {
        (g.primitive_positive(), f.primitive_positive())
    };
    while !b.is_zero() {
        let r = a.pseudo_rem(&b);
        a = b;
        b = if r.is_zero() { r } else { r.primitive_positive() };
    }
    a.primitive_positive().scale(&c)
}

/// Radical of `f` over Z: product of the distinct irreducible factors,
/// primitive, positive leading coefficient.
pub fn squarefree_part(f: &UniPoly) -> Result<UniPoly> {
    if f.is_zero() {
        return Err(Error::ZeroContent);
    }
    let f = f.primitive_positive();
    if f.deg() == 0 {
        return Ok(UniPoly::one(f.var()));
    }
    let g = gcd_z(&f, &f.derivative()).primitive_positive();
    let q = f.div_exact(&g).expect("gcd divides f");
    Ok(q.primitive_positive())
}

/// Homogenize a polynomial in T to a binary form coefficient list
/// `c_0..c_d` with `F(X,Y) = Σ c_i X^(d-i) Y^i` and `T = X/Y`.
pub fn homogenize(f: &UniPoly, d: usize) -> Vec<BigInt> {
    (0..=d).map(|i| f.coeff(d - i)).collect()
}

/// Convenience: polynomial in T from i64 coefficients.
pub fn t_poly(c: &[i64]) -> UniPoly {
    UniPoly::from_i64(c, Var::T)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xt(terms: &[(u32, u32, i64)]) -> BiPoly {
        BiPoly::from_i64(terms, (Var::X, Var::T))
    }

    #[test]
    fn small_resultants() {
        // res_X(X^2 - T, X) = -T
        let r = resultant(&xt(&[(2, 0, 1), (0, 1, -1)]), &xt(&[(1, 0, 1)])).unwrap();
        assert_eq!(r, t_poly(&[0, -1]));
        // res(X - a, X - b) = a - b
        let r = resultant_z(
            &UniPoly::from_i64(&[-3, 1], Var::X),
            &UniPoly::from_i64(&[-7, 1], Var::X),
        );
        assert_eq!(r, BigInt::from(-4));
        let f = xt(&[(3, 0, 1), (1, 1, 1), (0, 1, 1)]);
        assert!(resultant(&f, &f).unwrap().is_zero());
        assert_eq!(
            resultant(&xt(&[(0, 1, 1)]), &xt(&[(0, 0, 3)])),
            Err(Error::ConstantResultant)
        );
    }

    #[test]
    fn family_discriminants() {
        // X^3 + T X + T -> -T^2 (4T + 27)
        let d = discriminant_in_x(&xt(&[(3, 0, 1), (1, 1, 1), (0, 1, 1)])).unwrap();
        assert_eq!(d, t_poly(&[0, 0, -27, -4]));
        // X^5 + T X + T -> T^4 (256 T + 3125)
        let d = discriminant_in_x(&xt(&[(5, 0, 1), (1, 1, 1), (0, 1, 1)])).unwrap();
        assert_eq!(d, t_poly(&[0, 0, 0, 0, 3125, 256]));
        // X^2 - T -> 4T
        let d = discriminant_in_x(&xt(&[(2, 0, 1), (0, 1, -1)])).unwrap();
        assert_eq!(d, t_poly(&[0, 4]));
        assert_eq!(discriminant_in_x(&xt(&[(1, 0, 1)])), Err(Error::DegreeTooSmall));
    }

    #[test]
    fn integer_discriminants() {
        let x = |c: &[i64]| UniPoly::from_i64(c, Var::X);
        assert_eq!(discriminant_z(&x(&[-1, -1, 0, 1])), BigInt::from(-23));
        assert_eq!(discriminant_z(&x(&[1, 1, 0, 1])), BigInt::from(-31));
        assert_eq!(discriminant_z(&x(&[-6, 0, 1])), BigInt::from(24));
        // 2X^3 + X + 1: -4*2*1 - 27*4*1 = -116
        assert_eq!(discriminant_z(&x(&[1, 1, 0, 2])), BigInt::from(-116));
    }

    #[test]
    fn radicals() {
        let t4 = t_poly(&[0, 0, 0, 0, 3125, 256]);
        assert_eq!(squarefree_part(&t4).unwrap(), t_poly(&[0, 3125, 256]));
        assert_eq!(squarefree_part(&t_poly(&[0, 0, 1])).unwrap(), t_poly(&[0, 1]));
        assert_eq!(squarefree_part(&t_poly(&[0, 1, 1])).unwrap(), t_poly(&[0, 1, 1]));
        assert_eq!(squarefree_part(&t_poly(&[0, -4, 0, 4])).unwrap(), t_poly(&[0, -1, 0, 1]));
    }
}
