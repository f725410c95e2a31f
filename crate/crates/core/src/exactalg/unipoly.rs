use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable name tag. Only used for display and sanity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Var::X => "X",
            Var::Y => "Y",
            Var::T => "T",
        };
        f.write_str(s)
    }
}

/// Dense univariate polynomial over Z. `coeffs[i]` is the coefficient of `var^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<BigInt>,
    var: Var,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigInt>, var: Var) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs, var }
    }

    pub fn from_i64(coeffs: &[i64], var: Var) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), var)
    }

    pub fn zero(var: Var) -> Self {
        UniPoly { coeffs: Vec::new(), var }
    }

    pub fn constant(c: BigInt, var: Var) -> Self {
        Self::new(vec![c], var)
    }

    pub fn one(var: Var) -> Self {
        Self::constant(BigInt::one(), var)
    }

    pub fn monomial(c: BigInt, deg: usize, var: Var) -> Self {
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = c;
        Self::new(coeffs, var)
    }

    /// The polynomial `var`.
    pub fn var_poly(var: Var) -> Self {
        Self::monomial(BigInt::one(), 1, var)
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the convention deg 0 = 0 (callers that care check `is_zero`).
    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Lowest-degree nonzero coefficient and its index.
    pub fn trailing(&self) -> Option<(usize, &BigInt)> {
        self.coeffs.iter().enumerate().find(|(_, c)| !c.is_zero())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Homogeneous evaluation `b^d f(a/b)` with `d = max(deg f, d)`.
    pub fn eval_homogeneous(&self, a: &BigInt, b: &BigInt, d: usize) -> BigInt {
        let mut acc = BigInt::zero();
        let mut bpow = BigInt::one();
        let n = d.max(self.deg());
        let mut apow = vec![BigInt::one(); n + 1];
        for i in 1..=n {
            apow[i] = &apow[i - 1] * a;
        }
        for i in (0..=n).rev() {
            let c = self.coeff(i);
            if !c.is_zero() {
                acc += c * &apow[i] * &bpow;
            }
            bpow *= b;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        Self::new(coeffs, self.var)
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect(), self.var)
    }

    /// Divide every coefficient by `s`; caller guarantees exactness.
    pub fn div_scalar_exact(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c / s).collect(), self.var)
    }

    /// Multiply by `var^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs, self.var)
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Returns (content, primitive part) with positive content.
    pub fn content_primitive(&self) -> Result<(BigInt, Self)> {
        if self.is_zero() {
            return Err(Error::ZeroContent);
        }
        let c = self.content();
        Ok((c.clone(), self.div_scalar_exact(&c)))
    }

    /// Primitive part normalized to a positive leading coefficient.
    pub fn primitive_positive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        let p = self.div_scalar_exact(&c);
        if p.lc().is_negative() {
            -p
        } else {
            p
        }
    }

    /// Exact division over Z. `None` if `d` does not divide `self` in Z[var].
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(self.clone());
        }
        let dd = d.deg();
        if self.deg() < dd {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.deg() - dd + 1];
        let lcd = d.lc();
        for i in (0..q.len()).rev() {
            let top = &rem[i + dd];
            if top.is_zero() {
                continue;
            }
            let (qi, r) = top.div_rem(&lcd);
            if !r.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i + j] -= &qi * dc;
            }
            q[i] = qi;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::new(q, self.var))
    }

    /// Pseudo-remainder: `lc(d)^(deg self - deg d + 1) * self mod d`.
    pub fn pseudo_rem(&self, d: &Self) -> Self {
        assert!(!d.is_zero());
        let dd = d.deg();
        if self.is_zero() || self.deg() < dd {
            return self.clone();
        }
        let delta = self.deg() - dd;
        let lcd = d.lc();
        let mut r = self.clone();
        let mut steps = 0usize;
        while !r.is_zero() && r.deg() >= dd {
            let lr = r.lc();
            let k = r.deg() - dd;
            r = &r.scale(&lcd) - &d.scale(&lr).shift_up(k);
            steps += 1;
        }
        if steps < delta + 1 {
            r = r.scale(&num_traits::pow(lcd, delta + 1 - steps));
        }
        r
    }

    /// `f(X + c)`.
    pub fn taylor_shift(&self, c: &BigInt) -> Self {
        let mut coeffs = self.coeffs.clone();
        let n = coeffs.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &coeffs[j + 1] * c;
                coeffs[j] += t;
            }
        }
        Self::new(coeffs, self.var)
    }

    /// `X^d f(1/X)` where `d` is the degree.
    pub fn reverse(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self::new(coeffs, self.var)
    }

    /// Composition `self(other)`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut acc = Self::zero(other.var);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * other) + &Self::constant(c.clone(), other.var);
        }
        acc
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.var);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn is_monic(&self) -> bool {
        self.lc().is_one()
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        UniPoly::new(coeffs, self.var)
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        UniPoly::new(coeffs, self.var)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero(self.var);
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::new(coeffs, self.var)
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.into_iter().map(|c| -c).collect(), self.var)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        -(self.clone())
    }
}

pub(crate) fn fmt_terms(
    f: &mut fmt::Formatter<'_>,
    terms: &[(BigInt, String)],
) -> fmt::Result {
    if terms.is_empty() {
        return f.write_str("0");
    }
    for (k, (c, mono)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                f.write_str("-")?;
            }
        } else if neg {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        if mono.is_empty() {
            write!(f, "{abs}")?;
        } else if abs.is_one() {
            f.write_str(mono)?;
        } else {
            write!(f, "{abs}*{mono}")?;
        }
    }
    Ok(())
}

pub(crate) fn mono_str(var: Var, e: usize) -> String {
    match e {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{e}"),
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(BigInt, String)> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (c.clone(), mono_str(self.var, i)))
            .collect();
        fmt_terms(f, &terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> UniPoly {
        UniPoly::from_i64(c, Var::X)
    }

    #[test]
    fn content_examples() {
        let (c, q) = p(&[0, 0, -4]).content_primitive().unwrap();
        assert_eq!(c, BigInt::from(4));
        assert_eq!(q, p(&[0, 0, -1]));
        assert_eq!(p(&[]).content_primitive(), Err(Error::ZeroContent));
    }

    #[test]
    fn exact_division() {
        let a = p(&[-1, 0, 1]);
        let b = p(&[1, 1]);
        assert_eq!(a.div_exact(&b), Some(p(&[-1, 1])));
        assert_eq!(a.div_exact(&p(&[1, 2])), None);
        assert_eq!(p(&[2, 4]).div_exact(&p(&[1, 2])), Some(p(&[2])));
    }

    #[test]
    fn pseudo_remainder_identity() {
        let a = p(&[1, 2, 3, 4]);
        let b = p(&[5, 0, 2]);
        let r = a.pseudo_rem(&b);
        // 2^2 * a = q*b + r with deg r < 2
        assert!(r.deg() < 2);
        let lhs = &a.scale(&BigInt::from(4)) - &r;
        assert!(lhs.div_exact(&b).is_some());
    }

    #[test]
    fn shifts_and_reverse() {
        let f = p(&[1, 2, 1]);
        assert_eq!(f.taylor_shift(&BigInt::from(-1)), p(&[0, 0, 1]));
        assert_eq!(p(&[1, 2, 3]).reverse(), p(&[3, 2, 1]));
        assert_eq!(p(&[0, 1]).compose(&p(&[1, 1])), p(&[1, 1]));
    }

    #[test]
    fn homogeneous_eval() {
        // T^2 + 1 at (a:b) = (1:2): 1 + 4
        let f = UniPoly::from_i64(&[1, 0, 1], Var::T);
        assert_eq!(
            f.eval_homogeneous(&BigInt::from(1), &BigInt::from(2), 2),
            BigInt::from(5)
        );
        assert_eq!(
            f.eval_homogeneous(&BigInt::from(1), &BigInt::from(2), 3),
            BigInt::from(10)
        );
    }

    #[test]
    fn display() {
        assert_eq!(p(&[1, -1, 0, 1]).to_string(), "X^3 - X + 1");
        assert_eq!(p(&[]).to_string(), "0");
        assert_eq!(p(&[0, -3]).to_string(), "-3*X");
    }
}
