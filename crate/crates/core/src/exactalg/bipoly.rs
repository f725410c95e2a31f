use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::unipoly::{fmt_terms, mono_str, UniPoly, Var};
use crate::error::{Error, Result};

/// Sparse bivariate polynomial over Z. Key `(i, j)` is the exponent of the
/// first and second variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), BigInt>,
    vars: (Var, Var),
}

impl BiPoly {
    pub fn zero(vars: (Var, Var)) -> Self {
        BiPoly { terms: BTreeMap::new(), vars }
    }

    pub fn from_terms<I>(terms: I, vars: (Var, Var)) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), BigInt)>,
    {
        let mut p = Self::zero(vars);
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    pub fn from_i64(terms: &[(u32, u32, i64)], vars: (Var, Var)) -> Self {
        Self::from_terms(
            terms.iter().map(|&(i, j, c)| ((i, j), BigInt::from(c))),
            vars,
        )
    }

    /// Build from coefficients in the first variable, each a polynomial in the second.
    pub fn from_uni_coeffs(cs: &[UniPoly], vars: (Var, Var)) -> Self {
        let mut p = Self::zero(vars);
        for (i, c) in cs.iter().enumerate() {
            for (j, a) in c.coeffs().iter().enumerate() {
                p.add_term((i as u32, j as u32), a.clone());
            }
        }
        p
    }

    pub fn add_term(&mut self, key: (u32, u32), c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn vars(&self) -> (Var, Var) {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigInt {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_first(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_second(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.0 + k.1).max().unwrap_or(0)
    }

    /// Coefficients in the first variable, as polynomials in the second.
    pub fn uni_coeffs(&self) -> Vec<UniPoly> {
        let n = self.deg_first() as usize;
        let m = self.deg_second() as usize;
        let mut dense = vec![vec![BigInt::zero(); m + 1]; n + 1];
        for (&(i, j), c) in &self.terms {
            dense[i as usize][j as usize] = c.clone();
        }
        if self.is_zero() {
            return Vec::new();
        }
        dense
            .into_iter()
            .map(|cs| UniPoly::new(cs, self.vars.1))
            .collect()
    }

    /// Leading coefficient in the first variable.
    pub fn lc_first(&self) -> UniPoly {
        self.uni_coeffs().pop().unwrap_or_else(|| UniPoly::zero(self.vars.1))
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn content_primitive(&self) -> Result<(BigInt, Self)> {
        if self.is_zero() {
            return Err(Error::ZeroContent);
        }
        let c = self.content();
        Ok((c.clone(), self.div_scalar_exact(&c)))
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c * s)), self.vars)
    }

    pub fn div_scalar_exact(&self, s: &BigInt) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c / s)), self.vars)
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * num_traits::pow(x.clone(), i as usize) * num_traits::pow(y.clone(), j as usize);
        }
        acc
    }

    /// Substitute a value for the second variable.
    pub fn eval_second(&self, t: &BigInt) -> UniPoly {
        let cs: Vec<BigInt> = self.uni_coeffs().iter().map(|c| c.eval(t)).collect();
        UniPoly::new(cs, self.vars.0)
    }

    /// Substitute a value for the first variable.
    pub fn eval_first(&self, x: &BigInt) -> UniPoly {
        let m = self.deg_second() as usize;
        let mut cs = vec![BigInt::zero(); m + 1];
        for (&(i, j), c) in &self.terms {
            cs[j as usize] += c * num_traits::pow(x.clone(), i as usize);
        }
        UniPoly::new(cs, self.vars.1)
    }

    /// `Σ c_ij X^i a^j b^(d-j)` with `d` the degree in the second variable.
    pub fn specialize_projective(&self, a: &BigInt, b: &BigInt) -> UniPoly {
        let d = self.deg_second() as usize;
        let mut apow = vec![BigInt::one(); d + 1];
        let mut bpow = vec![BigInt::one(); d + 1];
        for k in 1..=d {
            apow[k] = &apow[k - 1] * a;
            bpow[k] = &bpow[k - 1] * b;
        }
        let n = self.deg_first() as usize;
        let mut cs = vec![BigInt::zero(); n + 1];
        for (&(i, j), c) in &self.terms {
            let j = j as usize;
            cs[i as usize] += c * &apow[j] * &bpow[d - j];
        }
        UniPoly::new(cs, self.vars.0)
    }

    pub fn derivative_first(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.0 > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c * BigInt::from(i))),
            self.vars,
        )
    }

    pub fn derivative_second(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.1 > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c * BigInt::from(j))),
            self.vars,
        )
    }

    /// Substitute `second -> s * second`.
    pub fn scale_second(&self, s: &BigInt) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(&(i, j), c)| ((i, j), c * num_traits::pow(s.clone(), j as usize))),
            self.vars,
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::from_terms([((0, 0), BigInt::one())], self.vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Affine linear form `c + cx*first + cy*second`.
    pub fn linear(c: BigInt, cx: BigInt, cy: BigInt, vars: (Var, Var)) -> Self {
        Self::from_terms([((0, 0), c), ((1, 0), cx), ((0, 1), cy)], vars)
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c);
        }
        out
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero(self.vars);
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), a * b);
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly::from_terms(self.terms.iter().map(|(k, c)| (*k, -c)), self.vars)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Descending in the first variable, then in the second.
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|a, b| b.0 .0.cmp(&a.0 .0).then(b.0 .1.cmp(&a.0 .1)));
        let terms: Vec<(BigInt, String)> = keys
            .into_iter()
            .map(|(&(i, j), c)| {
                let a = mono_str(self.vars.0, i as usize);
                let b = mono_str(self.vars.1, j as usize);
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

impl BiPoly {
    /// True when the coefficient of highest first-variable degree is a positive constant.
    pub fn has_positive_constant_lc(&self) -> bool {
        let lc = self.lc_first();
        lc.is_constant() && lc.lc().is_positive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XT: (Var, Var) = (Var::X, Var::T);

    #[test]
    fn content_of_form() {
        // 6X^2 + 9XY
        let f = BiPoly::from_i64(&[(2, 0, 6), (1, 1, 9)], (Var::X, Var::Y));
        let (c, p) = f.content_primitive().unwrap();
        assert_eq!(c, BigInt::from(3));
        assert_eq!(p, BiPoly::from_i64(&[(2, 0, 2), (1, 1, 3)], (Var::X, Var::Y)));
        let g = BiPoly::from_i64(&[(3, 0, 1), (0, 1, -1)], XT);
        assert_eq!(g.content_primitive().unwrap().0, BigInt::one());
    }

    #[test]
    fn projective_specialization() {
        // X^3 + T X + T at 1/2 -> 2X^3 + X + 1
        let f = BiPoly::from_i64(&[(3, 0, 1), (1, 1, 1), (0, 1, 1)], XT);
        let g = f.specialize_projective(&BigInt::from(1), &BigInt::from(2));
        assert_eq!(g, UniPoly::from_i64(&[1, 1, 0, 2], Var::X));
    }

    #[test]
    fn uni_coeff_roundtrip() {
        let f = BiPoly::from_i64(&[(3, 0, 1), (1, 1, 1), (0, 1, 1), (0, 2, -4)], XT);
        let back = BiPoly::from_uni_coeffs(&f.uni_coeffs(), XT);
        assert_eq!(f, back);
        assert_eq!(f.lc_first(), UniPoly::from_i64(&[1], Var::T));
    }

    #[test]
    fn display() {
        let f = BiPoly::from_i64(&[(3, 0, 1), (1, 1, 1), (0, 1, -1)], XT);
        assert_eq!(f.to_string(), "X^3 + X*T - T");
    }
}
