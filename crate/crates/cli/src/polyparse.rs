//! Parser for univariate integer polynomials such as "X^3 - 2*X + 1".

use num_bigint::BigInt;
use num_traits::{One, Zero};

use discspec_core::exactalg::{UniPoly, Var};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot parse polynomial {input:?}: {reason}")]
pub struct ParseError {
    pub input: String,
    pub reason: String,
}

/// Accepts X or T as the variable; returns a polynomial in `var`.
pub fn parse_poly(s: &str, var: Var) -> Result<UniPoly, ParseError> {
    let err = |reason: &str| ParseError { input: s.to_string(), reason: reason.to_string() };
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty"));
    }
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let mut sign = BigInt::one();
        if let Some(r) = rest.strip_prefix('-') {
            sign = -sign;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        let mut c = if digits > 0 { rest[..digits].parse::<BigInt>().unwrap() } else { BigInt::one() };
        rest = &rest[digits..];
        let mut deg = 0usize;
        let r = rest.strip_prefix('*').unwrap_or(rest);
        if digits > 0 && r.len() != rest.len() && !r.starts_with(['X', 'x', 'T', 't']) {
            return Err(err("expected variable after '*'"));
        }
        if let Some(r) = r.strip_prefix(['X', 'x', 'T', 't']) {
            deg = 1;
            rest = r;
            if let Some(r) = rest.strip_prefix('^') {
                let d = r.chars().take_while(|c| c.is_ascii_digit()).count();
                if d == 0 {
                    return Err(err("missing exponent"));
                }
                deg = r[..d].parse().map_err(|_| err("exponent too large"))?;
                rest = &r[d..];
            }
        } else if digits == 0 {
            return Err(err("expected a coefficient or variable"));
        }
        if !(rest.is_empty() || rest.starts_with(['+', '-'])) {
            return Err(err("unexpected character"));
        }
        c *= sign;
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, BigInt::zero());
        }
        coeffs[deg] += c;
    }
    Ok(UniPoly::new(coeffs, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses() {
        assert_eq!(parse_poly("X^3-X", Var::T).unwrap(), UniPoly::from_i64(&[0, -1, 0, 1], Var::T));
        assert_eq!(parse_poly(" 2*x^2 + 3x - 7 ", Var::X).unwrap(), UniPoly::from_i64(&[-7, 3, 2], Var::X));
        assert_eq!(parse_poly("-T^4+1-1", Var::T).unwrap(), UniPoly::from_i64(&[0, 0, 0, 0, -1], Var::T));
        assert!(parse_poly("X^", Var::X).is_err());
        assert!(parse_poly("X^2 + Y", Var::X).is_err());
        assert!(parse_poly("", Var::X).is_err());
        assert!(parse_poly("3*", Var::X).is_err());
    }
}
