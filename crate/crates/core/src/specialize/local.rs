//! Local behaviour of a number field Q[X]/(g) at a prime p: ramification,
//! Frobenius cycle types and tame discriminant exponents.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::fp::{factor_fp, reduce_big, FpPoly};
use crate::exactalg::integer::valuation;
use crate::exactalg::{discriminant_z, UniPoly, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ramification {
    Ramified,
    Unramified,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalMethod {
    /// Reduction is squarefree of full degree.
    Etale,
    DiscValuationZero,
    DiscValuationOne,
    /// Dedekind's criterion shows Z_(p)[α] is p-maximal.
    Dedekind,
    /// Some factors needed Newton polygons with squarefree residual polynomials.
    NewtonPolygon,
    QuadraticRule,
    /// Round 2 enlargement to a p-maximal order.
    MaximalOrder,
    None,
}

/// Outcome of the local analysis at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalAnalysis {
    pub p: u64,
    pub status: Ramification,
    pub method: LocalMethod,
    /// Degrees of the irreducible factors of the reduction (with multiplicity)
    /// of the model polynomial.
    pub reduction_degrees: Vec<usize>,
    /// (e, f) of all primes above p when fully determined.
    pub splitting: Option<Vec<(u32, u32)>>,
    /// v_p of the field discriminant when splitting is known and tame.
    pub disc_exponent: Option<u32>,
    /// Dedekind p-maximality of the model order: `Some(true)` when certified.
    pub p_maximal: Option<bool>,
    /// v_p(disc g).
    pub disc_valuation: u32,
}

/// A polynomial with the same discriminant and stem field whose leading
/// coefficient is a p-unit: g itself, or X^n g(c + 1/X) with g(c) ≢ 0 mod p.
pub fn local_model(g: &UniPoly, p: u64) -> Option<UniPoly> {
    let pb = BigInt::from(p);
    if !(g.lc() % &pb).is_zero() {
        return Some(g.clone());
    }
    let fp = FpPoly::from_unipoly(g, p);
    let c = (0..p.min(1 << 20)).find(|&c| fp.eval(c) != 0)?;
    Some(g.taylor_shift(&BigInt::from(c)).reverse())
}

fn lift(f: &FpPoly) -> UniPoly {
    f.to_unipoly(Var::X)
}

/// Primes above p from one repeated factor φ of multiplicity e, via Dedekind.
/// Returns `Some(true)` when Z_(p)[α] is maximal at φ.
fn dedekind_at(phi: &FpPoly, f1: &FpPoly) -> bool {
    !f1.rem(phi).is_zero()
}

/// Ore's theorem for a linear factor X − r: factorization data of the primes
/// above p attached to r when the polynomial is (X − r)-regular.
fn newton_polygon_linear(h: &UniPoly, r: u64, p: u64) -> Option<Vec<(u32, u32)>> {
    let shifted = h.taylor_shift(&BigInt::from(r));
    let coeffs = shifted.coeffs();
    let pb = BigInt::from(p);
    let mult = coeffs.iter().position(|c| !(c % &pb).is_zero())?;
    if coeffs[0].is_zero() {
        return None;
    }
    // Points (i, v_p(a_i)) for i ≤ mult.
    let pts: Vec<(i64, i64)> = (0..=mult)
        .filter(|&i| !coeffs[i].is_zero())
        .map(|i| (i as i64, valuation(&coeffs[i], p) as i64))
        .collect();
    // Lower convex hull, collinear points dropped.
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let ((i1, y1), (i2, y2)) = (w[0], w[1]);
        let len = i2 - i1;
        let height = y1 - y2;
        let d = len.gcd(&height);
        let (e, hs) = (len / d, height / d);
        let mut rc = Vec::with_capacity(d as usize + 1);
        for k in 0..=d {
            let i = (i1 + k * e) as usize;
            let line = y1 - k * hs;
            let c = &coeffs[i];
            let v = if c.is_zero() { i64::MAX } else { valuation(c, p) as i64 };
            if v == line {
                let unit = c / num_traits::pow(pb.clone(), line as usize);
                rc.push(reduce_big(&unit, p));
            } else {
                rc.push(0);
            }
        }
        let res = FpPoly::new(rc, p);
        if res.deg() as i64 != d {
            return None;
        }
        if d > 1 && res.gcd(&res.derivative()).deg() > 0 {
            return None;
        }
        for (psi, _) in factor_fp(&res, 0).ok()?.factor_polys() {
            out.push((e as u32, psi.deg() as u32));
        }
    }
    Some(out)
}

/// Status and v_p of the field discriminant of Q(sqrt D), D = disc g.
fn quadratic_field(g: &UniPoly, p: u64) -> Option<(Ramification, u32)> {
    let (a, b, c) = (g.coeff(2), g.coeff(1), g.coeff(0));
    let d = &b * &b - BigInt::from(4) * a * c;
    if d.is_zero() {
        return None;
    }
    let v = valuation(&d, p);
    let exp = if p != 2 {
        v % 2
    } else if v % 2 == 1 {
        3
    } else {
        let odd = &d / num_traits::pow(BigInt::from(2), v as usize);
        if odd.mod_floor(&BigInt::from(4)) == BigInt::from(1) {
            0
        } else {
            2
        }
    };
    let status = if exp > 0 { Ramification::Ramified } else { Ramification::Unramified };
    Some((status, exp))
}

fn quadratic_rule(g: &UniPoly, p: u64) -> Ramification {
    quadratic_field(g, p).map_or(Ramification::Undetermined, |(s, _)| s)
}

/// Local analysis of Q[X]/(g) at p with a precomputed discriminant.
pub fn analyze_with_disc(g: &UniPoly, p: u64, disc: &BigInt) -> Result<LocalAnalysis> {
    let mut out = analyze_inner(g, p, disc)?;
    if g.deg() == 2 {
        if let Some((status, exp)) = quadratic_field(g, p) {
            out.status = status;
            out.disc_exponent = Some(exp);
        }
    }
    let settled = out.status != Ramification::Undetermined && out.disc_exponent.is_some();
    if !settled && !disc.is_zero() && g.deg() <= super::maximal::MAX_DEGREE && p < (1u64 << 62) {
        let m = super::maximal::p_maximal(g, p)?;
        out.status = if m.disc_exponent > 0 { Ramification::Ramified } else { Ramification::Unramified };
        out.disc_exponent = Some(m.disc_exponent);
        out.method = LocalMethod::MaximalOrder;
    }
    Ok(out)
}

fn analyze_inner(g: &UniPoly, p: u64, disc: &BigInt) -> Result<LocalAnalysis> {
    let pb = BigInt::from(p);
    if g.coeffs().iter().all(|c| (c % &pb).is_zero()) {
        return Err(Error::VanishingReduction(p));
    }
    let n = g.deg();
    let dv = if disc.is_zero() { u32::MAX } else { valuation(disc, p) };
    let mut out = LocalAnalysis {
        p,
        status: Ramification::Undetermined,
        method: LocalMethod::None,
        reduction_degrees: Vec::new(),
        splitting: None,
        disc_exponent: None,
        p_maximal: None,
        disc_valuation: dv,
    };
    if p >= (1u64 << 63) {
        return Ok(out);
    }
    let Some(h) = local_model(g, p) else {
        return Ok(shortcut(out, dv, g, p));
    };
    let hp = FpPoly::from_unipoly(&h, p);
    let fac = factor_fp(&hp, 0)?;
    out.reduction_degrees = fac.degree_multiset();
    if fac.is_squarefree() {
        out.status = Ramification::Unramified;
        out.method = LocalMethod::Etale;
        out.p_maximal = Some(true);
        out.splitting = Some(fac.factors.iter().map(|(c, _)| (1, (c.len() - 1) as u32)).collect());
        out.disc_exponent = Some(0);
        return Ok(out);
    }
    // h − lc·∏ φ_i^e_i is divisible by p; F1 is the quotient.
    let mut prod = UniPoly::constant(h.lc(), Var::X);
    for (phi, e) in fac.factor_polys() {
        prod = &prod * &lift(&phi).pow(e as usize);
    }
    let diff = &h - &prod;
    let f1 = FpPoly::from_unipoly(&diff.div_scalar_exact(&pb), p);
    let mut splitting = Vec::new();
    let mut all_maximal = true;
    let mut determined = true;
    let mut used_polygon = false;
    for (phi, e) in fac.factor_polys() {
        if e == 1 {
            splitting.push((1, phi.deg() as u32));
            continue;
        }
        if dedekind_at(&phi, &f1) {
            splitting.push((e, phi.deg() as u32));
            continue;
        }
        all_maximal = false;
        if phi.deg() == 1 {
            let r = (p - phi.coeff(0)) % p;
            if let Some(parts) = newton_polygon_linear(&h, r, p) {
                used_polygon = true;
                splitting.extend(parts);
                continue;
            }
        }
        determined = false;
    }
    out.p_maximal = Some(all_maximal);
    if determined {
        splitting.sort_unstable();
        let ramified = splitting.iter().any(|&(e, _)| e > 1);
        out.status = if ramified { Ramification::Ramified } else { Ramification::Unramified };
        out.method = if used_polygon { LocalMethod::NewtonPolygon } else { LocalMethod::Dedekind };
        if all_maximal {
            out.disc_exponent = Some(dv);
        } else if splitting.iter().all(|&(e, _)| (e as u64) % p != 0) {
            out.disc_exponent = Some(splitting.iter().map(|&(e, f)| (e - 1) * f).sum());
        }
        out.splitting = Some(splitting);
        return Ok(out);
    }
    if splitting.iter().any(|&(e, _)| e > 1) {
        out.status = Ramification::Ramified;
        out.method = LocalMethod::Dedekind;
        return Ok(out);
    }
    let _ = n;
    Ok(shortcut(out, dv, g, p))
}

fn shortcut(mut out: LocalAnalysis, dv: u32, g: &UniPoly, p: u64) -> LocalAnalysis {
    if dv == 0 {
        out.status = Ramification::Unramified;
        out.method = LocalMethod::DiscValuationZero;
        out.disc_exponent = Some(0);
    } else if dv == 1 {
        out.status = Ramification::Ramified;
        out.method = LocalMethod::DiscValuationOne;
        out.disc_exponent = Some(1);
    } else if g.deg() == 2 {
        out.status = quadratic_rule(g, p);
        out.method = LocalMethod::QuadraticRule;
    }
    out
}

pub fn analyze(g: &UniPoly, p: u64) -> Result<LocalAnalysis> {
    analyze_with_disc(g, p, &discriminant_z(g))
}

/// Three-valued ramification decision for Q[X]/(g) at p.
pub fn ramification_oracle(g: &UniPoly, p: u64) -> Result<Ramification> {
    Ok(analyze(g, p)?.status)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrobeniusType {
    /// Sorted factor degrees of the squarefree reduction.
    Cycle(Vec<usize>),
    /// Reduction has a repeated factor.
    Ramified,
}

pub fn frobenius_cycle_type(g: &UniPoly, p: u64) -> Result<FrobeniusType> {
    let Some(h) = local_model(g, p) else {
        return Ok(FrobeniusType::Ramified);
    };
    let fac = factor_fp(&FpPoly::from_unipoly(&h, p), 0)?;
    if fac.is_squarefree() {
        Ok(FrobeniusType::Cycle(fac.degree_multiset()))
    } else {
        Ok(FrobeniusType::Ramified)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameExponent {
    pub exponent: u32,
    /// deg g minus the number of distinct roots of the reduction over the
    /// algebraic closure of F_p.
    pub formula: String,
}

/// v_p of the field discriminant from the reduction, when Dedekind certifies
/// p-maximality and every ramification index is prime to p.
pub fn tame_disc_exponent(g: &UniPoly, p: u64) -> Result<Option<u32>> {
    let a = analyze(g, p)?;
    if a.method == LocalMethod::Etale {
        return Ok(Some(0));
    }
    if a.p_maximal != Some(true) {
        return Ok(None);
    }
    let Some(split) = a.splitting else {
        return Ok(None);
    };
    if split.iter().any(|&(e, _)| (e as u64) % p == 0) {
        return Ok(None);
    }
    // n minus the number of distinct roots over the closure of F_p.
    let distinct_roots: u32 = split.iter().map(|&(_, f)| f).sum();
    Ok(Some(g.deg() as u32 - distinct_roots))
}

/// v_p(n) for a nonzero integer as u32, `None` for zero.
pub fn vp(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        None
    } else {
        Some(valuation(n, p))
    }
}

/// Integer value of |disc| as u128 if small (used for display only).
pub fn small_abs(n: &BigInt) -> Option<u128> {
    n.abs().to_u128()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(c: &[i64]) -> UniPoly {
        UniPoly::from_i64(c, Var::X)
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(ramification_oracle(&x(&[-1, -1, 0, 1]), 23).unwrap(), Ramification::Ramified);
        assert_eq!(ramification_oracle(&x(&[-5, 0, 1]), 2).unwrap(), Ramification::Unramified);
        assert_eq!(ramification_oracle(&x(&[-5, 0, 1]), 3).unwrap(), Ramification::Unramified);
        assert_eq!(ramification_oracle(&x(&[1, 0, 1]), 2).unwrap(), Ramification::Ramified);
        assert_eq!(ramification_oracle(&x(&[-6, 0, 1]), 2).unwrap(), Ramification::Ramified);
        assert_eq!(ramification_oracle(&x(&[-6, 0, 1]), 3).unwrap(), Ramification::Ramified);
        // X^2 - 45 = X^2 - 9*5: unramified at 3.
        assert_eq!(ramification_oracle(&x(&[-45, 0, 1]), 3).unwrap(), Ramification::Unramified);
        assert_eq!(ramification_oracle(&x(&[-45, 0, 1]), 5).unwrap(), Ramification::Ramified);
    }

    #[test]
    fn frobenius_examples() {
        let g = x(&[-1, -1, 0, 1]);
        assert_eq!(frobenius_cycle_type(&g, 5).unwrap(), FrobeniusType::Cycle(vec![1, 2]));
        assert_eq!(frobenius_cycle_type(&g, 2).unwrap(), FrobeniusType::Cycle(vec![3]));
        assert_eq!(frobenius_cycle_type(&g, 23).unwrap(), FrobeniusType::Ramified);
    }

    #[test]
    fn tame_examples() {
        assert_eq!(tame_disc_exponent(&x(&[-1, -1, 0, 1]), 23).unwrap(), Some(1));
        assert_eq!(tame_disc_exponent(&x(&[-5, 0, 1]), 5).unwrap(), Some(1));
        assert_eq!(tame_disc_exponent(&x(&[-1, -1, 0, 1]), 7).unwrap(), Some(0));
    }

    #[test]
    fn non_monic_model() {
        // 2X^3 + X + 1: disc -116 = -4 * 29; at 2 the leading coefficient vanishes.
        let g = x(&[1, 1, 0, 2]);
        let a = analyze(&g, 2).unwrap();
        assert_eq!(a.disc_valuation, 2);
        // Model X^3 g(1/X) = X^3 + X^2 + 2 ≡ X^2 (X + 1): F1 = 1, Dedekind maximal, ramified.
        assert_eq!(a.status, Ramification::Ramified);
        assert_eq!(a.disc_exponent, Some(2));
        assert_eq!(ramification_oracle(&g, 29).unwrap(), Ramification::Ramified);
    }

    #[test]
    fn newton_polygon_resolves_non_maximal_order() {
        // X^2 - 4*7 at 2: X^2 ≡ X^2, F1 = -14 ≡ 0 mod 2, so not 2-maximal.
        // Q(sqrt 7) is ramified at 2.
        let g = x(&[-28, 0, 1]);
        let a = analyze(&g, 2).unwrap();
        assert_eq!(a.p_maximal, Some(false));
        assert_eq!(a.status, Ramification::Ramified);
        // X^3 - p^2 * 2 at p = 5: cube root of 50 = 5^2 * 2, totally ramified.
        let g = x(&[-50, 0, 0, 1]);
        let a = analyze(&g, 5).unwrap();
        assert_eq!(a.method, LocalMethod::NewtonPolygon);
        assert_eq!(a.splitting, Some(vec![(3, 1)]));
        // (X - 1)^2 + 49 at 7: slope 1 side of length 2 with residual y^2 + 1,
        // squarefree mod 7, degree 2: one unramified prime of degree 2 above (X - 1).
        let g = x(&[50, -2, 1]);
        let a = analyze(&g, 7).unwrap();
        assert_eq!(a.status, Ramification::Unramified);
        assert_eq!(a.splitting, Some(vec![(1, 2)]));
    }

    #[test]
    fn maximal_order_fallback_matches_field_discriminant() {
        // Q(√2) via X^2 − 8 at 2: disc 8 after enlarging the order.
        for (c, p, e) in [(&[-8i64, 0, 1][..], 2u64, 3u32), (&[-2, 0, 0, 1][..], 3, 3), (&[1, 0, 0, 0, 1][..], 2, 8)] {
            let a = analyze(&x(c), p).unwrap();
            assert_eq!(a.disc_exponent, Some(e), "{c:?} at {p}");
            assert_eq!(a.status, Ramification::Ramified);
        }
        // X^2 − 45 = Q(√5) is unramified at 3.
        let a = analyze(&x(&[-45, 0, 1]), 3).unwrap();
        assert_eq!(a.disc_exponent, Some(0));
        assert_eq!(a.status, Ramification::Unramified);
    }
}
