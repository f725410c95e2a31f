//! Points on the curves F(X,Y) = k over F_p, Hensel lifting to p^m and
//! point counts with the Hasse window for genus-one cubics.

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binforms::BinaryForm;
use crate::error::{Error, Result};
use crate::exactalg::fp::{invmod, reduce_big, FpPoly};
use crate::exactalg::BiPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResiduePoint {
    pub p: u64,
    pub m: u32,
    pub x: u64,
    pub y: u64,
    /// Value class of F at (x, y) mod p^m.
    pub k: u64,
}

impl ResiduePoint {
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }
}

/// Bivariate polynomial with coefficients reduced mod q.
#[derive(Debug, Clone)]
pub struct ModBiPoly {
    pub q: u64,
    terms: Vec<(u32, u32, u64)>,
    deg_x: u32,
    deg_y: u32,
}

impl ModBiPoly {
    pub fn new(f: &BiPoly, q: u64) -> Self {
        let terms: Vec<(u32, u32, u64)> = f
            .terms()
            .map(|(&(i, j), c)| (i, j, reduce_big(c, q)))
            .filter(|t| t.2 != 0)
            .collect();
        ModBiPoly { q, deg_x: f.deg_first(), deg_y: f.deg_second(), terms }
    }

    fn powers(v: u64, n: u32, q: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut acc = 1 % q;
        for _ in 0..=n {
            out.push(acc);
            acc = ((acc as u128 * v as u128) % q as u128) as u64;
        }
        out
    }

    pub fn eval(&self, x: u64, y: u64) -> u64 {
        let q = self.q as u128;
        let xp = Self::powers(x % self.q, self.deg_x, self.q);
        let yp = Self::powers(y % self.q, self.deg_y, self.q);
        let mut acc: u128 = 0;
        for &(i, j, c) in &self.terms {
            let t = c as u128 * xp[i as usize] as u128 % q * yp[j as usize] as u128 % q;
            acc = (acc + t) % q;
        }
        acc as u64
    }

    /// Partial derivatives at (x, y) mod q.
    pub fn gradient(&self, x: u64, y: u64) -> (u64, u64) {
        let q = self.q as u128;
        let xp = Self::powers(x % self.q, self.deg_x, self.q);
        let yp = Self::powers(y % self.q, self.deg_y, self.q);
        let (mut gx, mut gy) = (0u128, 0u128);
        for &(i, j, c) in &self.terms {
            if i > 0 {
                let t = c as u128 * (i as u128 % q) % q * xp[i as usize - 1] as u128 % q
                    * yp[j as usize] as u128
                    % q;
                gx = (gx + t) % q;
            }
            if j > 0 {
                let t = c as u128 * (j as u128 % q) % q * xp[i as usize] as u128 % q
                    * yp[j as usize - 1] as u128
                    % q;
                gy = (gy + t) % q;
            }
        }
        (gx as u64, gy as u64)
    }

    /// `F(x, Y)` as a polynomial in Y over F_p (q must be prime).
    pub fn row(&self, x: u64) -> FpPoly {
        let xp = Self::powers(x % self.q, self.deg_x, self.q);
        let mut c = vec![0u64; self.deg_y as usize + 1];
        let q = self.q as u128;
        for &(i, j, v) in &self.terms {
            let t = v as u128 * xp[i as usize] as u128 % q;
            c[j as usize] = ((c[j as usize] as u128 + t) % q) as u64;
        }
        FpPoly::new(c, self.q)
    }
}

fn row_solutions(f: &ModBiPoly, x: u64, k: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let p = f.q;
    let h = f.row(x).sub(&FpPoly::new(vec![k % p], p));
    if h.is_zero() {
        (0..p).collect()
    } else {
        h.roots(rng)
    }
}

/// Deterministic order of x-coordinates: 1, 2, ..., p − 1, then 0.
fn x_order(p: u64) -> impl Iterator<Item = u64> {
    (1..p).chain(std::iter::once(0))
}

/// All solutions of F(x,y) ≡ k mod p in the deterministic search order.
pub struct ResiduePoints {
    f: ModBiPoly,
    k: u64,
    xs: Box<dyn Iterator<Item = u64> + Send>,
    current: Option<(u64, std::vec::IntoIter<u64>)>,
    rng: ChaCha8Rng,
}

impl Iterator for ResiduePoints {
    type Item = ResiduePoint;
    fn next(&mut self) -> Option<ResiduePoint> {
        loop {
            if let Some((x, ys)) = self.current.as_mut() {
                if let Some(y) = ys.next() {
                    return Some(ResiduePoint { p: self.f.q, m: 1, x: *x, y, k: self.k });
                }
            }
            let x = self.xs.next()?;
            let ys = row_solutions(&self.f, x, self.k, &mut self.rng);
            self.current = Some((x, ys.into_iter()));
        }
    }
}

pub fn residue_points(f: &BiPoly, k: u64, p: u64) -> ResiduePoints {
    ResiduePoints {
        f: ModBiPoly::new(f, p),
        k: k % p,
        xs: Box::new(x_order(p)),
        current: None,
        rng: ChaCha8Rng::seed_from_u64(p),
    }
}

/// Least solution of F(x, y) ≡ k mod p in the order x = 1..p−1, 0 and y ascending.
pub fn solve_residue(f: &BiPoly, k: u64, p: u64) -> Option<ResiduePoint> {
    residue_points(f, k, p).next()
}

pub fn solve_residue_form(f: &BinaryForm, k: u64, p: u64) -> Option<ResiduePoint> {
    solve_residue(&f.to_bipoly(), k, p)
}

/// A zero of F mod p with a nonvanishing partial derivative, accepted by `accept`.
pub fn solve_simple_zero(
    f: &BiPoly,
    p: u64,
    accept: impl Fn(u64, u64) -> bool,
) -> Option<ResiduePoint> {
    let mf = ModBiPoly::new(f, p);
    residue_points(f, 0, p).find(|pt| {
        let (gx, gy) = mf.gradient(pt.x, pt.y);
        (gx != 0 || gy != 0) && accept(pt.x, pt.y)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftDirection {
    Auto,
    X,
    Y,
}

/// Lift a point of F ≡ k mod p to F ≡ k_target mod p^m by Newton iteration in
/// one coordinate, the other held fixed.
pub fn hensel_lift(
    f: &BiPoly,
    point: &ResiduePoint,
    k_target: u64,
    m: u32,
    dir: LiftDirection,
) -> Result<ResiduePoint> {
    let p = point.p;
    if m == 0 {
        return Err(Error::Invalid("lift exponent must be at least 1".into()));
    }
    let q = p
        .checked_pow(m)
        .filter(|q| *q < (1u64 << 62))
        .ok_or_else(|| Error::Invalid(format!("{p}^{m} too large for lifting")))?;
    let fp = ModBiPoly::new(f, p);
    if fp.eval(point.x, point.y) != k_target % p {
        return Err(Error::Invalid("base point does not match target class mod p".into()));
    }
    let (gx, gy) = fp.gradient(point.x, point.y);
    let use_x = match dir {
        LiftDirection::X if gx != 0 => true,
        LiftDirection::Y if gy != 0 => false,
        LiftDirection::Auto if gx != 0 => true,
        LiftDirection::Auto if gy != 0 => false,
        _ => return Err(Error::SingularPoint),
    };
    let fq = ModBiPoly::new(f, q);
    let k = k_target % q;
    let (mut x, mut y) = (point.x % q, point.y % q);
    // Linear convergence in p-adic digits; m steps always suffice.
    for _ in 0..m {
        let v = fq.eval(x, y);
        if v == k {
            break;
        }
        let (dx, dy) = fq.gradient(x, y);
        let d = if use_x { dx } else { dy };
        let inv = invmod(d, q).ok_or(Error::SingularPoint)?;
        let diff = ((v as u128 + q as u128 - k as u128) % q as u128) as u64;
        let step = ((diff as u128 * inv as u128) % q as u128) as u64;
        if use_x {
            x = (x + q - step) % q;
        } else {
            y = (y + q - step) % q;
        }
    }
    debug_assert_eq!(fq.eval(x, y), k);
    Ok(ResiduePoint { p, m, x, y, k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCount {
    pub p: u64,
    pub k: u64,
    pub affine_count: u64,
    /// Hasse window for the affine count when the curve has genus one.
    pub window: Option<(i64, i64)>,
    pub points_at_infinity: Option<u64>,
}

impl PointCount {
    pub fn in_window(&self) -> Option<bool> {
        self.window
            .map(|(lo, hi)| (lo..=hi).contains(&(self.affine_count as i64)))
    }
}

pub const COUNT_BUDGET: u64 = 100_000_000;

/// Roots of a binary form in P^1(F_p), or `None` if the form vanishes mod p.
fn projective_roots(f: &BinaryForm, p: u64) -> Option<(u64, bool)> {
    let c = f.coeffs_mod(p);
    if c.iter().all(|&v| v == 0) {
        return None;
    }
    let n = f.degree();
    // Affine roots of F(T, 1); infinity is a root iff c_0 ≡ 0.
    let aff = FpPoly::new((0..=n).map(|k| c[n - k]).collect(), p);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let roots = aff.roots(&mut rng).len() as u64;
    let squarefree = {
        let full_degree = aff.deg() + c.iter().take_while(|&&v| v == 0).count();
        let y_mult = c.iter().take_while(|&&v| v == 0).count();
        full_degree == n && y_mult <= 1 && aff.gcd(&aff.derivative()).deg() == 0
    };
    Some((roots + u64::from(c[0] == 0), squarefree))
}

/// Exhaustive count of affine solutions of F(x, y) ≡ k mod p.
pub fn count_points(f: &BinaryForm, k: u64, p: u64) -> Result<PointCount> {
    if p.checked_mul(p).is_none_or(|pp| pp > COUNT_BUDGET) {
        return Err(Error::BudgetExceeded(format!("p = {p} exceeds point-count budget")));
    }
    let k = k % p;
    let cm = f.coeffs_mod(p);
    let mut count = 0u64;
    for x in 0..p {
        for y in 0..p {
            if BinaryForm::eval_mod_with(&cm, x, y, p) == k {
                count += 1;
            }
        }
    }
    let mut window = None;
    let mut at_inf = None;
    if p > 3 && f.degree() == 3 && k != 0 {
        if let Some((z_inf, true)) = projective_roots(f, p) {
            let s = (4 * p as u128).isqrt() as i64; // floor(2 sqrt p)
            let base = p as i64 + 1 - z_inf as i64;
            window = Some((base - s, base + s));
            at_inf = Some(z_inf);
        }
    }
    Ok(PointCount { p, k, affine_count: count, window, points_at_infinity: at_inf })
}

/// Value of a BiPoly at integers, reduced mod q.
pub fn eval_mod_big(f: &BiPoly, x: &BigInt, y: &BigInt, q: u64) -> u64 {
    ModBiPoly::new(f, q).eval(reduce_big(x, q), reduce_big(y, q))
}
