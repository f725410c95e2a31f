//! p-maximal orders by the Round 2 algorithm: the exact p-part of the
//! discriminant of Q[X]/(g).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactalg::fp::{mulmod, reduce_big};
use crate::exactalg::integer::valuation;
use crate::exactalg::{discriminant_z, UniPoly};

/// Result of enlarging Z[α] to a p-maximal order, α = lc(g)·θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PMaximal {
    /// v_p of [O_p : Z_(p)[α]].
    pub index_valuation: u32,
    /// v_p of the discriminant of Q[X]/(g).
    pub disc_exponent: u32,
    pub iterations: u32,
}

/// Largest degree handled.
pub const MAX_DEGREE: usize = 40;

type QMat = Vec<Vec<BigRational>>;
type ZMat = Vec<Vec<BigInt>>;

/// Monic h with h(lc·θ) = 0.
fn monic_model(g: &UniPoly) -> UniPoly {
    let n = g.deg();
    let c = g.lc();
    let coeffs = (0..=n)
        .map(|i| if i == n { BigInt::one() } else { g.coeff(i) * num_traits::pow(c.clone(), n - 1 - i) })
        .collect();
    UniPoly::new(coeffs, g.var())
}

/// Product of two elements in the power basis of Q[X]/(h), h monic.
fn mul_mod(a: &[BigRational], b: &[BigRational], h: &UniPoly) -> Vec<BigRational> {
    let n = h.deg();
    let mut prod = vec![BigRational::zero(); 2 * n - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    for k in (n..prod.len()).rev() {
        let t = std::mem::replace(&mut prod[k], BigRational::zero());
        if t.is_zero() {
            continue;
        }
        for i in 0..n {
            prod[k - n + i] -= &t * BigRational::from(h.coeff(i));
        }
    }
    prod.truncate(n);
    prod
}

fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut a: QMat = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(piv, c);
        let inv = a[c][c].recip();
        for v in a[c].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot_row = a[c].clone();
                for (v, w) in a[r].iter_mut().zip(pivot_row) {
                    *v -= &f * w;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Row vector times matrix.
fn vec_mat(v: &[BigRational], m: &QMat) -> Vec<BigRational> {
    let n = m[0].len();
    let mut out = vec![BigRational::zero(); n];
    for (x, row) in v.iter().zip(m) {
        if x.is_zero() {
            continue;
        }
        for (o, y) in out.iter_mut().zip(row) {
            *o += x * y;
        }
    }
    out
}

fn integral(v: Vec<BigRational>) -> Result<Vec<BigInt>> {
    v.into_iter()
        .map(|x| {
            if x.is_integer() {
                Ok(x.to_integer())
            } else {
                Err(Error::Invalid("non-integral coordinates in order computation".into()))
            }
        })
        .collect()
}

/// Upper-triangular basis of the row lattice (assumed of full rank n).
fn hnf(mut rows: ZMat, n: usize) -> Result<ZMat> {
    let mut out: ZMat = Vec::with_capacity(n);
    for col in 0..n {
        loop {
            let Some(pi) = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| !r[col].is_zero())
                .min_by_key(|(_, r)| r[col].abs())
                .map(|(i, _)| i)
            else {
                return Err(Error::Invalid("rank-deficient lattice".into()));
            };
            let pivot = rows.swap_remove(pi);
            let mut clean = true;
            for r in rows.iter_mut() {
                if r[col].is_zero() {
                    continue;
                }
                let q = r[col].div_floor(&pivot[col]);
                for (x, y) in r.iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
                if !r[col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                let pivot = if pivot[col].is_negative() { pivot.into_iter().map(|x| -x).collect() } else { pivot };
                out.push(pivot);
                break;
            }
            rows.push(pivot);
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    for i in 0..n {
        for j in 0..i {
            let q = out[j][i].div_floor(&out[i][i]);
            if !q.is_zero() {
                let ri = out[i].clone();
                for (x, y) in out[j].iter_mut().zip(&ri) {
                    *x -= &q * y;
                }
            }
        }
    }
    Ok(out)
}

/// Basis of {x : x·A = 0} over F_p for an r×c matrix A.
fn left_kernel(a: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let r = a.len();
    if r == 0 {
        return Vec::new();
    }
    let c = a[0].len();
    // Transpose and take the right kernel.
    let mut m: Vec<Vec<u64>> = (0..c).map(|j| (0..r).map(|i| a[i][j] % p).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r {
        let Some(pr) = (row..c).find(|&i| m[i][col] != 0) else { continue };
        m.swap(pr, row);
        let inv = crate::exactalg::fp::invmod(m[row][col], p).expect("nonzero mod prime");
        for v in m[row].iter_mut() {
            *v = mulmod(*v, inv, p);
        }
        for i in 0..c {
            if i != row && m[i][col] != 0 {
                let f = m[i][col];
                for k in 0..r {
                    let t = mulmod(f, m[row][k], p);
                    m[i][k] = (m[i][k] + p - t) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == c {
            break;
        }
    }
    let free: Vec<usize> = (0..r).filter(|j| !pivots.contains(j)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; r];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[i][f]) % p;
            }
            v
        })
        .collect()
}

/// Structure constants mod p: table[i][j] = coordinates of ω_i·ω_j.
fn table_mod(table: &[Vec<Vec<BigInt>>], p: u64) -> Vec<Vec<Vec<u64>>> {
    table
        .iter()
        .map(|row| row.iter().map(|v| v.iter().map(|x| reduce_big(x, p)).collect()).collect())
        .collect()
}

fn mul_coords(x: &[u64], y: &[u64], t: &[Vec<Vec<u64>>], p: u64) -> Vec<u64> {
    let n = x.len();
    let mut out = vec![0u64; n];
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        for j in 0..n {
            if y[j] == 0 {
                continue;
            }
            let s = mulmod(x[i], y[j], p);
            for k in 0..n {
                out[k] = (out[k] + mulmod(s, t[i][j][k], p)) % p;
            }
        }
    }
    out
}

fn pow_coords(x: &[u64], mut e: u128, one: &[u64], t: &[Vec<Vec<u64>>], p: u64) -> Vec<u64> {
    let mut acc = one.to_vec();
    let mut base = x.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_coords(&acc, &base, t, p);
        }
        base = mul_coords(&base, &base, t, p);
        e >>= 1;
    }
    acc
}

/// Enlarge Z[α] until it is p-maximal and read off v_p of the discriminant.
pub fn p_maximal(g: &UniPoly, p: u64) -> Result<PMaximal> {
    let n = g.deg();
    if n == 0 || n > MAX_DEGREE || p < 2 || p >= 1 << 62 {
        return Err(Error::Invalid(format!("p-maximal order unsupported for degree {n}, p = {p}")));
    }
    let h = monic_model(g);
    let dh = discriminant_z(&h);
    if dh.is_zero() {
        return Err(Error::RepeatedFactors);
    }
    let vd = valuation(&dh, p);
    let mut idx = 0u32;
    let mut iterations = 0u32;
    if vd >= 2 {
        let unit = |i: usize| -> Vec<BigRational> {
            (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()
        };
        let mut basis: QMat = (0..n).map(unit).collect();
        let pb = BigInt::from(p);
        loop {
            iterations += 1;
            let binv = inverse(&basis).ok_or_else(|| Error::Invalid("singular order basis".into()))?;
            let mut table: Vec<Vec<Vec<BigInt>>> = vec![vec![Vec::new(); n]; n];
            for i in 0..n {
                for j in i..n {
                    let c = integral(vec_mat(&mul_mod(&basis[i], &basis[j], &h), &binv))?;
                    table[j][i] = c.clone();
                    table[i][j] = c;
                }
            }
            let tp = table_mod(&table, p);
            // The unit element in ω-coordinates.
            let one = integral(vec_mat(&unit(0), &binv))?;
            let one_p: Vec<u64> = one.iter().map(|x| reduce_big(x, p)).collect();
            let mut q: u128 = p as u128;
            while q < n as u128 {
                q *= p as u128;
            }
            let frob: Vec<Vec<u64>> = (0..n)
                .map(|i| {
                    let mut e = vec![0u64; n];
                    e[i] = 1;
                    pow_coords(&e, q, &one_p, &tp, p)
                })
                .collect();
            let radical = left_kernel(&frob, p);
            if radical.is_empty() {
                break;
            }
            // I = pO + radical, in ω-coordinates.
            let mut gens: ZMat = (0..n)
                .map(|i| (0..n).map(|j| if i == j { pb.clone() } else { BigInt::zero() }).collect())
                .collect();
            gens.extend(radical.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()));
            let m = hnf(gens, n)?;
            let mq: QMat = m.iter().map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect()).collect();
            let minv = inverse(&mq).ok_or_else(|| Error::Invalid("singular ideal basis".into()))?;
            // u ↦ (u·m_j in I-coordinates mod p)_j; its kernel is U/pO.
            let a: Vec<Vec<u64>> = (0..n)
                .map(|k| {
                    let mut row = Vec::with_capacity(n * n);
                    for mj in &m {
                        let mut y = vec![BigInt::zero(); n];
                        for (l, c) in mj.iter().enumerate() {
                            if c.is_zero() {
                                continue;
                            }
                            for (yy, t) in y.iter_mut().zip(&table[k][l]) {
                                *yy += c * t;
                            }
                        }
                        let yq: Vec<BigRational> = y.into_iter().map(BigRational::from).collect();
                        let z = vec_mat(&yq, &minv);
                        row.extend(z.iter().map(|x| reduce_big(&x.to_integer(), p)));
                    }
                    row
                })
                .collect();
            let kernel = left_kernel(&a, p);
            if kernel.is_empty() {
                break;
            }
            let mut gens: ZMat = (0..n)
                .map(|i| (0..n).map(|j| if i == j { pb.clone() } else { BigInt::zero() }).collect())
                .collect();
            gens.extend(kernel.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()));
            let u = hnf(gens, n)?;
            let pinv = BigRational::new(BigInt::one(), pb.clone());
            basis = u
                .iter()
                .map(|r| {
                    let rq: Vec<BigRational> = r.iter().map(|x| BigRational::from(x.clone()) * &pinv).collect();
                    vec_mat(&rq, &basis)
                })
                .collect();
            idx += kernel.len() as u32;
            if 2 * idx > vd {
                return Err(Error::Invalid("index exceeds discriminant valuation".into()));
            }
        }
    }
    Ok(PMaximal { index_valuation: idx, disc_exponent: vd - 2 * idx, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::Var;

    fn exp(c: &[i64], p: u64) -> u32 {
        p_maximal(&UniPoly::from_i64(c, Var::X), p).unwrap().disc_exponent
    }

    #[test]
    fn quadratic_fields() {
        // Q(√5): disc 5; X^2 − 5 has disc 20.
        assert_eq!(exp(&[-5, 0, 1], 2), 0);
        assert_eq!(exp(&[-5, 0, 1], 5), 1);
        // Q(√3): disc 12.
        assert_eq!(exp(&[-3, 0, 1], 2), 2);
        // Q(√2): disc 8.
        assert_eq!(exp(&[-2, 0, 1], 2), 3);
        // X^2 − 28 = Q(√7): disc 28.
        assert_eq!(exp(&[-28, 0, 1], 2), 2);
        assert_eq!(exp(&[-28, 0, 1], 7), 1);
        // X^2 − 45 = Q(√5).
        assert_eq!(exp(&[-45, 0, 1], 3), 0);
    }

    #[test]
    fn higher_degree() {
        // Q(ζ_8) = Q[X]/(X^4 + 1): disc 256.
        assert_eq!(exp(&[1, 0, 0, 0, 1], 2), 8);
        // Q(ζ_5): disc 125.
        assert_eq!(exp(&[1, 1, 1, 1, 1], 5), 3);
        // Q(∛2): disc −108 = −2^2·3^3.
        assert_eq!(exp(&[-2, 0, 0, 1], 2), 2);
        assert_eq!(exp(&[-2, 0, 0, 1], 3), 3);
        // Q(∛10): index 1 at 3? disc(X^3 − 10) = −2700; field disc −300.
        assert_eq!(exp(&[-10, 0, 0, 1], 3), 1);
        assert_eq!(exp(&[-10, 0, 0, 1], 2), 2);
        assert_eq!(exp(&[-10, 0, 0, 1], 5), 2);
        // Non-monic: 2X^2 + 1 defines Q(√−2), disc −8.
        assert_eq!(exp(&[1, 0, 2], 2), 3);
        // Reducible étale algebra: (X^2 − 2)(X − 3) has disc 8 at 2.
        assert_eq!(exp(&[6, -2, -3, 1], 2), 3);
    }
}
