use num_bigint::BigInt;
use proptest::prelude::*;

use discspec_core::exactalg::integer::valuation;
use discspec_core::exactalg::{discriminant_z, UniPoly, Var};
use discspec_core::specialize::local::{analyze, LocalMethod};
use discspec_core::specialize::maximal::p_maximal;
use discspec_core::specialize::{ramification_oracle, Ramification};

fn monic(c: &[i64]) -> UniPoly {
    let mut v = c.to_vec();
    v.push(1);
    UniPoly::from_i64(&v, Var::X)
}

/// p^{2n} g(X/p^2): the same algebra with a smaller order Z[p^2·θ].
fn shrink(g: &UniPoly, p: u64) -> UniPoly {
    let n = g.deg();
    let q = BigInt::from(p * p);
    let coeffs = (0..=n).map(|i| g.coeff(i) * num_traits::pow(q.clone(), n - i)).collect();
    UniPoly::new(coeffs, Var::X)
}

fn shift(g: &UniPoly) -> UniPoly {
    // g(X + 1) = Σ c_i Σ_j C(i, j) X^j.
    let n = g.deg();
    let mut out = vec![BigInt::from(0); n + 1];
    for i in 0..=n {
        let mut binom = BigInt::from(1);
        for j in 0..=i {
            out[j] += g.coeff(i) * &binom;
            binom = binom * BigInt::from(i - j) / BigInt::from(j + 1);
        }
    }
    UniPoly::new(out, Var::X)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn maximal_order_exponent(c in prop::collection::vec(-30i64..30, 2..5), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let g = monic(&c);
        let disc = discriminant_z(&g);
        prop_assume!(disc != BigInt::from(0));
        let m = p_maximal(&g, p).unwrap();
        let vd = valuation(&disc, p);
        prop_assert!(m.disc_exponent <= vd);
        prop_assert_eq!(vd - m.disc_exponent, 2 * m.index_valuation);
        // Same algebra, other orders.
        prop_assert_eq!(p_maximal(&shrink(&g, p), p).unwrap().disc_exponent, m.disc_exponent);
        prop_assert_eq!(p_maximal(&shift(&g), p).unwrap().disc_exponent, m.disc_exponent);
        let a = analyze(&g, p).unwrap();
        if matches!(a.method, LocalMethod::Etale | LocalMethod::Dedekind) {
            prop_assert_eq!(a.disc_exponent, Some(m.disc_exponent));
        }
        let expected = if m.disc_exponent > 0 { Ramification::Ramified } else { Ramification::Unramified };
        prop_assert_eq!(ramification_oracle(&g, p).unwrap(), expected);
    }
}

#[test]
fn shift_is_translation() {
    let g = monic(&[2, -3, 0]);
    let h = shift(&g);
    for x in -5i64..5 {
        let lhs = h.eval(&BigInt::from(x));
        let rhs = g.eval(&BigInt::from(x + 1));
        assert_eq!(lhs, rhs);
    }
}
