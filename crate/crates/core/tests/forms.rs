use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use discspec_core::binforms::{
    eliminate_fixed_divisors, fixed_prime_divisors, substitute_affine, BinaryForm, PrimeCertificate,
};
use discspec_core::exactalg::fp::reduce_big;
use discspec_core::exactalg::integer::is_prime_u64;
use discspec_core::modcurves::{hensel_lift, residue_points, LiftDirection};

fn form_strategy() -> impl Strategy<Value = BinaryForm> {
    prop::collection::vec(-12i64..=12, 3..=7)
        .prop_map(|c| BinaryForm::from_i64(&c))
        .prop_filter("nonzero, content 1", |f| !f.is_zero() && f.content().is_one())
}

fn product_form(roots: &[(i64, i64)]) -> BinaryForm {
    roots
        .iter()
        .fold(BinaryForm::from_i64(&[1]), |acc, &(a, b)| acc.mul(&BinaryForm::from_i64(&[a, b])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn homogeneity(f in form_strategy(), l in -30i64..30, x in -100i64..100, y in -100i64..100) {
        let lhs = f.evaluate_i64(l * x, l * y);
        let rhs = BigInt::from(l).pow(f.degree() as u32) * f.evaluate_i64(x, y);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fixed_divisors_sound_and_complete(f in form_strategy()) {
        prop_assume!(f.is_squarefree());
        let rep = fixed_prime_divisors(&f).unwrap();
        let n = f.degree() as u64;
        for p in (2..n).filter(|&p| is_prime_u64(p)) {
            let fixed = rep.fixed_primes.contains(&p);
            let all_zero = (0..p).all(|x| (0..p).all(|y| f.evaluate_i64(x as i64, y as i64).is_multiple_of(&BigInt::from(p))));
            prop_assert_eq!(fixed, all_zero);
            if !fixed {
                let cert = rep.certificates.iter().find(|(q, _)| *q == p).map(|c| c.1.clone());
                let Some(PrimeCertificate::Witness { x, y, value }) = cert else {
                    return Err(TestCaseError::fail(format!("no witness at {p}")));
                };
                prop_assert_ne!(value, 0);
                prop_assert_eq!(reduce_big(&f.evaluate_i64(x as i64, y as i64), p), value);
            }
        }
        for p in rep.fixed_primes.iter() {
            prop_assert!(*p < n);
        }
        for q in rep.fixed_squares.iter() {
            prop_assert!(rep.fixed_primes.contains(q));
        }
        // Beyond the proven range a small search always finds a nonvanishing value.
        for p in [n.max(2), 11, 13, 101].into_iter().filter(|&p| is_prime_u64(p) && p >= n) {
            let hit = (0..20i64).any(|x| (0..20i64).any(|y| !f.evaluate_i64(x, y).is_multiple_of(&BigInt::from(p))));
            prop_assert!(hit);
        }
    }

    #[test]
    fn elimination_clears_fixed_primes(f in form_strategy()) {
        prop_assume!(f.is_squarefree());
        let rec = eliminate_fixed_divisors(&f).unwrap();
        prop_assert!(fixed_prime_divisors(&rec.form).unwrap().fixed_primes.is_empty());
        // N divides lc times a product of primes below the degree.
        let mut rest = rec.n.clone();
        let lc = f.coeff(0).clone();
        let g = rest.gcd(&lc);
        if !g.is_zero() {
            rest /= &g;
        }
        for p in (2..f.degree() as u64).filter(|&p| is_prime_u64(p)) {
            let bp = BigInt::from(p);
            while !rest.is_zero() && rest.is_multiple_of(&bp) {
                rest /= &bp;
            }
        }
        prop_assert!(rest.is_one() || lc.is_zero(), "N = {} for {}", rec.n, f);
        prop_assert_eq!(f.scale_y(&rec.n), BinaryForm::new(rec.form.coeffs().iter().map(|c| c * &rec.content).collect()));
    }
}

#[test]
fn substitute_affine_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let d = rng.gen_range(1..=5);
        let c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-9..=9)).collect();
        let f = BinaryForm::from_i64(&c);
        let [a1, b1, m, x, y] = [0; 5].map(|_| BigInt::from(rng.gen_range(-40i64..=40)));
        let s = substitute_affine(&f, &a1, &b1, &m);
        assert_eq!(s.eval(&x, &y), f.evaluate(&(&a1 + &m * &x), &(&b1 + &m * &y)));
    }
}

#[test]
fn random_forms_lose_fixed_primes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 50 {
        let d = rng.gen_range(2..=6);
        let roots: Vec<(i64, i64)> = (0..d).map(|_| (rng.gen_range(-6..=6), rng.gen_range(-6..=6))).collect();
        let f = product_form(&roots);
        if f.is_zero() || !f.is_squarefree() {
            continue;
        }
        let Ok((_, f)) = f.content_primitive() else { continue };
        let rec = eliminate_fixed_divisors(&f).unwrap();
        let q = rec.form.degree() as u64;
        for p in (2..q).filter(|&p| is_prime_u64(p)) {
            let cm = rec.form.coeffs_mod(p);
            assert!((0..p).any(|x| (0..p).any(|y| BinaryForm::eval_mod_with(&cm, x, y, p) != 0)));
        }
        done += 1;
    }
}

#[test]
fn residue_points_and_lifts_reverify() {
    let f = BinaryForm::from_i64(&[0, 1, -2, 0]);
    let bf = f.to_bipoly();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let primes = [3u64, 5, 11, 13, 17, 19, 23, 29, 31, 37];
    let mut lifts = 0;
    while lifts < 500 {
        let p = primes[rng.gen_range(0..primes.len())];
        let k = rng.gen_range(1..p);
        let m = rng.gen_range(1..=4u32);
        let pts: Vec<_> = residue_points(&bf, k, p).take(3).collect();
        for pt in &pts {
            let v = f.evaluate_i64(pt.x as i64, pt.y as i64);
            assert_eq!(reduce_big(&v, p), k);
        }
        let Some(pt) = pts.first() else { continue };
        let q = p.pow(m);
        let target = k + p * rng.gen_range(0..q / p);
        let Ok(l) = hensel_lift(&bf, pt, target, m, LiftDirection::Auto) else { continue };
        assert_eq!(reduce_big(&f.evaluate_i64(l.x as i64, l.y as i64), q), target % q);
        assert_eq!((l.x % p, l.y % p), (pt.x, pt.y));
        lifts += 1;
    }
}
