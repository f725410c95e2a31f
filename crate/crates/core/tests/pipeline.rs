use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed};
use proptest::prelude::*;

use discspec_core::exactalg::fp::reduce_big;
use discspec_core::exactalg::{BiPoly, FactorBudget, Var};
use discspec_core::pipeline::target::lattice_consistent;
use discspec_core::pipeline::{
    squarefree_scan, target_residues, target_route, targeted_search, verify_record, FrobeniusConstraint,
    ResidueConstraint, Route, SearchContext, SignRequirement, TargetSpec,
};
use discspec_core::specialize::{
    frobenius_cycle_type, reduced_discriminant, specialize_at, CertificateTarget, DiscMode, Family, FrobeniusType,
    InfinityBranch, PrimeSource,
};

fn trinomial5() -> Family {
    let mut f = Family::new("trinomial-5", BiPoly::from_i64(&[(5, 0, 1), (1, 1, 1), (0, 1, 1)], (Var::X, Var::T))).unwrap();
    f.infinity = InfinityBranch::Yes;
    f.group_order = Some(120);
    f.certificate = CertificateTarget::Sn;
    f
}

fn trinomial3() -> Family {
    let mut f = Family::new("trinomial-3", BiPoly::from_i64(&[(3, 0, 1), (1, 1, 1), (0, 1, 1)], (Var::X, Var::T))).unwrap();
    f.infinity = InfinityBranch::Yes;
    f.group_order = Some(6);
    f.certificate = CertificateTarget::Sn;
    f
}

fn c2() -> Family {
    let mut f = Family::new("c2-cubic", BiPoly::from_i64(&[(2, 0, 1), (0, 3, -1), (0, 1, 1)], (Var::X, Var::T))).unwrap();
    f.infinity = InfinityBranch::Yes;
    f.group_order = Some(2);
    f.certificate = CertificateTarget::C2;
    f
}

#[test]
fn alternate_neighbourhoods_reach_missing_cosets() {
    let ctx = SearchContext::new(&c2(), 0).unwrap();
    let spec = TargetSpec { residues: vec![ResidueConstraint { p: 17, e: 1, k: 3 }], ..Default::default() };
    for sign in [SignRequirement::Positive, SignRequirement::Negative] {
        let r = target_route(&ctx.pf, &ctx.krasner, &spec, Route { neighbourhood: 0, sign }).unwrap();
        assert!(r.is_err(), "class 3 mod 17 unexpectedly reachable from the primary neighbourhood");
    }
    let res = targeted_search(&ctx, &spec).unwrap();
    assert_eq!(res.records.len(), 1);
    let rec = &res.records[0];
    assert_eq!(reduce_big(&rec.delta, 17), 3);
    assert!(verify_record(&ctx, rec, &spec).ok());
    assert!(res.scanned.last().unwrap().0.neighbourhood > 0);
    // Each alternate freezes the S_0-part of F across its neighbourhood.
    assert!(!ctx.alternates().is_empty());
    for kr in ctx.alternates() {
        for (u, v) in [(1i64, 0i64), (0, 1), (-2, 3), (5, 7)] {
            let x = &kr.basepoint.0 + &kr.modulus * u;
            let y = &kr.basepoint.1 + &kr.modulus * v;
            let f = ctx.pf.form.evaluate(&x, &y);
            assert_eq!(ctx.pf.s0.split(&f).0, kr.s0_part);
        }
    }
}

#[test]
fn negative_route_meets_the_class_with_negative_values() {
    let ctx = SearchContext::new(&trinomial3(), 0).unwrap();
    let spec = TargetSpec {
        residues: vec![ResidueConstraint { p: 13, e: 1, k: 5 }],
        sign: SignRequirement::Negative,
        max_records: 3,
        ..Default::default()
    };
    let res = targeted_search(&ctx, &spec).unwrap();
    assert_eq!(res.records.len(), 3);
    for rec in &res.records {
        assert!(rec.f_value.is_negative());
        assert_eq!(reduce_big(&rec.delta, 13), 5);
        assert!(verify_record(&ctx, rec, &spec).ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn projective_invariance(a in -400i64..400, b in 1i64..400) {
        prop_assume!(a.gcd(&b) == 1);
        let fam = trinomial3();
        let (a, b) = (BigInt::from(a), BigInt::from(b));
        let g1 = specialize_at(&fam, &a, &b);
        let g2 = specialize_at(&fam, &-&a, &-&b);
        prop_assert_eq!(g1.is_ok(), g2.is_ok());
        let Ok(g1) = g1 else { return Ok(()) };
        prop_assert_eq!(&g1, &g2.unwrap());
        let s0 = discspec_core::specialize::bad_primes(&fam, fam.branch_data().unwrap()).unwrap();
        let d1 = reduced_discriminant(&fam, &s0, &a, &b, DiscMode::Audited, None, FactorBudget::default());
        let d2 = reduced_discriminant(&fam, &s0, &-&a, &-&b, DiscMode::Audited, None, FactorBudget::default());
        if let (Ok((_, d1)), Ok((_, d2))) = (d1, d2) {
            prop_assert_eq!(d1.delta, d2.delta);
        }
    }

    #[test]
    fn frobenius_type_sums_to_degree(a in -300i64..300, b in 1i64..50, pi in 0usize..8) {
        prop_assume!(a.gcd(&b) == 1);
        let p = [7u64, 11, 13, 17, 19, 23, 29, 31][pi];
        let Ok(g) = specialize_at(&trinomial5(), &BigInt::from(a), &BigInt::from(b)) else { return Ok(()) };
        if let FrobeniusType::Cycle(c) = frobenius_cycle_type(&g, p).unwrap() {
            prop_assert_eq!(c.iter().sum::<usize>(), g.deg());
        }
    }

    #[test]
    fn delta_is_squarefree_and_tagged(a in -2000i64..2000, b in 1i64..60) {
        prop_assume!(a.gcd(&b) == 1);
        let fam = trinomial5();
        let s0 = discspec_core::specialize::bad_primes(&fam, fam.branch_data().unwrap()).unwrap();
        let Ok((_, rd)) = reduced_discriminant(&fam, &s0, &BigInt::from(a), &BigInt::from(b), DiscMode::Audited, None, FactorBudget::default()) else {
            return Ok(());
        };
        let mut prod = BigUint::one();
        for s in rd.primes.iter().filter(|s| s.ramified) {
            prop_assert!(!(&prod % &s.p == BigUint::from(0u32)) || prod.is_one());
            prod *= &s.p;
            prop_assert!(matches!(s.source, PrimeSource::SitPredicted | PrimeSource::OracleConfirmed | PrimeSource::OracleUndetermined));
        }
        prop_assert_eq!(BigInt::from(prod), rd.delta.abs());
    }
}

#[test]
fn lattice_reduces_to_each_solution() {
    let ctx = SearchContext::new(&trinomial5(), 0).unwrap();
    for (k1, k2) in [(1, 1), (3, 7), (10, 12), (5, 0)] {
        let spec = TargetSpec {
            residues: vec![ResidueConstraint { p: 11, e: 1, k: k1 }, ResidueConstraint { p: 13, e: 1, k: k2 }],
            ..Default::default()
        };
        let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
        assert!(lattice_consistent(&l), "({k1}, {k2})");
    }
}

#[test]
fn scan_independent_of_thread_count() {
    let ctx = SearchContext::new(&trinomial5(), 0).unwrap();
    let spec = TargetSpec {
        residues: vec![ResidueConstraint { p: 11, e: 1, k: 4 }],
        frobenius: vec![FrobeniusConstraint { p: 17, cycle_type: vec![5] }],
        max_records: 3,
        ..Default::default()
    };
    let l = target_residues(&ctx.pf, &ctx.krasner, &spec).unwrap().unwrap();
    let run = |t: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        pool.install(|| squarefree_scan(&ctx, &l, &spec))
    };
    let r1 = run(1);
    let r3 = run(3);
    assert_eq!(r1.records.len(), 3);
    assert_eq!(r1.records, r3.records);
    assert_eq!(r1.stats, r3.stats);
    for rec in &r1.records {
        let rep = verify_record(&ctx, rec, &spec);
        assert!(rep.ok(), "{:?}", rep.failures);
        assert_eq!(reduce_big(&rec.delta, 11), 4);
        assert!(!rec.delta.is_multiple_of(&BigInt::from(11)));
        assert_eq!(frobenius_cycle_type(&rec.g, 17).unwrap(), FrobeniusType::Cycle(vec![5]));
    }
}
