//! Independent re-verification of records from their parameters alone.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactalg::integer::{squarefree_integer, FactorBudget, SquarefreeVerdict};
use crate::specialize::{ramification_oracle, specialize_at, Ramification};

use super::scan::{certificate_ok, frobenius_checks, residue_checks, SpecializationRecord};
use super::target::TargetSpec;
use super::SearchContext;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub failures: Vec<String>,
    /// S_0 primes whose status was taken from the record (oracle undetermined).
    pub assumed: Vec<u64>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn verify_record(ctx: &SearchContext, rec: &SpecializationRecord, spec: &TargetSpec) -> VerifyReport {
    let mut out = VerifyReport::default();
    let pf = &ctx.pf;
    let (x, y) = &rec.working_t0;
    let mut fail = |m: String| out.failures.push(m);
    if !x.gcd(y).is_one() {
        fail(format!("({x} : {y}) not coprime"));
    }
    if pf.original_t0(x, y) != rec.t0 {
        fail("original parameter does not match working parameter".into());
    }
    let v = pf.form.evaluate(x, y);
    if v != rec.f_value {
        fail(format!("F-value {v} differs from recorded {}", rec.f_value));
    }
    let (_, cofactor) = pf.s0.split(&v);
    let SquarefreeVerdict::Squarefree(vprimes) = squarefree_integer(&cofactor, FactorBudget::default()) else {
        fail("S0-free part of the F-value not certified squarefree".into());
        return out;
    };
    let g = match specialize_at(&pf.original, &rec.t0.0, &rec.t0.1) {
        Ok(g) => g,
        Err(e) => {
            fail(format!("specialization failed: {e}"));
            return out;
        }
    };
    if g != rec.g {
        fail("specialized polynomial differs".into());
    }
    match specialize_at(&pf.working, x, y) {
        Ok(gw) if gw == g => {}
        _ => fail("working and original specializations differ".into()),
    }
    let mut delta = BigInt::one();
    for p in pf.s0.list() {
        let claimed = rec.primes.iter().find(|s| s.p == p.into()).map(|s| s.ramified);
        match ramification_oracle(&g, p) {
            Ok(Ramification::Ramified) => delta *= p,
            Ok(Ramification::Unramified) => {}
            _ => {
                out.assumed.push(p);
                if claimed == Some(true) {
                    delta *= p;
                }
            }
        }
    }
    for p in vprimes.iter().filter(|p| !pf.s0.contains_big(p)) {
        delta *= BigInt::from(p.clone());
        if let Ok(ps) = u64::try_from(p) {
            if ps < 1 << 63 && ramification_oracle(&g, ps) == Ok(Ramification::Unramified) {
                out.failures.push(format!("oracle contradicts SIT at {p}"));
            }
        }
    }
    if delta != rec.delta.abs() || rec.delta.is_zero() {
        out.failures.push(format!("recomputed δ = {delta}, recorded {}", rec.delta));
    }
    for c in residue_checks(&delta, spec).into_iter().chain(frobenius_checks(&g, spec)) {
        if !c.ok {
            out.failures.push(format!("{} check at {} failed: expected {}, got {}", c.kind, c.p, c.expected, c.observed));
        }
    }
    if !rec.certificate.verify(&g) {
        out.failures.push("group certificate does not re-verify".into());
    }
    if spec.require_certificate && !certificate_ok(pf.original.certificate, pf.original.degree(), &rec.certificate) {
        out.failures.push(format!("certificate {} below the family target", rec.certificate.label()));
    }
    out
}
