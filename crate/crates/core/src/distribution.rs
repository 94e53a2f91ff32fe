//! The shift-sequence construction and the two sides of the distribution
//! formula.
//!
//! For `n = m p^r` with `p` coprime to `m`, the orbit `x_0 = x`,
//! `x_{j+1} = (x_j + p - l(x_j)) / p` continues while `x_j` is integral with
//! residue in the prime field, and is truncated at length
//! `omega + 1 <= r + 1`. The formula then reads
//!
//! `sum_{k<n} LG_p((x+k)/n) = sum_j LG_p(x_j) - log_p(n) sum_j R_P(x_j)`.
//!
//! In an unramified extension a continue-step always lands back in the ring
//! of integers (`v(x_j - l(x_j)) >= 1` forces `v(x_{j+1}) >= 0`), so the
//! orbit can only leave the integral ring at `j = 0`.

use serde::Serialize;

use crate::context::PadicContext;
use crate::error::{PadicError, Result};
use crate::iwasawa::log_p;
use crate::loggamma::{lp, rp_closed};
use crate::number::PadicNumber;
use crate::volkenborn::{Certified, ConvergencePolicy};

/// Split `n = m p^r` with `p` not dividing `m`.
pub fn factor_n(ctx: &PadicContext, n: u64) -> (u64, u32) {
    assert!(n >= 1, "n must be a positive integer");
    let p = ctx.p();
    let mut m = n;
    let mut r = 0u32;
    while m % p == 0 {
        m /= p;
        r += 1;
    }
    (m, r)
}

/// Why the orbit stopped. The three conditions are mutually exclusive:
/// `r-exhausted` means `s > r` (the orbit was still continuable), while the
/// other two describe which `W_p` condition the final element satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    RExhausted,
    LeftIntegralRing,
    ResidueLeftFp,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::RExhausted => "r-exhausted",
            StopReason::LeftIntegralRing => "left-integral-ring",
            StopReason::ResidueLeftFp => "residue-left-Fp",
        }
    }
}

/// The orbit `x_0, ..., x_omega` with its bookkeeping.
#[derive(Clone, Debug)]
pub struct ShiftSequence {
    /// `x_0 .. x_omega`; length `omega + 1`.
    pub terms: Vec<PadicNumber>,
    /// `l(x_j)` for every step that continued (`j < omega`).
    pub ells: Vec<u64>,
    pub m: u64,
    pub r: u32,
    pub omega: u32,
    pub stop_reason: StopReason,
}

/// Build the orbit for `x` and `n`. Errors report the first step whose
/// regime (valuation or residue) the available precision cannot decide.
pub fn build_sequence(x: &PadicNumber, n: u64) -> Result<ShiftSequence> {
    let ctx = x.context();
    let (m, r) = factor_n(ctx, n);
    let mut terms = vec![x.clone()];
    let mut ells = Vec::new();
    let stop_reason;
    let mut step = 0u32;
    loop {
        let cur = terms.last().unwrap();
        let in_wp = cur
            .in_wp()
            .map_err(|_| PadicError::IndeterminateSequenceStep {
                step: step as usize,
            })?;
        if in_wp {
            let v = cur
                .valuation()
                .known()
                .expect("W_p members have a known valuation");
            stop_reason = if v < 0 {
                StopReason::LeftIntegralRing
            } else {
                StopReason::ResidueLeftFp
            };
            break;
        }
        if step == r {
            stop_reason = StopReason::RExhausted;
            break;
        }
        let l = cur.ell().map_err(|e| match e {
            PadicError::IndeterminateValuation { .. } => PadicError::IndeterminateSequenceStep {
                step: step as usize,
            },
            other => other,
        })?;
        ells.push(l);
        let next = cur.dwork_shift()?;
        terms.push(next);
        step += 1;
    }
    let omega = (terms.len() - 1) as u32;
    debug_assert!(omega <= r);
    Ok(ShiftSequence {
        terms,
        ells,
        m,
        r,
        omega,
        stop_reason,
    })
}

/// Left side: `sum_{k<n} LG_p((x+k)/n)`, with the certification of each
/// integral propagated into the sum and every convergence trace kept.
pub fn dist_lhs_traced(
    x: &PadicNumber,
    n: u64,
    policy: &ConvergencePolicy,
) -> Result<(Certified, Vec<Vec<i64>>)> {
    if n == 0 {
        return Err(PadicError::ZeroDenominator);
    }
    let mut acc = Certified::exact(PadicNumber::exact_zero(x.context()));
    let mut traces = Vec::with_capacity(n as usize);
    for k in 0..n {
        let arg = x.add_integer(k as i64).div_integer(n as i64)?;
        let r = lp(&arg, policy)?;
        acc = acc.add(&Certified::from_integral(&r));
        traces.push(r.trace);
    }
    Ok((acc, traces))
}

/// Left side: `sum_{k<n} LG_p((x+k)/n)`.
pub fn dist_lhs(x: &PadicNumber, n: u64, policy: &ConvergencePolicy) -> Result<Certified> {
    Ok(dist_lhs_traced(x, n, policy)?.0)
}

/// Right side over an already-built orbit:
/// `sum_j LG_p(x_j) - log_p(n) sum_j R_P(x_j)`, with traces.
///
/// `log_p(n)` comes from the Iwasawa logarithm itself, never from a table;
/// the normalization `log_p(p) = 0` makes it equal `log_p(m)`.
pub fn dist_rhs_traced(
    seq: &ShiftSequence,
    n: u64,
    policy: &ConvergencePolicy,
) -> Result<(Certified, Vec<Vec<i64>>)> {
    let ctx = seq.terms[0].context();
    let w = policy.working_prec();
    let mut sum_lp = Certified::exact(PadicNumber::exact_zero(ctx));
    let mut sum_rp = Certified::exact(PadicNumber::exact_zero(ctx));
    let mut traces = Vec::with_capacity(seq.terms.len());
    for xj in &seq.terms {
        let r = lp(xj, policy)?;
        sum_lp = sum_lp.add(&Certified::from_integral(&r));
        traces.push(r.trace);
        sum_rp = sum_rp.add(&Certified::exact(rp_closed(xj)?));
    }
    let n_p = PadicNumber::from_integer_at(ctx, n as i64, w);
    let logn = Certified::exact(log_p(&n_p)?);
    Ok((sum_lp.sub(&logn.mul(&sum_rp)), traces))
}

/// Right side over an already-built orbit.
pub fn dist_rhs_from_sequence(
    seq: &ShiftSequence,
    n: u64,
    policy: &ConvergencePolicy,
) -> Result<Certified> {
    Ok(dist_rhs_traced(seq, n, policy)?.0)
}

/// Right side of the distribution formula for `x` and `n`.
pub fn dist_rhs(x: &PadicNumber, n: u64, policy: &ConvergencePolicy) -> Result<Certified> {
    let seq = build_sequence(x, n)?;
    dist_rhs_from_sequence(&seq, n, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn factorization_examples() {
        let c2 = PadicContext::new(2, 1, 8).unwrap();
        assert_eq!(factor_n(&c2, 12), (3, 2));
        let c3 = PadicContext::new(3, 1, 8).unwrap();
        assert_eq!(factor_n(&c3, 7), (7, 0));
        let c5 = PadicContext::new(5, 1, 8).unwrap();
        assert_eq!(factor_n(&c5, 25), (1, 2));
    }

    #[test]
    fn orbit_of_one_is_a_fixed_point() {
        // l(1) = 1 gives x' = (1 + 2 - 1)/2 = 1.
        let ctx = PadicContext::new(2, 1, 16).unwrap();
        let one = PadicNumber::from_integer(&ctx, 1);
        let seq = build_sequence(&one, 4).unwrap();
        assert_eq!(seq.omega, 2);
        assert_eq!(seq.terms.len(), 3);
        assert_eq!(seq.stop_reason, StopReason::RExhausted);
        assert_eq!(seq.ells, vec![1, 1]);
        for t in &seq.terms {
            assert!((t - &one).valuation().lower_bound() >= 14);
        }
    }

    #[test]
    fn orbit_stops_immediately_off_the_prime_field() {
        let ctx = PadicContext::new(3, 2, 12).unwrap();
        let g = PadicNumber::from_poly(&ctx, &[rat(0, 1), rat(1, 1)]).unwrap();
        let seq = build_sequence(&g, 9).unwrap();
        assert_eq!(seq.omega, 0);
        assert_eq!(seq.stop_reason, StopReason::ResidueLeftFp);
        assert_eq!((seq.m, seq.r), (1, 2));
    }

    #[test]
    fn orbit_stops_immediately_outside_the_integral_ring() {
        let ctx = PadicContext::new(3, 1, 12).unwrap();
        let x = PadicNumber::from_rational(&ctx, 1, 3).unwrap();
        let seq = build_sequence(&x, 3).unwrap();
        assert_eq!(seq.omega, 0);
        assert_eq!(seq.stop_reason, StopReason::LeftIntegralRing);
    }

    #[test]
    fn orbit_with_r_zero_has_length_one() {
        let ctx = PadicContext::new(5, 1, 12).unwrap();
        let x = PadicNumber::from_integer(&ctx, 2);
        let seq = build_sequence(&x, 7).unwrap();
        assert_eq!(seq.omega, 0);
        assert_eq!(seq.stop_reason, StopReason::RExhausted);
        assert_eq!((seq.m, seq.r), (7, 0));
    }

    #[test]
    fn recurrence_is_exact_along_the_orbit() {
        let ctx = PadicContext::new(3, 1, 20).unwrap();
        for (a, b, n) in [(7i64, 1i64, 9u64), (5, 2, 27), (22, 7, 9), (4, 1, 18)] {
            let x = PadicNumber::from_rational(&ctx, a, b).unwrap();
            let seq = build_sequence(&x, n).unwrap();
            assert!(seq.omega <= seq.r);
            assert_eq!(seq.ells.len(), seq.omega as usize);
            for j in 0..seq.omega as usize {
                let l = seq.ells[j];
                let rebuilt = seq.terms[j]
                    .add_integer(3 - l as i64)
                    .mul_pow_p(-1);
                let d = &rebuilt - &seq.terms[j + 1];
                assert!(d.is_certified_zero(), "step {j} of x = {a}/{b}");
            }
        }
    }

    #[test]
    fn worked_distribution_case_both_sides_vanish() {
        // p = 2, x = 1, n = 4: reflection pairs the quarter points and the
        // orbit is three copies of the fixed point 1 with R_P(1) = 0.
        let p = 2u64;
        let policy = ConvergencePolicy::default_for(p, 5);
        let w = policy.working_prec();
        let ctx = PadicContext::new(p, 1, w).unwrap();
        let one = PadicNumber::from_integer_at(&ctx, 1, w);
        let lhs = dist_lhs(&one, 4, &policy).unwrap();
        let rhs = dist_rhs(&one, 4, &policy).unwrap();
        assert!(
            lhs.value.valuation().lower_bound() >= 5,
            "lhs = {}",
            lhs.value
        );
        assert!(
            rhs.value.valuation().lower_bound() >= 5,
            "rhs = {}",
            rhs.value
        );
    }

    #[test]
    fn distribution_formula_spot_check() {
        // x = 1/3, n = 6 at p = 3: a genuinely mixed case (m = 2, r = 1).
        let p = 3u64;
        let policy = ConvergencePolicy::default_for(p, 4);
        let w = policy.working_prec();
        let ctx = PadicContext::new(p, 1, w).unwrap();
        let x = PadicNumber::from_rational_at(&ctx, &BigInt::from(1), &BigInt::from(3), w)
            .unwrap();
        let lhs = dist_lhs(&x, 6, &policy).unwrap();
        let rhs = dist_rhs(&x, 6, &policy).unwrap();
        let resid = &lhs.value - &rhs.value;
        assert!(
            resid.valuation().lower_bound() >= lhs.cert.min(rhs.cert).min(4),
            "residual {} certs {} {}",
            resid.valuation(),
            lhs.cert,
            rhs.cert
        );
    }
}
