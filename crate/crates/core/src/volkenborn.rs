//! The Volkenborn integration engine.
//!
//! `S_n = p^{-n} sum_{j < p^n} f(x + j)` is driven to stability with exact
//! precision accounting. The partial sum at depth `n+1` reuses every point
//! already evaluated at depth `n`, so the total work is one evaluation per
//! point of the deepest sum. Stopping uses a double-stability rule: a depth
//! is accepted only when its difference to the previous depth *and* the next
//! difference both reach the target valuation; one stable difference can
//! alias slow convergence. When stability is never reached the engine runs
//! to `n_max` and reports the precision it can actually certify.

use serde::{Deserialize, Serialize};

use crate::error::{PadicError, Result};
use crate::number::{prec_add, PadicNumber};

/// Depth bounds and target precision for one integration run.
///
/// The division by `p^n` costs `n` absolute digits, which is why the working
/// precision carries an `n_max` surcharge on top of the target and guard.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergencePolicy {
    pub n_min: u32,
    pub n_max: u32,
    /// Desired absolute precision `N` of the integral value.
    pub target_prec: i64,
    /// Extra working digits on top of `N + n_max`.
    pub guard: i64,
}

/// Deepest default depth per prime; keeps the worst-case point count near
/// 4096 times the extension cost.
pub fn default_n_max(p: u64) -> u32 {
    match p {
        2 => 12,
        3 => 8,
        5 => 6,
        7 => 5,
        _ => {
            let mut n = 0u32;
            let mut t = 1u128;
            while t * p as u128 <= 16384 {
                t *= p as u128;
                n += 1;
            }
            n.max(3)
        }
    }
}

impl ConvergencePolicy {
    pub fn new(n_min: u32, n_max: u32, target_prec: i64, guard: i64) -> Result<Self> {
        let policy = ConvergencePolicy {
            n_min,
            n_max,
            target_prec,
            guard,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn default_for(p: u64, target_prec: i64) -> Self {
        let n_max = default_n_max(p);
        ConvergencePolicy {
            n_min: 3.min(n_max),
            n_max,
            target_prec,
            guard: 4,
        }
    }

    /// Outer preset for nested integration: fixed depth 4, lowered target.
    /// The cost of nesting is the product of the two point counts.
    pub fn nested_outer(_p: u64) -> Self {
        ConvergencePolicy {
            n_min: 4,
            n_max: 4,
            target_prec: 3,
            guard: 4,
        }
    }

    /// Inner preset: fixed depth 4 with enough working digits that the outer
    /// sums see full-precision integrand values.
    pub fn nested_inner(p: u64) -> Self {
        ConvergencePolicy {
            n_min: 4,
            n_max: 4,
            target_prec: Self::nested_outer(p).working_prec(),
            guard: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(PadicError::BadPolicy(format!(
                "need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.target_prec < 1 {
            return Err(PadicError::BadPolicy(format!(
                "target precision must be >= 1, got {}",
                self.target_prec
            )));
        }
        if self.guard < 0 {
            return Err(PadicError::BadPolicy("guard must be >= 0".to_string()));
        }
        Ok(())
    }

    /// Relative precision at which inputs and integrand values should be
    /// materialized for this policy.
    pub fn working_prec(&self) -> i64 {
        self.target_prec + self.n_max as i64 + self.guard
    }
}

/// Outcome of one integration run.
#[derive(Clone, Debug)]
pub struct IntegralResult {
    /// `S_{n*}`, exact at its stated precision as a finite sum.
    pub value: PadicNumber,
    /// Certified lower bound for how well `value` approximates the integral:
    /// the formal precision of the sum capped by the observed differences at
    /// the stopping depth.
    pub achieved_prec: i64,
    /// The accepted depth `n*`.
    pub depth: u32,
    /// Lower bounds of `v(S_n - S_{n-1})` for every computed `n >= 1`.
    pub trace: Vec<i64>,
}

fn point_budget(p: u64, b: u64, n_max: u32) -> Result<u64> {
    let total = (p as u128)
        .checked_pow(n_max)
        .and_then(|t| t.checked_mul(b as u128))
        .ok_or_else(|| PadicError::BadPolicy("point count overflows".to_string()))?;
    if total > 1 << 40 {
        return Err(PadicError::BadPolicy(format!(
            "point count {total} exceeds the desk-scale budget"
        )));
    }
    Ok(total as u64)
}

/// `lim 1/(b p^n) sum_{j < b p^n} f(x + j)`; the limit exists for locally
/// analytic integrands and is independent of `b`.
pub fn integrate_b<F>(
    mut f: F,
    x: &PadicNumber,
    b: u64,
    policy: &ConvergencePolicy,
) -> Result<IntegralResult>
where
    F: FnMut(&PadicNumber) -> Result<PadicNumber>,
{
    policy.validate()?;
    if b == 0 {
        return Err(PadicError::BadPolicy("b must be >= 1".to_string()));
    }
    let ctx = x.context().clone();
    let p = ctx.p();
    point_budget(p, b, policy.n_max)?;

    let mut running = PadicNumber::exact_zero(&ctx);
    let mut evaluated: u64 = 0;
    let mut s_prev: Option<PadicNumber> = None;
    let mut trace: Vec<i64> = Vec::new();
    let mut chosen: Option<(PadicNumber, u32)> = None;
    // A shift known exactly (the zero of a lambda integrand, say) puts no
    // bound on point precision; the policy's working precision does.
    let exact_shift = x.is_exact_zero();
    let w = policy.working_prec();

    'depths: for depth in 0..=policy.n_max {
        let count = (b as u128 * (p as u128).pow(depth)) as u64;
        for j in evaluated..count {
            let point = if exact_shift && j > 0 {
                PadicNumber::from_integer_with_abs(&ctx, j as i64, w)
            } else {
                x.add_integer(j as i64)
            };
            let val = f(&point).map_err(|e| PadicError::Integrand {
                j,
                source: Box::new(e),
            })?;
            running = &running + &val;
        }
        evaluated = count;
        let s = running.div_integer(count as i64)?;
        if let Some(prev) = &s_prev {
            let n = depth;
            let diff = &s - prev;
            trace.push(diff.valuation().lower_bound());
            if n >= 2 && n - 1 >= policy.n_min {
                let d_prev = trace[(n - 2) as usize];
                let d_curr = trace[(n - 1) as usize];
                if d_prev >= policy.target_prec && d_curr >= policy.target_prec {
                    chosen = Some((prev.clone(), n - 1));
                    break 'depths;
                }
            }
        }
        s_prev = Some(s);
    }

    let (value, depth, achieved_prec) = match chosen {
        Some((v, d)) => {
            let a = v
                .abs_prec()
                .min(trace[(d - 1) as usize])
                .min(trace[d as usize]);
            (v, d, a)
        }
        None => {
            let v = s_prev.expect("depth 0 is always computed");
            let mut a = v.abs_prec();
            if let Some(last) = trace.last() {
                a = a.min(*last);
            }
            (v, policy.n_max, a)
        }
    };
    Ok(IntegralResult {
        value,
        achieved_prec,
        depth,
        trace,
    })
}

/// The Volkenborn integral `int f(x + t) dt` (the `b = 1` case).
pub fn integrate<F>(f: F, x: &PadicNumber, policy: &ConvergencePolicy) -> Result<IntegralResult>
where
    F: FnMut(&PadicNumber) -> Result<PadicNumber>,
{
    integrate_b(f, x, 1, policy)
}

/// `sum_{k=0}^{n-1} f((x + k) / n)` — the left-hand-side shape shared by all
/// the distribution formulas.
pub fn distribution_sum<F>(mut f: F, x: &PadicNumber, n: u64) -> Result<PadicNumber>
where
    F: FnMut(&PadicNumber) -> Result<PadicNumber>,
{
    if n == 0 {
        return Err(PadicError::ZeroDenominator);
    }
    let mut sum = PadicNumber::exact_zero(x.context());
    for k in 0..n {
        let point = x.add_integer(k as i64).div_integer(n as i64)?;
        let val = f(&point).map_err(|e| PadicError::Integrand {
            j: k,
            source: Box::new(e),
        })?;
        sum = &sum + &val;
    }
    Ok(sum)
}

/// A value together with the precision that is actually certified for it.
///
/// Integral values are formally exact finite sums, but only `achieved_prec`
/// digits are certified to approximate the limit; this wrapper propagates
/// that bound through the linear combinations the identity checks build.
#[derive(Clone, Debug)]
pub struct Certified {
    pub value: PadicNumber,
    pub cert: i64,
}

impl Certified {
    pub fn exact(value: PadicNumber) -> Self {
        let cert = value.abs_prec();
        Certified { value, cert }
    }

    pub fn from_integral(r: &IntegralResult) -> Self {
        Certified {
            value: r.value.clone(),
            cert: r.achieved_prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Certified {
            value: &self.value + &other.value,
            cert: self.cert.min(other.cert),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Certified {
            value: &self.value - &other.value,
            cert: self.cert.min(other.cert),
        }
    }

    pub fn neg(&self) -> Self {
        Certified {
            value: -&self.value,
            cert: self.cert,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let va = self.value.valuation().lower_bound();
        let vb = other.value.valuation().lower_bound();
        Certified {
            value: &self.value * &other.value,
            cert: prec_add(self.cert, vb).min(prec_add(other.cert, va)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::PadicContext;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn ctxp(p: u64, rel: i64) -> PadicContext {
        PadicContext::new(p, 1, rel).unwrap()
    }

    #[test]
    fn integral_of_one_is_one() {
        for p in [2u64, 3, 5] {
            let policy = ConvergencePolicy::default_for(p, 6);
            let w = policy.working_prec();
            let ctx = ctxp(p, w);
            let x = PadicNumber::from_integer_at(&ctx, 0, w);
            let one = PadicNumber::from_integer_at(&ctx, 1, w);
            let r = integrate(|_| Ok(one.clone()), &x, &policy).unwrap();
            // exact: every digit the result claims agrees with 1
            let diff = &r.value - &one;
            assert!(diff.is_certified_zero());
            assert!(diff.valuation().lower_bound() >= r.value.abs_prec());
            assert!(r.achieved_prec >= 6);
        }
    }

    #[test]
    fn integral_of_t_is_minus_half() {
        // Oracle: S_n = (p^n - 1)/2 -> -1/2; the finite closed form confirms
        // the frozen expectation before the engine is trusted with it.
        for p in [2u64, 3, 5] {
            let n = 2 * default_n_max(p);
            let pn = BigRational::from_integer(BigInt::from(p).pow(n));
            let closed = (&pn - BigRational::from_integer(BigInt::from(1)))
                / BigRational::from_integer(BigInt::from(2));
            let err = closed + BigRational::new(BigInt::from(1), BigInt::from(2));
            let ctx = ctxp(p, 40);
            let err_p =
                PadicNumber::from_rational_at(&ctx, err.numer(), err.denom(), 40).unwrap();
            assert!(err_p.valuation().lower_bound() >= 6);

            let policy = ConvergencePolicy::default_for(p, 6);
            let w = policy.working_prec();
            let x = PadicNumber::from_integer_at(&ctx, 0, w);
            let r = integrate(|t| Ok(t.clone()), &x, &policy).unwrap();
            let expected =
                PadicNumber::from_rational_at(&ctx, &BigInt::from(-1), &BigInt::from(2), w)
                    .unwrap();
            let resid = &r.value - &expected;
            assert!(
                resid.valuation().lower_bound() >= 6,
                "p = {p}: residual {} trace {:?}",
                resid.valuation(),
                r.trace
            );
        }
    }

    #[test]
    fn integral_of_t_squared_is_sixth() {
        // Oracle: S_n = (p^n - 1)(2 p^n - 1)/6 -> B_2 = 1/6.
        for p in [2u64, 3, 5] {
            let policy = ConvergencePolicy::default_for(p, 6);
            let w = policy.working_prec();
            let ctx = ctxp(p, w);
            let x = PadicNumber::from_integer_at(&ctx, 0, w);
            let r = integrate(|t| Ok(t * t), &x, &policy).unwrap();
            let expected =
                PadicNumber::from_rational_at(&ctx, &BigInt::from(1), &BigInt::from(6), w)
                    .unwrap();
            let resid = &r.value - &expected;
            assert!(
                resid.valuation().lower_bound() >= 6,
                "p = {p}: residual {}",
                resid.valuation()
            );
        }
    }

    #[test]
    fn shifted_chi_integrand_at_one_over_p() {
        // f(t) = (x + t) chi(x + t) at x = 1/p integrates to x - 1/2.
        for p in [2u64, 3, 5] {
            let policy = ConvergencePolicy::default_for(p, 5);
            let w = policy.working_prec();
            let ctx = ctxp(p, w);
            let x =
                PadicNumber::from_rational_at(&ctx, &BigInt::from(1), &BigInt::from(p), w).unwrap();
            let r = integrate(
                |t| {
                    Ok(if t.chi()? {
                        t.clone()
                    } else {
                        PadicNumber::exact_zero(t.context())
                    })
                },
                &x,
                &policy,
            )
            .unwrap();
            let expected = &x
                - &PadicNumber::from_rational_at(&ctx, &BigInt::from(1), &BigInt::from(2), w)
                    .unwrap();
            let resid = &r.value - &expected;
            assert!(resid.valuation().lower_bound() >= 5, "p = {p}");
        }
    }

    #[test]
    fn b_independence() {
        let p = 2u64;
        let policy = ConvergencePolicy::default_for(p, 6);
        let w = policy.working_prec();
        let ctx = ctxp(p, w);
        let x = PadicNumber::from_integer_at(&ctx, 0, w);
        let r1 = integrate_b(|t| Ok(t.clone()), &x, 1, &policy).unwrap();
        for b in [2u64, 3] {
            let rb = integrate_b(|t| Ok(t.clone()), &x, b, &policy).unwrap();
            let resid = &rb.value - &r1.value;
            assert!(
                resid.valuation().lower_bound() >= r1.achieved_prec.min(rb.achieved_prec),
                "b = {b}"
            );
        }
    }

    #[test]
    fn splitting_identity() {
        // int f = (1/M) sum_{k<M} int f(k + M t) dt.
        for (p, m) in [(3u64, 2i64), (5, 3), (2, 3)] {
            let policy = ConvergencePolicy::default_for(p, 5);
            let w = policy.working_prec();
            let ctx = ctxp(p, w);
            let zero = PadicNumber::from_integer_at(&ctx, 0, w);
            let f = |t: &PadicNumber| Ok(t * t);
            let whole = integrate(f, &zero, &policy).unwrap();
            let mut acc = PadicNumber::exact_zero(&ctx);
            let mm = PadicNumber::from_integer_at(&ctx, m, w);
            for k in 0..m {
                let kk = PadicNumber::from_integer_at(&ctx, k, w);
                let part = integrate(
                    |t| {
                        let arg = &kk + &(&mm * t);
                        Ok(&arg * &arg)
                    },
                    &zero,
                    &policy,
                )
                .unwrap();
                acc = &acc + &part.value;
            }
            let rhs = acc.div_integer(m).unwrap();
            let resid = &whole.value - &rhs;
            assert!(
                resid.valuation().lower_bound() >= whole.achieved_prec.min(5),
                "p = {p}, M = {m}, residual {}",
                resid.valuation()
            );
        }
    }

    #[test]
    fn difference_equation_for_t_squared() {
        // F(x) = int (x+t)^2 dt satisfies F(x+1) - F(x) = 2x.
        let p = 3u64;
        let policy = ConvergencePolicy::default_for(p, 5);
        let w = policy.working_prec();
        let ctx = ctxp(p, w);
        for xr in [(2i64, 1i64), (1, 3), (7, 2)] {
            let x =
                PadicNumber::from_rational_at(&ctx, &BigInt::from(xr.0), &BigInt::from(xr.1), w)
                    .unwrap();
            let f = |t: &PadicNumber| Ok(t * t);
            let fx = integrate(f, &x, &policy).unwrap();
            let fx1 = integrate(f, &x.add_integer(1), &policy).unwrap();
            let lhs = &fx1.value - &fx.value;
            let rhs = &x + &x;
            let resid = &lhs - &rhs;
            assert!(
                resid.valuation().lower_bound() >= 5,
                "x = {}/{}: {}",
                xr.0,
                xr.1,
                resid.valuation()
            );
        }
    }

    #[test]
    fn chunked_summation_is_bit_identical() {
        // Exact addition is associative after normalization, so partitioning
        // the j-range across workers cannot change the result.
        let p = 3u64;
        let ctx = ctxp(p, 12);
        let x = PadicNumber::from_rational_at(&ctx, &BigInt::from(1), &BigInt::from(2), 12)
            .unwrap();
        let points: Vec<PadicNumber> = (0..81).map(|j| x.add_integer(j)).collect();
        let serial = points
            .iter()
            .fold(PadicNumber::exact_zero(&ctx), |acc, t| &acc + &(t * t));
        let chunked = points
            .chunks(17)
            .map(|c| {
                c.iter()
                    .fold(PadicNumber::exact_zero(&ctx), |acc, t| &acc + &(t * t))
            })
            .fold(PadicNumber::exact_zero(&ctx), |acc, s| &acc + &s);
        assert_eq!(serial, chunked);
    }

    #[test]
    fn distribution_sum_examples() {
        let ctx = ctxp(2, 12);
        let x = PadicNumber::from_integer(&ctx, 5);
        // n = 1 reduces to f(x)
        let r = distribution_sum(|t| Ok(t.clone()), &x, 1).unwrap();
        assert_eq!(r, x);
        // identity, n = 2, x = 0: 0/2 + 1/2 = 1/2
        let zero = PadicNumber::from_integer(&ctx, 0);
        let r = distribution_sum(|t| Ok(t.clone()), &zero, 2).unwrap();
        let half = PadicNumber::from_rational(&ctx, 1, 2).unwrap();
        assert!((&r - &half).valuation().lower_bound() >= 10);
        // chi over quarters of x = 1: all four points have v <= 0
        let one = PadicNumber::from_integer(&ctx, 1);
        let r = distribution_sum(
            |t| {
                Ok(if t.chi()? {
                    PadicNumber::from_integer(t.context(), 1)
                } else {
                    PadicNumber::exact_zero(t.context())
                })
            },
            &one,
            4,
        )
        .unwrap();
        let four = PadicNumber::from_integer(&ctx, 4);
        assert!((&r - &four).valuation().lower_bound() >= 10);
    }

    #[test]
    fn reports_honest_precision_when_stability_is_out_of_reach() {
        // With target 6 at p = 5 the stable pair would need depth 7 > n_max,
        // so the engine must fall back to n_max and say what it got.
        let p = 5u64;
        let policy = ConvergencePolicy::default_for(p, 6);
        let w = policy.working_prec();
        let ctx = ctxp(p, w);
        let x = PadicNumber::from_integer_at(&ctx, 0, w);
        let r = integrate(|t| Ok(t.clone()), &x, &policy).unwrap();
        assert_eq!(r.depth, policy.n_max);
        assert_eq!(r.achieved_prec, 5); // v(S_6 - S_5) = 5
        // ... even though the value itself happens to be one digit better.
        let expected = PadicNumber::from_rational_at(&ctx, &BigInt::from(-1), &BigInt::from(2), w)
            .unwrap();
        assert!((&r.value - &expected).valuation().lower_bound() >= 6);
    }
}
