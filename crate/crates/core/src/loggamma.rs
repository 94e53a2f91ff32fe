//! The log-gamma family: `phi_p`, the locally analytic log-gamma and its
//! derivative, Diamond's and Morita's functions, the `R_P` correction term,
//! and the Morita series coefficients.
//!
//! Everything funnels through the Volkenborn engine; the only analytic input
//! is `phi_p(x) = x (log_p(x) - 1) chi(x)`, which vanishes identically on
//! the open unit ball. The convention `chi(x) log_p(x) := 0` whenever
//! `chi(x) = 0` is used throughout: it is what makes the difference equation
//! hold on `pZ_p` (the derivative of the zero branch is zero).

use num_bigint::BigInt;
use num_traits::One;

use crate::context::PadicContext;
use crate::error::{PadicError, Result};
use crate::iwasawa::log_p;
use crate::number::{prec_add, PadicNumber, Valuation};
use crate::volkenborn::{integrate, ConvergencePolicy, IntegralResult};

/// `phi_p(x) = 0` if `|x| < 1`, else `x log_p(x) - x`.
pub fn phi_p(x: &PadicNumber) -> Result<PadicNumber> {
    if !x.chi()? {
        // identically zero on the open unit ball
        return Ok(PadicNumber::exact_zero(x.context()));
    }
    let l = log_p(x)?;
    let one = PadicNumber::from_integer_at(x.context(), 1, x.rel_prec().unwrap_or(1));
    Ok(x * &(&l - &one))
}

/// The locally analytic log-gamma: `int phi_p(x + t) dt`.
pub fn lp(x: &PadicNumber, policy: &ConvergencePolicy) -> Result<IntegralResult> {
    integrate(phi_p, x, policy)
}

/// Derivative of [`lp`]: `int chi(x+t) log_p(x+t) dt`, differentiating under
/// the integral sign. Points with `chi = 1` are automatically nonzero, so
/// the logarithm is always defined; an indeterminate `chi` is an error.
pub fn lp_prime(x: &PadicNumber, policy: &ConvergencePolicy) -> Result<IntegralResult> {
    integrate(
        |y| {
            if y.chi()? {
                log_p(y)
            } else {
                Ok(PadicNumber::exact_zero(y.context()))
            }
        },
        x,
        policy,
    )
}

/// Diamond's log-gamma: the same integrand without `chi`, defined off `Z_p`.
/// Membership in `Z_p` is not decidable from a truncation, so the input must
/// carry a positive certificate of *non*-membership: `v(x) < 0` or a
/// non-zero coordinate above degree 0.
pub fn ld(x: &PadicNumber, policy: &ConvergencePolicy) -> Result<IntegralResult> {
    if !x.certified_not_in_zp() {
        return Err(PadicError::NotCertifiedOutsideZp);
    }
    integrate(
        |y| {
            let l = log_p(y)?;
            let one = PadicNumber::from_integer_at(y.context(), 1, y.rel_prec().unwrap_or(1));
            Ok(y * &(&l - &one))
        },
        x,
        policy,
    )
}

/// Morita's log-gamma on certified `Z_p` members. On `Z_p` the `chi` in the
/// defining integrand coincides with the characteristic function of
/// `Z_p^*`, so this is exactly [`lp`] restricted to `Z_p`; aliasing avoids a
/// second convergence mechanism.
pub fn lm(x: &PadicNumber, policy: &ConvergencePolicy) -> Result<IntegralResult> {
    if !x.certified_in_zp() {
        return Err(PadicError::NotCertifiedInZp);
    }
    lp(x, policy)
}

/// `Gamma_M(n) = (-1)^n prod_{1 <= j < n, p does not divide j} j`, exactly.
pub fn morita_gamma_nat(ctx: &PadicContext, n: u64) -> BigInt {
    assert!(n >= 1, "Gamma_M is defined on positive integers");
    let p = ctx.p();
    let mut prod = BigInt::one();
    for j in 1..n {
        if j % p != 0 {
            prod *= BigInt::from(j);
        }
    }
    if n % 2 == 1 {
        -prod
    } else {
        prod
    }
}

/// Closed form of the correction term:
/// `x - x/p + a/p - ceil(a/p)` when `|x - a| < 1` for an integer `a`
/// (representative taken in `[0, p-1]`, which is safe because the branch
/// value only depends on `a` mod `p`), and `x - 1/2` otherwise.
pub fn rp_closed(x: &PadicNumber) -> Result<PadicNumber> {
    let ctx = x.context();
    let prec = x.rel_prec().unwrap_or_else(|| ctx.rel_prec()).max(2) + 2;
    let near_integer = match x.valuation() {
        Valuation::Known(v) if v < 0 => false,
        // an integer alpha with |x - alpha| < 1 exists iff x is integral
        // with residue in F_p; indeterminate valuations error out here
        _ => x.residue_in_fp()?,
    };
    if near_integer {
        let alpha = x
            .residue()?
            .as_prime_field_integer()
            .expect("branch requires residue in F_p");
        let base = x - &x.mul_pow_p(-1);
        if alpha == 0 {
            Ok(base)
        } else {
            // alpha/p - ceil(alpha/p) = (alpha - p)/p for 1 <= alpha <= p-1
            let c = PadicNumber::from_rational_at(
                ctx,
                &BigInt::from(alpha as i64 - ctx.p() as i64),
                &BigInt::from(ctx.p()),
                prec,
            )?;
            Ok(&base + &c)
        }
    } else {
        let half = PadicNumber::from_rational_at(ctx, &BigInt::from(1), &BigInt::from(2), prec)?;
        Ok(x - &half)
    }
}

/// The same value by its defining Volkenborn integral of `(x+t) chi(x+t)`.
pub fn rp_integral(x: &PadicNumber, policy: &ConvergencePolicy) -> Result<IntegralResult> {
    integrate(
        |y| {
            Ok(if y.chi()? {
                y.clone()
            } else {
                PadicNumber::exact_zero(y.context())
            })
        },
        x,
        policy,
    )
}

/// Is `y` a unit of `Z_p` (valuation exactly 0)? Points of the lambda
/// integrands are naturals, so `v >= 0` always holds there.
fn chi_zp_unit(y: &PadicNumber) -> Result<bool> {
    match y.valuation() {
        Valuation::Known(v) => Ok(v == 0),
        Valuation::AtLeast(a) if a >= 1 => Ok(false),
        Valuation::AtLeast(a) => Err(PadicError::IndeterminateValuation { abs_prec: a }),
    }
}

/// Coefficients of the Morita power series around 0:
/// `lambda_1 = int chi_{Z_p^*}(t) log_p(t) dt`,
/// `lambda_{n+1} = int chi_{Z_p^*}(t) t^{-n} dt`.
///
/// `t = 0` contributes nothing to any entry since `chi_{Z_p^*}(0) = 0`.
pub struct LambdaTable {
    ctx: PadicContext,
    target_prec: i64,
    entries: Vec<IntegralResult>,
}

impl LambdaTable {
    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn target_prec(&self) -> i64 {
        self.target_prec
    }

    /// `lambda_k` for `1 <= k <= depth`.
    pub fn entry(&self, k: usize) -> &IntegralResult {
        &self.entries[k - 1]
    }

    pub fn entries(&self) -> &[IntegralResult] {
        &self.entries
    }
}

/// Build `lambda_1 .. lambda_depth` with the given engine policy; the
/// table certifies series values to `policy.target_prec`.
pub fn lambda_table(
    ctx: &PadicContext,
    depth: usize,
    policy: &ConvergencePolicy,
) -> Result<LambdaTable> {
    if depth < 1 {
        return Err(PadicError::BadPolicy(
            "lambda table needs depth >= 1".to_string(),
        ));
    }
    let origin = PadicNumber::exact_zero(ctx);
    let mut entries = Vec::with_capacity(depth);
    entries.push(integrate(
        |y| {
            if chi_zp_unit(y)? {
                log_p(y)
            } else {
                Ok(PadicNumber::exact_zero(y.context()))
            }
        },
        &origin,
        policy,
    )?);
    for n in 1..depth as i64 {
        entries.push(integrate(
            |y| {
                if chi_zp_unit(y)? {
                    y.pow(-n)
                } else {
                    Ok(PadicNumber::exact_zero(y.context()))
                }
            },
            &origin,
            policy,
        )?);
    }
    Ok(LambdaTable {
        ctx: ctx.clone(),
        target_prec: policy.target_prec,
        entries,
    })
}

/// Default table sizing: depth `2N` for target precision `N`. The tail bound
/// `(n+1) v(x) - v_p(n(n+1)) >= (n+1) - 2 log_p(n+1)` with `v(x) >= 1`
/// makes this comfortably sufficient; it is re-checked at evaluation time.
pub fn lambda_table_default(ctx: &PadicContext, target: i64) -> Result<LambdaTable> {
    let depth = (2 * target).max(4) as usize;
    let policy = ConvergencePolicy::default_for(ctx.p(), target + 2);
    let mut table = lambda_table(ctx, depth, &policy)?;
    table.target_prec = target;
    Ok(table)
}

fn vp_small(p: u64, mut k: i64) -> i64 {
    debug_assert!(k >= 1);
    let mut v = 0;
    while k % p as i64 == 0 {
        k /= p as i64;
        v += 1;
    }
    v
}

/// Certified valuation lower bound for every series term with index `n >= k`
/// at argument valuation `vx >= 1`: exact scan near the cutoff plus the
/// monotone logarithmic bound for the rest.
fn series_tail_bound(p: u64, vx: i64, k: usize) -> i64 {
    let k = k as i64;
    let hi = 4 * k + 8;
    let mut bound = i64::MAX;
    for n in k..=hi {
        bound = bound.min((n + 1) * vx - vp_small(p, n) - vp_small(p, n + 1));
    }
    let lp = (p as f64).ln();
    let analytic = ((hi + 2) as f64 * vx as f64 - 2.0 * ((hi + 2) as f64).ln() / lp).floor() as i64;
    bound.min(analytic)
}

/// Evaluate the Morita series
/// `lambda_1 x + sum_{n>=1} (-1)^{n+1} lambda_{n+1} x^{n+1} / (n (n+1))`
/// on `v(x) >= 1`, to the table's certified target precision.
pub fn lm_series(x: &PadicNumber, table: &LambdaTable) -> Result<PadicNumber> {
    let ctx = x.context();
    assert!(ctx == &table.ctx, "lambda table belongs to another context");
    let vx = match x.valuation() {
        Valuation::Known(v) if v >= 1 => v,
        Valuation::AtLeast(a) if a >= 1 => {
            // |series(x)| <= |x| since every lambda_k is integral
            return Ok(PadicNumber::zero_to_precision(ctx, a));
        }
        v => {
            return Err(PadicError::RegimeMismatch {
                identity: "lm_series",
                requirement: format!("v(x) >= 1, got v = {v}"),
            })
        }
    };
    let k = table.entries.len();
    let tail = series_tail_bound(ctx.p(), vx, k);
    if tail < table.target_prec {
        return Err(PadicError::LambdaTableTooShallow {
            have: k,
            target: table.target_prec,
            bound: tail,
        });
    }
    let lambda1 = &table.entries[0];
    let mut sum = &lambda1.value * x;
    let mut cert = prec_add(lambda1.achieved_prec, vx);
    let mut xpow = x.clone();
    for n in 1..k as i64 {
        xpow = &xpow * x;
        let lam = &table.entries[n as usize];
        let term = (&lam.value * &xpow)
            .div_integer(n)?
            .div_integer(n + 1)?;
        sum = if n % 2 == 1 { &sum + &term } else { &sum - &term };
        cert = cert.min(
            prec_add(lam.achieved_prec, (n + 1) * vx) - vp_small(ctx.p(), n)
                - vp_small(ctx.p(), n + 1),
        );
    }
    Ok(sum.reduce_abs_prec(cert.min(tail)))
}
