//! The Iwasawa p-adic logarithm.
//!
//! `log_p` is the branch of the logarithm on nonzero elements normalized by
//! `log_p(p) = 0`; it also kills roots of unity. Argument reduction goes
//! through the Teichmueller decomposition `x = p^v * omega * u1` with
//! `u1 = 1 (mod p)`, so only the principal series
//! `log(1 + z) = z - z^2/2 + z^3/3 - ...` is ever evaluated. For `p = 2` one
//! squaring (`log x = log(x^2) / 2`) moves the series argument to
//! `1 (mod 4)`, restoring the usual convergence-rate analysis.

use crate::error::{PadicError, Result};
use crate::number::{PadicNumber, Valuation};

/// `floor(log_p(k))` for `k >= 1`.
fn ilog_p(p: u64, k: i64) -> i64 {
    debug_assert!(k >= 1);
    let mut e = 0;
    let mut t = k as u64;
    while t >= p {
        t /= p;
        e += 1;
    }
    e
}

/// Number of leading series terms whose valuation lower bound
/// `k*vz - floor(log_p k)` stays below `abs`; all later terms vanish
/// modulo `p^abs`. The bound is nondecreasing in `k` since `vz >= 1`.
fn series_terms(p: u64, vz: i64, abs: i64) -> i64 {
    let mut k = 1i64;
    while k * vz - ilog_p(p, k) < abs {
        k += 1;
    }
    k - 1
}

/// `log(1 + z)` for `v(z) >= 1`, truncated so the tail valuation reaches the
/// absolute precision of `z`.
fn log1p(z: &PadicNumber) -> Result<PadicNumber> {
    let ctx = z.context().clone();
    let (vz, abs) = match z.valuation() {
        // z is zero to precision A, so |log(1+z)| <= |z| <= p^-A.
        Valuation::AtLeast(a) => return Ok(PadicNumber::zero_to_precision(&ctx, a)),
        Valuation::Known(v) => (v, z.abs_prec()),
    };
    assert!(vz >= 1, "log1p argument must satisfy v(z) >= 1");
    let terms = series_terms(ctx.p(), vz, abs);
    debug_assert!(terms >= 1);
    let mut sum = z.clone();
    let mut pw = z.clone();
    for k in 2..=terms {
        pw = &pw * z;
        let term = pw.div_integer(k)?;
        sum = if k % 2 == 0 { &sum - &term } else { &sum + &term };
    }
    Ok(sum)
}

/// The Iwasawa logarithm of a certified-nonzero value.
pub fn log_p(x: &PadicNumber) -> Result<PadicNumber> {
    let ctx = x.context().clone();
    let v = match x.valuation() {
        Valuation::AtLeast(a) => return Err(PadicError::LogOfZero { abs_prec: a }),
        Valuation::Known(v) => v,
    };
    let unit = x.mul_pow_p(-v);
    let omega = unit.teichmuller()?;
    let mut u1 = unit.checked_div(&omega)?;
    let halve = ctx.p() == 2;
    if halve {
        u1 = &u1 * &u1;
    }
    let one = PadicNumber::from_integer_at(&ctx, 1, u1.rel_prec().unwrap_or(1));
    let z = &u1 - &one;
    let log = log1p(&z)?;
    if halve {
        log.div_integer(2)
    } else {
        Ok(log)
    }
}
