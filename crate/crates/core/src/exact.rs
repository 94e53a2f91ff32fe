//! Exact symbolic descriptions of field elements.
//!
//! An [`ExactValue`] is a vector of rational coordinates `c_0..c_{f-1}` in
//! the power basis of the generator `g`. It is the form inputs take before
//! any truncation: samplers produce it, the CLI parses into it, and checks
//! materialize it at whatever working precision the current policy needs.
//! Regime questions (valuation, `Z_p`-membership, residue) are decidable
//! exactly here, with no precision caveats.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::context::PadicContext;
use crate::error::Result;
use crate::number::PadicNumber;

fn vp_int(p: u64, n: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut k = 0;
    let mut t = n.clone();
    while (&t % &pb).is_zero() {
        t /= &pb;
        k += 1;
    }
    k
}

fn vp_rat(p: u64, c: &BigRational) -> Option<i64> {
    if c.is_zero() {
        None
    } else {
        Some(vp_int(p, c.numer()) - vp_int(p, c.denom()))
    }
}

/// Rational coordinates of an element of `Q_p` or `Q_{p^f}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactValue {
    coeffs: Vec<BigRational>,
}

impl ExactValue {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()) == Some(true) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        ExactValue { coeffs }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(vec![BigRational::from_integer(BigInt::from(n))])
    }

    pub fn from_rational(num: i64, den: i64) -> Self {
        assert!(den != 0);
        Self::new(vec![BigRational::new(BigInt::from(num), BigInt::from(den))])
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Exact valuation; `None` for the zero element. In an unramified
    /// extension with power basis this is the minimum coordinate valuation.
    pub fn valuation(&self, p: u64) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| vp_rat(p, c)).min()
    }

    /// Exact membership in `Z_p`: a base-field value with `v >= 0`.
    pub fn in_zp(&self, p: u64) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
            && self.valuation(p).map_or(true, |v| v >= 0)
    }

    /// Exact membership in `W_p`: `v < 0`, or integral with residue outside
    /// the prime field (a degree >= 1 coordinate of valuation 0).
    pub fn in_wp(&self, p: u64) -> bool {
        match self.valuation(p) {
            None => false,
            Some(v) if v < 0 => true,
            Some(_) => self.coeffs[1..].iter().any(|c| vp_rat(p, c) == Some(0)),
        }
    }

    pub fn materialize(&self, ctx: &PadicContext, rel_prec: i64) -> Result<PadicNumber> {
        PadicNumber::from_poly_at(ctx, &self.coeffs, rel_prec)
    }

    // Small exact arithmetic used by samplers and check drivers.

    pub fn add_integer(&self, k: i64) -> ExactValue {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += BigRational::from_integer(BigInt::from(k));
        Self::new(coeffs)
    }

    pub fn neg(&self) -> ExactValue {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn div_integer(&self, n: i64) -> ExactValue {
        assert!(n != 0);
        let d = BigRational::from_integer(BigInt::from(n));
        Self::new(self.coeffs.iter().map(|c| c / &d).collect())
    }
}

impl fmt::Display for ExactValue {
    /// Input-grammar form, e.g. `-7/3 + 2*g`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_rat = |c: &BigRational| -> String {
            if c.denom().is_one() {
                format!("{}", c.numer())
            } else {
                format!("{}/{}", c.numer(), c.denom())
            }
        };
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = fmt_rat(&c.abs());
            let term = match i {
                0 => mag,
                1 => format!("{mag}*g"),
                _ => format!("{mag}*g^{i}"),
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}
