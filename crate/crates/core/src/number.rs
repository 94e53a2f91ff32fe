//! Elements of `Q_p` and its unramified extensions with exact truncated
//! arithmetic.
//!
//! A non-zero value is stored as `p^val * unit(g)` where `unit` is a
//! polynomial of degree `< f` whose coefficients are known modulo
//! `p^rel_prec` and at least one coefficient is a `p`-adic unit. The value is
//! therefore known modulo `p^(val + rel_prec)`. Values that cancelled to
//! nothing are kept as a first-class "zero to absolute precision A" state;
//! operations either propagate that precision or refuse with an
//! indeterminacy error, never guess.
//!
//! Multiplication and division preserve relative precision; addition and
//! subtraction hold to the minimum absolute precision of the operands, with
//! cancellation extracting valuation and shrinking the surviving digits.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::context::PadicContext;
use crate::error::{PadicError, Result};

/// Sentinel for "known exactly" (e.g. the zero produced by `x - x` on exact
/// inputs, or the constant zero integrand value). All finite precisions stay
/// far below this.
pub const EXACT_PREC: i64 = i64::MAX / 4;

/// Saturating precision addition so exact values stay exact.
pub(crate) fn prec_add(a: i64, b: i64) -> i64 {
    if a >= EXACT_PREC || b >= EXACT_PREC {
        EXACT_PREC
    } else {
        (a + b).min(EXACT_PREC)
    }
}

/// Valuation of a value that may only be known to be zero to some precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Known(i64),
    /// The value is indistinguishable from zero; only `v >= bound` is
    /// certified.
    AtLeast(i64),
}

impl Valuation {
    pub fn lower_bound(&self) -> i64 {
        match self {
            Valuation::Known(v) | Valuation::AtLeast(v) => *v,
        }
    }

    pub fn known(&self) -> Option<i64> {
        match self {
            Valuation::Known(v) => Some(*v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Known(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Zero { abs: i64 },
    NonZero { val: i64, rel: i64, unit: Vec<BigUint> },
}

/// An element of `Q_p` or `Q_{p^f}`, known to finite precision.
#[derive(Clone)]
pub struct PadicNumber {
    ctx: PadicContext,
    repr: Repr,
}

impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.repr == other.repr
    }
}
impl Eq for PadicNumber {}

// ---- low-level coefficient arithmetic --------------------------------------

pub(crate) fn vp_biguint(p: u64, c: &BigUint, cap: i64) -> i64 {
    debug_assert!(!c.is_zero());
    let pb = BigUint::from(p);
    let mut k = 0i64;
    let mut t = c.clone();
    while k < cap {
        let (q, r) = t.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        t = q;
        k += 1;
    }
    k
}

fn vp_bigint(p: u64, c: &BigInt) -> i64 {
    debug_assert!(!c.is_zero());
    let pb = BigInt::from(p);
    let mut k = 0i64;
    let mut t = c.clone();
    loop {
        let (q, r) = t.div_rem(&pb);
        if !r.is_zero() {
            return k;
        }
        t = q;
        k += 1;
    }
}

fn int_mod_pk(c: i64, pk: &BigUint) -> BigUint {
    let m = BigInt::from(c).mod_floor(&BigInt::from(pk.clone()));
    m.to_biguint().expect("mod_floor is non-negative")
}

fn bigint_mod_pk(c: &BigInt, pk: &BigUint) -> BigUint {
    let m = c.mod_floor(&BigInt::from(pk.clone()));
    m.to_biguint().expect("mod_floor is non-negative")
}

/// Inverse of an integer coprime to `p` modulo `p^k`.
fn invert_scalar(c: &BigUint, pk: &BigUint) -> BigUint {
    let e = BigInt::from(c.clone()).extended_gcd(&BigInt::from(pk.clone()));
    debug_assert!(e.gcd.is_one(), "scalar must be a unit");
    bigint_mod_pk(&e.x, pk)
}

/// Product of two coefficient vectors modulo the context modulus and `p^prec`.
pub(crate) fn poly_mul(ctx: &PadicContext, a: &[BigUint], b: &[BigUint], prec: i64) -> Vec<BigUint> {
    let f = ctx.degree();
    let pk = ctx.pow_p(prec);
    if f == 1 {
        return vec![(&a[0] * &b[0]) % &pk];
    }
    let mut prod = vec![BigUint::zero(); 2 * f - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            prod[i + j] += ai * bj;
        }
    }
    let fold: Vec<BigUint> = ctx
        .modulus_tail()
        .iter()
        .map(|&c| int_mod_pk(-c, &pk))
        .collect();
    for d in (f..2 * f - 1).rev() {
        let c = std::mem::take(&mut prod[d]);
        if c.is_zero() {
            continue;
        }
        for (i, fi) in fold.iter().enumerate() {
            if !fi.is_zero() {
                prod[d - f + i] += &c * fi;
            }
        }
    }
    prod.truncate(f);
    for c in &mut prod {
        *c %= &pk;
    }
    prod
}

/// Unit inversion modulo `(modulus, p^prec)` by Newton lifting of the
/// residue-field inverse. `None` if the residue is zero.
pub(crate) fn poly_inv(ctx: &PadicContext, a: &[BigUint], prec: i64) -> Option<Vec<BigUint>> {
    let p = ctx.p();
    let residue: Vec<u64> = a
        .iter()
        .map(|c| (c % BigUint::from(p)).to_u64().unwrap())
        .collect();
    let seed = ctx.fq_inv(&residue)?;
    let mut y: Vec<BigUint> = seed.into_iter().map(BigUint::from).collect();
    let mut digits = 1i64;
    while digits < prec {
        digits = (digits * 2).min(prec);
        let pk = ctx.pow_p(digits);
        let ay = poly_mul(ctx, a, &y, digits);
        // t = 2 - a*y
        let mut t: Vec<BigUint> = ay
            .iter()
            .map(|c| (&pk - (c % &pk)) % &pk)
            .collect();
        t[0] = (&t[0] + 2u32) % &pk;
        y = poly_mul(ctx, &y, &t, digits);
    }
    Some(y)
}

fn normalize(ctx: &PadicContext, base_val: i64, mut coeffs: Vec<BigUint>, known_rel: i64) -> Repr {
    if known_rel <= 0 {
        return Repr::Zero {
            abs: prec_add(base_val, known_rel),
        };
    }
    let pk = ctx.pow_p(known_rel);
    for c in &mut coeffs {
        *c %= &pk;
    }
    let mut shift = known_rel;
    for c in &coeffs {
        if !c.is_zero() {
            shift = shift.min(vp_biguint(ctx.p(), c, known_rel));
        }
    }
    if shift >= known_rel {
        return Repr::Zero {
            abs: prec_add(base_val, known_rel),
        };
    }
    if shift > 0 {
        let pe = ctx.pow_p(shift);
        for c in &mut coeffs {
            *c /= &pe;
        }
    }
    Repr::NonZero {
        val: base_val + shift,
        rel: known_rel - shift,
        unit: coeffs,
    }
}

// ---- construction -----------------------------------------------------------

impl PadicNumber {
    /// Zero known exactly.
    pub fn exact_zero(ctx: &PadicContext) -> Self {
        PadicNumber {
            ctx: ctx.clone(),
            repr: Repr::Zero { abs: EXACT_PREC },
        }
    }

    /// Zero certified only modulo `p^abs_prec`.
    pub fn zero_to_precision(ctx: &PadicContext, abs_prec: i64) -> Self {
        PadicNumber {
            ctx: ctx.clone(),
            repr: Repr::Zero { abs: abs_prec },
        }
    }

    pub fn one(ctx: &PadicContext) -> Self {
        Self::from_integer(ctx, 1)
    }

    pub fn from_integer(ctx: &PadicContext, n: i64) -> Self {
        Self::from_bigint_at(ctx, &BigInt::from(n), ctx.rel_prec())
    }

    pub fn from_integer_at(ctx: &PadicContext, n: i64, rel_prec: i64) -> Self {
        Self::from_bigint_at(ctx, &BigInt::from(n), rel_prec)
    }

    /// An exact integer carried with at least `abs` absolute digits.
    pub fn from_integer_with_abs(ctx: &PadicContext, n: i64, abs: i64) -> Self {
        if n == 0 {
            return Self::zero_to_precision(ctx, abs.max(1));
        }
        let rel = (abs - vp_bigint(ctx.p(), &BigInt::from(n))).max(1);
        Self::from_bigint_at(ctx, &BigInt::from(n), rel)
    }

    pub fn from_bigint_at(ctx: &PadicContext, n: &BigInt, rel_prec: i64) -> Self {
        if n.is_zero() {
            return Self::exact_zero(ctx);
        }
        let rel = rel_prec.max(1);
        let val = vp_bigint(ctx.p(), n);
        let unit_int = n / BigInt::from(ctx.pow_p(val));
        let pk = ctx.pow_p(rel);
        let mut unit = vec![BigUint::zero(); ctx.degree()];
        unit[0] = bigint_mod_pk(&unit_int, &pk);
        PadicNumber {
            ctx: ctx.clone(),
            repr: Repr::NonZero { val, rel, unit },
        }
    }

    /// `a / b` at the context's default relative precision.
    pub fn from_rational(ctx: &PadicContext, a: i64, b: i64) -> Result<Self> {
        Self::from_rational_at(ctx, &BigInt::from(a), &BigInt::from(b), ctx.rel_prec())
    }

    pub fn from_rational_at(
        ctx: &PadicContext,
        num: &BigInt,
        den: &BigInt,
        rel_prec: i64,
    ) -> Result<Self> {
        if den.is_zero() {
            return Err(PadicError::ZeroDenominator);
        }
        let coeff = BigRational::new(num.clone(), den.clone());
        Self::from_poly_at(ctx, &[coeff], rel_prec)
    }

    /// Materialize `sum c_i g^i` from exact rational coefficients.
    pub fn from_poly(ctx: &PadicContext, coeffs: &[BigRational]) -> Result<Self> {
        Self::from_poly_at(ctx, coeffs, ctx.rel_prec())
    }

    pub fn from_poly_at(ctx: &PadicContext, coeffs: &[BigRational], rel_prec: i64) -> Result<Self> {
        let f = ctx.degree();
        if coeffs.len() > f {
            return Err(PadicError::UnsupportedDegree(coeffs.len()));
        }
        if rel_prec < 1 {
            return Err(PadicError::BadPrecision(rel_prec));
        }
        let p = ctx.p();
        // valuation of each coordinate; the basis 1, g, .., g^(f-1) is
        // orthonormal in an unramified extension, so v(x) = min_i v(c_i).
        let mut vals = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            if c.is_zero() {
                vals.push(None);
            } else {
                vals.push(Some(vp_bigint(p, c.numer()) - vp_bigint(p, c.denom())));
            }
        }
        let base = match vals.iter().flatten().min() {
            Some(&v) => v,
            None => return Ok(Self::exact_zero(ctx)),
        };
        let pk = ctx.pow_p(rel_prec);
        let mut unit = vec![BigUint::zero(); f];
        for (i, c) in coeffs.iter().enumerate() {
            let Some(v) = vals[i] else { continue };
            let shift = v - base;
            if shift >= rel_prec {
                continue;
            }
            let num_unit = c.numer() / BigInt::from(ctx.pow_p(vp_bigint(p, c.numer())));
            let den_unit = c.denom() / BigInt::from(ctx.pow_p(vp_bigint(p, c.denom())));
            let den_inv = invert_scalar(&bigint_mod_pk(&den_unit, &pk), &pk);
            let mut u = (bigint_mod_pk(&num_unit, &pk) * den_inv) % &pk;
            if shift > 0 {
                u = (u * ctx.pow_p(shift)) % &pk;
            }
            unit[i] = u;
        }
        Ok(PadicNumber {
            ctx: ctx.clone(),
            repr: Repr::NonZero {
                val: base,
                rel: rel_prec,
                unit,
            },
        })
    }
}

// ---- queries ----------------------------------------------------------------

impl PadicNumber {
    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero { abs } => Valuation::AtLeast(*abs),
            Repr::NonZero { val, .. } => Valuation::Known(*val),
        }
    }

    /// The value is known modulo `p^abs_prec()`.
    pub fn abs_prec(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::NonZero { val, rel, .. } => prec_add(*val, *rel),
        }
    }

    pub fn rel_prec(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::NonZero { rel, .. } => Some(*rel),
        }
    }

    /// True when the value cancelled below its precision (the `zero_flag`
    /// state). The value may still be a tiny non-zero number.
    pub fn is_certified_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs } if abs >= EXACT_PREC)
    }

    /// Unit-part coefficients, reduced modulo `p^rel_prec`. `None` for zeros.
    pub fn unit_coefficients(&self) -> Option<&[BigUint]> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::NonZero { unit, .. } => Some(unit),
        }
    }

    /// Weaken the precision claim to `new_abs` absolute digits.
    pub fn reduce_abs_prec(&self, new_abs: i64) -> PadicNumber {
        match &self.repr {
            Repr::Zero { abs } => Self::zero_to_precision(&self.ctx, (*abs).min(new_abs)),
            Repr::NonZero { val, rel, unit } => {
                if new_abs >= prec_add(*val, *rel) {
                    return self.clone();
                }
                let new_rel = new_abs - val;
                if new_rel <= 0 {
                    return Self::zero_to_precision(&self.ctx, new_abs);
                }
                let pk = self.ctx.pow_p(new_rel);
                let unit = unit.iter().map(|c| c % &pk).collect();
                PadicNumber {
                    ctx: self.ctx.clone(),
                    repr: Repr::NonZero {
                        val: *val,
                        rel: new_rel,
                        unit,
                    },
                }
            }
        }
    }
}

// ---- ring operations ----------------------------------------------------------

impl PadicNumber {
    fn assert_same_context(&self, other: &Self) {
        assert!(
            self.ctx == other.ctx,
            "p-adic values from different contexts"
        );
    }

    pub fn add(&self, other: &Self) -> PadicNumber {
        self.assert_same_context(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Repr::Zero { abs: (*a).min(*b) },
            (Repr::Zero { abs }, Repr::NonZero { val, rel, unit })
            | (Repr::NonZero { val, rel, unit }, Repr::Zero { abs }) => {
                let known = (*abs).min(prec_add(*val, *rel));
                if known <= *val {
                    Repr::Zero { abs: known }
                } else {
                    let new_rel = known - val;
                    let pk = self.ctx.pow_p(new_rel);
                    Repr::NonZero {
                        val: *val,
                        rel: new_rel,
                        unit: unit.iter().map(|c| c % &pk).collect(),
                    }
                }
            }
            (
                Repr::NonZero {
                    val: v1,
                    rel: r1,
                    unit: u1,
                },
                Repr::NonZero {
                    val: v2,
                    rel: r2,
                    unit: u2,
                },
            ) => {
                let base = (*v1).min(*v2);
                let known = prec_add(*v1, *r1).min(prec_add(*v2, *r2)) - base;
                if known <= 0 {
                    Repr::Zero { abs: base + known }
                } else {
                    let pk = self.ctx.pow_p(known);
                    let mut coeffs = vec![BigUint::zero(); self.ctx.degree()];
                    for (shift, unit) in [(v1 - base, u1), (v2 - base, u2)] {
                        if shift >= known {
                            continue;
                        }
                        let scale = self.ctx.pow_p(shift);
                        for (c, u) in coeffs.iter_mut().zip(unit.iter()) {
                            *c += (u * &scale) % &pk;
                        }
                    }
                    normalize(&self.ctx, base, coeffs, known)
                }
            }
        };
        PadicNumber {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    pub fn neg(&self) -> PadicNumber {
        let repr = match &self.repr {
            Repr::Zero { abs } => Repr::Zero { abs: *abs },
            Repr::NonZero { val, rel, unit } => {
                let pk = self.ctx.pow_p(*rel);
                Repr::NonZero {
                    val: *val,
                    rel: *rel,
                    unit: unit.iter().map(|c| (&pk - (c % &pk)) % &pk).collect(),
                }
            }
        };
        PadicNumber {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    pub fn sub(&self, other: &Self) -> PadicNumber {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> PadicNumber {
        self.assert_same_context(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Repr::Zero {
                abs: prec_add(*a, *b),
            },
            (Repr::Zero { abs }, Repr::NonZero { val, .. })
            | (Repr::NonZero { val, .. }, Repr::Zero { abs }) => Repr::Zero {
                abs: prec_add(*abs, *val),
            },
            (
                Repr::NonZero {
                    val: v1,
                    rel: r1,
                    unit: u1,
                },
                Repr::NonZero {
                    val: v2,
                    rel: r2,
                    unit: u2,
                },
            ) => {
                let rel = (*r1).min(*r2);
                // product of units is a unit: residues are non-zero in F_{p^f}
                Repr::NonZero {
                    val: v1 + v2,
                    rel,
                    unit: poly_mul(&self.ctx, u1, u2, rel),
                }
            }
        };
        PadicNumber {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<PadicNumber> {
        self.assert_same_context(other);
        let (v2, r2, u2) = match &other.repr {
            Repr::Zero { abs } => return Err(PadicError::DivisionByZero { abs_prec: *abs }),
            Repr::NonZero { val, rel, unit } => (*val, *rel, unit),
        };
        let repr = match &self.repr {
            Repr::Zero { abs } => Repr::Zero {
                abs: prec_add(*abs, -v2),
            },
            Repr::NonZero { val, rel, unit } => {
                let rel = (*rel).min(r2);
                let inv = poly_inv(&self.ctx, u2, rel).expect("divisor unit has non-zero residue");
                Repr::NonZero {
                    val: val - v2,
                    rel,
                    unit: poly_mul(&self.ctx, unit, &inv, rel),
                }
            }
        };
        Ok(PadicNumber {
            ctx: self.ctx.clone(),
            repr,
        })
    }

    /// Multiply by `p^k` (exact, no precision loss).
    pub fn mul_pow_p(&self, k: i64) -> PadicNumber {
        let repr = match &self.repr {
            Repr::Zero { abs } => Repr::Zero {
                abs: prec_add(*abs, k),
            },
            Repr::NonZero { val, rel, unit } => Repr::NonZero {
                val: val + k,
                rel: *rel,
                unit: unit.clone(),
            },
        };
        PadicNumber {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    pub fn pow(&self, e: i64) -> Result<PadicNumber> {
        if e == 0 {
            return Ok(match &self.repr {
                Repr::Zero { .. } => Self::one(&self.ctx),
                Repr::NonZero { rel, .. } => Self::from_integer_at(&self.ctx, 1, *rel),
            });
        }
        if e < 0 {
            let base = match &self.repr {
                Repr::Zero { abs } => return Err(PadicError::DivisionByZero { abs_prec: *abs }),
                Repr::NonZero { rel, .. } => {
                    Self::from_integer_at(&self.ctx, 1, *rel).checked_div(self)?
                }
            };
            return base.pow(-e);
        }
        if let Repr::Zero { abs } = &self.repr {
            let mut bound = *abs;
            for _ in 1..e {
                bound = prec_add(bound, *abs);
            }
            return Ok(Self::zero_to_precision(&self.ctx, bound));
        }
        let mut result: Option<PadicNumber> = None;
        let mut base = self.clone();
        let mut e = e as u64;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(result.unwrap())
    }

    /// `self + k` for an exact integer `k`, materialized with enough digits
    /// that `self`'s precision is the only limit.
    pub fn add_integer(&self, k: i64) -> PadicNumber {
        if k == 0 {
            return self.clone();
        }
        let abs = self.abs_prec();
        let target_abs = if abs >= EXACT_PREC {
            // exact zero: fall back to the context default precision
            self.ctx.rel_prec()
        } else {
            abs + 1
        };
        let vk = vp_bigint(self.ctx.p(), &BigInt::from(k));
        let rel = (target_abs - vk).max(1);
        self.add(&Self::from_integer_at(&self.ctx, k, rel))
    }

    /// `self / n` for an exact non-zero integer `n`, with `n` materialized at
    /// `self`'s relative precision so nothing is lost.
    pub fn div_integer(&self, n: i64) -> Result<PadicNumber> {
        if n == 0 {
            return Err(PadicError::ZeroDenominator);
        }
        let rel = self.rel_prec().unwrap_or_else(|| self.ctx.rel_prec()).max(1);
        self.checked_div(&Self::from_integer_at(&self.ctx, n, rel))
    }
}

impl std::ops::Add for &PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: Self) -> PadicNumber {
        PadicNumber::add(self, rhs)
    }
}
impl std::ops::Sub for &PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: Self) -> PadicNumber {
        PadicNumber::sub(self, rhs)
    }
}
impl std::ops::Mul for &PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: Self) -> PadicNumber {
        PadicNumber::mul(self, rhs)
    }
}
impl std::ops::Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        PadicNumber::neg(self)
    }
}

// ---- residue-field view -------------------------------------------------------

/// Image of an integral element in the residue field `F_{p^f}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueElement {
    ctx: PadicContext,
    coeffs: Vec<u64>,
}

impl ResidueElement {
    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Membership in the prime field: all coordinates above degree 0 vanish.
    pub fn in_prime_field(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn mul(&self, other: &Self) -> ResidueElement {
        assert!(self.ctx == other.ctx);
        ResidueElement {
            ctx: self.ctx.clone(),
            coeffs: self.ctx.fq_mul(&self.coeffs, &other.coeffs),
        }
    }

    pub fn pow(&self, e: u64) -> ResidueElement {
        ResidueElement {
            ctx: self.ctx.clone(),
            coeffs: self.ctx.fq_pow(&self.coeffs, e),
        }
    }

    /// `r -> r^p`; fixed points are exactly the prime field.
    pub fn frobenius(&self) -> ResidueElement {
        self.pow(self.ctx.p())
    }

    /// The coordinate in `[0, p)` when the element lies in `F_p`.
    pub fn as_prime_field_integer(&self) -> Option<u64> {
        self.in_prime_field().then_some(self.coeffs[0])
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*g"),
                _ => format!("{c}*g^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

// ---- domain predicates ---------------------------------------------------------

impl PadicNumber {
    /// Characteristic function of the complement of the open unit ball:
    /// `true` iff `|x| >= 1`, i.e. `v(x) <= 0`.
    pub fn chi(&self) -> Result<bool> {
        match &self.repr {
            Repr::NonZero { val, .. } => Ok(*val <= 0),
            Repr::Zero { abs } => {
                if *abs >= 1 {
                    Ok(false)
                } else {
                    Err(PadicError::IndeterminateValuation { abs_prec: *abs })
                }
            }
        }
    }

    pub fn residue(&self) -> Result<ResidueElement> {
        let coeffs = match &self.repr {
            Repr::Zero { abs } => {
                if *abs >= 1 {
                    vec![0; self.ctx.degree()]
                } else {
                    return Err(PadicError::IndeterminateValuation { abs_prec: *abs });
                }
            }
            Repr::NonZero { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::NegativeValuation { val: *val });
                } else if *val > 0 {
                    vec![0; self.ctx.degree()]
                } else {
                    let p = BigUint::from(self.ctx.p());
                    unit.iter().map(|c| (c % &p).to_u64().unwrap()).collect()
                }
            }
        };
        Ok(ResidueElement {
            ctx: self.ctx.clone(),
            coeffs,
        })
    }

    pub fn residue_in_fp(&self) -> Result<bool> {
        Ok(self.residue()?.in_prime_field())
    }

    /// The unique `l` in `[1, p]` with `l` congruent to `x` modulo the
    /// maximal ideal. Requires `v(x) >= 0` and a residue in `F_p`.
    pub fn ell(&self) -> Result<u64> {
        let r = self.residue()?;
        let c0 = r
            .as_prime_field_integer()
            .ok_or(PadicError::ResidueNotInPrimeField)?;
        Ok(if c0 == 0 { self.ctx.p() } else { c0 })
    }

    /// Dwork shift `x' = (x + p - l(x)) / p`; on `Z_p` this is the p-adic
    /// ceiling of `x/p`.
    pub fn dwork_shift(&self) -> Result<PadicNumber> {
        let l = self.ell()?;
        let shifted = self.add_integer(self.ctx.p() as i64 - l as i64);
        Ok(shifted.mul_pow_p(-1))
    }

    /// Membership in `W_p = {v < 0} union {v >= 0 and residue outside F_p}`.
    pub fn in_wp(&self) -> Result<bool> {
        match &self.repr {
            Repr::NonZero { val, .. } if *val < 0 => Ok(true),
            Repr::NonZero { .. } => Ok(!self.residue_in_fp()?),
            Repr::Zero { abs } => {
                if *abs >= 1 {
                    Ok(false)
                } else {
                    Err(PadicError::IndeterminateValuation { abs_prec: *abs })
                }
            }
        }
    }

    /// Certified `x not in Z_p`: either `v(x) < 0`, or some coordinate in
    /// degree >= 1 is non-zero at the stored precision (which certifies the
    /// true coordinate is non-zero). Zero-flagged values certify nothing.
    pub fn certified_not_in_zp(&self) -> bool {
        match &self.repr {
            Repr::Zero { .. } => false,
            Repr::NonZero { val, unit, .. } => {
                *val < 0 || unit[1..].iter().any(|c| !c.is_zero())
            }
        }
    }

    /// Certified `x in Z_p`: only base-field contexts can certify this (every
    /// value consistent with the truncation is then integral); in extensions
    /// membership is not decidable from a truncation.
    pub fn certified_in_zp(&self) -> bool {
        if self.ctx.degree() != 1 {
            return false;
        }
        match &self.repr {
            Repr::Zero { abs } => *abs >= 0,
            Repr::NonZero { val, .. } => *val >= 0,
        }
    }

    /// Teichmueller lift: the root of unity (or Frobenius-fixed point)
    /// congruent to the unit `x` modulo `p`. Cached per residue class.
    pub fn teichmuller(&self) -> Result<PadicNumber> {
        let (rel, unit) = match &self.repr {
            Repr::Zero { abs } => return Err(PadicError::NotAUnit { val: *abs }),
            Repr::NonZero { val, rel, unit } => {
                if *val != 0 {
                    return Err(PadicError::NotAUnit { val: *val });
                }
                (*rel, unit)
            }
        };
        let ctx = &self.ctx;
        let q_minus_1 = (ctx.p() as u128).pow(ctx.degree() as u32) as i64 - 1;
        if q_minus_1 == 1 {
            return Ok(Self::from_integer_at(ctx, 1, rel));
        }
        let p_big = BigUint::from(ctx.p());
        let key: Vec<u64> = unit.iter().map(|c| (c % &p_big).to_u64().unwrap()).collect();
        {
            let cache = ctx.inner.teich_cache.lock().unwrap();
            if let Some(coeffs) = cache.get(&(rel, key.clone())) {
                return Ok(PadicNumber {
                    ctx: ctx.clone(),
                    repr: Repr::NonZero {
                        val: 0,
                        rel,
                        unit: coeffs.clone(),
                    },
                });
            }
        }
        // Newton's method on y^(q-1) - 1 = 0, seeded with the residue; the
        // derivative (q-1) y^(q-2) is a unit, so digits double per step.
        let one = Self::from_integer_at(ctx, 1, rel);
        let qm1 = Self::from_integer_at(ctx, q_minus_1, rel);
        let mut y = PadicNumber {
            ctx: ctx.clone(),
            repr: Repr::NonZero {
                val: 0,
                rel,
                unit: key.iter().map(|&c| BigUint::from(c)).collect(),
            },
        };
        let max_iter = 2 * (64 - (rel as u64).leading_zeros() as i64) + 6;
        let mut converged = false;
        for _ in 0..max_iter {
            let ypow = y.pow(q_minus_1 - 1)?; // y^(q-2)
            let h = &(&ypow * &y) - &one;
            if h.valuation().lower_bound() >= rel {
                converged = true;
                break;
            }
            let delta = h.checked_div(&(&qm1 * &ypow))?;
            y = &y - &delta;
        }
        assert!(converged, "Teichmueller iteration failed to converge");
        if let Repr::NonZero { unit, .. } = &y.repr {
            let mut cache = ctx.inner.teich_cache.lock().unwrap();
            cache.insert((rel, key), unit.clone());
        }
        Ok(y)
    }
}

// ---- rendering -----------------------------------------------------------------

impl fmt::Display for PadicNumber {
    /// Canonical text form `p^v * (c0 + c1*g + ...)`; zeros render as `0`
    /// (exact) or `O(p^A)` (certified only to precision `A`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs } => {
                if *abs >= EXACT_PREC {
                    write!(f, "0")
                } else {
                    write!(f, "O({}^{})", self.ctx.p(), abs)
                }
            }
            Repr::NonZero { val, unit, .. } => {
                let terms: Vec<String> = unit
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| match i {
                        0 => format!("{c}"),
                        1 => format!("{c}*g"),
                        _ => format!("{c}*g^{i}"),
                    })
                    .collect();
                write!(f, "{}^{} * ({})", self.ctx.p(), val, terms.join(" + "))
            }
        }
    }
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs } => write!(f, "PadicNumber({} [abs {}])", self, abs),
            Repr::NonZero { rel, .. } => write!(f, "PadicNumber({} [rel {}])", self, rel),
        }
    }
}
