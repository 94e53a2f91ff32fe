//! Arithmetic contexts: the prime, the unramified extension, and the
//! default working precision.
//!
//! A [`PadicContext`] fixes a prime `p`, an extension degree `f` with a monic
//! modulus that is irreducible mod `p`, and a default relative precision.
//! It is immutable after construction and cheap to clone (values share the
//! inner data through an `Arc`). Residue-field arithmetic in `F_{p^f}` lives
//! here as well: it is the seed for Teichmueller lifts and for unit inversion.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{PadicError, Result};

/// Deterministic primality check by trial division. Desk-scale inputs only.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) struct CtxInner {
    pub(crate) p: u64,
    pub(crate) f: usize,
    /// Coefficients `c_0..c_{f-1}` of the monic modulus `g^f + c_{f-1} g^{f-1} + ... + c_0`.
    pub(crate) modulus_tail: Vec<i64>,
    /// `(-c_i) mod p`, used for reduction in the residue field.
    pub(crate) fold_mod_p: Vec<u64>,
    pub(crate) rel_prec: i64,
    pow_cache: RwLock<Vec<BigUint>>,
    pub(crate) teich_cache: Mutex<HashMap<(i64, Vec<u64>), Vec<BigUint>>>,
}

/// A validated `(p, f, modulus, precision)` quadruple.
#[derive(Clone)]
pub struct PadicContext {
    pub(crate) inner: Arc<CtxInner>,
}

impl PartialEq for PadicContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.f == other.inner.f
                && self.inner.modulus_tail == other.inner.modulus_tail)
    }
}
impl Eq for PadicContext {}

impl fmt::Debug for PadicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PadicContext")
            .field("p", &self.inner.p)
            .field("f", &self.inner.f)
            .field("modulus_tail", &self.inner.modulus_tail)
            .field("rel_prec", &self.inner.rel_prec)
            .finish()
    }
}

/// Smallest positive quadratic non-residue mod an odd prime.
fn smallest_qnr(p: u64) -> u64 {
    let is_qr = |a: u64| -> bool {
        (0..p).any(|x| (x * x) % p == a)
    };
    (2..p).find(|&a| !is_qr(a)).expect("odd prime has a non-residue")
}

fn has_root_mod_p(p: u64, tail: &[i64]) -> Option<u64> {
    let f = tail.len();
    let coeff = |c: i64| -> u64 { c.rem_euclid(p as i64) as u64 };
    (0..p).find(|&x| {
        // Horner, monic leading coefficient.
        let mut acc = 1u64;
        for i in (0..f).rev() {
            acc = (acc * x + coeff(tail[i])) % p;
        }
        acc == 0
    })
}

/// Default modulus tail for degree `f` over `F_p`:
/// - `f = 1`: the identity polynomial `g`.
/// - `f = 2`: `g^2 - a` with `a` the smallest quadratic non-residue
///   (`g^2 + g + 1` for `p = 2`).
/// - `f = 3`: first monic irreducible in the lexicographic scan over
///   `(c_2, c_1, c_0)`.
pub fn default_modulus_tail(p: u64, f: usize) -> Result<Vec<i64>> {
    match f {
        1 => Ok(vec![0]),
        2 => {
            if p == 2 {
                Ok(vec![1, 1])
            } else {
                Ok(vec![-(smallest_qnr(p) as i64), 0])
            }
        }
        3 => {
            for c2 in 0..p as i64 {
                for c1 in 0..p as i64 {
                    for c0 in 0..p as i64 {
                        let tail = vec![c0, c1, c2];
                        // A reducible cubic over F_p has a linear factor.
                        if has_root_mod_p(p, &tail).is_none() {
                            return Ok(tail);
                        }
                    }
                }
            }
            unreachable!("irreducible cubics exist over every F_p")
        }
        _ => Err(PadicError::UnsupportedDegree(f)),
    }
}

impl PadicContext {
    /// Validated construction with the deterministic default modulus.
    pub fn new(p: u64, f: usize, rel_prec: i64) -> Result<Self> {
        let tail = default_modulus_tail(p, f)?;
        Self::with_modulus(p, f, rel_prec, tail)
    }

    /// Validated construction with an explicit modulus tail `c_0..c_{f-1}`
    /// (leading coefficient 1 implied).
    pub fn with_modulus(p: u64, f: usize, rel_prec: i64, modulus_tail: Vec<i64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if f == 0 || f > 3 {
            return Err(PadicError::UnsupportedDegree(f));
        }
        if rel_prec < 1 {
            return Err(PadicError::BadPrecision(rel_prec));
        }
        if modulus_tail.len() != f {
            return Err(PadicError::BadModulus { expected: f });
        }
        if f > 1 {
            // Degree 2 and 3 polynomials are irreducible iff they have no
            // root; the exhaustive scan is the whole check at this scale.
            if let Some(root) = has_root_mod_p(p, &modulus_tail) {
                return Err(PadicError::ReducibleModulus { p, root });
            }
        }
        let fold_mod_p = modulus_tail
            .iter()
            .map(|&c| (-c).rem_euclid(p as i64) as u64)
            .collect();
        Ok(PadicContext {
            inner: Arc::new(CtxInner {
                p,
                f,
                modulus_tail,
                fold_mod_p,
                rel_prec,
                pow_cache: RwLock::new(vec![BigUint::one()]),
                teich_cache: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn degree(&self) -> usize {
        self.inner.f
    }

    pub fn rel_prec(&self) -> i64 {
        self.inner.rel_prec
    }

    /// Modulus coefficients `c_0..c_{f-1}` (monic part implied).
    pub fn modulus_tail(&self) -> &[i64] {
        &self.inner.modulus_tail
    }

    /// The modulus rendered as a polynomial in `g`, for reports.
    pub fn modulus_string(&self) -> String {
        if self.inner.f == 1 {
            return "g".to_string();
        }
        let mut s = format!("g^{}", self.inner.f);
        for i in (0..self.inner.f).rev() {
            let c = self.inner.modulus_tail[i];
            if c == 0 {
                continue;
            }
            let term = match i {
                0 => format!("{}", c.abs()),
                1 => format!("{}*g", c.abs()),
                _ => format!("{}*g^{}", c.abs(), i),
            };
            s.push_str(if c < 0 { " - " } else { " + " });
            s.push_str(&term);
        }
        s
    }

    /// `p^k`, cached.
    pub(crate) fn pow_p(&self, k: i64) -> BigUint {
        assert!(k >= 0, "pow_p takes a non-negative exponent");
        let k = k as usize;
        {
            let cache = self.inner.pow_cache.read().unwrap();
            if k < cache.len() {
                return cache[k].clone();
            }
        }
        let mut cache = self.inner.pow_cache.write().unwrap();
        let p = BigUint::from(self.inner.p);
        while cache.len() <= k {
            let next = cache.last().unwrap() * &p;
            cache.push(next);
        }
        cache[k].clone()
    }

    // ---- residue field F_{p^f} -------------------------------------------

    /// Multiplication in `F_{p^f}` on length-`f` coefficient vectors.
    pub(crate) fn fq_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let p = self.inner.p;
        let f = self.inner.f;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai * bj) % p;
            }
        }
        for d in (f..2 * f - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..f {
                prod[d - f + i] = (prod[d - f + i] + c * self.inner.fold_mod_p[i]) % p;
            }
        }
        prod.truncate(f);
        prod
    }

    pub(crate) fn fq_pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let f = self.inner.f;
        let mut result = vec![0u64; f];
        result[0] = 1;
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.fq_mul(&result, &base);
            }
            base = self.fq_mul(&base, &base);
            e >>= 1;
        }
        result
    }

    /// Inverse in `F_{p^f}` via `a^{q-2}`; `None` for zero.
    pub(crate) fn fq_inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        if a.iter().all(|&c| c == 0) {
            return None;
        }
        let q = (self.inner.p as u128).pow(self.inner.f as u32);
        Some(self.fq_pow(a, (q - 2) as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(13));
        assert!(!is_prime(1));
        assert!(!is_prime(4));
        assert!(!is_prime(91));
    }

    #[test]
    fn rejects_composite_p() {
        assert!(matches!(
            PadicContext::new(4, 1, 10),
            Err(PadicError::NotPrime(4))
        ));
    }

    #[test]
    fn rejects_bad_precision_and_degree() {
        assert!(matches!(
            PadicContext::new(3, 1, 0),
            Err(PadicError::BadPrecision(0))
        ));
        assert!(matches!(
            PadicContext::new(3, 4, 10),
            Err(PadicError::UnsupportedDegree(4))
        ));
    }

    #[test]
    fn default_modulus_f2() {
        // Squares mod 5 are {0, 1, 4}, so the smallest non-residue is 2.
        let ctx = PadicContext::new(5, 2, 20).unwrap();
        assert_eq!(ctx.modulus_tail(), &[-2, 0]);
        assert_eq!(ctx.modulus_string(), "g^2 - 2");

        let ctx2 = PadicContext::new(2, 2, 20).unwrap();
        assert_eq!(ctx2.modulus_tail(), &[1, 1]);
    }

    #[test]
    fn default_modulus_f3_is_irreducible() {
        for p in [2u64, 3, 5, 7] {
            let ctx = PadicContext::new(p, 3, 10).unwrap();
            assert!(has_root_mod_p(p, ctx.modulus_tail()).is_none());
        }
        // Cubing is a bijection mod 5, so every g^3 + c0 has a root and the
        // scan must move on to g^3 + g + 1.
        let ctx = PadicContext::new(5, 3, 10).unwrap();
        assert_eq!(ctx.modulus_tail(), &[1, 1, 0]);
    }

    #[test]
    fn rejects_reducible_modulus() {
        // g^2 - 1 = (g-1)(g+1) mod 5.
        assert!(matches!(
            PadicContext::with_modulus(5, 2, 10, vec![-1, 0]),
            Err(PadicError::ReducibleModulus { p: 5, .. })
        ));
    }

    #[test]
    fn residue_field_inverse() {
        let ctx = PadicContext::new(5, 2, 10).unwrap();
        // g * g = 2 in F_25 with modulus g^2 - 2.
        assert_eq!(ctx.fq_mul(&[0, 1], &[0, 1]), vec![2, 0]);
        for a in [[1u64, 0], [2, 3], [0, 1], [4, 4]] {
            let inv = ctx.fq_inv(&a).unwrap();
            assert_eq!(ctx.fq_mul(&a, &inv), vec![1, 0]);
        }
        assert!(ctx.fq_inv(&[0, 0]).is_none());
    }

    #[test]
    fn pow_cache() {
        let ctx = PadicContext::new(3, 1, 10).unwrap();
        assert_eq!(ctx.pow_p(0), BigUint::from(1u64));
        assert_eq!(ctx.pow_p(4), BigUint::from(81u64));
        assert_eq!(ctx.pow_p(2), BigUint::from(9u64));
    }
}
