//! The truncated power-series ring `S~ = k[u]/u^N` with `N = e*p`.
//!
//! This is a chain ring: every ideal is `(u^v)`, every element factors as
//! `u^v * unit`, and exact division by `u^v` is decidable coefficientwise.
//! Besides plain arithmetic the ring carries three distinguished maps:
//! the semilinear Frobenius `phi(sum a_i u^i) = sum a_i^p u^{pi}`, the
//! derivation `N = -u d/du`, and the substitutions `u -> w u` (used by
//! Galois twists) and `u -> u^m` (used by tame base change).

use crate::error::{CoreError, Result};
use crate::field::{FieldElement, FieldEmbedding, FiniteField};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// The ring `k[u]/u^n`. `n` is always `e * p` in context, but the ring
/// itself only needs the truncation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncatedRing {
    pub field: FiniteField,
    pub n: usize,
}

/// An element of a [`TruncatedRing`]: little-endian coefficients in `k`,
/// always of length exactly `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    pub c: Vec<FieldElement>,
}

impl TruncatedRing {
    pub fn new(field: FiniteField, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::InvalidParams("truncation order must be positive".into()));
        }
        Ok(TruncatedRing { field, n })
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            c: vec![self.field.zero(); self.n],
        }
    }

    pub fn one(&self) -> RingElement {
        self.monomial(self.field.one(), 0)
    }

    /// `a * u^k` (zero if `k >= n`).
    pub fn monomial(&self, a: FieldElement, k: usize) -> RingElement {
        let mut s = self.zero();
        if k < self.n {
            s.c[k] = a;
        }
        s
    }

    /// `u^k`.
    pub fn u_pow(&self, k: usize) -> RingElement {
        self.monomial(self.field.one(), k)
    }

    /// Builds an element from at most `n` little-endian coefficients.
    pub fn element(&self, coeffs: &[FieldElement]) -> Result<RingElement> {
        if coeffs.len() > self.n {
            return Err(CoreError::InvalidInput(format!(
                "ring element has {} coefficients but u^{} = 0",
                coeffs.len(),
                self.n
            )));
        }
        let mut s = self.zero();
        s.c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(s)
    }

    pub fn is_zero(&self, s: &RingElement) -> bool {
        s.c.iter().all(FieldElement::is_zero)
    }

    /// `u`-adic valuation; `n` for the zero element.
    pub fn val(&self, s: &RingElement) -> usize {
        s.c.iter().position(|a| !a.is_zero()).unwrap_or(self.n)
    }

    pub fn is_unit(&self, s: &RingElement) -> bool {
        !s.c[0].is_zero()
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.zip(a, b, |x, y| self.field.add(x, y))
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.zip(a, b, |x, y| self.field.sub(x, y))
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        RingElement {
            c: a.c.iter().map(|&x| self.field.neg(x)).collect(),
        }
    }

    fn zip(
        &self,
        a: &RingElement,
        b: &RingElement,
        op: impl Fn(FieldElement, FieldElement) -> FieldElement,
    ) -> RingElement {
        debug_assert_eq!(a.c.len(), self.n);
        debug_assert_eq!(b.c.len(), self.n);
        RingElement {
            c: a.c.iter().zip(&b.c).map(|(&x, &y)| op(x, y)).collect(),
        }
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let mut out = self.zero();
        for i in 0..self.n {
            if a.c[i].is_zero() {
                continue;
            }
            for j in 0..self.n - i {
                if b.c[j].is_zero() {
                    continue;
                }
                let t = self.field.mul(a.c[i], b.c[j]);
                out.c[i + j] = self.field.add(out.c[i + j], t);
            }
        }
        out
    }

    /// Multiplication by a coefficient-field scalar.
    pub fn scale(&self, a: FieldElement, s: &RingElement) -> RingElement {
        RingElement {
            c: s.c.iter().map(|&x| self.field.mul(a, x)).collect(),
        }
    }

    /// Inverse of a unit (triangular back-substitution).
    pub fn inverse(&self, s: &RingElement) -> Result<RingElement> {
        if !self.is_unit(s) {
            return Err(CoreError::InvalidInput("not a unit: constant term is zero".into()));
        }
        let k = &self.field;
        let c0inv = k.inv(s.c[0]);
        let mut x = self.zero();
        x.c[0] = c0inv;
        for j in 1..self.n {
            // (s * x)_j = sum_{a + b = j} s_a x_b must vanish.
            let mut acc = k.zero();
            for a in 1..=j {
                acc = k.add(acc, k.mul(s.c[a], x.c[j - a]));
            }
            x.c[j] = k.neg(k.mul(c0inv, acc));
        }
        Ok(x)
    }

    /// Frobenius `phi(sum a_i u^i) = sum a_i^p u^{p i}`, truncated at `u^n`.
    pub fn frobenius_ring(&self, s: &RingElement) -> RingElement {
        let p = self.field.p as usize;
        let mut out = self.zero();
        for i in 0..self.n {
            if s.c[i].is_zero() {
                continue;
            }
            let d = i * p;
            if d < self.n {
                out.c[d] = self.field.frobenius(s.c[i]);
            }
        }
        out
    }

    /// The derivation `N = -u d/du`: `u^i -> -i u^i`.
    pub fn n_ring(&self, s: &RingElement) -> RingElement {
        let p = self.field.p;
        let mut out = self.zero();
        for i in 0..self.n {
            if s.c[i].is_zero() {
                continue;
            }
            let m = crate::fp::fp_neg(p, (i % p as usize) as u8);
            out.c[i] = self.field.scale(m, s.c[i]);
        }
        out
    }

    /// Substitution `u -> w * u` for a scalar `w` in `k` (a ring map; used
    /// for the semilinear Galois action on the ramified variable).
    pub fn twist_u(&self, s: &RingElement, w: FieldElement) -> RingElement {
        let mut out = self.zero();
        let mut wp = self.field.one();
        for i in 0..self.n {
            out.c[i] = self.field.mul(wp, s.c[i]);
            wp = self.field.mul(wp, w);
        }
        out
    }

    /// Substitution `u -> u^m` into a larger truncation (tame transport).
    /// The target must truncate at `m * n`.
    pub fn subst_u_pow(&self, s: &RingElement, m: usize, target: &TruncatedRing) -> RingElement {
        assert_eq!(target.n, m * self.n, "target truncation must be m * n");
        assert_eq!(target.field, self.field);
        let mut out = target.zero();
        for i in 0..self.n {
            out.c[m * i] = s.c[i];
        }
        out
    }

    /// Applies a coefficient-field embedding to every coefficient
    /// (unramified transport).
    pub fn map_coeffs(&self, s: &RingElement, emb: &FieldEmbedding, target: &TruncatedRing) -> RingElement {
        assert_eq!(target.n, self.n);
        RingElement {
            c: s.c.iter().map(|&a| emb.map(a)).collect(),
        }
    }

    /// Floor division by `u^v`: keeps the coefficients at degrees `>= v`,
    /// shifted down. (The remainder is [`Self::rem_u_pow`].)
    pub fn div_u_pow(&self, s: &RingElement, v: usize) -> RingElement {
        let mut out = self.zero();
        for i in v..self.n {
            out.c[i - v] = s.c[i];
        }
        out
    }

    /// Remainder modulo `u^v`: the coefficients at degrees `< v`.
    pub fn rem_u_pow(&self, s: &RingElement, v: usize) -> RingElement {
        let mut out = self.zero();
        let v = v.min(self.n);
        out.c[..v].copy_from_slice(&s.c[..v]);
        out
    }

    /// Exact division by `u^v`; errors if `s` is not divisible.
    pub fn div_u_pow_exact(&self, s: &RingElement, v: usize) -> Result<RingElement> {
        if !self.is_zero(&self.rem_u_pow(s, v)) {
            return Err(CoreError::InvalidInput(format!(
                "element is not divisible by u^{v}"
            )));
        }
        Ok(self.div_u_pow(s, v))
    }

    /// Truncates an element at `u^m` (reduction into `S~/u^m`-style
    /// coordinate slots; the result still lives in this ring).
    pub fn truncate(&self, s: &RingElement, m: usize) -> RingElement {
        self.rem_u_pow(s, m)
    }
}
