//! The finite coefficient field `k = F_{p^f}`.
//!
//! Elements are polynomials in a fixed generator, stored as little-endian
//! coefficient arrays of length `f` over `F_p`. A field is described by its
//! defining relation `x^f = modulus(x)`; when no modulus is supplied the
//! lexicographically least irreducible choice (scanning the coefficient
//! tuple as a base-`p` integer, least significant digit first) is used, so
//! a `(p, f)` pair always names one concrete field.

use crate::error::{CoreError, Result};
use crate::fp::{fp_add, fp_inv, fp_mul, fp_neg, fp_sub};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Hard cap on the extension degree `f`. Everything in the acceptance
/// envelope needs `f <= 4`; 8 leaves headroom without bloating elements.
pub const MAX_F: usize = 8;

/// A finite field `F_{p^f}` with a fixed defining relation
/// `x^f = sum_i modulus[i] x^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiniteField {
    pub p: u8,
    pub f: u8,
    /// Little-endian coefficients of `x^f` as a polynomial of degree `< f`.
    pub modulus: [u8; MAX_F],
}

/// An element of a [`FiniteField`], little-endian coefficients of length
/// `f` (higher entries are zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    pub c: [u8; MAX_F],
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }
}

impl FiniteField {
    /// The field `F_{p^f}` with the default (lex-least irreducible) modulus.
    pub fn new(p: u8, f: u8) -> Result<Self> {
        check_params(p, f)?;
        let count = (p as u64).pow(f as u32);
        for enc in 0..count {
            let modulus = decode_tuple(p, f, enc);
            if is_irreducible(p, f, &modulus) {
                return Ok(FiniteField { p, f, modulus });
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    /// The field with an explicitly chosen defining relation.
    pub fn with_modulus(p: u8, f: u8, modulus: &[u8]) -> Result<Self> {
        check_params(p, f)?;
        if modulus.len() > MAX_F || modulus.iter().skip(f as usize).any(|&x| x != 0) {
            return Err(CoreError::InvalidParams(format!(
                "modulus must have degree < f = {f}"
            )));
        }
        let mut m = [0u8; MAX_F];
        for (i, &x) in modulus.iter().enumerate() {
            m[i] = x % p;
        }
        if !is_irreducible(p, f, &m) {
            return Err(CoreError::InvalidParams(
                "x^f - modulus(x) is reducible".into(),
            ));
        }
        Ok(FiniteField { p, f, modulus: m })
    }

    /// Number of elements `p^f`.
    pub fn size(&self) -> u64 {
        (self.p as u64).pow(self.f as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { c: [0; MAX_F] }
    }

    pub fn one(&self) -> FieldElement {
        self.scalar(1)
    }

    /// The constant `a` viewed in `k`.
    pub fn scalar(&self, a: u8) -> FieldElement {
        let mut c = [0; MAX_F];
        c[0] = a % self.p;
        FieldElement { c }
    }

    /// The distinguished generator (the class of `x`). For `f = 1` this is
    /// the constant `modulus[0]`.
    pub fn generator(&self) -> FieldElement {
        if self.f == 1 {
            return self.scalar(self.modulus[0]);
        }
        let mut c = [0; MAX_F];
        c[1] = 1;
        FieldElement { c }
    }

    /// Builds an element from little-endian `F_p` coefficients
    /// (length at most `f`).
    pub fn element(&self, coeffs: &[u8]) -> Result<FieldElement> {
        if coeffs.len() > self.f as usize {
            return Err(CoreError::InvalidInput(format!(
                "element has {} coefficients but f = {}",
                coeffs.len(),
                self.f
            )));
        }
        let mut c = [0; MAX_F];
        for (i, &x) in coeffs.iter().enumerate() {
            c[i] = x % self.p;
        }
        Ok(FieldElement { c })
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let mut c = [0; MAX_F];
        for i in 0..self.f as usize {
            c[i] = fp_add(self.p, a.c[i], b.c[i]);
        }
        FieldElement { c }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let mut c = [0; MAX_F];
        for i in 0..self.f as usize {
            c[i] = fp_sub(self.p, a.c[i], b.c[i]);
        }
        FieldElement { c }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let mut c = [0; MAX_F];
        for i in 0..self.f as usize {
            c[i] = fp_neg(self.p, a.c[i]);
        }
        FieldElement { c }
    }

    pub fn scale(&self, m: u8, a: FieldElement) -> FieldElement {
        let mut c = [0; MAX_F];
        for i in 0..self.f as usize {
            c[i] = fp_mul(self.p, m, a.c[i]);
        }
        FieldElement { c }
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let f = self.f as usize;
        let p = self.p;
        // Schoolbook product, degree <= 2f - 2.
        let mut tmp = [0u8; 2 * MAX_F];
        for i in 0..f {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..f {
                tmp[i + j] = fp_add(p, tmp[i + j], fp_mul(p, a.c[i], b.c[j]));
            }
        }
        // Fold x^d (d >= f) down via x^f = modulus(x).
        for d in (f..2 * f - 1).rev() {
            let c = tmp[d];
            if c == 0 {
                continue;
            }
            tmp[d] = 0;
            for i in 0..f {
                tmp[d - f + i] = fp_add(p, tmp[d - f + i], fp_mul(p, c, self.modulus[i]));
            }
        }
        let mut c = [0; MAX_F];
        c[..f].copy_from_slice(&tmp[..f]);
        FieldElement { c }
    }

    pub fn pow(&self, a: FieldElement, mut k: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: FieldElement) -> FieldElement {
        assert!(!a.is_zero(), "division by zero in F_{{{}^{}}}", self.p, self.f);
        self.pow(a, self.size() - 2)
    }

    /// Arithmetic Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.p as u64)
    }

    /// Iterated Frobenius `a -> a^{p^k}`.
    pub fn frobenius_iter(&self, a: FieldElement, k: u32) -> FieldElement {
        let mut out = a;
        for _ in 0..(k % self.f as u32) {
            out = self.frobenius(out);
        }
        out
    }

    /// Deterministic enumeration of all elements, ascending in the base-`p`
    /// encoding of the coefficient tuple (least significant digit first).
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.size()).map(move |enc| FieldElement {
            c: decode_tuple(self.p, self.f, enc),
        })
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElement) -> u64 {
        assert!(!a.is_zero());
        let group = self.size() - 1;
        let mut ord = group;
        for q in prime_factors(group) {
            while ord % q == 0 && self.pow(a, ord / q) == self.one() {
                ord /= q;
            }
        }
        ord
    }

    /// Rank of a matrix over this field (rows of equal length; Gaussian
    /// elimination).
    pub fn matrix_rank(&self, rows: &[Vec<FieldElement>]) -> usize {
        let mut mat: Vec<Vec<FieldElement>> = rows.to_vec();
        let nrows = mat.len();
        let ncols = mat.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..ncols {
            let Some(pivot) = (rank..nrows).find(|&i| !mat[i][col].is_zero()) else {
                continue;
            };
            mat.swap(rank, pivot);
            let inv = self.inv(mat[rank][col]);
            for j in col..ncols {
                mat[rank][j] = self.mul(inv, mat[rank][j]);
            }
            for i in 0..nrows {
                if i != rank && !mat[i][col].is_zero() {
                    let factor = mat[i][col];
                    for j in col..ncols {
                        let t = self.mul(factor, mat[rank][j]);
                        mat[i][j] = self.sub(mat[i][j], t);
                    }
                }
            }
            rank += 1;
            if rank == nrows {
                break;
            }
        }
        rank
    }

    /// The first element (in enumeration order) of exact multiplicative
    /// order `n`, provided `n | p^f - 1`.
    pub fn primitive_root_of_unity(&self, n: u64) -> Result<FieldElement> {
        if n == 0 || (self.size() - 1) % n != 0 {
            return Err(CoreError::PreconditionFailed(format!(
                "no primitive {n}-th root of unity: {n} does not divide p^f - 1 = {}",
                self.size() - 1
            )));
        }
        for a in self.elements() {
            if !a.is_zero() && self.order(a) == n {
                return Ok(a);
            }
        }
        unreachable!("the multiplicative group is cyclic")
    }
}

/// An embedding `F_{p^f} -> F_{p^{f'}}` with `f | f'`, determined by the
/// first root (in enumeration order) of the source's defining polynomial
/// inside the target.
#[derive(Debug, Clone)]
pub struct FieldEmbedding {
    pub src: FiniteField,
    pub dst: FiniteField,
    /// `powers[i]` is the image of the source generator to the `i`-th power.
    pub powers: Vec<FieldElement>,
}

impl FieldEmbedding {
    /// Finds the deterministic embedding by root scan.
    pub fn find(src: &FiniteField, dst: &FiniteField) -> Result<Self> {
        if src.p != dst.p {
            return Err(CoreError::InvalidParams(
                "embeddings require equal characteristic".into(),
            ));
        }
        if dst.f % src.f != 0 {
            return Err(CoreError::InvalidParams(format!(
                "no embedding F_{{p^{}}} -> F_{{p^{}}}: degree does not divide",
                src.f, dst.f
            )));
        }
        let root = if src == dst {
            src.generator()
        } else {
            // Scan for the first root beta of x^f - modulus(x) in dst.
            let mut found = None;
            for beta in dst.elements() {
                let lhs = dst.pow(beta, src.f as u64);
                let mut rhs = dst.zero();
                let mut bp = dst.one();
                for i in 0..src.f as usize {
                    rhs = dst.add(rhs, dst.scale(src.modulus[i], bp));
                    bp = dst.mul(bp, beta);
                }
                if lhs == rhs {
                    found = Some(beta);
                    break;
                }
            }
            found.expect("a splitting field contains a root")
        };
        let mut powers = Vec::with_capacity(src.f as usize);
        let mut bp = dst.one();
        for _ in 0..src.f {
            powers.push(bp);
            bp = dst.mul(bp, root);
        }
        Ok(FieldEmbedding {
            src: *src,
            dst: *dst,
            powers,
        })
    }

    pub fn map(&self, a: FieldElement) -> FieldElement {
        let mut out = self.dst.zero();
        for i in 0..self.src.f as usize {
            out = self.dst.add(out, self.dst.scale(a.c[i], self.powers[i]));
        }
        out
    }
}

fn check_params(p: u8, f: u8) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(CoreError::InvalidParams(format!(
            "p = {p} must be an odd prime"
        )));
    }
    if f == 0 || f as usize > MAX_F {
        return Err(CoreError::InvalidParams(format!(
            "f = {f} must be in 1..={MAX_F}"
        )));
    }
    Ok(())
}

fn is_prime(n: u8) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u16;
    while d * d <= n as u16 {
        if n as u16 % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn decode_tuple(p: u8, f: u8, mut enc: u64) -> [u8; MAX_F] {
    let mut c = [0u8; MAX_F];
    for slot in c.iter_mut().take(f as usize) {
        *slot = (enc % p as u64) as u8;
        enc /= p as u64;
    }
    c
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---- dense polynomial helpers over F_p (only for irreducibility) ----

fn poly_trim(v: &mut Vec<u8>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul_mod(p: u8, a: &[u8], b: &[u8], g: &[u8]) -> Vec<u8> {
    let mut prod = vec![0u8; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = fp_add(p, prod[i + j], fp_mul(p, x, y));
        }
    }
    poly_rem(p, prod, g)
}

/// Remainder of `a` modulo the monic polynomial `g`.
fn poly_rem(p: u8, mut a: Vec<u8>, g: &[u8]) -> Vec<u8> {
    let dg = g.len() - 1;
    while a.len() > dg {
        let d = a.len() - 1;
        let c = a[d];
        if c != 0 {
            for i in 0..dg {
                a[d - dg + i] = fp_sub(p, a[d - dg + i], fp_mul(p, c, g[i]));
            }
        }
        a.pop();
        poly_trim(&mut a);
        if a.is_empty() {
            break;
        }
    }
    a
}

fn poly_gcd(p: u8, mut a: Vec<u8>, mut b: Vec<u8>) -> Vec<u8> {
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        // Make b monic so poly_rem applies.
        let lead = *b.last().unwrap();
        if lead != 1 {
            let inv = fp_inv(p, lead);
            for x in &mut b {
                *x = fp_mul(p, *x, inv);
            }
        }
        let r = poly_rem(p, a, &b);
        a = b;
        b = r;
    }
    a
}

/// `x^(p^k) mod g` by iterating the `p`-th power map.
fn x_ppow_mod(p: u8, k: u32, g: &[u8]) -> Vec<u8> {
    let mut t = vec![0u8, 1]; // x
    for _ in 0..k {
        // t -> t^p mod g by square-and-multiply over poly arithmetic.
        let mut acc = vec![1u8];
        let mut base = t.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul_mod(p, &acc, &base, g);
            }
            base = poly_mul_mod(p, &base, &base, g);
            e >>= 1;
        }
        t = acc;
    }
    t
}

/// Tests whether `x^f - modulus(x)` is irreducible over `F_p` (Rabin).
fn is_irreducible(p: u8, f: u8, modulus: &[u8; MAX_F]) -> bool {
    let f = f as usize;
    // g = x^f - modulus(x), monic, dense of length f + 1.
    let mut g = vec![0u8; f + 1];
    g[f] = 1;
    for i in 0..f {
        g[i] = fp_neg(p, modulus[i]);
    }
    // x itself reduced mod g (differs from [0, 1] only when f = 1).
    let xr = poly_rem(p, vec![0, 1], &g);
    // x^(p^f) == x mod g
    let xq = x_ppow_mod(p, f as u32, &g);
    if !poly_sub(p, &xq, &xr).is_empty() {
        return false;
    }
    // gcd(x^(p^(f/q)) - x, g) == 1 for every prime q | f
    for q in prime_factors(f as u64) {
        let t = x_ppow_mod(p, (f as u64 / q) as u32, &g);
        let diff = poly_sub(p, &t, &xr);
        let gcd = poly_gcd(p, g.clone(), diff);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

fn poly_sub(p: u8, a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len().max(b.len())];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = fp_sub(p, x, y);
    }
    poly_trim(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli_are_deterministic() {
        // F_9: first irreducible x^2 - c is x^2 - 2 (i.e. x^2 + 1).
        let k = FiniteField::new(3, 2).unwrap();
        assert_eq!(&k.modulus[..2], &[2, 0]);
        // F_25: likewise x^2 = 2.
        let k = FiniteField::new(5, 2).unwrap();
        assert_eq!(&k.modulus[..2], &[2, 0]);
        // Reducible moduli are rejected: x^2 = 1 factors over F_3.
        assert!(FiniteField::with_modulus(3, 2, &[1, 0]).is_err());
    }

    #[test]
    fn f9_arithmetic() {
        let k = FiniteField::new(3, 2).unwrap();
        let i = k.generator(); // i^2 = 2 = -1
        assert_eq!(k.mul(i, i), k.scalar(2));
        // (1 + i)^2 = 1 + 2i + i^2 = 2i
        let a = k.add(k.one(), i);
        let sq = k.mul(a, a);
        assert_eq!(sq, k.scale(2, i));
        // Every nonzero element has an inverse.
        for a in k.elements().filter(|a| !a.is_zero()) {
            assert_eq!(k.mul(a, k.inv(a)), k.one());
        }
    }

    #[test]
    fn frobenius_fixes_prime_field_and_has_order_f() {
        let k = FiniteField::new(3, 2).unwrap();
        for a in 0..3 {
            let s = k.scalar(a);
            assert_eq!(k.frobenius(s), s);
        }
        let g = k.generator();
        let fg = k.frobenius(g);
        assert_ne!(fg, g);
        assert_eq!(k.frobenius(fg), g); // order 2
    }

    #[test]
    fn embeddings_are_field_homs() {
        let k3 = FiniteField::new(3, 1).unwrap();
        let k9 = FiniteField::new(3, 2).unwrap();
        let emb = FieldEmbedding::find(&k3, &k9).unwrap();
        assert_eq!(emb.map(k3.scalar(2)), k9.scalar(2));

        let k81 = FiniteField::new(3, 4).unwrap();
        let emb = FieldEmbedding::find(&k9, &k81).unwrap();
        for a in k9.elements() {
            for b in k9.elements() {
                assert_eq!(
                    emb.map(k9.mul(a, b)),
                    k81.mul(emb.map(a), emb.map(b))
                );
                assert_eq!(emb.map(k9.add(a, b)), k81.add(emb.map(a), emb.map(b)));
            }
        }
        // Injective: images of distinct elements differ.
        let imgs: alloc::collections::BTreeSet<_> = k9.elements().map(|a| emb.map(a)).collect();
        assert_eq!(imgs.len(), 9);
    }

    #[test]
    fn roots_of_unity() {
        let k = FiniteField::new(3, 1).unwrap();
        // Primitive square root of unity in F_3 is -1 = 2.
        assert_eq!(k.primitive_root_of_unity(2).unwrap(), k.scalar(2));
        assert!(k.primitive_root_of_unity(4).is_err());

        let k = FiniteField::new(5, 2).unwrap();
        for n in [2u64, 3, 4, 6, 8, 12, 24] {
            let z = k.primitive_root_of_unity(n).unwrap();
            assert_eq!(k.order(z), n);
        }
    }
}
