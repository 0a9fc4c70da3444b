//! Simple objects with coefficients.
//!
//! The index set is the family of periodic base-`p` digit words up to
//! the shift-by-`h` identification, minus the constant word `p - 1`
//! ([`DigitClass`]). Each class `a` yields a cyclic object `M(a)` of
//! rank `lcm(d, h)` carrying an action of `E = F_{p^h}` by
//! Frobenius-twisted scalars ([`build_simple`]); over an algebraically
//! closed residue field these are exactly the simple objects, pairwise
//! non-isomorphic as `E`-equivariant objects.
//!
//! The tame-inertia character attached to a cyclic shape is computed by
//! an exact valuation oracle ([`tame_character`]): a nonzero solution
//! column of the `phi_r`-equivariance system for the shape forces
//! valuations obeying the cyclic recurrence
//!
//! ```text
//! v_{i+1} = p v_i - (er - b_i)/e
//! ```
//!
//! whose unique rational solution pins the exponent `n = e (p^d - 1) v_0`
//! of the level-`d` fundamental character. Characters are compared as
//! Frobenius orbits `(level, {n p^j})`, since relabeling the
//! `F_{p^d}`-structure multiplies exponents by `p`. The rational `v_0`
//! itself is the base-change invariant: a tame extension of degree `m`
//! scales both `e` and the shape, leaving `v_0` fixed and multiplying
//! the exponent by `m`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_rational::Ratio;

use crate::coeff::CoefficientAction;
use crate::error::{CoreError, Result};
use crate::field::{FieldEmbedding, FiniteField};
use crate::linmap::LinearMap;
use crate::object::{BreuilObject, FreeBreuilObject, RingParams};

/// Largest rank [`identify_simple`] will enumerate candidates for.
pub const MAX_IDENTIFY_RANK: usize = 6;

/// A class of periodic base-`p` digit words under the shift-by-`h`
/// identification, stored by its canonical representative: the minimal
/// period `(a_0, ..., a_{d-1})`, rotated to the lexicographically least
/// position reachable by multiples of `gcd(d, h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitClass {
    pub p: u8,
    pub h: usize,
    pub digits: Vec<u8>,
}

impl DigitClass {
    /// Minimal period of the word.
    pub fn d(&self) -> usize {
        self.digits.len()
    }

    /// `lcm(d, h)`: the rank of the attached simple object.
    pub fn d_h(&self) -> usize {
        self.d().lcm(&self.h)
    }

    /// The digit at position `i` of the infinite periodic word.
    pub fn digit(&self, i: usize) -> u8 {
        self.digits[i % self.digits.len()]
    }
}

fn rotate_left(word: &[u8], k: usize) -> Vec<u8> {
    let d = word.len();
    (0..d).map(|i| word[(i + k) % d]).collect()
}

/// Canonicalizes a digit word: extracts the minimal period, rejects the
/// excluded constant word `p - 1`, and rotates to the canonical
/// position. Words equal in the shift-by-`h` identification
/// canonicalize identically.
pub fn canonicalize_digits(word: &[u8], p: u8, h: usize) -> Result<DigitClass> {
    if word.is_empty() {
        return Err(CoreError::InvalidInput("empty digit word".to_string()));
    }
    if h == 0 {
        return Err(CoreError::InvalidParams("h must be >= 1".to_string()));
    }
    if let Some(&bad) = word.iter().find(|&&a| a >= p) {
        return Err(CoreError::InvalidInput(format!(
            "digit {bad} is out of range for p = {p}"
        )));
    }

    // Minimal period: the least divisor of the length that reproduces
    // the word.
    let len = word.len();
    let d = (1..=len)
        .find(|&cand| len % cand == 0 && word.iter().enumerate().all(|(i, &a)| a == word[i % cand]))
        .expect("the full length is always a period");
    let period = &word[..d];

    if d == 1 && period[0] == p - 1 {
        return Err(CoreError::ExcludedClass(format!(
            "the constant word {} indexes no class",
            p - 1
        )));
    }

    // Canonical rotation: the shift-by-h identification generates
    // rotations by multiples of gcd(d, h) on a word of minimal period d.
    let g = d.gcd(&h);
    let digits = (0..d / g)
        .map(|j| rotate_left(period, j * g))
        .min()
        .expect("at least the trivial rotation");
    Ok(DigitClass { p, h, digits })
}

/// The rational `m / (p^d - 1)` in `[0, 1)` attached to a digit class,
/// with `m = sum_i a_i p^i`. Rotating the word left multiplies the
/// rational by `p` modulo 1.
pub fn digits_to_rational(a: &DigitClass) -> Ratio<i64> {
    let p = a.p as i64;
    let mut m: i64 = 0;
    let mut pw: i64 = 1;
    for &ai in &a.digits {
        m += ai as i64 * pw;
        pw *= p;
    }
    Ratio::new(m, pw - 1)
}

/// The digit class of a rational in `Z_(p) mod Z`: the base-`p`
/// expansion of its purely periodic fractional part. Inverse to
/// [`digits_to_rational`] on canonical classes.
pub fn rational_to_digits(x: Ratio<i64>, p: u8, h: usize) -> Result<DigitClass> {
    let pi = p as i64;
    let frac = x - x.floor();
    let q = *frac.denom();
    if q % pi == 0 {
        return Err(CoreError::InvalidInput(format!(
            "denominator {q} is divisible by p = {p}: not p-integral"
        )));
    }
    // The least d with q | p^d - 1 (the multiplicative order of p mod q).
    let mut pw: i128 = 1;
    let mut d = 0usize;
    loop {
        d += 1;
        pw *= pi as i128;
        if pw > (1 << 62) {
            return Err(CoreError::InvalidInput(
                "denominator requires a base-p period that is too large".to_string(),
            ));
        }
        if (pw - 1) % q as i128 == 0 {
            break;
        }
    }
    let mut m = (*frac.numer() as i128) * ((pw - 1) / q as i128);
    let mut digits = Vec::with_capacity(d);
    for _ in 0..d {
        digits.push((m % pi as i128) as u8);
        m /= pi as i128;
    }
    canonicalize_digits(&digits, p, h)
}

/// A cyclic shape: rank `d` with `Fil` generated by `u^{b_i} e_i` and
/// `phi_r(u^{b_i} e_i) = unit * e_{i+1}` (indices mod `d`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicShape {
    pub exponents: Vec<usize>,
}

impl CyclicShape {
    pub fn new(exponents: Vec<usize>, params: &RingParams) -> Result<Self> {
        if exponents.is_empty() {
            return Err(CoreError::InvalidInput("empty cyclic shape".to_string()));
        }
        let er = params.er();
        if let Some(&bad) = exponents.iter().find(|&&b| b > er) {
            return Err(CoreError::InvalidInput(format!(
                "exponent {bad} exceeds er = {er}"
            )));
        }
        Ok(CyclicShape { exponents })
    }

    /// The shape of the simple object of a digit class: `b_i = er - a_i`.
    pub fn of_digits(a: &DigitClass, params: &RingParams) -> Result<Self> {
        let er = params.er();
        let exponents = a
            .digits
            .iter()
            .map(|&ai| {
                (ai as usize <= er).then(|| er - ai as usize).ok_or_else(|| {
                    CoreError::PreconditionFailed(format!(
                        "digit {ai} exceeds er = {er}: the cyclic shape needs er >= p - 1"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CyclicShape { exponents })
    }

    pub fn period(&self) -> usize {
        self.exponents.len()
    }
}

/// A tame-inertia character, recorded as the Frobenius orbit of its
/// exponent against the level-`d` fundamental character. Equality
/// compares `(level, orbit)` only; `exponent` keeps the raw solved
/// integer and `v0` the rational invariant `exponent / (e (p^d - 1))`,
/// which tame base change preserves.
#[derive(Debug, Clone)]
pub struct TameCharacter {
    pub level: usize,
    pub orbit: Vec<u64>,
    pub exponent: i64,
    pub v0: Ratio<i64>,
}

impl PartialEq for TameCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && self.orbit == other.orbit
    }
}

impl Eq for TameCharacter {}

fn orbit_of(n: i64, level: usize, p: i64, modulus: i64) -> Vec<u64> {
    let mut cur = n.rem_euclid(modulus);
    let mut orbit: Vec<u64> = Vec::with_capacity(level);
    for _ in 0..level {
        if !orbit.contains(&(cur as u64)) {
            orbit.push(cur as u64);
        }
        cur = (cur * p).rem_euclid(modulus);
    }
    orbit.sort_unstable();
    orbit
}

fn checked_pd(p: i64, d: usize) -> Result<i64> {
    let mut pw: i64 = 1;
    for _ in 0..d {
        pw = pw.checked_mul(p).ok_or_else(|| {
            CoreError::InvalidParams("p^d overflows the exact character arithmetic".to_string())
        })?;
    }
    Ok(pw)
}

/// The tame-inertia character of a cyclic shape, through the valuation
/// oracle: solve `v_{i+1} = p v_i - (er - b_i)/e` cyclically in exact
/// rationals and read the exponent `n = e (p^d - 1) v_0` against the
/// level-`d` fundamental character.
pub fn tame_character(shape: &CyclicShape, params: &RingParams) -> Result<TameCharacter> {
    let d = shape.period();
    let p = params.p() as i64;
    let e = params.e as i64;
    let er = params.er() as i64;
    let pd = checked_pd(p, d)?;
    let modulus = pd - 1;

    // Eliminate: v_i = p^i v_0 - c_i with c_0 = 0 and
    // c_{i+1} = p c_i + (er - b_i)/e; closing the cycle gives
    // v_0 = c_d / (p^d - 1).
    let mut c = Ratio::new(0, 1);
    for &b in &shape.exponents {
        c = c * Ratio::new(p, 1) + Ratio::new(er - b as i64, e);
    }
    let v0 = c / Ratio::new(modulus, 1);
    let n_ratio = c * Ratio::new(e, 1);
    if !n_ratio.is_integer() {
        return Err(CoreError::InvalidParams(
            "the solved exponent is not an integer".to_string(),
        ));
    }
    let exponent = n_ratio.to_integer();
    Ok(TameCharacter {
        level: d,
        orbit: orbit_of(exponent, d, p, modulus),
        exponent,
        v0,
    })
}

/// [`tame_character`] evaluated on the shape of a digit class.
pub fn tame_character_of_digits(a: &DigitClass, params: &RingParams) -> Result<TameCharacter> {
    tame_character(&CyclicShape::of_digits(a, params)?, params)
}

/// The character of the dual object: exponent
/// `er (p^d - 1)/(p - 1) - n`. An involution on orbits.
pub fn dual_character(c: &TameCharacter, params: &RingParams) -> Result<TameCharacter> {
    let p = params.p() as i64;
    let e = params.e as i64;
    let er = params.er() as i64;
    let pd = checked_pd(p, c.level)?;
    let modulus = pd - 1;
    let tate = er * (modulus / (p - 1));
    let n = tate - c.orbit.first().map(|&x| x as i64).unwrap_or(0);
    Ok(TameCharacter {
        level: c.level,
        orbit: orbit_of(n, c.level, p, modulus),
        exponent: n,
        v0: Ratio::new(er, e * (p - 1)) - c.v0,
    })
}

/// The simple object of an explicit representative word (not
/// necessarily canonical): rank `lcm(len, h)`, `Fil` generated by
/// `u^{er - a_i} e_i`, `phi_r(u^{er - a_i} e_i) = (-1)^r e_{i+1}`,
/// `N = 0`, and the `E`-action `nu(lambda) e_i = lambda^{p^i} e_i`.
/// Prefer [`build_simple`]; this entry point exists to check
/// representative independence.
pub fn build_simple_from_word(
    word: &[u8],
    params: &RingParams,
    e_field: FiniteField,
) -> Result<FreeBreuilObject> {
    let p = params.p();
    let er = params.er();
    if er < p - 1 {
        return Err(CoreError::PreconditionFailed(format!(
            "the cyclic construction requires er >= p - 1 (er = {er}, p = {p})"
        )));
    }
    if word.is_empty() {
        return Err(CoreError::InvalidInput("empty digit word".to_string()));
    }
    if let Some(&bad) = word.iter().find(|&&a| a as usize >= p) {
        return Err(CoreError::InvalidInput(format!(
            "digit {bad} is out of range for p = {p}"
        )));
    }
    let h = e_field.f as usize;
    if e_field.p != params.ring.field.p || params.f() % h != 0 {
        return Err(CoreError::InvalidParams(format!(
            "E = F_{{{}^{}}} does not embed into the residue field",
            e_field.p, e_field.f
        )));
    }

    let ring = params.ring;
    let d_h = word.len().lcm(&h);
    let module = crate::module::ChainModule::free(ring, d_h);
    let sign = if params.r % 2 == 1 {
        ring.neg(&ring.one())
    } else {
        ring.one()
    };
    let fil_gens: Vec<_> = (0..d_h)
        .map(|i| module.scale(&ring.u_pow(er - word[i % word.len()] as usize), &module.gen(i)))
        .collect();
    let phi_vals: Vec<_> = (0..d_h)
        .map(|i| module.scale(&sign, &module.gen((i + 1) % d_h)))
        .collect();
    let obj = FreeBreuilObject::from_generators(
        params.clone(),
        d_h,
        &fil_gens,
        &phi_vals,
        Some(vec![module.zero(); d_h]),
    )?;

    // nu(g) e_i = g^{p^i} e_i through the canonical embedding E -> k.
    let gamma = FieldEmbedding::find(&e_field, &ring.field)?.map(e_field.generator());
    let cols: Vec<_> = (0..d_h)
        .map(|i| module.scale_field(ring.field.frobenius_iter(gamma, i as u32), &module.gen(i)))
        .collect();
    let nu = LinearMap::new(module.clone(), module, cols)?;
    Ok(obj.with_coeff(CoefficientAction::new(e_field, nu)))
}

/// The simple object `M(a)` of a digit class, built from its canonical
/// representative. See [`build_simple_from_word`] for the presentation.
pub fn build_simple(
    a: &DigitClass,
    params: &RingParams,
    e_field: FiniteField,
) -> Result<FreeBreuilObject> {
    if a.p != params.ring.field.p {
        return Err(CoreError::InvalidParams(
            "digit class characteristic differs from the ring".to_string(),
        ));
    }
    if a.h != e_field.f as usize {
        return Err(CoreError::InvalidParams(format!(
            "digit class has h = {} but E has degree {}",
            a.h, e_field.f
        )));
    }
    build_simple_from_word(&a.digits, params, e_field)
}

/// All canonical digit classes whose simple object has the given rank.
pub fn classes_of_rank(p: u8, h: usize, rank: usize) -> Vec<DigitClass> {
    let mut out: Vec<DigitClass> = Vec::new();
    for d in 1..=rank {
        if d.lcm(&h) != rank {
            continue;
        }
        let total = (p as u64).pow(d as u32);
        for code in 0..total {
            let mut word = Vec::with_capacity(d);
            let mut m = code;
            for _ in 0..d {
                word.push((m % p as u64) as u8);
                m /= p as u64;
            }
            let Ok(class) = canonicalize_digits(&word, p, h) else {
                continue;
            };
            if class.d() == d && !out.contains(&class) {
                out.push(class);
            }
        }
    }
    out
}

/// Searches the digit classes of matching rank for one whose simple
/// object is `E`-equivariantly isomorphic to `obj`; `None` means no
/// class matches. An object without a coefficient action is compared
/// with the scalar `F_p`-action attached. At most one class can match
/// (simples are pairwise non-isomorphic); this is asserted.
pub fn identify_simple(
    obj: &FreeBreuilObject,
    rng: &mut dyn rand_core::RngCore,
) -> Result<Option<DigitClass>> {
    if !obj.validate_object().all_passed() {
        return Err(CoreError::PreconditionFailed(
            "identification requires a valid object".to_string(),
        ));
    }
    let rank = obj.rank();
    if rank > MAX_IDENTIFY_RANK {
        return Err(CoreError::PreconditionFailed(format!(
            "rank {rank} exceeds the identification bound {MAX_IDENTIFY_RANK}"
        )));
    }
    if rank == 0 {
        return Ok(None);
    }
    let probe = match &obj.coeff {
        Some(_) => obj.clone(),
        None => obj
            .clone()
            .with_coeff(crate::coeff::scalar_action(&obj.module)),
    };
    let e_field = probe.coeff.as_ref().expect("just attached").e_field;
    let probe = BreuilObject::Free(probe);

    let mut found: Option<DigitClass> = None;
    for class in classes_of_rank(obj.params.ring.field.p, e_field.f as usize, rank) {
        let candidate = build_simple(&class, &obj.params, e_field)?;
        match crate::hom::find_isomorphism(&probe, &BreuilObject::Free(candidate), rng)? {
            crate::hom::IsoResult::Isomorphic(_) => {
                assert!(
                    found.is_none(),
                    "distinct digit classes matched the same object"
                );
                found = Some(class);
            }
            crate::hom::IsoResult::NotIsomorphic => {}
            crate::hom::IsoResult::Undetermined => {
                return Err(CoreError::PreconditionFailed(format!(
                    "isomorphism search against class {:?} was inconclusive",
                    class.digits
                )));
            }
        }
    }
    Ok(found)
}
