//! Chain modules over `S~` and canonical echelon presentations of their
//! submodules.
//!
//! A chain module is a finite direct sum `⊕_i S~/u^{n_i}` with the orders
//! `n_i` listed in descending order. Submodules are presented by a
//! canonical echelon generating set (a Howell-style normal form adapted to
//! the chain ring): one pivot per ambient coordinate, pivot entries exactly
//! `u^v`, annihilator shadows absorbed, and all non-pivot entries at pivot
//! coordinates reduced modulo the pivot. Equal submodules therefore have
//! identical presentations, which the rest of the crate leans on for
//! deduplication and exact-equality tests.
//!
//! Every reduction step is `F_p`-linear, so canonical residues double as
//! the building blocks of the linear systems solved elsewhere.

use crate::error::{CoreError, Result};
use crate::fp::FpMat;
use crate::ring::{RingElement, TruncatedRing};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// `⊕_i S~/u^{n_i}` with `orders` descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainModule {
    pub ring: TruncatedRing,
    pub orders: Vec<usize>,
}

/// An element of a [`ChainModule`]; `coords[i]` is always reduced modulo
/// `u^{n_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleElement {
    pub coords: Vec<RingElement>,
}

/// A submodule in canonical echelon form. `rows` are the canonical
/// generators; `pivots[t] = (coordinate, valuation)` with coordinates
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmodulePresentation {
    pub ambient: ChainModule,
    pub rows: Vec<ModuleElement>,
    pub pivots: Vec<(usize, usize)>,
}

impl ChainModule {
    pub fn new(ring: TruncatedRing, orders: Vec<usize>) -> Result<Self> {
        for w in orders.windows(2) {
            if w[0] < w[1] {
                return Err(CoreError::InvalidParams(
                    "chain orders must be listed in descending order".into(),
                ));
            }
        }
        if orders.iter().any(|&n| n == 0 || n > ring.n) {
            return Err(CoreError::InvalidParams(format!(
                "chain orders must lie in 1..={}",
                ring.n
            )));
        }
        Ok(ChainModule { ring, orders })
    }

    /// The free module `S~^rank`.
    pub fn free(ring: TruncatedRing, rank: usize) -> Self {
        ChainModule {
            orders: vec![ring.n; rank],
            ring,
        }
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn is_free(&self) -> bool {
        self.orders.iter().all(|&n| n == self.ring.n)
    }

    /// Dimension over `F_p`.
    pub fn dim_fp(&self) -> usize {
        self.ring.field.f as usize * self.orders.iter().sum::<usize>()
    }

    pub fn zero(&self) -> ModuleElement {
        ModuleElement {
            coords: vec![self.ring.zero(); self.rank()],
        }
    }

    pub fn is_zero(&self, x: &ModuleElement) -> bool {
        x.coords.iter().all(|c| self.ring.is_zero(c))
    }

    /// The `i`-th distinguished generator.
    pub fn gen(&self, i: usize) -> ModuleElement {
        let mut x = self.zero();
        x.coords[i] = self.ring.one();
        x
    }

    /// Builds an element, reducing each coordinate modulo its order.
    pub fn element(&self, coords: Vec<RingElement>) -> Result<ModuleElement> {
        if coords.len() != self.rank() {
            return Err(CoreError::InvalidInput(format!(
                "element has {} coordinates, module has rank {}",
                coords.len(),
                self.rank()
            )));
        }
        let mut x = ModuleElement { coords };
        self.reduce_in_place(&mut x);
        Ok(x)
    }

    fn reduce_in_place(&self, x: &mut ModuleElement) {
        for (i, c) in x.coords.iter_mut().enumerate() {
            *c = self.ring.rem_u_pow(c, self.orders[i]);
        }
    }

    pub fn add(&self, a: &ModuleElement, b: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| self.ring.add(x, y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &ModuleElement, b: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| self.ring.sub(x, y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: a.coords.iter().map(|x| self.ring.neg(x)).collect(),
        }
    }

    /// `s * a` for `s` in `S~`.
    pub fn scale(&self, s: &RingElement, a: &ModuleElement) -> ModuleElement {
        let mut x = ModuleElement {
            coords: a.coords.iter().map(|c| self.ring.mul(s, c)).collect(),
        };
        self.reduce_in_place(&mut x);
        x
    }

    /// Scalar action of the coefficient field.
    pub fn scale_field(&self, a: crate::field::FieldElement, x: &ModuleElement) -> ModuleElement {
        ModuleElement {
            coords: x.coords.iter().map(|c| self.ring.scale(a, c)).collect(),
        }
    }

    // ---- F_p linearization ----

    /// Offsets of each generator block in the flat `F_p` coordinate vector.
    fn prefix(&self) -> Vec<usize> {
        let mut acc = 0;
        let mut out = Vec::with_capacity(self.rank() + 1);
        for &n in &self.orders {
            out.push(acc);
            acc += n;
        }
        out.push(acc);
        out
    }

    /// Flattens an element to its `F_p` coordinate vector of length
    /// [`Self::dim_fp`]: generator-major, then `u`-power, then field basis.
    pub fn linearize(&self, x: &ModuleElement) -> Vec<u8> {
        let f = self.ring.field.f as usize;
        let prefix = self.prefix();
        let mut out = vec![0u8; self.dim_fp()];
        for (i, c) in x.coords.iter().enumerate() {
            for j in 0..self.orders[i] {
                for t in 0..f {
                    out[(prefix[i] + j) * f + t] = c.c[j].c[t];
                }
            }
        }
        out
    }

    /// Inverse of [`Self::linearize`].
    pub fn delinearize(&self, v: &[u8]) -> ModuleElement {
        assert_eq!(v.len(), self.dim_fp());
        let f = self.ring.field.f as usize;
        let prefix = self.prefix();
        let mut x = self.zero();
        for i in 0..self.rank() {
            for j in 0..self.orders[i] {
                let mut a = self.ring.field.zero();
                for t in 0..f {
                    a.c[t] = v[(prefix[i] + j) * f + t];
                }
                x.coords[i].c[j] = a;
            }
        }
        x
    }

    /// An `F_p` spanning set of a list of generators' `S~`-span: all
    /// nonzero `u^j * (field-basis scalar) * g`.
    pub fn fp_span_rows(&self, gens: &[ModuleElement]) -> Vec<Vec<u8>> {
        let f = self.ring.field.f as usize;
        let maxn = self.ring.n;
        let mut rows = Vec::new();
        for g in gens {
            for j in 0..maxn {
                let uj = self.ring.u_pow(j);
                let shifted = self.scale(&uj, g);
                if self.is_zero(&shifted) {
                    break;
                }
                for t in 0..f {
                    let mut basis = self.ring.field.zero();
                    basis.c[t] = 1;
                    let v = self.scale_field(basis, &shifted);
                    if !self.is_zero(&v) {
                        rows.push(self.linearize(&v));
                    }
                }
            }
        }
        rows
    }

    /// `F_p`-dimension of the span of `gens`.
    pub fn span_dim_fp(&self, gens: &[ModuleElement]) -> usize {
        let rows = self.fp_span_rows(gens);
        if rows.is_empty() {
            return 0;
        }
        FpMat::from_rows(self.ring.field.p, &rows).rank()
    }
}

// ---- canonical echelon form ----

/// Echelonization with coefficient tracking: `rows[t] = sum_j coeffs[t][j] * gens[j]`.
#[derive(Debug, Clone)]
pub struct TrackedEchelon {
    pub sub: SubmodulePresentation,
    pub coeffs: Vec<Vec<RingElement>>,
}

/// Canonical echelon presentation of the span of `gens`.
pub fn echelonize(ambient: &ChainModule, gens: &[ModuleElement]) -> SubmodulePresentation {
    echelonize_tracked(ambient, gens).sub
}

/// Like [`echelonize`], remembering how each canonical row is formed from
/// the input generators.
pub fn echelonize_tracked(ambient: &ChainModule, gens: &[ModuleElement]) -> TrackedEchelon {
    let ring = ambient.ring;
    let m = gens.len();
    let unit_coeff = |j: usize| -> Vec<RingElement> {
        let mut c = vec![ring.zero(); m];
        if j < m {
            c[j] = ring.one();
        }
        c
    };
    // Pool of (element, expression in the original generators).
    let mut pool: Vec<(ModuleElement, Vec<RingElement>)> = gens
        .iter()
        .enumerate()
        .map(|(j, g)| (g.clone(), unit_coeff(j)))
        .collect();
    let mut rows: Vec<(ModuleElement, Vec<RingElement>)> = Vec::new();
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    for i in 0..ambient.rank() {
        let n_i = ambient.orders[i];
        // Minimal valuation at coordinate i across the pool.
        let mut best: Option<(usize, usize)> = None; // (valuation, pool index)
        for (idx, (el, _)) in pool.iter().enumerate() {
            let v = ring.val(&el.coords[i]);
            if v < n_i && best.map_or(true, |(bv, _)| v < bv) {
                best = Some((v, idx));
            }
        }
        let Some((v, idx)) = best else { continue };
        let (mut piv, mut piv_c) = pool.swap_remove(idx);
        // Normalize so the pivot entry is exactly u^v.
        let unit = ring.div_u_pow(&piv.coords[i], v);
        let unit_inv = ring.inverse(&unit).expect("valuation strips the unit");
        if unit_inv != ring.one() {
            piv = ambient.scale(&unit_inv, &piv);
            for c in &mut piv_c {
                *c = ring.mul(&unit_inv, c);
            }
        }
        // Eliminate coordinate i from the rest of the pool (their
        // valuations at i are >= v, so division is exact).
        for (el, co) in &mut pool {
            let q = ring.div_u_pow(&el.coords[i], v);
            if !ring.is_zero(&q) {
                *el = ambient.sub(el, &ambient.scale(&q, &piv));
                for (x, y) in co.iter_mut().zip(&piv_c) {
                    *x = ring.sub(x, &ring.mul(&q, y));
                }
            }
        }
        // Annihilator shadow u^{n_i - v} * pivot keeps the span data that
        // survives past this coordinate.
        let shadow_pow = ring.u_pow(n_i - v);
        let shadow = ambient.scale(&shadow_pow, &piv);
        if !ambient.is_zero(&shadow) {
            let shadow_c = piv_c.iter().map(|c| ring.mul(&shadow_pow, c)).collect();
            pool.push((shadow, shadow_c));
        }
        rows.push((piv, piv_c));
        pivots.push((i, v));
    }

    // Cross-reduction: entries of earlier rows at later pivots are reduced
    // modulo the pivot valuation, making the form canonical.
    for s in 0..rows.len() {
        for t in s + 1..rows.len() {
            let (i_t, v_t) = pivots[t];
            let q = ring.div_u_pow(&rows[s].0.coords[i_t], v_t);
            if !ring.is_zero(&q) {
                let (head, tail) = rows.split_at_mut(t);
                let (el_s, co_s) = &mut head[s];
                let (el_t, co_t) = &tail[0];
                *el_s = ambient.sub(el_s, &ambient.scale(&q, el_t));
                for (x, y) in co_s.iter_mut().zip(co_t) {
                    *x = ring.sub(x, &ring.mul(&q, y));
                }
            }
        }
    }

    let (rows, coeffs): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    TrackedEchelon {
        sub: SubmodulePresentation {
            ambient: ambient.clone(),
            rows,
            pivots,
        },
        coeffs,
    }
}

impl SubmodulePresentation {
    pub fn zero(ambient: &ChainModule) -> Self {
        SubmodulePresentation {
            ambient: ambient.clone(),
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// The whole ambient module as a presentation.
    pub fn full(ambient: &ChainModule) -> Self {
        let gens: Vec<_> = (0..ambient.rank()).map(|i| ambient.gen(i)).collect();
        echelonize(ambient, &gens)
    }

    /// Canonical residue of `x` modulo this submodule; `x` is a member
    /// exactly when the residue is zero. The residue map is `F_p`-linear.
    pub fn reduce(&self, x: &ModuleElement) -> ModuleElement {
        self.reduce_tracked(x).0
    }

    /// Residue plus the coefficients used against the canonical rows:
    /// `x = residue + sum_t q_t * rows[t]`.
    pub fn reduce_tracked(&self, x: &ModuleElement) -> (ModuleElement, Vec<RingElement>) {
        let ring = self.ambient.ring;
        let mut cur = x.clone();
        let mut qs = Vec::with_capacity(self.rows.len());
        for (t, &(i, v)) in self.pivots.iter().enumerate() {
            let q = ring.div_u_pow(&cur.coords[i], v);
            if !ring.is_zero(&q) {
                cur = self.ambient.sub(&cur, &self.ambient.scale(&q, &self.rows[t]));
            }
            qs.push(q);
        }
        (cur, qs)
    }

    pub fn contains(&self, x: &ModuleElement) -> bool {
        self.ambient.is_zero(&self.reduce(x))
    }

    /// `F_p`-dimension of the submodule (computed from the pivot profile;
    /// cross-checked against linearized rank in tests).
    pub fn dim_fp(&self) -> usize {
        let f = self.ambient.ring.field.f as usize;
        self.pivots
            .iter()
            .map(|&(i, v)| f * (self.ambient.orders[i] - v))
            .sum()
    }

    pub fn is_zero_module(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim_fp() == self.ambient.dim_fp()
    }

    /// Whether `other` is contained in `self`.
    pub fn contains_submodule(&self, other: &SubmodulePresentation) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }
}

/// Set-level operations on submodules of a common ambient module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Intersect,
}

/// Sum of two submodules.
pub fn submodule_sum(
    a: &SubmodulePresentation,
    b: &SubmodulePresentation,
) -> SubmodulePresentation {
    assert_eq!(a.ambient, b.ambient, "sum requires a common ambient module");
    let mut gens = a.rows.clone();
    gens.extend(b.rows.iter().cloned());
    echelonize(&a.ambient, &gens)
}

/// Intersection of two submodules, via `F_p`-linearization (both spans are
/// `F_p`-subspaces closed under the `S~`-action, so their `F_p`-intersection
/// is again a submodule).
pub fn submodule_intersect(
    a: &SubmodulePresentation,
    b: &SubmodulePresentation,
) -> SubmodulePresentation {
    assert_eq!(a.ambient, b.ambient, "intersection requires a common ambient module");
    let amb = &a.ambient;
    let p = amb.ring.field.p;
    let ra = amb.fp_span_rows(&a.rows);
    let rb = amb.fp_span_rows(&b.rows);
    if ra.is_empty() || rb.is_empty() {
        return SubmodulePresentation::zero(amb);
    }
    let d = amb.dim_fp();
    // Columns: spanning vectors of a, then of b; rows: ambient coordinates.
    let mut mat = FpMat::zero(p, d, ra.len() + rb.len());
    for (j, v) in ra.iter().enumerate() {
        for i in 0..d {
            mat.set(i, j, v[i]);
        }
    }
    for (j, v) in rb.iter().enumerate() {
        for i in 0..d {
            mat.set(i, ra.len() + j, crate::fp::fp_neg(p, v[i]));
        }
    }
    let ns = mat.nullspace();
    let mut gens = Vec::new();
    for k in 0..ns.rows {
        let alpha = &ns.row(k)[..ra.len()];
        let mut vec = vec![0u8; d];
        for (j, &aj) in alpha.iter().enumerate() {
            if aj != 0 {
                for i in 0..d {
                    vec[i] = crate::fp::fp_add(p, vec[i], crate::fp::fp_mul(p, aj, ra[j][i]));
                }
            }
        }
        let el = amb.delinearize(&vec);
        if !amb.is_zero(&el) {
            gens.push(el);
        }
    }
    echelonize(amb, &gens)
}

/// Spec-level dispatcher over [`CombineOp`]. (Quotients, which change the
/// ambient module, live in [`crate::snf::quotient_module`].)
pub fn combine_submodules(
    a: &SubmodulePresentation,
    b: &SubmodulePresentation,
    op: CombineOp,
) -> SubmodulePresentation {
    match op {
        CombineOp::Sum => submodule_sum(a, b),
        CombineOp::Intersect => submodule_intersect(a, b),
    }
}

/// Expresses `target` as an `S~`-combination of `gens`, or reports
/// non-membership. On success, `target = sum_i out[i] * gens[i]` exactly.
pub fn solve_linear(
    ambient: &ChainModule,
    gens: &[ModuleElement],
    target: &ModuleElement,
) -> Option<Vec<RingElement>> {
    let tracked = echelonize_tracked(ambient, gens);
    let (residue, qs) = tracked.sub.reduce_tracked(target);
    if !ambient.is_zero(&residue) {
        return None;
    }
    let ring = ambient.ring;
    let mut out = vec![ring.zero(); gens.len()];
    for (t, q) in qs.iter().enumerate() {
        if ring.is_zero(q) {
            continue;
        }
        for (j, c) in tracked.coeffs[t].iter().enumerate() {
            out[j] = ring.add(&out[j], &ring.mul(q, c));
        }
    }
    Some(out)
}

/// Preimage of the span of `target_sub` under the `F_p`-linear map with
/// matrix `map` (columns indexed by the source's flat coordinates, rows by
/// the target's): returns the submodule `{x : map(x) in target_sub}` of
/// `source`. The map must be the linearization of an `S~`-semilinear map so
/// that the preimage is a submodule.
pub fn preimage_submodule(
    source: &ChainModule,
    map: &FpMat,
    target_sub: &SubmodulePresentation,
) -> SubmodulePresentation {
    let p = source.ring.field.p;
    let ds = source.dim_fp();
    assert_eq!(map.cols, ds);
    let span = target_sub.ambient.fp_span_rows(&target_sub.rows);
    // Solve map * x = sum_j beta_j span_j  <=>  [map | -span] (x, beta)^T = 0.
    let cols = ds + span.len();
    let mut mat = FpMat::zero(p, map.rows, cols);
    for i in 0..map.rows {
        for j in 0..ds {
            mat.set(i, j, map.at(i, j));
        }
        for (j, v) in span.iter().enumerate() {
            mat.set(i, ds + j, crate::fp::fp_neg(p, v[i]));
        }
    }
    let ns = mat.nullspace();
    let mut gens = Vec::new();
    for k in 0..ns.rows {
        let x = &ns.row(k)[..ds];
        let el = source.delinearize(x);
        if !source.is_zero(&el) {
            gens.push(el);
        }
    }
    echelonize(source, &gens)
}

/// Enumerates every submodule of `ambient` (canonical presentations).
///
/// Exponential in the ambient size; intended for small search spaces such
/// as rank-2 modules over `F_3[u]/u^6`. Errors out when the raw candidate
/// count would exceed `10^7`.
pub fn enumerate_submodules(ambient: &ChainModule) -> Result<Vec<SubmodulePresentation>> {
    let ring = ambient.ring;
    let p = ring.field.p as u64;
    let f = ring.field.f as u32;
    let rank = ambient.rank();

    // Candidate generator tuples are built per pivot profile; dedupe by
    // canonical form.
    let mut seen = alloc::collections::BTreeMap::<Vec<Vec<Vec<u8>>>, usize>::new();
    let mut out: Vec<SubmodulePresentation> = vec![SubmodulePresentation::zero(ambient)];
    let key_of = |s: &SubmodulePresentation| -> Vec<Vec<Vec<u8>>> {
        s.rows
            .iter()
            .map(|r| r.coords.iter().map(|c| {
                let mut flat = Vec::new();
                for a in &c.c {
                    flat.extend_from_slice(&a.c);
                }
                flat
            }).collect())
            .collect()
    };
    seen.insert(key_of(&out[0]), 0);

    // All nonempty pivot profiles: strictly increasing coordinates with a
    // valuation below the coordinate's order.
    let mut profiles: Vec<Vec<(usize, usize)>> = Vec::new();
    fn extend(
        ambient: &ChainModule,
        from: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        for i in from..ambient.rank() {
            for v in 0..ambient.orders[i] {
                cur.push((i, v));
                out.push(cur.clone());
                extend(ambient, i + 1, cur, out);
                cur.pop();
            }
        }
    }
    extend(ambient, 0, &mut Vec::new(), &mut profiles);

    for profile in profiles {
        // Free slots: for each row t and coordinate j > i_t, entries are
        // free modulo u^{v_s} at later pivot coordinates and modulo
        // u^{n_j} elsewhere.
        let mut slots: Vec<(usize, usize, usize)> = Vec::new(); // (row, coord, modulus)
        for (t, &(i_t, _)) in profile.iter().enumerate() {
            for j in i_t + 1..rank {
                let cap = profile
                    .iter()
                    .find(|&&(i_s, _)| i_s == j)
                    .map(|&(_, v_s)| v_s)
                    .unwrap_or(ambient.orders[j]);
                if cap > 0 {
                    slots.push((t, j, cap));
                }
            }
        }
        let total: u64 = slots
            .iter()
            .try_fold(1u64, |acc, &(_, _, cap)| {
                let size = p.checked_pow(f * cap as u32)?;
                acc.checked_mul(size)
            })
            .ok_or_else(|| CoreError::PreconditionFailed("submodule enumeration too large".into()))?;
        if total > 10_000_000 {
            return Err(CoreError::PreconditionFailed(
                "submodule enumeration too large".into(),
            ));
        }
        for mut enc in 0..total {
            let mut rows: Vec<ModuleElement> = profile
                .iter()
                .map(|&(i_t, v_t)| {
                    let mut el = ambient.zero();
                    el.coords[i_t] = ring.u_pow(v_t);
                    el
                })
                .collect();
            for &(t, j, cap) in &slots {
                let size = p.pow(f * cap as u32);
                let mut rem = enc % size;
                enc /= size;
                // Little-endian digits fill coefficients (u-power major).
                let mut coeff = ring.zero();
                for jj in 0..cap {
                    for tt in 0..f as usize {
                        coeff.c[jj].c[tt] = (rem % p) as u8;
                        rem /= p;
                    }
                }
                rows[t].coords[j] = coeff;
            }
            let cand = echelonize(ambient, &rows);
            let key = key_of(&cand);
            if !seen.contains_key(&key) {
                seen.insert(key, out.len());
                out.push(cand);
            }
        }
    }
    Ok(out)
}
