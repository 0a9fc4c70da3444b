//! Smith normal form over the chain ring, with tracked basis transforms.
//!
//! Over `S~` every matrix diagonalizes by row and column operations to
//! `diag(u^{v_1}, ..., u^{v_d})` with ascending valuations (the global
//! minimum-valuation entry is a valid pivot and clears its row and column
//! by exact division). Row operations rewrite relations and go untracked;
//! column operations change the generator basis and are tracked in both
//! directions, which is what quotient presentations and abstract chain
//! presentations of submodules need.

use crate::error::Result;
use crate::module::{
    echelonize_tracked, ChainModule, ModuleElement, SubmodulePresentation, TrackedEchelon,
};
use crate::ring::{RingElement, TruncatedRing};
use alloc::vec;
use alloc::vec::Vec;

/// Diagonalization result. `diag[j]` is the valuation of the relation on
/// the `j`-th transformed generator (`ring.n` when no relation touches it,
/// since `u^n = 0` is automatic).
#[derive(Debug, Clone)]
pub struct Snf {
    pub diag: Vec<usize>,
    /// `v[i][j]`: coefficient of old generator `i` in new generator `j`.
    pub v: Vec<Vec<RingElement>>,
    /// `w[j][i]`: coefficient of new generator `j` in old generator `i`.
    pub w: Vec<Vec<RingElement>>,
}

/// Diagonalizes the relation matrix `rows` (each row a length-`cols`
/// vector of ring elements).
pub fn smith_normal_form(ring: &TruncatedRing, cols: usize, rows: &[Vec<RingElement>]) -> Snf {
    let mut a: Vec<Vec<RingElement>> = rows
        .iter()
        .filter(|r| !r.iter().all(|x| ring.is_zero(x)))
        .cloned()
        .collect();
    let id = |n: usize| -> Vec<Vec<RingElement>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { ring.one() } else { ring.zero() })
                    .collect()
            })
            .collect()
    };
    let mut v = id(cols);
    let mut w = id(cols);
    let nrows = a.len();
    let steps = cols.min(nrows);

    for k in 0..steps {
        // Global minimum-valuation entry in the remaining block.
        let mut best: Option<(usize, usize, usize)> = None; // (val, row, col)
        for r in k..nrows {
            for c in k..cols {
                let val = ring.val(&a[r][c]);
                if val < ring.n && best.map_or(true, |(bv, _, _)| val < bv) {
                    best = Some((val, r, c));
                }
            }
        }
        let Some((val, r0, c0)) = best else { break };
        a.swap(k, r0);
        if c0 != k {
            for row in &mut a {
                row.swap(k, c0);
            }
            for row in &mut v {
                row.swap(k, c0);
            }
            w.swap(k, c0);
        }
        // Normalize the pivot to exactly u^val (row scaling).
        let unit = ring.div_u_pow(&a[k][k], val);
        let unit_inv = ring.inverse(&unit).expect("pivot valuation strips the unit");
        if unit_inv != ring.one() {
            for c in k..cols {
                a[k][c] = ring.mul(&unit_inv, &a[k][c]);
            }
        }
        // Clear the pivot column (row operations, untracked).
        for r in 0..nrows {
            if r == k {
                continue;
            }
            let q = ring.div_u_pow(&a[r][k], val);
            if !ring.is_zero(&q) {
                for c in k..cols {
                    let t = ring.mul(&q, &a[k][c]);
                    a[r][c] = ring.sub(&a[r][c], &t);
                }
            }
        }
        // Clear the pivot row (column operations, tracked: the op
        // `col_j -= q * col_k` rewrites generator `k` as `b_k + q b_j`).
        for c in 0..cols {
            if c == k {
                continue;
            }
            let q = ring.div_u_pow(&a[k][c], val);
            if !ring.is_zero(&q) {
                for row in &mut a {
                    let t = ring.mul(&q, &row[k]);
                    row[c] = ring.sub(&row[c], &t);
                }
                for i in 0..cols {
                    let t = ring.mul(&q, &v[i][c]);
                    v[i][k] = ring.add(&v[i][k], &t);
                }
                for i in 0..cols {
                    let t = ring.mul(&q, &w[k][i]);
                    w[c][i] = ring.sub(&w[c][i], &t);
                }
            }
        }
    }

    let mut diag = vec![ring.n; cols];
    for k in 0..steps.min(a.len()) {
        let val = ring.val(&a[k][k]);
        if val < ring.n {
            diag[k] = val;
        }
    }
    Snf { diag, v, w }
}

/// A quotient `ambient / sub`, presented as a chain module together with
/// the projection and a section.
#[derive(Debug, Clone)]
pub struct QuotientModule {
    pub ambient: ChainModule,
    pub module: ChainModule,
    /// Images in `ambient` of the quotient chain generators.
    pub section_gens: Vec<ModuleElement>,
    /// `proj[s][i]`: coefficient of quotient generator `s` in the class of
    /// ambient generator `i`.
    proj: Vec<Vec<RingElement>>,
}

impl QuotientModule {
    pub fn project(&self, x: &ModuleElement) -> ModuleElement {
        let ring = self.ambient.ring;
        let mut coords = vec![ring.zero(); self.module.rank()];
        for (s, row) in self.proj.iter().enumerate() {
            let mut acc = ring.zero();
            for (i, c) in row.iter().enumerate() {
                acc = ring.add(&acc, &ring.mul(c, &x.coords[i]));
            }
            coords[s] = acc;
        }
        self.module.element(coords).expect("projection coordinates are well-formed")
    }

    pub fn section(&self, q: &ModuleElement) -> ModuleElement {
        let mut acc = self.ambient.zero();
        for (s, g) in self.section_gens.iter().enumerate() {
            acc = self.ambient.add(&acc, &self.ambient.scale(&q.coords[s], g));
        }
        acc
    }
}

/// Presents `ambient / span(sub)` as an abstract chain module.
pub fn quotient_module(ambient: &ChainModule, sub: &SubmodulePresentation) -> QuotientModule {
    assert_eq!(&sub.ambient, ambient, "submodule of a different ambient");
    let ring = ambient.ring;
    let d = ambient.rank();
    let mut rows: Vec<Vec<RingElement>> = sub.rows.iter().map(|r| r.coords.clone()).collect();
    for i in 0..d {
        if ambient.orders[i] < ring.n {
            let mut row = vec![ring.zero(); d];
            row[i] = ring.u_pow(ambient.orders[i]);
            rows.push(row);
        }
    }
    let snf = smith_normal_form(&ring, d, &rows);
    // Surviving generators: diag > 0, sorted by order descending (stable).
    let mut surviving: Vec<(usize, usize)> = snf
        .diag
        .iter()
        .enumerate()
        .filter(|&(_, &o)| o > 0)
        .map(|(j, &o)| (o, j))
        .collect();
    surviving.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let orders: Vec<usize> = surviving.iter().map(|&(o, _)| o).collect();
    let module = ChainModule::new(ring, orders).expect("SNF orders are valid");
    let section_gens: Vec<ModuleElement> = surviving
        .iter()
        .map(|&(_, j)| {
            let coords = (0..d).map(|i| snf.v[i][j].clone()).collect();
            ambient.element(coords).expect("generator coordinates are well-formed")
        })
        .collect();
    let proj: Vec<Vec<RingElement>> = surviving
        .iter()
        .map(|&(_, j)| snf.w[j].clone())
        .collect();
    QuotientModule {
        ambient: ambient.clone(),
        module,
        section_gens,
        proj,
    }
}

/// A submodule of `ambient` presented as an abstract chain module on a
/// diagonalized generating set, with change-of-coordinates both ways.
#[derive(Debug, Clone)]
pub struct PresentedSubmodule {
    pub ambient: ChainModule,
    /// The abstract chain module isomorphic to the span.
    pub module: ChainModule,
    /// Images in `ambient` of the abstract chain generators.
    pub chain_gens: Vec<ModuleElement>,
    /// Original generators and their tracked echelon form (for `express`).
    gens: Vec<ModuleElement>,
    tracked: TrackedEchelon,
    /// `w[s][i]`: coefficient of chain generator `s` in original generator `i`.
    w: Vec<Vec<RingElement>>,
}

impl PresentedSubmodule {
    /// Coordinates of `x` in the abstract chain module, if `x` lies in the
    /// span.
    pub fn express(&self, x: &ModuleElement) -> Option<ModuleElement> {
        let ring = self.ambient.ring;
        let (residue, qs) = self.tracked.sub.reduce_tracked(x);
        if !self.ambient.is_zero(&residue) {
            return None;
        }
        // Coefficients over the original generators.
        let mut c = vec![ring.zero(); self.gens.len()];
        for (t, q) in qs.iter().enumerate() {
            if ring.is_zero(q) {
                continue;
            }
            for (j, coeff) in self.tracked.coeffs[t].iter().enumerate() {
                c[j] = ring.add(&c[j], &ring.mul(q, coeff));
            }
        }
        let mut coords = vec![ring.zero(); self.module.rank()];
        for (s, row) in self.w.iter().enumerate() {
            let mut acc = ring.zero();
            for (i, wc) in row.iter().enumerate() {
                acc = ring.add(&acc, &ring.mul(wc, &c[i]));
            }
            coords[s] = acc;
        }
        Some(self.module.element(coords).expect("well-formed coordinates"))
    }

    /// The ambient element represented by abstract coordinates `q`.
    pub fn section(&self, q: &ModuleElement) -> ModuleElement {
        let mut acc = self.ambient.zero();
        for (s, g) in self.chain_gens.iter().enumerate() {
            acc = self.ambient.add(&acc, &self.ambient.scale(&q.coords[s], g));
        }
        acc
    }

    pub fn contains(&self, x: &ModuleElement) -> bool {
        self.tracked.sub.contains(x)
    }

    pub fn presentation(&self) -> &SubmodulePresentation {
        &self.tracked.sub
    }
}

/// An `F_p`-basis of the syzygies of `gens`: coefficient vectors `(a_i)`
/// with `sum_i a_i * gens[i] = 0`. Every syzygy is an `F_p`-combination of
/// the returned ones (and their `S~`-span is the full syzygy module).
pub fn syzygy_basis(ambient: &ChainModule, gens: &[ModuleElement]) -> Vec<Vec<RingElement>> {
    let ring = ambient.ring;
    let m = gens.len();
    // Source of the evaluation map: (S~)^m, flattened over F_p.
    let src = ChainModule::free(ring, m);
    let ds = src.dim_fp();
    let dt = ambient.dim_fp();
    let p = ring.field.p;
    let mut mat = crate::fp::FpMat::zero(p, dt, ds);
    for j in 0..ds {
        let mut unit = vec![0u8; ds];
        unit[j] = 1;
        let s = src.delinearize(&unit);
        let mut img = ambient.zero();
        for (i, g) in gens.iter().enumerate() {
            img = ambient.add(&img, &ambient.scale(&s.coords[i], g));
        }
        let lin = ambient.linearize(&img);
        for i in 0..dt {
            mat.set(i, j, lin[i]);
        }
    }
    let ns = mat.nullspace();
    (0..ns.rows)
        .map(|k| src.delinearize(ns.row(k)).coords)
        .collect()
}

/// Presents the span of `gens` as an abstract chain module. Syzygies are
/// found over `F_p` (the `F_p`-nullspace of the evaluation map generates
/// the syzygy module over `S~`) and diagonalized by [`smith_normal_form`].
pub fn presented_from_generators(
    ambient: &ChainModule,
    gens: &[ModuleElement],
) -> Result<PresentedSubmodule> {
    let ring = ambient.ring;
    let m = gens.len();
    let rows = syzygy_basis(ambient, gens);
    let snf = smith_normal_form(&ring, m, &rows);
    let mut surviving: Vec<(usize, usize)> = snf
        .diag
        .iter()
        .enumerate()
        .filter(|&(_, &o)| o > 0)
        .map(|(j, &o)| (o, j))
        .collect();
    surviving.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let orders: Vec<usize> = surviving.iter().map(|&(o, _)| o).collect();
    let module = ChainModule::new(ring, orders)?;
    let chain_gens: Vec<ModuleElement> = surviving
        .iter()
        .map(|&(_, j)| {
            let mut acc = ambient.zero();
            for (i, g) in gens.iter().enumerate() {
                acc = ambient.add(&acc, &ambient.scale(&snf.v[i][j], g));
            }
            acc
        })
        .collect();
    let w: Vec<Vec<RingElement>> = surviving.iter().map(|&(_, j)| snf.w[j].clone()).collect();
    Ok(PresentedSubmodule {
        ambient: ambient.clone(),
        module,
        chain_gens,
        gens: gens.to_vec(),
        tracked: echelonize_tracked(ambient, gens),
        w,
    })
}
