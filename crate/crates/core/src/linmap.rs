//! Maps between chain modules: `S~`-linear maps, twisted (semilinear)
//! maps, and monodromy-type differential operators.
//!
//! A map is stored by its values on the distinguished chain generators.
//! Everything here is `F_p`-linear, so each map flattens to an
//! [`FpMat`](crate::fp::FpMat) when a kernel, preimage, or solve is needed.

use crate::error::{CoreError, Result};
use crate::field::FieldElement;
use crate::fp::FpMat;
use crate::module::{echelonize, ChainModule, ModuleElement, SubmodulePresentation};
use crate::ring::{RingElement, TruncatedRing};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Coordinate pre-twist of a semilinear map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Twist {
    /// `s -> phi(s)`: the ring Frobenius (coefficients to the `p`, `u -> u^p`).
    Frobenius,
    /// `s(u) -> s(w u)` for a scalar `w` (a Galois twist of the ramified
    /// variable).
    UTwist(FieldElement),
}

/// Applies a twist to a ring element.
pub fn apply_twist(ring: &TruncatedRing, twist: &Twist, s: &RingElement) -> RingElement {
    match twist {
        Twist::Frobenius => ring.frobenius_ring(s),
        Twist::UTwist(w) => ring.twist_u(s, *w),
    }
}

/// An `S~`-linear map, stored by the images of the source generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    pub source: ChainModule,
    pub target: ChainModule,
    pub cols: Vec<ModuleElement>,
}

impl LinearMap {
    pub fn new(source: ChainModule, target: ChainModule, cols: Vec<ModuleElement>) -> Result<Self> {
        let map = LinearMap { source, target, cols };
        map.validate()?;
        Ok(map)
    }

    /// Checks the map is well-defined: each generator's annihilator must
    /// kill its image.
    pub fn validate(&self) -> Result<()> {
        if self.cols.len() != self.source.rank() {
            return Err(CoreError::InvalidInput(format!(
                "map has {} columns for a rank-{} source",
                self.cols.len(),
                self.source.rank()
            )));
        }
        for (i, col) in self.cols.iter().enumerate() {
            let ann = self.source.orders[i];
            let killed = self.target.scale(&self.target.ring.u_pow(ann), col);
            if !self.target.is_zero(&killed) {
                return Err(CoreError::InvalidInput(format!(
                    "not well-defined: u^{ann} * image of generator {i} is nonzero"
                )));
            }
        }
        Ok(())
    }

    pub fn zero(source: ChainModule, target: ChainModule) -> Self {
        let cols = vec![target.zero(); source.rank()];
        LinearMap { source, target, cols }
    }

    pub fn identity(module: ChainModule) -> Self {
        let cols = (0..module.rank()).map(|i| module.gen(i)).collect();
        LinearMap {
            source: module.clone(),
            target: module,
            cols,
        }
    }

    pub fn apply(&self, x: &ModuleElement) -> ModuleElement {
        let mut acc = self.target.zero();
        for (i, col) in self.cols.iter().enumerate() {
            acc = self.target.add(&acc, &self.target.scale(&x.coords[i], col));
        }
        acc
    }

    /// `self . inner` (apply `inner` first).
    pub fn compose(&self, inner: &LinearMap) -> LinearMap {
        assert_eq!(self.source, inner.target, "composition mismatch");
        let cols = inner.cols.iter().map(|c| self.apply(c)).collect();
        LinearMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            cols,
        }
    }

    pub fn add(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| self.target.add(a, b))
            .collect();
        LinearMap {
            source: self.source.clone(),
            target: self.target.clone(),
            cols,
        }
    }

    /// Reconstructs the linear map with the given flat `F_p` matrix
    /// (rows: target coordinates, columns: source coordinates). The matrix
    /// must come from an `S~`-linear map for the result to be one.
    pub fn from_fp_matrix(source: &ChainModule, target: &ChainModule, mat: &FpMat) -> LinearMap {
        let cols = (0..source.rank())
            .map(|i| {
                let v = source.linearize(&source.gen(i));
                target.delinearize(&mat.mul_vec(&v))
            })
            .collect();
        LinearMap {
            source: source.clone(),
            target: target.clone(),
            cols,
        }
    }

    /// Scales by the prime-field constant `lambda`.
    pub fn scale_fp(&self, lambda: u8) -> LinearMap {
        let scalar = self.target.ring.field.scalar(lambda);
        let cols = self
            .cols
            .iter()
            .map(|c| self.target.scale_field(scalar, c))
            .collect();
        LinearMap {
            source: self.source.clone(),
            target: self.target.clone(),
            cols,
        }
    }

    /// Flattens to an `F_p` matrix (rows: target coordinates, columns:
    /// source coordinates).
    pub fn to_fp_matrix(&self) -> FpMat {
        fp_matrix_of(&self.source, &self.target, |x| self.apply(x))
    }

    /// The kernel as a canonical submodule of the source.
    pub fn kernel_submodule(&self) -> SubmodulePresentation {
        kernel_of_fp(&self.source, &self.to_fp_matrix())
    }

    /// The `S~`-span of the image, as a canonical submodule of the target.
    pub fn span_image(&self) -> SubmodulePresentation {
        echelonize(&self.target, &self.cols)
    }
}

/// A twisted-linear map: `x = sum s_i g_i  ->  sum twist(s_i) cols[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilinearMap {
    pub source: ChainModule,
    pub target: ChainModule,
    pub twist: Twist,
    pub cols: Vec<ModuleElement>,
}

impl SemilinearMap {
    pub fn new(
        source: ChainModule,
        target: ChainModule,
        twist: Twist,
        cols: Vec<ModuleElement>,
    ) -> Result<Self> {
        let map = SemilinearMap {
            source,
            target,
            twist,
            cols,
        };
        map.validate()?;
        Ok(map)
    }

    /// Well-definedness: `twist(u^{n_i})` must kill the `i`-th image.
    pub fn validate(&self) -> Result<()> {
        if self.cols.len() != self.source.rank() {
            return Err(CoreError::InvalidInput(format!(
                "map has {} columns for a rank-{} source",
                self.cols.len(),
                self.source.rank()
            )));
        }
        let ring = self.target.ring;
        for (i, col) in self.cols.iter().enumerate() {
            let ann = apply_twist(&ring, &self.twist, &self.source.ring.u_pow(self.source.orders[i]));
            let killed = self.target.scale(&ann, col);
            if !self.target.is_zero(&killed) {
                return Err(CoreError::InvalidInput(format!(
                    "not well-defined: twisted annihilator of generator {i} has nonzero image"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &ModuleElement) -> ModuleElement {
        let ring = self.target.ring;
        let mut acc = self.target.zero();
        for (i, col) in self.cols.iter().enumerate() {
            let s = apply_twist(&ring, &self.twist, &x.coords[i]);
            acc = self.target.add(&acc, &self.target.scale(&s, col));
        }
        acc
    }

    pub fn to_fp_matrix(&self) -> FpMat {
        fp_matrix_of(&self.source, &self.target, |x| self.apply(x))
    }

    pub fn kernel_submodule(&self) -> SubmodulePresentation {
        kernel_of_fp(&self.source, &self.to_fp_matrix())
    }

    /// The `S~`-span of the image (the image itself is only a
    /// `twist(S~)`-submodule; the span is what the closures use).
    pub fn span_image(&self) -> SubmodulePresentation {
        echelonize(&self.target, &self.cols)
    }
}

/// A differential operator of Leibniz type over the derivation
/// `N_ring = -u d/du`:
///
/// `N(sum s_i g_i) = sum s_i vals[i] + sum scale * N_ring(s_i) * g_i`.
///
/// `scale = 1` gives the monodromy operator on an object's underlying
/// module; `scale = u^e` is the filtration-side variant (the Leibniz
/// defect the compatibility diagrams require).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NOperator {
    pub module: ChainModule,
    pub vals: Vec<ModuleElement>,
    pub scale: RingElement,
}

impl NOperator {
    pub fn new(module: ChainModule, vals: Vec<ModuleElement>, scale: RingElement) -> Result<Self> {
        let op = NOperator { module, vals, scale };
        op.validate()?;
        Ok(op)
    }

    /// The zero operator (pure Leibniz action on coordinates).
    pub fn zero(module: ChainModule, scale: RingElement) -> Self {
        let vals = vec![module.zero(); module.rank()];
        NOperator { module, vals, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vals.len() != self.module.rank() {
            return Err(CoreError::InvalidInput(format!(
                "operator has {} values for a rank-{} module",
                self.vals.len(),
                self.module.rank()
            )));
        }
        for (i, val) in self.vals.iter().enumerate() {
            let ann = self.module.orders[i];
            let killed = self.module.scale(&self.module.ring.u_pow(ann), val);
            if !self.module.is_zero(&killed) {
                return Err(CoreError::InvalidInput(format!(
                    "not well-defined: u^{ann} * N(generator {i}) is nonzero"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &ModuleElement) -> ModuleElement {
        let ring = self.module.ring;
        let mut acc = self.module.zero();
        for (i, val) in self.vals.iter().enumerate() {
            acc = self.module.add(&acc, &self.module.scale(&x.coords[i], val));
            let leib = ring.mul(&self.scale, &ring.n_ring(&x.coords[i]));
            let mut term = self.module.zero();
            term.coords[i] = leib;
            acc = self.module.add(&acc, &self.module.element(term.coords).unwrap());
        }
        acc
    }

    pub fn to_fp_matrix(&self) -> FpMat {
        fp_matrix_of(&self.module, &self.module, |x| self.apply(x))
    }
}

/// Flattens any `F_p`-linear element map to a matrix.
pub fn fp_matrix_of(
    source: &ChainModule,
    target: &ChainModule,
    mut apply: impl FnMut(&ModuleElement) -> ModuleElement,
) -> FpMat {
    let p = source.ring.field.p;
    let ds = source.dim_fp();
    let dt = target.dim_fp();
    let mut mat = FpMat::zero(p, dt, ds);
    let mut unit = vec![0u8; ds];
    for j in 0..ds {
        unit[j] = 1;
        let x = source.delinearize(&unit);
        unit[j] = 0;
        let y = apply(&x);
        let lin = target.linearize(&y);
        for i in 0..dt {
            mat.set(i, j, lin[i]);
        }
    }
    mat
}

/// Kernel of a flattened map, as a canonical submodule of `source`.
pub fn kernel_of_fp(source: &ChainModule, mat: &FpMat) -> SubmodulePresentation {
    let ns = mat.nullspace();
    let gens: Vec<ModuleElement> = (0..ns.rows)
        .map(|k| source.delinearize(ns.row(k)))
        .filter(|x| !source.is_zero(x))
        .collect();
    echelonize(source, &gens)
}
