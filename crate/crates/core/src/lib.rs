//! Exact computer algebra for torsion Breuil modules over the truncated
//! power-series ring `S~ = k[u]/u^{ep}`, where `k` is a finite field of
//! characteristic `p`.
//!
//! Everything in this crate is finite F_p linear algebra in disguise: chain
//! modules over `S~`, semilinear Frobenius-twisted maps, filtered objects
//! with a monodromy operator, and the constructions built on top of them
//! (duality, kernels and cokernels, adjoint closures, fiber lattices, simple
//! objects with coefficients, tame and unramified descent).
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion CLI crate
//! carries all IO and serialization.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod adjoint;
pub mod coeff;
pub mod descent;
pub mod dual;
pub mod error;
pub mod fiber;
pub mod field;
pub mod fp;
pub mod hom;
pub mod kerco;
pub mod linmap;
pub mod module;
pub mod object;
pub mod ring;
pub mod simples;
pub mod snf;

pub use error::CoreError;
