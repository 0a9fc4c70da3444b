//! Kernels and cokernels of morphisms in the main category.
//!
//! Both are computed in two stages. The naive stage works in the
//! enveloping category: the kernel of the module map with the restricted
//! structures (a filtered object that may fail to be generated), or the
//! quotient by the image with the induced structures (a generated object
//! whose `iota` may fail to be injective). The closure stage applies the
//! matching adjoint from [`crate::adjoint`] — the generated closure for
//! kernels, the filtered closure for cokernels — landing back in the main
//! category while preserving the universal property.
//!
//! When the morphism is strict (the image of the filtration is the full
//! intersection of the image with the target filtration), the naive
//! cokernel is already filtered and the closure stage is a no-op with an
//! empty trace.

use crate::adjoint::{
    fil_closure, gen_closure, quotient_object, subobject_from_spans, ClosureStep,
};
use crate::error::{CoreError, Result};
use crate::hom::{compose, validate_morphism, StructuredMorphism};
use crate::linmap::LinearMap;
use crate::module::{preimage_submodule, solve_linear, submodule_intersect};
use crate::object::UniObject;
use alloc::format;
use alloc::vec::Vec;

/// A kernel in the main category: the object, its inclusion into the
/// morphism's source, and the trace of the generated-closure iteration.
#[derive(Debug, Clone)]
pub struct KernelResult {
    pub object: UniObject,
    pub inclusion: StructuredMorphism,
    pub trace: Vec<ClosureStep>,
}

/// A cokernel in the main category: the object, the projection from the
/// morphism's target, and the trace of the filtered-closure iteration.
#[derive(Debug, Clone)]
pub struct CokernelResult {
    pub object: UniObject,
    pub projection: StructuredMorphism,
    pub trace: Vec<ClosureStep>,
}

/// Validates the morphism and returns the general-shape view needed by
/// the constructions: both endpoints as [`UniObject`]s and an explicit
/// filtration-level map (reconstructed through the injective target
/// `iota` when the morphism is between free objects and does not store
/// one).
fn uni_view(m: &StructuredMorphism) -> Result<(UniObject, UniObject, LinearMap, LinearMap)> {
    let report = validate_morphism(m);
    if !report.all_passed() {
        let name = report
            .checks
            .iter()
            .find(|c| !c.passed)
            .map(|c| c.name.clone())
            .unwrap_or_default();
        return Err(CoreError::InvalidInput(format!(
            "the morphism does not validate (first failing check: {name})"
        )));
    }
    let ua = m.source.as_uni()?;
    let ub = m.target.as_uni()?;
    let f = m.f.clone();
    let f_fil = match &m.f_fil {
        Some(g) => g.clone(),
        None => {
            let mut cols = Vec::with_capacity(ua.fil.rank());
            for j in 0..ua.fil.rank() {
                let image = f.apply(&ua.iota.cols[j]);
                let coords =
                    solve_linear(&ub.m, &ub.iota.cols, &image).ok_or_else(|| {
                        CoreError::PreconditionFailed(
                            "the image of the filtration does not lift".into(),
                        )
                    })?;
                cols.push(ub.fil.element(coords)?);
            }
            LinearMap {
                source: ua.fil.clone(),
                target: ub.fil.clone(),
                cols,
            }
        }
    };
    Ok((ua, ub, f, f_fil))
}

/// The kernel in the enveloping category: `ker(f)` with the filtration
/// `iota^{-1}(ker f) ∩ ker(f_fil)` and the restricted structures. The
/// result is filtered whenever the source is, but need not be generated.
pub fn naive_kernel(m: &StructuredMorphism) -> Result<(UniObject, StructuredMorphism)> {
    let (ua, _ub, f, f_fil) = uni_view(m)?;
    let km = f.kernel_submodule();
    let pre = preimage_submodule(&ua.fil, &ua.iota.to_fp_matrix(), &km);
    let kf = submodule_intersect(&pre, &f_fil.kernel_submodule());
    let (object, mut inclusion) = subobject_from_spans(&ua, &km, &kf)?;
    inclusion.target = m.source.clone();
    Ok((object, inclusion))
}

/// The cokernel in the enveloping category: the quotient of the target by
/// the image of `f`, with the filtration divided by the image of `f_fil`
/// and the induced structures. The result is generated whenever the
/// target is, but `iota` need not stay injective.
pub fn naive_cokernel(m: &StructuredMorphism) -> Result<(UniObject, StructuredMorphism)> {
    let (_ua, ub, f, f_fil) = uni_view(m)?;
    let q = f.span_image();
    let k = f_fil.span_image();
    let (object, mut projection) = quotient_object(&ub, &q, &k)?;
    projection.source = m.target.clone();
    Ok((object, projection))
}

/// The kernel in the main category: the generated closure of the naive
/// kernel, with the composed inclusion.
pub fn kernel_mod(m: &StructuredMorphism) -> Result<KernelResult> {
    let (naive, incl) = naive_kernel(m)?;
    let closed = gen_closure(&naive)?;
    let inclusion = compose(&incl, &closed.inclusion)?;
    Ok(KernelResult {
        object: closed.object,
        inclusion,
        trace: closed.trace,
    })
}

/// The cokernel in the main category: the filtered closure of the naive
/// cokernel, with the composed projection.
pub fn cokernel_mod(m: &StructuredMorphism) -> Result<CokernelResult> {
    let (naive, proj) = naive_cokernel(m)?;
    let closed = fil_closure(&naive)?;
    let projection = compose(&closed.projection, &proj)?;
    Ok(CokernelResult {
        object: closed.object,
        projection,
        trace: closed.trace,
    })
}

/// The image in the main category: the kernel of the cokernel
/// projection.
pub fn image_mod(m: &StructuredMorphism) -> Result<KernelResult> {
    let coker = cokernel_mod(m)?;
    kernel_mod(&coker.projection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::{DescentAction, TameExtensionParams};
    use crate::dual::{dualize, dualize_morphism};
    use crate::field::FiniteField;
    use crate::hom::{
        find_isomorphism, hom_basis, identity_morphism, is_isomorphism, zero_morphism,
        IsoResult,
    };
    use crate::linmap::{SemilinearMap, Twist};
    use crate::module::ChainModule;
    use crate::object::{
        direct_sum, standard_object, zero_object, BreuilObject, RingParams,
    };
    use rand_chacha::rand_core::SeedableRng;

    fn p0() -> RingParams {
        RingParams::new(FiniteField::new(3, 1).unwrap(), 2, 1).unwrap()
    }

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(0)
    }

    /// The sum map `S~(1) + S~(1) -> S~(1)`.
    fn sum_map(params: &RingParams) -> StructuredMorphism {
        let a = standard_object(params, 1).unwrap();
        let sum = direct_sum(&a, &a).unwrap();
        let target = BreuilObject::Free(a.clone());
        let f = LinearMap {
            source: sum.object.module.clone(),
            target: a.module.clone(),
            cols: vec![a.module.gen(0), a.module.gen(0)],
        };
        StructuredMorphism {
            source: BreuilObject::Free(sum.object),
            target,
            f,
            f_fil: None,
        }
    }

    /// The diagonal `S~(1) -> S~(1) + S~(1)`.
    fn diagonal_map(params: &RingParams) -> StructuredMorphism {
        let a = standard_object(params, 1).unwrap();
        let sum = direct_sum(&a, &a).unwrap();
        let module = sum.object.module.clone();
        let f = LinearMap {
            source: a.module.clone(),
            target: module.clone(),
            cols: vec![module.add(&module.gen(0), &module.gen(1))],
        };
        StructuredMorphism {
            source: BreuilObject::Free(a),
            target: BreuilObject::Free(sum.object),
            f,
            f_fil: None,
        }
    }

    /// Multiplication by `u^2` from a rank-one host with `phi_r(g) = u^4 x`
    /// into `S~(1)` (no monodromy): a valid morphism whose image is torsion,
    /// so its naive cokernel has a phantom filtration.
    fn torsion_multiple_map(params: &RingParams) -> StructuredMorphism {
        let ring = params.ring;
        let m = ChainModule::free(ring, 1);
        let fil = ChainModule::new(ring, vec![4]).unwrap();
        let iota = LinearMap {
            source: fil.clone(),
            target: m.clone(),
            cols: vec![m.scale(&ring.u_pow(2), &m.gen(0))],
        };
        let phi = SemilinearMap {
            source: fil.clone(),
            target: m.clone(),
            twist: Twist::Frobenius,
            cols: vec![m.scale(&ring.u_pow(4), &m.gen(0))],
        };
        let source = UniObject::new(params.clone(), m.clone(), fil.clone(), iota, phi).unwrap();
        let b = standard_object(params, 1).unwrap().strip_n().to_uni().unwrap();
        let f = LinearMap {
            source: m,
            target: b.m.clone(),
            cols: vec![b.m.scale(&ring.u_pow(2), &b.m.gen(0))],
        };
        let f_fil = LinearMap {
            source: fil,
            target: b.fil.clone(),
            cols: vec![b.fil.scale(&ring.u_pow(2), &b.fil.gen(0))],
        };
        StructuredMorphism {
            source: BreuilObject::Uni(source),
            target: BreuilObject::Uni(b),
            f,
            f_fil: Some(f_fil),
        }
    }

    /// The reduction of `S~(0)` (no monodromy) onto the torsion object
    /// `S~/u^3` with full filtration and `phi_r` induced by the identity.
    fn torsion_reduction_map(params: &RingParams) -> StructuredMorphism {
        let ring = params.ring;
        let a = standard_object(params, 0).unwrap().strip_n().to_uni().unwrap();
        let t = ChainModule::new(ring, vec![3]).unwrap();
        let iota = LinearMap {
            source: t.clone(),
            target: t.clone(),
            cols: vec![t.gen(0)],
        };
        let phi = SemilinearMap {
            source: t.clone(),
            target: t.clone(),
            twist: Twist::Frobenius,
            cols: vec![t.gen(0)],
        };
        let target = UniObject::new(params.clone(), t.clone(), t.clone(), iota, phi).unwrap();
        let f = LinearMap {
            source: a.m.clone(),
            target: t.clone(),
            cols: vec![t.gen(0)],
        };
        let f_fil = LinearMap {
            source: a.fil.clone(),
            target: t.clone(),
            cols: vec![t.gen(0)],
        };
        StructuredMorphism {
            source: BreuilObject::Uni(a),
            target: BreuilObject::Uni(target),
            f,
            f_fil: Some(f_fil),
        }
    }

    #[test]
    fn kernel_of_the_identity_is_zero() {
        let params = p0();
        let a = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let ker = kernel_mod(&identity_morphism(&a)).unwrap();
        assert_eq!(ker.object.m.rank(), 0);
        assert_eq!(ker.object.fil.rank(), 0);
        assert!(validate_morphism(&ker.inclusion).all_passed());
    }

    #[test]
    fn kernel_of_the_zero_morphism_is_the_source() {
        let params = p0();
        let a = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let b = BreuilObject::Free(standard_object(&params, 0).unwrap());
        let ker = kernel_mod(&zero_morphism(&a, &b)).unwrap();
        assert_eq!(ker.object.m.orders, vec![6]);
        assert_eq!(ker.object.fil.orders, vec![4]);
        assert!(is_isomorphism(&ker.inclusion));
        assert!(validate_morphism(&ker.inclusion).all_passed());
    }

    #[test]
    fn cokernel_of_the_identity_is_zero() {
        let params = p0();
        let a = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let coker = cokernel_mod(&identity_morphism(&a)).unwrap();
        assert_eq!(coker.object.m.rank(), 0);
        assert_eq!(coker.object.fil.rank(), 0);
        assert!(coker.trace.is_empty());
    }

    #[test]
    fn cokernel_from_the_zero_object_is_the_target() {
        let params = p0();
        let z = BreuilObject::Free(zero_object(&params, true));
        let b = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let coker = cokernel_mod(&zero_morphism(&z, &b)).unwrap();
        assert_eq!(coker.object.m.orders, vec![6]);
        assert!(is_isomorphism(&coker.projection));
        assert!(coker.trace.is_empty());
        let mut rng = rng();
        match find_isomorphism(&BreuilObject::Uni(coker.object), &b, &mut rng).unwrap() {
            IsoResult::Isomorphic(w) => assert!(validate_morphism(&w).all_passed()),
            other => panic!("expected an isomorphism, got {other:?}"),
        }
    }

    #[test]
    fn kernel_of_the_sum_map_is_the_antidiagonal() {
        let params = p0();
        let m = sum_map(&params);
        let ker = kernel_mod(&m).unwrap();
        assert_eq!(ker.object.m.orders, vec![6]);
        assert_eq!(ker.object.fil.orders, vec![4]);
        // The composite through the inclusion vanishes.
        let through = compose(&m, &ker.inclusion).unwrap();
        assert!(through.is_zero());
        // The kernel is a twist again.
        let a = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let mut rng = rng();
        match find_isomorphism(&BreuilObject::Uni(ker.object), &a, &mut rng).unwrap() {
            IsoResult::Isomorphic(w) => {
                assert!(validate_morphism(&w).all_passed());
                assert!(is_isomorphism(&w));
            }
            other => panic!("expected an isomorphism, got {other:?}"),
        }
    }

    #[test]
    fn cokernel_of_the_diagonal_is_the_object() {
        let params = p0();
        let m = diagonal_map(&params);
        let coker = cokernel_mod(&m).unwrap();
        // The diagonal is strict, so the naive cokernel is already
        // filtered: no closure steps.
        assert!(coker.trace.is_empty());
        assert_eq!(coker.object.m.orders, vec![6]);
        let through = compose(&coker.projection, &m).unwrap();
        assert!(through.is_zero());
        let a = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let mut rng = rng();
        match find_isomorphism(&BreuilObject::Uni(coker.object), &a, &mut rng).unwrap() {
            IsoResult::Isomorphic(w) => assert!(is_isomorphism(&w)),
            other => panic!("expected an isomorphism, got {other:?}"),
        }
    }

    /// A morphism with torsion image: the naive cokernel has a phantom
    /// filtration (non-injective `iota`), and the closure stage removes
    /// it. Generatedness of the target then forces the cokernel to vanish.
    #[test]
    fn cokernel_closure_fires_on_a_torsion_image() {
        let params = p0();
        let m = torsion_multiple_map(&params);
        let (naive, _) = naive_cokernel(&m).unwrap();
        assert_eq!(naive.validate_object().is_filtered, Some(false));
        assert_eq!(naive.m.orders, vec![2]);
        assert_eq!(naive.fil.orders, vec![2]);
        let coker = cokernel_mod(&m).unwrap();
        assert_eq!(coker.trace.len(), 1);
        assert_eq!(coker.object.m.rank(), 0);
        assert_eq!(coker.object.fil.rank(), 0);
    }

    #[test]
    fn kernel_universal_property() {
        let params = p0();
        let cases = [
            sum_map(&params),
            diagonal_map(&params),
            torsion_multiple_map(&params),
            torsion_reduction_map(&params),
        ];
        for (case, m) in cases.iter().enumerate() {
            let ker = kernel_mod(m).unwrap();
            assert!(compose(m, &ker.inclusion).unwrap().is_zero(), "case {case}");
            let ker_obj = BreuilObject::Uni(ker.object.clone());
            let mut tests: Vec<BreuilObject> = (0..=1)
                .map(|t| {
                    let o = standard_object(&params, t).unwrap();
                    if m.source.has_n() {
                        BreuilObject::Free(o)
                    } else {
                        BreuilObject::Free(o.strip_n())
                    }
                })
                .collect();
            tests.push(ker_obj.clone());
            for (i, x) in tests.iter().enumerate() {
                let into_kernel = hom_basis(x, &ker_obj).unwrap();
                let into_source = hom_basis(x, &m.source).unwrap();
                // Maps to the source that die under m.
                let killed: Vec<StructuredMorphism> = into_source
                    .iter()
                    .map(|h| compose(m, h).unwrap())
                    .collect();
                let image_rank = morphism_space_rank(&killed);
                let nullity = into_source.len() - image_rank;
                assert_eq!(into_kernel.len(), nullity, "case {case}, object {i}");
                // Composition with the inclusion is injective.
                let through: Vec<StructuredMorphism> = into_kernel
                    .iter()
                    .map(|g| compose(&ker.inclusion, g).unwrap())
                    .collect();
                assert_eq!(morphism_space_rank(&through), into_kernel.len());
            }
        }
    }

    #[test]
    fn cokernel_universal_property() {
        let params = p0();
        let cases = [
            sum_map(&params),
            diagonal_map(&params),
            torsion_multiple_map(&params),
            torsion_reduction_map(&params),
        ];
        for (case, m) in cases.iter().enumerate() {
            let coker = cokernel_mod(m).unwrap();
            assert!(
                compose(&coker.projection, m).unwrap().is_zero(),
                "case {case}"
            );
            let coker_obj = BreuilObject::Uni(coker.object.clone());
            let mut tests: Vec<BreuilObject> = (0..=1)
                .map(|t| {
                    let o = standard_object(&params, t).unwrap();
                    if m.target.has_n() {
                        BreuilObject::Free(o)
                    } else {
                        BreuilObject::Free(o.strip_n())
                    }
                })
                .collect();
            tests.push(coker_obj.clone());
            for (i, x) in tests.iter().enumerate() {
                let from_cokernel = hom_basis(&coker_obj, x).unwrap();
                let from_target = hom_basis(&m.target, x).unwrap();
                let killed: Vec<StructuredMorphism> = from_target
                    .iter()
                    .map(|h| compose(h, m).unwrap())
                    .collect();
                let image_rank = morphism_space_rank(&killed);
                let nullity = from_target.len() - image_rank;
                assert_eq!(from_cokernel.len(), nullity, "case {case}, object {i}");
                let through: Vec<StructuredMorphism> = from_cokernel
                    .iter()
                    .map(|g| compose(g, &coker.projection).unwrap())
                    .collect();
                assert_eq!(morphism_space_rank(&through), from_cokernel.len());
            }
        }
    }

    /// Duality exchanges kernels and cokernels: the dual of the cokernel
    /// of `m` is the kernel of the dual of `m`.
    #[test]
    fn duality_exchanges_kernels_and_cokernels() {
        let params = p0();
        for m in [sum_map(&params), diagonal_map(&params)] {
            let coker = cokernel_mod(&m).unwrap();
            let coker_dual = dualize(&BreuilObject::Uni(coker.object)).unwrap();
            let m_dual = dualize_morphism(&m).unwrap();
            let ker_of_dual = kernel_mod(&m_dual).unwrap();
            let mut rng = rng();
            match find_isomorphism(
                &coker_dual,
                &BreuilObject::Uni(ker_of_dual.object),
                &mut rng,
            )
            .unwrap()
            {
                IsoResult::Isomorphic(w) => {
                    assert!(validate_morphism(&w).all_passed());
                }
                other => panic!("expected an isomorphism, got {other:?}"),
            }
        }
    }

    /// Kernels and cokernels carry the coefficient and descent actions
    /// along, and the results still validate in full.
    #[test]
    fn kernel_and_cokernel_transport_the_actions() {
        let params = p0();
        let base = standard_object(&params, 1).unwrap().to_uni().unwrap();
        let scalars = crate::coeff::scalar_action(&base.m);
        let tame = TameExtensionParams::new(params.ring.field, 2).unwrap();
        let sigma = SemilinearMap {
            source: base.m.clone(),
            target: base.m.clone(),
            twist: Twist::UTwist(tame.omega(1)),
            cols: vec![base.m.gen(0)],
        };
        let a = base
            .with_coeff(scalars)
            .with_descent(DescentAction { params: tame, sigma });
        assert!(a.validate_object().all_passed());
        let obj = BreuilObject::Uni(a.clone());
        let z = zero_morphism(&obj, &obj);

        let ker = kernel_mod(&z).unwrap();
        assert!(ker.object.coeff.is_some());
        assert!(ker.object.descent.is_some());
        let report = ker.object.validate_object();
        assert!(report.all_passed(), "{:?}", report.checks);
        assert!(is_isomorphism(&ker.inclusion));

        let coker = cokernel_mod(&z).unwrap();
        assert!(coker.object.coeff.is_some());
        assert!(coker.object.descent.is_some());
        let report = coker.object.validate_object();
        assert!(report.all_passed(), "{:?}", report.checks);
        assert!(is_isomorphism(&coker.projection));
    }

    #[test]
    fn image_of_the_diagonal_is_the_object() {
        let params = p0();
        let m = diagonal_map(&params);
        let image = image_mod(&m).unwrap();
        assert_eq!(image.object.m.orders, vec![6]);
        let a = BreuilObject::Free(standard_object(&params, 1).unwrap());
        let mut rng = rng();
        match find_isomorphism(&BreuilObject::Uni(image.object), &a, &mut rng).unwrap() {
            IsoResult::Isomorphic(w) => assert!(is_isomorphism(&w)),
            other => panic!("expected an isomorphism, got {other:?}"),
        }
    }

    /// `F_p`-rank of the span of a family of comparable morphisms.
    fn morphism_space_rank(ms: &[StructuredMorphism]) -> usize {
        if ms.is_empty() {
            return 0;
        }
        let p = ms[0].f.target.ring.field.p;
        let mut vecs: Vec<Vec<u8>> = Vec::new();
        for m in ms {
            let mut flat = Vec::new();
            for col in &m.f.cols {
                flat.extend(m.f.target.linearize(col));
            }
            if let Some(ff) = &m.f_fil {
                for col in &ff.cols {
                    flat.extend(ff.target.linearize(col));
                }
            }
            vecs.push(flat);
        }
        let cols = vecs[0].len();
        let mut mat = crate::fp::FpMat::zero(p, vecs.len(), cols);
        for (i, v) in vecs.iter().enumerate() {
            for (j, &x) in v.iter().enumerate() {
                mat.set(i, j, x);
            }
        }
        mat.rank()
    }
}
