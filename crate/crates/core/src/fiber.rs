//! The lattice of substructures of a fixed free object.
//!
//! A *substructure* of a free object `M` is a pair of submodules
//! `(C, F)` of the underlying chain module with `F ⊆ Fil ∩ C`,
//! `u^{er} C ⊆ F`, `phi_r(F) ⊆ C`, and (when `M` carries one) `N(C) ⊆ C`.
//! Such a pair inherits an object structure by restriction, with the
//! honest inclusion as its transition map, so it is automatically
//! filtered; it need not be generated.
//!
//! Generated substructures of `M` form a lattice under inclusion:
//!
//! * the supremum of a family is the componentwise sum — spans of
//!   generated pairs stay generated;
//! * the infimum is the generated core of the componentwise
//!   intersection, computed by the same contraction as [`gen_closure`]
//!   but entirely in ambient coordinates (for an inclusion the
//!   transition-map preimage of a span is a plain intersection).
//!
//! Both operations take arbitrary finite families. The empty supremum
//! is the zero substructure and the empty infimum is the full one, so
//! the unit laws hold uniformly.
//!
//! [`gen_closure`]: crate::adjoint::gen_closure

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::module::{
    echelonize, submodule_intersect, submodule_sum, SubmodulePresentation,
};
use crate::object::{CheckItem, FreeBreuilObject, ValidationReport};

/// A candidate substructure: spans for the underlying module and its
/// filtration, both presented inside the ambient object's chain module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substructure {
    pub module: SubmodulePresentation,
    pub fil: SubmodulePresentation,
}

impl Substructure {
    /// The zero substructure (unit for the supremum).
    pub fn zero(ambient: &FreeBreuilObject) -> Self {
        Substructure {
            module: SubmodulePresentation::zero(&ambient.module),
            fil: SubmodulePresentation::zero(&ambient.module),
        }
    }

    /// The ambient object viewed as a substructure of itself (unit for
    /// the infimum).
    pub fn full(ambient: &FreeBreuilObject) -> Self {
        Substructure {
            module: SubmodulePresentation::full(&ambient.module),
            fil: ambient.fil.clone(),
        }
    }

    /// Componentwise span inclusion — the order of the lattice.
    pub fn contains(&self, other: &Substructure) -> bool {
        self.module.contains_submodule(&other.module)
            && self.fil.contains_submodule(&other.fil)
    }
}

fn check_spans(candidate: &Substructure, ambient: &FreeBreuilObject) -> Result<()> {
    if candidate.module.ambient != ambient.module
        || candidate.fil.ambient != ambient.module
    {
        return Err(CoreError::InvalidInput(
            "the candidate spans are not presented in the ambient module".to_string(),
        ));
    }
    Ok(())
}

/// Axiom report for a candidate substructure of `ambient`.
///
/// The checks are `fil_inside_ambient_fil`, `fil_inside_module`,
/// `module_u_er_inside_fil`, `phi_stable`, and (for objects with
/// monodromy) `n_stable`. The report's `is_generated` flag records
/// whether `phi_r(F)` spans `C`; it is left undetermined when the
/// filtration span is not evaluable under `phi_r`.
pub fn is_substructure(
    candidate: &Substructure,
    ambient: &FreeBreuilObject,
) -> Result<ValidationReport> {
    check_spans(candidate, ambient)?;
    let mut report = ValidationReport::new();

    // F ⊆ Fil.
    let mut outside_fil = None;
    for (i, row) in candidate.fil.rows.iter().enumerate() {
        if !ambient.fil.contains(row) {
            outside_fil = Some(i);
            break;
        }
    }
    report.checks.push(CheckItem::of("fil_inside_ambient_fil", outside_fil.is_none(), || {
        format!("filtration row {} is not in the ambient filtration", outside_fil.unwrap())
    }));

    // F ⊆ C.
    let fil_in_module = candidate.module.contains_submodule(&candidate.fil);
    report.checks.push(CheckItem::of("fil_inside_module", fil_in_module, || {
        "the filtration span is not inside the module span".to_string()
    }));

    // u^{er} C ⊆ F.
    let er = ambient.params.er();
    let u_er = ambient.params.ring.u_pow(er);
    let mut missing = None;
    for (i, row) in candidate.module.rows.iter().enumerate() {
        let scaled = ambient.module.scale(&u_er, row);
        if !candidate.fil.contains(&scaled) {
            missing = Some(i);
            break;
        }
    }
    report.checks.push(CheckItem::of("module_u_er_inside_fil", missing.is_none(), || {
        format!("u^{er} * module row {} is not in the filtration span", missing.unwrap())
    }));

    // phi_r(F) ⊆ C, and the generation predicate. Both need F ⊆ Fil to
    // evaluate phi_r at all.
    if outside_fil.is_none() {
        let mut images = Vec::with_capacity(candidate.fil.rows.len());
        for row in &candidate.fil.rows {
            images.push(ambient.phi_apply(row)?);
        }
        let mut escaped = None;
        for (i, img) in images.iter().enumerate() {
            if !candidate.module.contains(img) {
                escaped = Some(i);
                break;
            }
        }
        report.checks.push(CheckItem::of("phi_stable", escaped.is_none(), || {
            format!("phi_r of filtration row {} is not in the module span", escaped.unwrap())
        }));
        let image_span = echelonize(&ambient.module, &images);
        report.is_generated = Some(image_span == candidate.module);
    } else {
        report.checks.push(CheckItem::fail(
            "phi_stable",
            "not evaluable: the filtration span leaves the ambient filtration".to_string(),
        ));
    }

    // N(C) ⊆ C when the ambient carries a monodromy operator. The
    // Leibniz part of N preserves every span that the value part does,
    // so row images decide stability.
    if let Some(op) = ambient.n_operator() {
        let mut escaped = None;
        for (i, row) in candidate.module.rows.iter().enumerate() {
            if !candidate.module.contains(&op.apply(row)) {
                escaped = Some(i);
                break;
            }
        }
        report.checks.push(CheckItem::of("n_stable", escaped.is_none(), || {
            format!("N of module row {} is not in the module span", escaped.unwrap())
        }));
    }

    Ok(report)
}

fn require_generated_member(
    candidate: &Substructure,
    ambient: &FreeBreuilObject,
    index: usize,
) -> Result<()> {
    let report = is_substructure(candidate, ambient)?;
    if !report.all_passed() {
        let name = report
            .checks
            .iter()
            .find(|c| !c.passed)
            .map(|c| c.name.clone())
            .unwrap_or_default();
        return Err(CoreError::PreconditionFailed(format!(
            "family member {index} is not a substructure (failing check: {name})"
        )));
    }
    if report.is_generated != Some(true) {
        return Err(CoreError::PreconditionFailed(format!(
            "family member {index} is not generated"
        )));
    }
    Ok(())
}

/// Supremum of a family of generated substructures: the componentwise
/// span sum. The empty supremum is the zero substructure.
pub fn fiber_sup(
    members: &[Substructure],
    ambient: &FreeBreuilObject,
) -> Result<Substructure> {
    for (i, member) in members.iter().enumerate() {
        require_generated_member(member, ambient, i)?;
    }
    let mut acc = Substructure::zero(ambient);
    for member in members {
        acc.module = submodule_sum(&acc.module, &member.module);
        acc.fil = submodule_sum(&acc.fil, &member.fil);
    }
    Ok(acc)
}

/// Infimum of a family of generated substructures: the generated core
/// of the componentwise intersection. The empty infimum is the full
/// substructure.
///
/// The contraction runs in ambient coordinates: starting from the
/// intersected spans `(G, F)`, replace `G` by the span of `phi_r(F)`
/// and `F` by `F ∩ G` until both are stationary. Each non-final step
/// strictly shrinks `G`, so the loop ends within the ambient length.
pub fn fiber_inf(
    members: &[Substructure],
    ambient: &FreeBreuilObject,
) -> Result<Substructure> {
    for (i, member) in members.iter().enumerate() {
        require_generated_member(member, ambient, i)?;
    }
    let mut acc = Substructure::full(ambient);
    for member in members {
        acc.module = submodule_intersect(&acc.module, &member.module);
        acc.fil = submodule_intersect(&acc.fil, &member.fil);
    }

    let bound = ambient.module.dim_fp() + 2;
    for _ in 0..bound {
        let mut images = Vec::with_capacity(acc.fil.rows.len());
        for row in &acc.fil.rows {
            images.push(ambient.phi_apply(row)?);
        }
        let g_next = echelonize(&ambient.module, &images);
        let f_next = submodule_intersect(&acc.fil, &g_next);
        if g_next == acc.module && f_next == acc.fil {
            return Ok(acc);
        }
        acc = Substructure { module: g_next, fil: f_next };
    }
    Err(CoreError::InvalidInput(
        "generated-core contraction failed to stabilize".to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::module::ModuleElement;
    use crate::object::{direct_sum, standard_object, RingParams};

    fn p0() -> RingParams {
        RingParams::new(FiniteField::new(3, 1).unwrap(), 2, 1).unwrap()
    }

    /// The rank-two ambient `M((1)) ⊕ M((1))` at p = 3, e = 2, r = 1,
    /// together with a named family of substructures:
    /// the two factors, the diagonal, and the antidiagonal. Each is
    /// generated: phi_r sends the listed filtration generator to
    /// `c = -1` times the module generator, which spans it.
    fn ambient_and_family() -> (FreeBreuilObject, [Substructure; 4]) {
        let params = p0();
        let a = standard_object(&params, 1).unwrap();
        let sum = direct_sum(&a, &a).unwrap();
        let ambient = sum.object;
        let ring = params.ring;
        let u2 = ring.u_pow(2);

        let line = |x: &ModuleElement| -> Substructure {
            Substructure {
                module: echelonize(&ambient.module, core::slice::from_ref(x)),
                fil: echelonize(&ambient.module, &[ambient.module.scale(&u2, x)]),
            }
        };
        let e0 = ambient.module.gen(0);
        let e1 = ambient.module.gen(1);
        let diag = ambient.module.add(&e0, &e1);
        let anti = ambient.module.add(&e0, &ambient.module.scale(&ring.neg(&ring.one()), &e1));
        let family = [line(&e0), line(&e1), line(&diag), line(&anti)];
        (ambient, family)
    }

    #[test]
    fn the_diagonal_is_a_generated_substructure() {
        let (ambient, family) = ambient_and_family();
        let report = is_substructure(&family[2], &ambient).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.is_generated, Some(true));
    }

    #[test]
    fn a_scaled_copy_fails_phi_stability() {
        // u * M((1)) inside M((1)), with the induced filtration
        // Fil ∩ uM = u^2 M: phi_r(u^2 x) = -x lies outside u M.
        let params = p0();
        let ambient = standard_object(&params, 1).unwrap();
        let ring = params.ring;
        let u = ring.u_pow(1);
        let u2 = ring.u_pow(2);
        let x = ambient.module.gen(0);
        let candidate = Substructure {
            module: echelonize(&ambient.module, &[ambient.module.scale(&u, &x)]),
            fil: echelonize(&ambient.module, &[ambient.module.scale(&u2, &x)]),
        };
        let report = is_substructure(&candidate, &ambient).unwrap();
        assert!(!report.check("phi_stable").unwrap().passed);
        assert!(report.check("fil_inside_ambient_fil").unwrap().passed);
        assert!(report.check("fil_inside_module").unwrap().passed);
        assert!(report.check("module_u_er_inside_fil").unwrap().passed);
        assert_eq!(report.is_generated, Some(false));
    }

    #[test]
    fn the_zero_substructure_passes_and_is_generated() {
        let (ambient, _) = ambient_and_family();
        let report = is_substructure(&Substructure::zero(&ambient), &ambient).unwrap();
        assert!(report.all_passed());
        assert_eq!(report.is_generated, Some(true));
    }

    #[test]
    fn the_full_substructure_passes_and_is_generated() {
        let (ambient, _) = ambient_and_family();
        let report = is_substructure(&Substructure::full(&ambient), &ambient).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.is_generated, Some(true));
    }

    #[test]
    fn sup_of_a_factor_and_the_diagonal_is_everything() {
        let (ambient, family) = ambient_and_family();
        let sup = fiber_sup(&[family[0].clone(), family[2].clone()], &ambient).unwrap();
        assert_eq!(sup, Substructure::full(&ambient));
    }

    #[test]
    fn inf_of_a_factor_and_the_diagonal_is_zero() {
        let (ambient, family) = ambient_and_family();
        let inf = fiber_inf(&[family[0].clone(), family[2].clone()], &ambient).unwrap();
        assert_eq!(inf, Substructure::zero(&ambient));
    }

    #[test]
    fn unit_laws() {
        let (ambient, family) = ambient_and_family();
        let a = &family[0];
        let zero = Substructure::zero(&ambient);
        let full = Substructure::full(&ambient);

        assert_eq!(fiber_sup(core::slice::from_ref(a), &ambient).unwrap(), *a);
        assert_eq!(fiber_sup(&[a.clone(), zero.clone()], &ambient).unwrap(), *a);
        assert_eq!(fiber_inf(core::slice::from_ref(a), &ambient).unwrap(), *a);
        assert_eq!(fiber_inf(&[a.clone(), full.clone()], &ambient).unwrap(), *a);

        assert_eq!(fiber_sup(&[], &ambient).unwrap(), zero);
        assert_eq!(fiber_inf(&[], &ambient).unwrap(), full);
    }

    #[test]
    fn lattice_laws_hold_on_the_line_family() {
        let (ambient, family) = ambient_and_family();
        let mut members: Vec<Substructure> = family.to_vec();
        members.push(Substructure::zero(&ambient));
        members.push(Substructure::full(&ambient));

        let sup = |xs: &[Substructure]| fiber_sup(xs, &ambient).unwrap();
        let inf = |xs: &[Substructure]| fiber_inf(xs, &ambient).unwrap();

        for a in &members {
            assert_eq!(sup(&[a.clone(), a.clone()]), *a);
            assert_eq!(inf(&[a.clone(), a.clone()]), *a);
            for b in &members {
                // Commutativity.
                let s_ab = sup(&[a.clone(), b.clone()]);
                let i_ab = inf(&[a.clone(), b.clone()]);
                assert_eq!(s_ab, sup(&[b.clone(), a.clone()]));
                assert_eq!(i_ab, inf(&[b.clone(), a.clone()]));
                // Absorption.
                assert_eq!(sup(&[a.clone(), i_ab.clone()]), *a);
                assert_eq!(inf(&[a.clone(), s_ab.clone()]), *a);
                for c in &members {
                    // Associativity, in both n-ary and nested forms.
                    let s3 = sup(&[a.clone(), b.clone(), c.clone()]);
                    assert_eq!(sup(&[s_ab.clone(), c.clone()]), s3);
                    assert_eq!(sup(&[a.clone(), sup(&[b.clone(), c.clone()])]), s3);
                    let i3 = inf(&[a.clone(), b.clone(), c.clone()]);
                    assert_eq!(inf(&[i_ab.clone(), c.clone()]), i3);
                    assert_eq!(inf(&[a.clone(), inf(&[b.clone(), c.clone()])]), i3);
                }
            }
        }
    }

    #[test]
    fn inf_is_the_generated_core_of_the_intersection() {
        let (ambient, family) = ambient_and_family();
        for a in &family {
            for b in &family {
                let inf = fiber_inf(&[a.clone(), b.clone()], &ambient).unwrap();

                // inf(a, b) is a generated substructure inside a ∩ b.
                let report = is_substructure(&inf, &ambient).unwrap();
                assert!(report.all_passed(), "{report:?}");
                assert_eq!(report.is_generated, Some(true));
                assert!(a.contains(&inf) && b.contains(&inf));

                // With equality exactly when the plain intersection is
                // already a generated substructure.
                let meet = Substructure {
                    module: submodule_intersect(&a.module, &b.module),
                    fil: submodule_intersect(&a.fil, &b.fil),
                };
                let meet_report = is_substructure(&meet, &ambient).unwrap();
                let meet_generated =
                    meet_report.all_passed() && meet_report.is_generated == Some(true);
                assert_eq!(inf == meet, meet_generated);
            }
        }
    }

    #[test]
    fn sup_of_generated_members_is_generated() {
        let (ambient, family) = ambient_and_family();
        for a in &family {
            for b in &family {
                let sup = fiber_sup(&[a.clone(), b.clone()], &ambient).unwrap();
                let report = is_substructure(&sup, &ambient).unwrap();
                assert!(report.all_passed(), "{report:?}");
                assert_eq!(report.is_generated, Some(true));
                assert!(sup.contains(a) && sup.contains(b));
            }
        }
    }

    #[test]
    fn invalid_members_are_rejected() {
        let params = p0();
        let ambient = standard_object(&params, 1).unwrap();
        let ring = params.ring;
        let x = ambient.module.gen(0);
        // u M((1)) with its induced filtration is a valid span pair but
        // not phi-stable, so it is rejected as a family member.
        let not_stable = Substructure {
            module: echelonize(&ambient.module, &[ambient.module.scale(&ring.u_pow(1), &x)]),
            fil: echelonize(&ambient.module, &[ambient.module.scale(&ring.u_pow(2), &x)]),
        };
        let err = fiber_sup(&[not_stable.clone()], &ambient).unwrap_err();
        assert!(matches!(err, CoreError::PreconditionFailed(_)));
        let err = fiber_inf(&[not_stable], &ambient).unwrap_err();
        assert!(matches!(err, CoreError::PreconditionFailed(_)));

        // Spans presented in a module of a different shape are a hard
        // input error.
        let other = direct_sum(&ambient, &ambient).unwrap().object;
        let foreign = Substructure::full(&other);
        let err = is_substructure(&foreign, &ambient).unwrap_err();
        assert!(matches!(err, CoreError::InvalidInput(_)));
    }

    #[test]
    fn a_non_generated_substructure_is_reported_as_such() {
        // Inside M((0)), the pair (M, u^2 M) is a substructure — the
        // filtration is smaller than the full one the object carries —
        // and phi_r kills it: phi_r(u^2 x) = (u^2)^p x = 0 here, so the
        // image spans zero, not the full module.
        let params = p0();
        let ambient = standard_object(&params, 0).unwrap();
        let x = ambient.module.gen(0);
        let u2 = params.ring.u_pow(2);
        let candidate = Substructure {
            module: SubmodulePresentation::full(&ambient.module),
            fil: echelonize(&ambient.module, &[ambient.module.scale(&u2, &x)]),
        };
        let report = is_substructure(&candidate, &ambient).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.is_generated, Some(false));

        let err = fiber_sup(&[candidate], &ambient).unwrap_err();
        assert!(matches!(err, CoreError::PreconditionFailed(_)));
    }
}
