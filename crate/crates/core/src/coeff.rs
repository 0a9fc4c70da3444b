//! Coefficient actions: an action of a finite field `E = F_{p^h}` on an
//! object, commuting with the whole structure.
//!
//! The action is stored by the single linear map `nu(g)` for the
//! distinguished generator `g` of `E`; `F_p`-linearity plus annihilation
//! by the minimal polynomial of `g` make the assignment extend uniquely
//! to a ring homomorphism `E -> End(M)`.

use crate::error::{CoreError, Result};
use crate::field::FiniteField;
use crate::linmap::LinearMap;
use crate::module::{echelonize, solve_linear, ModuleElement};
use crate::object::{BreuilObject, CheckItem, ValidationReport};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

/// An `E`-action on an object's underlying module, given on the
/// distinguished generator of `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientAction {
    pub e_field: FiniteField,
    pub nu_gen: LinearMap,
}

impl CoefficientAction {
    pub fn new(e_field: FiniteField, nu_gen: LinearMap) -> Self {
        CoefficientAction { e_field, nu_gen }
    }

    /// Coefficients `m_0..m_{h-1}` of the minimal polynomial
    /// `T^h - sum_k m_k T^k` of the distinguished generator over `F_p`.
    pub fn minimal_polynomial(&self) -> Vec<u8> {
        let e = &self.e_field;
        let h = e.f as usize;
        let g = e.generator();
        // Solve sum_k x_k g^k = g^h over F_p in the coordinate basis.
        let mut mat = crate::fp::FpMat::zero(e.p, h, h);
        let mut pow = e.one();
        for k in 0..h {
            for i in 0..h {
                mat.set(i, k, pow.c[i]);
            }
            pow = e.mul(pow, g);
        }
        let rhs: Vec<u8> = (0..h).map(|i| pow.c[i]).collect();
        mat.solve(&rhs)
            .expect("the generator has degree exactly h over F_p")
    }
}

/// The axiom checks for the coefficient action carried by `obj`
/// (empty when the object has none). Used by object validation and by
/// [`validate_coefficients`].
pub fn coeff_checks(obj: &BreuilObject) -> Vec<CheckItem> {
    let mut out = Vec::new();
    let Some(action) = obj.coeff() else {
        return out;
    };
    let params = obj.params();
    let module = obj.module_chain();
    let nu = &action.nu_gen;

    let p_ok = action.e_field.p == params.ring.field.p;
    let h = action.e_field.f as usize;
    let div_ok = p_ok && params.f() % h == 0;
    out.push(CheckItem::of("coeff_field_compatible", div_ok, || {
        format!(
            "E = F_{{{}^{}}} does not embed into k = F_{{{}^{}}}",
            action.e_field.p,
            h,
            params.ring.field.p,
            params.f()
        )
    }));

    let shape_ok = nu.source == *module && nu.target == *module;
    out.push(CheckItem::of("coeff_shape", shape_ok, || {
        "nu(g) is not an endomorphism of the underlying module".to_string()
    }));
    if !shape_ok {
        return out;
    }

    // Minimal-polynomial annihilation: m(nu(g)) = 0 on every chain
    // generator, evaluated by iterated application.
    let mpoly = action.minimal_polynomial();
    let field = params.ring.field;
    let mut bad = None;
    for i in 0..module.rank() {
        let mut powers = Vec::with_capacity(h + 1);
        let mut v = module.gen(i);
        powers.push(v.clone());
        for _ in 0..h {
            v = nu.apply(&v);
            powers.push(v.clone());
        }
        let mut acc = powers[h].clone();
        for (k, &m) in mpoly.iter().enumerate() {
            acc = module.sub(&acc, &module.scale_field(field.scalar(m), &powers[k]));
        }
        if !module.is_zero(&acc) {
            bad = Some(i);
            break;
        }
    }
    out.push(CheckItem::of("coeff_min_poly", bad.is_none(), || {
        format!(
            "nu(g) is not annihilated by the minimal polynomial of g (generator {})",
            bad.unwrap()
        )
    }));

    match obj {
        BreuilObject::Free(o) => {
            let mut stable_bad = None;
            let mut phi_bad: Option<alloc::string::String> = None;
            for (j, row) in o.fil.rows.iter().enumerate() {
                let img = nu.apply(row);
                if !o.fil.contains(&img) {
                    stable_bad.get_or_insert(j);
                    if phi_bad.is_none() {
                        phi_bad = Some(format!("nu(g) moves Fil generator {j} outside Fil"));
                    }
                    continue;
                }
                if phi_bad.is_none() {
                    let lhs = o.phi_apply(&img).expect("membership checked");
                    let rhs = nu.apply(&o.phi_rows[j]);
                    if lhs != rhs {
                        phi_bad = Some(format!(
                            "phi_r(nu(g) x) != nu(g) phi_r(x) on Fil generator {j}"
                        ));
                    }
                }
            }
            out.push(CheckItem::of("coeff_fil_stable", stable_bad.is_none(), || {
                format!("nu(g) moves Fil generator {} outside Fil", stable_bad.unwrap())
            }));
            out.push(CheckItem::of("coeff_phi_commutes", phi_bad.is_none(), || {
                phi_bad.clone().unwrap()
            }));
            if let Some(n_op) = o.n_operator() {
                let mut bad = None;
                for i in 0..module.rank() {
                    let lhs = nu.apply(&n_op.apply(&module.gen(i)));
                    let rhs = n_op.apply(&nu.apply(&module.gen(i)));
                    if lhs != rhs {
                        bad = Some(i);
                        break;
                    }
                }
                out.push(CheckItem::of("coeff_n_commutes", bad.is_none(), || {
                    format!("nu(g) N != N nu(g) on basis vector {}", bad.unwrap())
                }));
            }
        }
        BreuilObject::Uni(o) => {
            // The filtration-side conditions need a lift through iota, so
            // they are only decidable for an injective iota.
            let injective = o.iota.kernel_submodule().is_zero_module();
            let image = echelonize(&o.m, &o.iota.cols);
            let mut stable_bad = None;
            let mut phi_bad: Option<alloc::string::String> = None;
            if !injective {
                phi_bad = Some(
                    "iota is not injective; the Fil-side action is undetermined".to_string(),
                );
            }
            for j in 0..o.fil.rank() {
                let img = nu.apply(&o.iota.cols[j]);
                if !image.contains(&img) {
                    stable_bad.get_or_insert(j);
                    if phi_bad.is_none() {
                        phi_bad =
                            Some(format!("nu(g) moves iota(Fil generator {j}) outside the image"));
                    }
                    continue;
                }
                if phi_bad.is_none() {
                    let xi = solve_linear(&o.m, &o.iota.cols, &img)
                        .expect("membership checked");
                    let lifted = o
                        .fil
                        .element(xi)
                        .expect("well-shaped coordinates");
                    let lhs = o.phi.apply(&lifted);
                    let rhs = nu.apply(&o.phi.cols[j]);
                    if lhs != rhs {
                        phi_bad = Some(format!(
                            "phi_r(nu(g) x) != nu(g) phi_r(x) on Fil generator {j}"
                        ));
                    }
                }
            }
            out.push(CheckItem::of("coeff_fil_stable", stable_bad.is_none(), || {
                format!(
                    "nu(g) moves iota(Fil generator {}) outside the image",
                    stable_bad.unwrap()
                )
            }));
            out.push(CheckItem::of("coeff_phi_commutes", phi_bad.is_none(), || {
                phi_bad.clone().unwrap()
            }));
            if let Some(n_m) = &o.n_m {
                let mut bad = None;
                for i in 0..module.rank() {
                    let lhs = nu.apply(&n_m.apply(&module.gen(i)));
                    let rhs = n_m.apply(&nu.apply(&module.gen(i)));
                    if lhs != rhs {
                        bad = Some(i);
                        break;
                    }
                }
                out.push(CheckItem::of("coeff_n_commutes", bad.is_none(), || {
                    format!("nu(g) N != N nu(g) on generator {}", bad.unwrap())
                }));
            }
        }
    }
    out
}

/// Standalone validation of the coefficient action carried by `obj`.
pub fn validate_coefficients(obj: &BreuilObject) -> Result<ValidationReport> {
    if obj.coeff().is_none() {
        return Err(CoreError::InvalidInput(
            "object carries no coefficient action".to_string(),
        ));
    }
    let mut report = ValidationReport::new();
    report.checks = coeff_checks(obj);
    Ok(report)
}

/// The scalar action of `E = F_p` (always valid on any object): `nu(g)` is
/// multiplication by the distinguished generator of `F_p`.
pub fn scalar_action(obj_module: &crate::module::ChainModule) -> CoefficientAction {
    let field = obj_module.ring.field;
    let e_field = FiniteField::new(field.p, 1).expect("prime subfield exists");
    let g = e_field.generator();
    // g is a constant; embed it as the same constant of k.
    let scalar = field.scalar(g.c[0]);
    let cols: Vec<ModuleElement> = (0..obj_module.rank())
        .map(|i| obj_module.scale_field(scalar, &obj_module.gen(i)))
        .collect();
    CoefficientAction {
        e_field,
        nu_gen: LinearMap {
            source: obj_module.clone(),
            target: obj_module.clone(),
            cols,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::{standard_object, RingParams};
    use crate::ring::TruncatedRing;

    #[test]
    fn scalar_action_is_always_valid() {
        let params = RingParams::new(FiniteField::new(3, 1).unwrap(), 2, 1).unwrap();
        let obj = standard_object(&params, 1).unwrap();
        let action = scalar_action(&obj.module);
        let obj = obj.with_coeff(action);
        let report = obj.validate_object();
        assert!(report.all_passed(), "{:?}", report.checks);
    }

    /// A rank-2 cyclic-shape object over `F_9` with the full `F_9`-action
    /// `nu(g) = diag(g, g^3)`: the Frobenius staircase makes the twisted
    /// diagonal commute with `phi_r` while the plain diagonal does not.
    fn cyclic_host() -> (RingParams, crate::object::FreeBreuilObject) {
        let field = FiniteField::new(3, 2).unwrap();
        let params = RingParams::new(field, 2, 1).unwrap();
        let ring = params.ring;
        let module = crate::module::ChainModule::free(ring, 2);
        let fil_gens = [
            module.scale(&ring.u_pow(1), &module.gen(0)),
            module.scale(&ring.u_pow(2), &module.gen(1)),
        ];
        let phi_gens = [module.neg(&module.gen(1)), module.neg(&module.gen(0))];
        let obj = crate::object::FreeBreuilObject::from_generators(
            params.clone(),
            2,
            &fil_gens,
            &phi_gens,
            Some(vec![module.zero(), module.zero()]),
        )
        .unwrap();
        (params, obj)
    }

    fn diag_action(
        ring: &TruncatedRing,
        module: &crate::module::ChainModule,
        entries: [crate::field::FieldElement; 2],
    ) -> CoefficientAction {
        let _ = ring;
        let cols = vec![
            module.scale_field(entries[0], &module.gen(0)),
            module.scale_field(entries[1], &module.gen(1)),
        ];
        CoefficientAction {
            e_field: module.ring.field,
            nu_gen: LinearMap {
                source: module.clone(),
                target: module.clone(),
                cols,
            },
        }
    }

    #[test]
    fn frobenius_twisted_diagonal_commutes() {
        let (params, obj) = cyclic_host();
        let field = params.ring.field;
        let g = field.generator();
        let action = diag_action(&params.ring, &obj.module, [g, field.frobenius(g)]);
        let obj = obj.with_coeff(action);
        let report = obj.validate_object();
        assert!(report.all_passed(), "{:?}", report.checks);
    }

    #[test]
    fn plain_diagonal_fails_phi_commutation() {
        let (params, obj) = cyclic_host();
        let field = params.ring.field;
        let g = field.generator();
        let action = diag_action(&params.ring, &obj.module, [g, g]);
        let obj = obj.with_coeff(action);
        let report = obj.validate_object();
        assert!(!report.all_passed());
        assert!(report.check("coeff_min_poly").unwrap().passed);
        assert!(report.check("coeff_fil_stable").unwrap().passed);
        assert!(!report.check("coeff_phi_commutes").unwrap().passed);
    }

    #[test]
    fn oversized_coefficient_field_is_flagged() {
        let params = RingParams::new(FiniteField::new(3, 1).unwrap(), 2, 1).unwrap();
        let obj = standard_object(&params, 1).unwrap();
        let e_field = FiniteField::new(3, 2).unwrap();
        let action = CoefficientAction {
            e_field,
            nu_gen: LinearMap::identity(obj.module.clone()),
        };
        let obj = obj.with_coeff(action);
        let report = obj.validate_object();
        assert!(!report.check("coeff_field_compatible").unwrap().passed);
    }
}
