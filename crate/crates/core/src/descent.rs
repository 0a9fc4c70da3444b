//! Descent data along tame and unramified extensions.
//!
//! A tame extension of degree `n` (prime to `p`) is generated by an
//! `n`-th root of the uniformizer; its Galois group acts on `u` through
//! the character `omega` built here, and on an object through a
//! semilinear [`DescentAction`]. Unramified descent changes the residue
//! field instead and is handled by base change along a field embedding.

use crate::error::{CoreError, Result};
use crate::field::{FieldElement, FieldEmbedding, FiniteField};
use crate::fp::fp_inv;
use crate::hom::StructuredMorphism;
use crate::linmap::{LinearMap, NOperator, SemilinearMap, Twist};
use crate::module::{echelonize, solve_linear, ChainModule, ModuleElement};
use crate::object::{
    BreuilObject, CheckItem, FreeBreuilObject, RingParams, UniObject, ValidationReport,
};
use crate::ring::{RingElement, TruncatedRing};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

/// Parameters of the degree-`n` tame extension: `m` is the inverse of `n`
/// modulo `p`, `zeta` the distinguished primitive `n`-th root of unity,
/// and `t = (1 - n m)/p` reduced modulo `n` — the exponent entering the
/// action on the distinguished uniformizer root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TameExtensionParams {
    pub field: FiniteField,
    pub n: usize,
    pub m: usize,
    pub zeta: FieldElement,
    pub t: usize,
}

impl TameExtensionParams {
    pub fn new(field: FiniteField, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::InvalidParams("degree must be positive".to_string()));
        }
        let p = field.p as usize;
        if n % p == 0 {
            return Err(CoreError::InvalidParams(format!(
                "degree {n} is not prime to p = {p}"
            )));
        }
        let zeta = field.primitive_root_of_unity(n as u64).map_err(|_| {
            CoreError::InvalidParams(format!(
                "no primitive {n}-th root of unity in the residue field: {n} must divide p^f - 1"
            ))
        })?;
        let m = fp_inv(field.p, (n % p) as u8) as usize;
        let num = 1i64 - (n as i64) * (m as i64);
        debug_assert_eq!(num.rem_euclid(p as i64), 0);
        let t = (num / p as i64).rem_euclid(n as i64) as usize;
        Ok(TameExtensionParams { field, n, m, zeta, t })
    }

    /// `omega(j) = zeta^{t j}`, the character through which the Galois
    /// generator acts; `omega(1)` is the eigenvalue on `u`.
    pub fn omega(&self, j: usize) -> FieldElement {
        self.field.pow(self.zeta, ((self.t * j) % self.n) as u64)
    }
}

/// The full value table of `omega` on `Z/n` (index `j`).
pub fn omega_character(params: &TameExtensionParams) -> Vec<FieldElement> {
    (0..params.n).map(|j| params.omega(j)).collect()
}

/// The action of the distinguished Galois generator on an object: a
/// semilinear automorphism `sigma` of the underlying module, twisting `u`
/// by `omega(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentAction {
    pub params: TameExtensionParams,
    pub sigma: SemilinearMap,
}

/// The axiom checks for the descent action carried by `obj` (empty when
/// the object has none): correct shape and twist, order `n`, stability of
/// `Fil`, and commutation with `phi_r` and `N`.
pub fn action_checks(obj: &BreuilObject) -> Vec<CheckItem> {
    let mut out = Vec::new();
    let Some(action) = obj.descent() else {
        return out;
    };
    let module = obj.module_chain();
    let sigma = &action.sigma;

    let shape_ok = sigma.source == *module
        && sigma.target == *module
        && sigma.twist == Twist::UTwist(action.params.omega(1))
        && action.params.field == module.ring.field;
    out.push(CheckItem::of("descent_shape", shape_ok, || {
        "sigma is not an endomorphism twisting u by omega(1)".to_string()
    }));
    if !shape_ok {
        return out;
    }

    // sigma^n = id. The n-th power twists by omega(1)^n = 1, hence is
    // linear, so the generator check is exact.
    let mut bad = None;
    for i in 0..module.rank() {
        let mut x = module.gen(i);
        for _ in 0..action.params.n {
            x = sigma.apply(&x);
        }
        if x != module.gen(i) {
            bad = Some(i);
            break;
        }
    }
    out.push(CheckItem::of("descent_order", bad.is_none(), || {
        format!(
            "sigma^{} is not the identity on generator {}",
            action.params.n,
            bad.unwrap()
        )
    }));

    match obj {
        BreuilObject::Free(o) => {
            let mut stable_bad = None;
            let mut phi_bad: Option<alloc::string::String> = None;
            for (j, row) in o.fil.rows.iter().enumerate() {
                let img = sigma.apply(row);
                if !o.fil.contains(&img) {
                    stable_bad.get_or_insert(j);
                    if phi_bad.is_none() {
                        phi_bad = Some(format!("sigma moves Fil generator {j} outside Fil"));
                    }
                    continue;
                }
                if phi_bad.is_none() {
                    let lhs = o.phi_apply(&img).expect("membership checked");
                    let rhs = sigma.apply(&o.phi_rows[j]);
                    if lhs != rhs {
                        phi_bad = Some(format!(
                            "phi_r(sigma x) != sigma(phi_r x) on Fil generator {j}"
                        ));
                    }
                }
            }
            out.push(CheckItem::of("descent_fil_stable", stable_bad.is_none(), || {
                format!("sigma moves Fil generator {} outside Fil", stable_bad.unwrap())
            }));
            out.push(CheckItem::of("descent_phi_commutes", phi_bad.is_none(), || {
                phi_bad.clone().unwrap()
            }));
            if let Some(n_op) = o.n_operator() {
                let mut bad = None;
                for i in 0..module.rank() {
                    let lhs = sigma.apply(&n_op.apply(&module.gen(i)));
                    let rhs = n_op.apply(&sigma.apply(&module.gen(i)));
                    if lhs != rhs {
                        bad = Some(i);
                        break;
                    }
                }
                out.push(CheckItem::of("descent_n_commutes", bad.is_none(), || {
                    format!("sigma N != N sigma on basis vector {}", bad.unwrap())
                }));
            }
        }
        BreuilObject::Uni(o) => {
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
                let img = sigma.apply(&o.iota.cols[j]);
                if !image.contains(&img) {
                    stable_bad.get_or_insert(j);
                    if phi_bad.is_none() {
                        phi_bad = Some(format!(
                            "sigma moves iota(Fil generator {j}) outside the image"
                        ));
                    }
                    continue;
                }
                if phi_bad.is_none() {
                    let xi = solve_linear(&o.m, &o.iota.cols, &img).expect("membership checked");
                    let lifted = o.fil.element(xi).expect("well-shaped coordinates");
                    let lhs = o.phi.apply(&lifted);
                    let rhs = sigma.apply(&o.phi.cols[j]);
                    if lhs != rhs {
                        phi_bad = Some(format!(
                            "phi_r(sigma x) != sigma(phi_r x) on Fil generator {j}"
                        ));
                    }
                }
            }
            out.push(CheckItem::of("descent_fil_stable", stable_bad.is_none(), || {
                format!(
                    "sigma moves iota(Fil generator {}) outside the image",
                    stable_bad.unwrap()
                )
            }));
            out.push(CheckItem::of("descent_phi_commutes", phi_bad.is_none(), || {
                phi_bad.clone().unwrap()
            }));
            if let Some(n_m) = &o.n_m {
                let mut bad = None;
                for i in 0..module.rank() {
                    let lhs = sigma.apply(&n_m.apply(&module.gen(i)));
                    let rhs = n_m.apply(&sigma.apply(&module.gen(i)));
                    if lhs != rhs {
                        bad = Some(i);
                        break;
                    }
                }
                out.push(CheckItem::of("descent_n_commutes", bad.is_none(), || {
                    format!("sigma N != N sigma on generator {}", bad.unwrap())
                }));
            }
        }
    }
    out
}

/// The full descent report: the action axioms plus the dual-action law —
/// the transported action `(sigma a)(x) = twist(a(sigma^{-1} x))` must
/// itself satisfy every axiom on the dual object.
pub fn validate_descent(obj: &BreuilObject) -> Result<ValidationReport> {
    if obj.descent().is_none() {
        return Err(CoreError::InvalidInput(
            "object carries no descent action".to_string(),
        ));
    }
    let mut checks = action_checks(obj);
    let dual_item = match crate::dual::dualize(obj) {
        Ok(dual) => {
            let bad: Option<CheckItem> = action_checks(&dual).into_iter().find(|c| !c.passed);
            CheckItem::of("descent_dual_action", bad.is_none(), || {
                format!(
                    "the dual action fails {}: {}",
                    bad.as_ref().unwrap().name,
                    bad.as_ref().unwrap().witness.as_deref().unwrap_or("")
                )
            })
        }
        Err(e) => CheckItem::of("descent_dual_action", false, || {
            format!("the dual object cannot be formed: {e}")
        }),
    };
    checks.push(dual_item);
    Ok(ValidationReport {
        checks,
        is_filtered: None,
        is_generated: None,
    })
}

// ---------------------------------------------------------------------
// Base change
// ---------------------------------------------------------------------

/// `u_K -> u_L^n`: the coefficient of `u_K^j` moves to degree `n j`.
fn subst_ring(dst: &TruncatedRing, n: usize, s: &RingElement) -> RingElement {
    let mut out = dst.zero();
    for (j, a) in s.c.iter().enumerate() {
        if !a.is_zero() && n * j < dst.n {
            out.c[n * j] = *a;
        }
    }
    out
}

fn subst_elem(dst: &ChainModule, n: usize, x: &ModuleElement) -> ModuleElement {
    let coords = x.coords.iter().map(|s| subst_ring(&dst.ring, n, s)).collect();
    dst.element(coords).expect("substitution preserves reduction")
}

/// Coefficientwise application of a residue-field embedding.
fn embed_ring(emb: &FieldEmbedding, dst: &TruncatedRing, s: &RingElement) -> RingElement {
    let mut out = dst.zero();
    for (j, a) in s.c.iter().enumerate() {
        out.c[j] = emb.map(*a);
    }
    out
}

fn embed_elem(emb: &FieldEmbedding, dst: &ChainModule, x: &ModuleElement) -> ModuleElement {
    let coords = x.coords.iter().map(|s| embed_ring(emb, &dst.ring, s)).collect();
    dst.element(coords).expect("embedding preserves reduction")
}

/// The canonical descent action carried by a tame base change: the
/// Galois generator fixes the transported module generators and twists
/// coordinates through `omega(1)`.
fn induced_action(module: &ChainModule, tame: &TameExtensionParams) -> DescentAction {
    let sigma = SemilinearMap {
        source: module.clone(),
        target: module.clone(),
        twist: Twist::UTwist(tame.omega(1)),
        cols: (0..module.rank()).map(|i| module.gen(i)).collect(),
    };
    DescentAction {
        params: tame.clone(),
        sigma,
    }
}

/// Scalar extension along the totally ramified degree-`n` tame extension:
/// `u_K -> u_L^n`, so `e_L = n e_K` over the same residue field. The
/// monodromy values pick up a factor `n` (the unique rescaling satisfying
/// the Leibniz rule on the larger ring), and the output carries the
/// canonical descent action of the extension's Galois group.
///
/// An input that already carries a descent action is rejected: the two
/// actions would live along different extensions, so strip it first.
pub fn base_change_tame(obj: &BreuilObject, tame: &TameExtensionParams) -> Result<BreuilObject> {
    let pk = obj.params();
    if tame.field != pk.ring.field {
        return Err(CoreError::InvalidInput(
            "the tame extension is over a different residue field".to_string(),
        ));
    }
    if obj.descent().is_some() {
        return Err(CoreError::InvalidInput(
            "object already carries descent data; strip it before a tame base change".to_string(),
        ));
    }
    let n = tame.n;
    let pl = RingParams::new(pk.ring.field, n * pk.e, pk.r)?;
    let c_l = subst_ring(&pl.ring, n, &pk.c);
    let pl = pl.with_c(c_l)?;
    let ring_l = pl.ring;
    let n_scalar = ring_l.field.scalar((n % pl.p()) as u8);
    let scale_n = |m: &ChainModule, x: &ModuleElement| m.scale_field(n_scalar, x);

    match obj {
        BreuilObject::Free(o) => {
            let module_l = ChainModule::free(ring_l, o.rank());
            let fil_gens: Vec<ModuleElement> =
                o.fil.rows.iter().map(|w| subst_elem(&module_l, n, w)).collect();
            let phi_gens: Vec<ModuleElement> =
                o.phi_rows.iter().map(|w| subst_elem(&module_l, n, w)).collect();
            let n_vals = o.n_vals.as_ref().map(|vals| {
                vals.iter()
                    .map(|v| scale_n(&module_l, &subst_elem(&module_l, n, v)))
                    .collect()
            });
            let mut out =
                FreeBreuilObject::from_generators(pl, o.rank(), &fil_gens, &phi_gens, n_vals)?;
            if let Some(c) = &o.coeff {
                out = out.with_coeff(crate::coeff::CoefficientAction {
                    e_field: c.e_field,
                    nu_gen: LinearMap {
                        source: module_l.clone(),
                        target: module_l.clone(),
                        cols: c.nu_gen.cols.iter().map(|x| subst_elem(&module_l, n, x)).collect(),
                    },
                });
            }
            let action = induced_action(&module_l, tame);
            Ok(BreuilObject::Free(out.with_descent(action)))
        }
        BreuilObject::Uni(o) => {
            let stretch = |m: &ChainModule| -> Result<ChainModule> {
                ChainModule::new(ring_l, m.orders.iter().map(|d| n * d).collect())
            };
            let m_l = stretch(&o.m)?;
            let fil_l = stretch(&o.fil)?;
            let iota = LinearMap {
                source: fil_l.clone(),
                target: m_l.clone(),
                cols: o.iota.cols.iter().map(|x| subst_elem(&m_l, n, x)).collect(),
            };
            let phi = SemilinearMap {
                source: fil_l.clone(),
                target: m_l.clone(),
                twist: Twist::Frobenius,
                cols: o.phi.cols.iter().map(|x| subst_elem(&m_l, n, x)).collect(),
            };
            let mut out = UniObject::new(pl.clone(), m_l.clone(), fil_l.clone(), iota, phi)?;
            if let (Some(nm), Some(nf)) = (&o.n_m, &o.n_fil) {
                let n_m = NOperator {
                    module: m_l.clone(),
                    vals: nm
                        .vals
                        .iter()
                        .map(|v| scale_n(&m_l, &subst_elem(&m_l, n, v)))
                        .collect(),
                    scale: ring_l.one(),
                };
                let n_fil = NOperator {
                    module: fil_l.clone(),
                    vals: nf
                        .vals
                        .iter()
                        .map(|v| scale_n(&fil_l, &subst_elem(&fil_l, n, v)))
                        .collect(),
                    scale: ring_l.u_pow(pl.e),
                };
                out = out.with_n(n_m, n_fil)?;
            }
            if let Some(c) = &o.coeff {
                out = out.with_coeff(crate::coeff::CoefficientAction {
                    e_field: c.e_field,
                    nu_gen: LinearMap {
                        source: m_l.clone(),
                        target: m_l.clone(),
                        cols: c.nu_gen.cols.iter().map(|x| subst_elem(&m_l, n, x)).collect(),
                    },
                });
            }
            let action = induced_action(&m_l, tame);
            Ok(BreuilObject::Uni(out.with_descent(action)))
        }
    }
}

/// Scalar extension along an unramified extension: the residue field
/// grows from `k` to `ell`, everything else is re-read coefficientwise
/// through the embedding.
pub fn base_change_unramified(obj: &BreuilObject, ell: FiniteField) -> Result<BreuilObject> {
    let pk = obj.params();
    let emb = FieldEmbedding::find(&pk.ring.field, &ell)?;
    let ring_l = TruncatedRing::new(ell, pk.ring.n)?;
    let pl = RingParams::new(ell, pk.e, pk.r)?.with_c(embed_ring(&emb, &ring_l, &pk.c))?;

    let embed_coeff = |c: &crate::coeff::CoefficientAction, m: &ChainModule| {
        crate::coeff::CoefficientAction {
            e_field: c.e_field,
            nu_gen: LinearMap {
                source: m.clone(),
                target: m.clone(),
                cols: c.nu_gen.cols.iter().map(|x| embed_elem(&emb, m, x)).collect(),
            },
        }
    };
    let embed_descent = |d: &DescentAction, m: &ChainModule| DescentAction {
        params: TameExtensionParams {
            field: ell,
            n: d.params.n,
            m: d.params.m,
            zeta: emb.map(d.params.zeta),
            t: d.params.t,
        },
        sigma: SemilinearMap {
            source: m.clone(),
            target: m.clone(),
            twist: match &d.sigma.twist {
                Twist::UTwist(w) => Twist::UTwist(emb.map(*w)),
                other => other.clone(),
            },
            cols: d.sigma.cols.iter().map(|x| embed_elem(&emb, m, x)).collect(),
        },
    };

    match obj {
        BreuilObject::Free(o) => {
            let module_l = ChainModule::free(ring_l, o.rank());
            let fil_gens: Vec<ModuleElement> =
                o.fil.rows.iter().map(|w| embed_elem(&emb, &module_l, w)).collect();
            let phi_gens: Vec<ModuleElement> =
                o.phi_rows.iter().map(|w| embed_elem(&emb, &module_l, w)).collect();
            let n_vals = o.n_vals.as_ref().map(|vals| {
                vals.iter().map(|v| embed_elem(&emb, &module_l, v)).collect()
            });
            let mut out =
                FreeBreuilObject::from_generators(pl, o.rank(), &fil_gens, &phi_gens, n_vals)?;
            if let Some(c) = &o.coeff {
                out = out.with_coeff(embed_coeff(c, &module_l));
            }
            if let Some(d) = &o.descent {
                out = out.with_descent(embed_descent(d, &module_l));
            }
            Ok(BreuilObject::Free(out))
        }
        BreuilObject::Uni(o) => {
            let m_l = ChainModule::new(ring_l, o.m.orders.clone())?;
            let fil_l = ChainModule::new(ring_l, o.fil.orders.clone())?;
            let iota = LinearMap {
                source: fil_l.clone(),
                target: m_l.clone(),
                cols: o.iota.cols.iter().map(|x| embed_elem(&emb, &m_l, x)).collect(),
            };
            let phi = SemilinearMap {
                source: fil_l.clone(),
                target: m_l.clone(),
                twist: Twist::Frobenius,
                cols: o.phi.cols.iter().map(|x| embed_elem(&emb, &m_l, x)).collect(),
            };
            let mut out = UniObject::new(pl.clone(), m_l.clone(), fil_l.clone(), iota, phi)?;
            if let (Some(nm), Some(nf)) = (&o.n_m, &o.n_fil) {
                let n_m = NOperator {
                    module: m_l.clone(),
                    vals: nm.vals.iter().map(|v| embed_elem(&emb, &m_l, v)).collect(),
                    scale: ring_l.one(),
                };
                let n_fil = NOperator {
                    module: fil_l.clone(),
                    vals: nf.vals.iter().map(|v| embed_elem(&emb, &fil_l, v)).collect(),
                    scale: ring_l.u_pow(pl.e),
                };
                out = out.with_n(n_m, n_fil)?;
            }
            if let Some(c) = &o.coeff {
                out = out.with_coeff(embed_coeff(c, &m_l));
            }
            if let Some(d) = &o.descent {
                out = out.with_descent(embed_descent(d, &m_l));
            }
            Ok(BreuilObject::Uni(out))
        }
    }
}

/// Transports a morphism along [`base_change_tame`] (endpoints must not
/// carry descent data, mirroring the object functor).
pub fn transport_morphism_tame(
    m: &StructuredMorphism,
    tame: &TameExtensionParams,
) -> Result<StructuredMorphism> {
    let n = tame.n;
    let source = base_change_tame(&m.source, tame)?;
    let target = base_change_tame(&m.target, tame)?;
    let f = LinearMap {
        source: source.module_chain().clone(),
        target: target.module_chain().clone(),
        cols: m
            .f
            .cols
            .iter()
            .map(|x| subst_elem(target.module_chain(), n, x))
            .collect(),
    };
    let f_fil = match (&m.f_fil, &source, &target) {
        (Some(ff), BreuilObject::Uni(su), BreuilObject::Uni(tu)) => Some(LinearMap {
            source: su.fil.clone(),
            target: tu.fil.clone(),
            cols: ff.cols.iter().map(|x| subst_elem(&tu.fil, n, x)).collect(),
        }),
        _ => None,
    };
    Ok(StructuredMorphism { source, target, f, f_fil })
}

/// Transports a morphism along [`base_change_unramified`].
pub fn transport_morphism_unramified(
    m: &StructuredMorphism,
    ell: FiniteField,
) -> Result<StructuredMorphism> {
    let emb = FieldEmbedding::find(&m.source.params().ring.field, &ell)?;
    let source = base_change_unramified(&m.source, ell)?;
    let target = base_change_unramified(&m.target, ell)?;
    let f = LinearMap {
        source: source.module_chain().clone(),
        target: target.module_chain().clone(),
        cols: m
            .f
            .cols
            .iter()
            .map(|x| embed_elem(&emb, target.module_chain(), x))
            .collect(),
    };
    let f_fil = match (&m.f_fil, &source, &target) {
        (Some(ff), BreuilObject::Uni(su), BreuilObject::Uni(tu)) => Some(LinearMap {
            source: su.fil.clone(),
            target: tu.fil.clone(),
            cols: ff.cols.iter().map(|x| embed_elem(&emb, &tu.fil, x)).collect(),
        }),
        _ => None,
    };
    Ok(StructuredMorphism { source, target, f, f_fil })
}
