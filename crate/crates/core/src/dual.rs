//! Duality: the contravariant involution `X -> X*` on objects whose
//! comparison map is injective and whose `phi_r` is generating.
//!
//! For a chain module `M = ⊕ S~/u^{n_i}` the dual `M* = Hom(M, S~)` is a
//! chain module with the same orders: the dual generator `ĝ_i` pairs with
//! `g_j` to `δ_{ij} u^{N-n_i}`. On top of this:
//!
//! * `Fil* = {a : a(Fil) ⊆ u^{er} S~}`;
//! * `phi*_r(a)` is determined on `phi_r`-images by
//!   `phi*_r(a)(phi_r y) = phi_{r,S~}(a(y))` with the divided Frobenius
//!   `phi_{r,S~}(u^{er} w) = c^r frob(w)` — well-defined because
//!   `phi_r(Fil)` generates;
//! * `N*(a) = N_ring . a - a . N`;
//! * coefficient actions transport by `nu*(a) = a . nu`, descent actions
//!   by `sigma*(a) = twist . a . sigma^{-1}`.
//!
//! The double dual is the identity on the nose (the ring is
//! self-injective), which the tests pin down.

use crate::coeff::CoefficientAction;
use crate::descent::DescentAction;
use crate::error::{CoreError, Result};
use crate::hom::{solve_homogeneous, StructuredMorphism};
use crate::linmap::{apply_twist, LinearMap, NOperator, SemilinearMap, Twist};
use crate::module::{echelonize, solve_linear, ChainModule, ModuleElement};
use crate::object::{BreuilObject, FreeBreuilObject, RingParams, UniObject};
use crate::ring::RingElement;
use crate::snf::presented_from_generators;
use alloc::string::ToString;
use alloc::vec::Vec;

/// The chain module underlying `M*` (same invariant factors).
fn dual_chain(m: &ChainModule) -> ChainModule {
    ChainModule::new(m.ring, m.orders.clone()).expect("orders already canonical")
}

/// `a(x)` for a functional `a` in `M*` (coordinates over the dual
/// generators) and `x` in `M`.
fn pair_eval(m: &ChainModule, a: &ModuleElement, x: &ModuleElement) -> RingElement {
    let ring = m.ring;
    let big_n = ring.n;
    let mut acc = ring.zero();
    for j in 0..m.rank() {
        let t = ring.mul(&a.coords[j], &x.coords[j]);
        acc = ring.add(&acc, &ring.mul(&t, &ring.u_pow(big_n - m.orders[j])));
    }
    acc
}

/// Reconstructs the coordinates of a functional from its values on the
/// chain generators (`values[j] = a(g_j)`, necessarily divisible by
/// `u^{N-n_j}`).
fn functional_coords(mstar: &ChainModule, values: &[RingElement]) -> Result<ModuleElement> {
    let ring = mstar.ring;
    let big_n = ring.n;
    let mut coords = Vec::with_capacity(mstar.rank());
    for (j, v) in values.iter().enumerate() {
        let c = ring.div_u_pow_exact(v, big_n - mstar.orders[j]).map_err(|_| {
            CoreError::InvalidInput(
                "functional values are incompatible with the chain orders".to_string(),
            )
        })?;
        coords.push(c);
    }
    mstar.element(coords)
}

/// Flattens a ring element to its `F_p` coefficient vector.
fn lin_ring(ring: &crate::ring::TruncatedRing, s: &RingElement) -> Vec<u8> {
    let f = ring.field.f as usize;
    let mut out = Vec::with_capacity(ring.n * f);
    for c in &s.c {
        out.extend_from_slice(&c.c[..f]);
    }
    out
}

/// The shared data of a dualizable object: ambient chain, the `Fil`
/// generators as ambient elements, and their paired `phi_r` values.
struct DualInput {
    m: ChainModule,
    fil_gens: Vec<ModuleElement>,
    phi_vals: Vec<ModuleElement>,
    n_vals: Option<Vec<ModuleElement>>,
}

/// Core of the duality: computes `M*`, the canonical generators of
/// `Fil*`, their `phi*` values, and `N*` on the dual chain generators.
struct DualCore {
    mstar: ChainModule,
    fil_star_rows: Vec<ModuleElement>,
    phi_star_rows: Vec<ModuleElement>,
    n_star_vals: Option<Vec<ModuleElement>>,
}

fn dual_core(params: &RingParams, input: &DualInput) -> Result<DualCore> {
    let ring = params.ring;
    let big_n = ring.n;
    let er = params.er();
    let m = &input.m;
    let mstar = dual_chain(m);

    // Fil*: functionals sending every Fil generator into u^{er} S~.
    let dim = mstar.dim_fp();
    let cond = |flat: &[u8]| -> Vec<u8> {
        let a = mstar.delinearize(flat);
        let mut out = Vec::new();
        for w in &input.fil_gens {
            let v = pair_eval(m, &a, w);
            out.extend(lin_ring(&ring, &ring.rem_u_pow(&v, er)));
        }
        out
    };
    let sols = solve_homogeneous(ring.field.p, dim, cond);
    let gens: Vec<ModuleElement> = sols.iter().map(|flat| mstar.delinearize(flat)).collect();
    let fil_star = echelonize(&mstar, &gens);

    // phi*: solve each ambient generator as a combination of the
    // phi_r-images once, then evaluate.
    let mut solves = Vec::with_capacity(m.rank());
    for i in 0..m.rank() {
        let s = solve_linear(m, &input.phi_vals, &m.gen(i)).ok_or_else(|| {
            CoreError::PreconditionFailed(
                "dual requires phi_r(Fil) to generate the module".to_string(),
            )
        })?;
        solves.push(s);
    }
    let cr = params.c_pow(params.r);
    let mut phi_star_rows = Vec::with_capacity(fil_star.rows.len());
    for a in &fil_star.rows {
        // phi_{r,S~}(a(w_t)) for every Fil generator.
        let mut phi_s: Vec<RingElement> = Vec::with_capacity(input.fil_gens.len());
        for w in &input.fil_gens {
            let v = pair_eval(m, a, w);
            let div = ring.div_u_pow_exact(&v, er).map_err(|_| {
                CoreError::InvalidInput("Fil* functional misses the divisibility".to_string())
            })?;
            phi_s.push(ring.mul(&cr, &ring.frobenius_ring(&div)));
        }
        let mut values = Vec::with_capacity(m.rank());
        for s in &solves {
            let mut acc = ring.zero();
            for (t, st) in s.iter().enumerate() {
                acc = ring.add(&acc, &ring.mul(st, &phi_s[t]));
            }
            values.push(acc);
        }
        phi_star_rows.push(functional_coords(&mstar, &values)?);
    }

    // N*(ĝ_i)(g_j) = N_ring(ĝ_i(g_j)) - ĝ_i(N g_j).
    let n_star_vals = match &input.n_vals {
        Some(nv) => {
            let mut vals = Vec::with_capacity(m.rank());
            for i in 0..m.rank() {
                let mut values = Vec::with_capacity(m.rank());
                for j in 0..m.rank() {
                    let own = if i == j {
                        ring.n_ring(&ring.u_pow(big_n - m.orders[i]))
                    } else {
                        ring.zero()
                    };
                    let cross = ring.mul(&nv[j].coords[i], &ring.u_pow(big_n - m.orders[i]));
                    values.push(ring.sub(&own, &cross));
                }
                vals.push(functional_coords(&mstar, &values)?);
            }
            Some(vals)
        }
        None => None,
    };

    Ok(DualCore {
        mstar,
        fil_star_rows: fil_star.rows,
        phi_star_rows,
        n_star_vals,
    })
}

/// Transports a coefficient action to the dual: `nu*(a) = a . nu(g)`.
fn dual_coeff(m: &ChainModule, mstar: &ChainModule, action: &CoefficientAction) -> Result<CoefficientAction> {
    let mut cols = Vec::with_capacity(mstar.rank());
    for i in 0..mstar.rank() {
        let a = mstar.gen(i);
        let mut values = Vec::with_capacity(m.rank());
        for j in 0..m.rank() {
            values.push(pair_eval(m, &a, &action.nu_gen.apply(&m.gen(j))));
        }
        cols.push(functional_coords(mstar, &values)?);
    }
    Ok(CoefficientAction {
        e_field: action.e_field,
        nu_gen: LinearMap {
            source: mstar.clone(),
            target: mstar.clone(),
            cols,
        },
    })
}

/// Transports a descent action to the dual:
/// `sigma*(a) = twist . a . sigma^{-1}`.
fn dual_descent(m: &ChainModule, mstar: &ChainModule, action: &DescentAction) -> Result<DescentAction> {
    let ring = m.ring;
    let n = action.params.n;
    // sigma^{-1} = sigma^{n-1} on the chain generators.
    let sigma_inv_cols: Vec<ModuleElement> = (0..m.rank())
        .map(|j| {
            let mut x = m.gen(j);
            for _ in 0..n.saturating_sub(1) {
                x = action.sigma.apply(&x);
            }
            x
        })
        .collect();
    let mut cols = Vec::with_capacity(mstar.rank());
    for i in 0..mstar.rank() {
        let a = mstar.gen(i);
        let mut values = Vec::with_capacity(m.rank());
        for col in &sigma_inv_cols {
            let v = pair_eval(m, &a, col);
            values.push(apply_twist(&ring, &action.sigma.twist, &v));
        }
        cols.push(functional_coords(mstar, &values)?);
    }
    Ok(DescentAction {
        params: action.params.clone(),
        sigma: SemilinearMap {
            source: mstar.clone(),
            target: mstar.clone(),
            twist: action.sigma.twist.clone(),
            cols,
        },
    })
}

/// The dual object. Free objects dualize to free objects; general-shape
/// objects need an injective `iota` and a generating `phi_r`.
pub fn dualize(obj: &BreuilObject) -> Result<BreuilObject> {
    let params = obj.params().clone();
    match obj {
        BreuilObject::Free(o) => {
            let input = DualInput {
                m: o.module.clone(),
                fil_gens: o.fil.rows.clone(),
                phi_vals: o.phi_rows.clone(),
                n_vals: o.n_vals.clone(),
            };
            let core = dual_core(&params, &input)?;
            let coeff_star = match &o.coeff {
                Some(c) => Some(dual_coeff(&o.module, &core.mstar, c)?),
                None => None,
            };
            let descent_star = match &o.descent {
                Some(d) => Some(dual_descent(&o.module, &core.mstar, d)?),
                None => None,
            };
            let fil_star = echelonize(&core.mstar, &core.fil_star_rows);
            debug_assert_eq!(fil_star.rows, core.fil_star_rows);
            let mut dual = FreeBreuilObject::from_echelon(
                params,
                fil_star,
                core.phi_star_rows,
                core.n_star_vals,
            )?;
            if let Some(c) = coeff_star {
                dual = dual.with_coeff(c);
            }
            if let Some(d) = descent_star {
                dual = dual.with_descent(d);
            }
            Ok(BreuilObject::Free(dual))
        }
        BreuilObject::Uni(o) => {
            if !o.iota.kernel_submodule().is_zero_module() {
                return Err(CoreError::PreconditionFailed(
                    "duality requires an injective Fil-map".to_string(),
                ));
            }
            let input = DualInput {
                m: o.m.clone(),
                fil_gens: o.iota.cols.clone(),
                phi_vals: o.phi.cols.clone(),
                n_vals: o.n_m.as_ref().map(|n| n.vals.clone()),
            };
            let core = dual_core(&params, &input)?;
            let mstar = core.mstar.clone();
            let presented = presented_from_generators(&mstar, &core.fil_star_rows)?;
            let fil_chain = presented.module.clone();
            let iota_star = LinearMap {
                source: fil_chain.clone(),
                target: mstar.clone(),
                cols: presented.chain_gens.clone(),
            };
            // phi* on the abstract chain generators: recompute through the
            // canonical rows (phi* is semilinear, values transported by the
            // tracked reduction).
            let ring = params.ring;
            let fil_star_sub = echelonize(&mstar, &core.fil_star_rows);
            let mut phi_star_cols = Vec::with_capacity(fil_chain.rank());
            for g in &presented.chain_gens {
                let (residue, qs) = fil_star_sub.reduce_tracked(g);
                debug_assert!(mstar.is_zero(&residue));
                let mut acc = mstar.zero();
                for (t, q) in qs.iter().enumerate() {
                    let s = ring.frobenius_ring(q);
                    acc = mstar.add(&acc, &mstar.scale(&s, &core.phi_star_rows[t]));
                }
                phi_star_cols.push(acc);
            }
            let phi_star = SemilinearMap {
                source: fil_chain.clone(),
                target: mstar.clone(),
                twist: Twist::Frobenius,
                cols: phi_star_cols,
            };
            let mut dual = UniObject::new(params.clone(), mstar.clone(), fil_chain.clone(), iota_star, phi_star)?;
            if let Some(n_star_vals) = core.n_star_vals {
                let n_m_star = NOperator {
                    module: mstar.clone(),
                    vals: n_star_vals,
                    scale: ring.one(),
                };
                // N*_Fil: u^e N* expressed inside Fil*.
                let ue = ring.u_pow(params.e);
                let mut fil_vals = Vec::with_capacity(fil_chain.rank());
                for g in &presented.chain_gens {
                    let y = mstar.scale(&ue, &n_m_star.apply(g));
                    let coords = presented.express(&y).ok_or_else(|| {
                        CoreError::InvalidInput(
                            "dual filtration is not stable under u^e N*".to_string(),
                        )
                    })?;
                    fil_vals.push(coords);
                }
                let n_fil_star = NOperator {
                    module: fil_chain,
                    vals: fil_vals,
                    scale: ue,
                };
                dual = dual.with_n(n_m_star, n_fil_star)?;
            }
            if let Some(c) = &o.coeff {
                dual = dual.with_coeff(dual_coeff(&o.m, &mstar, c)?);
            }
            if let Some(d) = &o.descent {
                dual = dual.with_descent(dual_descent(&o.m, &mstar, d)?);
            }
            Ok(BreuilObject::Uni(dual))
        }
    }
}

/// The dual of a morphism `m: A -> B`, as a morphism `B* -> A*`:
/// `(m* b̂)(x) = b̂(m x)`.
pub fn dualize_morphism(m: &StructuredMorphism) -> Result<StructuredMorphism> {
    let a_star = dualize(&m.source)?;
    let b_star = dualize(&m.target)?;
    let ma = m.source.module_chain().clone();
    let mb = m.target.module_chain().clone();
    let mb_star = b_star.module_chain().clone();
    let ma_star = a_star.module_chain().clone();

    let mut cols = Vec::with_capacity(mb_star.rank());
    for i in 0..mb_star.rank() {
        let bhat = mb_star.gen(i);
        let mut values = Vec::with_capacity(ma.rank());
        for j in 0..ma.rank() {
            values.push(pair_eval(&mb, &bhat, &m.f.apply(&ma.gen(j))));
        }
        cols.push(functional_coords(&ma_star, &values)?);
    }
    let f = LinearMap {
        source: mb_star.clone(),
        target: ma_star.clone(),
        cols,
    };

    // The filtration side of the dual: m* restricts to Fil*_B -> Fil*_A,
    // expressed between the abstract chains when an endpoint is general.
    let f_fil = match (&a_star, &b_star) {
        (BreuilObject::Free(_), BreuilObject::Free(_)) => None,
        _ => {
            let ua = a_star.as_uni()?;
            let ub = b_star.as_uni()?;
            let mut cols = Vec::with_capacity(ub.fil.rank());
            for j in 0..ub.fil.rank() {
                let w = f.apply(&ub.iota.cols[j]);
                let coords = solve_linear(&ua.m, &ua.iota.cols, &w).ok_or_else(|| {
                    CoreError::InvalidInput(
                        "dual morphism does not preserve the dual filtration".to_string(),
                    )
                })?;
                cols.push(ua.fil.element(coords)?);
            }
            Some(LinearMap {
                source: ub.fil.clone(),
                target: ua.fil.clone(),
                cols,
            })
        }
    };

    Ok(StructuredMorphism {
        source: b_star,
        target: a_star,
        f,
        f_fil,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::hom::{compose, hom_basis, validate_morphism};
    use crate::object::{random_free_object, standard_object};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p0() -> RingParams {
        RingParams::new(FiniteField::new(3, 1).unwrap(), 2, 1).unwrap()
    }

    #[test]
    fn dual_of_twist_swaps_the_parameter() {
        let params = p0();
        for t in 0..=params.r {
            let obj = standard_object(&params, t).unwrap();
            let dual = dualize(&BreuilObject::Free(obj)).unwrap();
            let expected = standard_object(&params, params.r - t).unwrap();
            assert_eq!(dual, BreuilObject::Free(expected), "t = {t}");
        }
        // Larger Hodge range.
        let params5 = RingParams::new(FiniteField::new(5, 1).unwrap(), 1, 2).unwrap();
        for t in 0..=params5.r {
            let obj = standard_object(&params5, t).unwrap();
            let dual = dualize(&BreuilObject::Free(obj)).unwrap();
            let expected = standard_object(&params5, params5.r - t).unwrap();
            assert_eq!(dual, BreuilObject::Free(expected));
        }
    }

    #[test]
    fn dual_objects_validate() {
        let params = p0();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let obj = BreuilObject::Free(random_free_object(&params, 3, true, &mut rng));
            let dual = dualize(&obj).unwrap();
            let report = dual.validate_object();
            assert!(report.all_passed(), "{:?}", report.checks);
        }
    }

    #[test]
    fn bidual_is_the_identity() {
        let params = p0();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let obj = BreuilObject::Free(random_free_object(&params, 3, true, &mut rng));
            let bidual = dualize(&dualize(&obj).unwrap()).unwrap();
            assert_eq!(bidual, obj);
        }
    }

    #[test]
    fn general_shape_dual_matches_free_dual() {
        let params = p0();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let free = random_free_object(&params, 2, true, &mut rng);
            let via_free = dualize(&BreuilObject::Free(free.clone()))
                .unwrap()
                .as_uni()
                .unwrap();
            let via_uni = match dualize(&BreuilObject::Uni(free.to_uni().unwrap())).unwrap() {
                BreuilObject::Uni(u) => u,
                _ => unreachable!(),
            };
            assert_eq!(via_free, via_uni);
        }
    }

    #[test]
    fn morphism_duality_is_contravariant() {
        let params = p0();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut done = 0;
        while done < 5 {
            let x = BreuilObject::Free(random_free_object(&params, 2, true, &mut rng));
            let y = BreuilObject::Free(random_free_object(&params, 2, true, &mut rng));
            let z = BreuilObject::Free(random_free_object(&params, 2, true, &mut rng));
            let fs = hom_basis(&x, &y).unwrap();
            let gs = hom_basis(&y, &z).unwrap();
            let (Some(f), Some(g)) = (
                crate::hom::random_combination(&fs, &mut rng),
                crate::hom::random_combination(&gs, &mut rng),
            ) else {
                continue;
            };
            let gf = compose(&g, &f).unwrap();
            let lhs = dualize_morphism(&gf).unwrap();
            let f_star = dualize_morphism(&f).unwrap();
            let g_star = dualize_morphism(&g).unwrap();
            let rhs = compose(&f_star, &g_star).unwrap();
            assert_eq!(lhs.f, rhs.f);
            assert!(validate_morphism(&lhs).all_passed());
            done += 1;
        }
    }

    #[test]
    fn structured_duals_keep_their_actions_valid() {
        let field = FiniteField::new(3, 1).unwrap();
        let params = p0();
        let host = standard_object(&params, 1).unwrap();
        let tame = crate::descent::TameExtensionParams::new(field, 2).unwrap();
        let sigma = SemilinearMap {
            source: host.module.clone(),
            target: host.module.clone(),
            twist: Twist::UTwist(tame.omega(1)),
            cols: vec![host.module.gen(0)],
        };
        let coeff = crate::coeff::scalar_action(&host.module);
        let obj = BreuilObject::Free(
            host.with_descent(DescentAction { params: tame, sigma })
                .with_coeff(coeff),
        );
        let dual = dualize(&obj).unwrap();
        let report = dual.validate_object();
        assert!(report.all_passed(), "{:?}", report.checks);
        // And the bidual returns the original actions exactly.
        assert_eq!(dualize(&dual).unwrap(), obj);
    }
}
