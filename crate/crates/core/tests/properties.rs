//! Invariants checked against brute force or the oracles in `common`.

mod common;

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use common::{elementary_divisors, is_zero_product, oracle_homology, p_torsion_count, rank_mod, rank_q, rows};
use hzsplit::abelian::FgAbelian;
use hzsplit::burnside::{
    burnside_mul, idempotents, mark_hom, marks, product_by_orbits, restriction, transfer, BurnsideElt,
};
use hzsplit::cellhom::{sphere_complex, EquivariantSphere, InvariantComplex, ModelKind, Ring};
use hzsplit::families::{all_families, check_mf_closure, required_inverted_primes, solve_c_h, Family};
use hzsplit::group::{make_group, PermGroup};
use hzsplit::intmat::{rank, rank_mod_p, snf, Mat, Track};
use hzsplit::mackey::{assemble, MackeyFunctor};
use hzsplit::primes::prime_factors;
use hzsplit::reps::{group_kind, restrict, VirtualRep};
use hzsplit::splitter::{compute_homotopy, localized_homotopy};

const GROUPS: [&str; 8] = ["C2", "C3", "C5", "K4", "D6", "D10", "A4", "A5"];

fn kinds() -> Vec<ModelKind> {
    vec![ModelKind::Sigma, ModelKind::Lens(3), ModelKind::Lens(5), ModelKind::Klein]
}

fn all_primes(g: &PermGroup) -> BTreeSet<u64> {
    prime_factors(g.order() as u64).into_iter().collect()
}

#[test]
fn boundaries_square_to_zero() {
    for kind in kinds() {
        let top = if kind == ModelKind::Klein { 6 } else { 8 };
        for n in 1..=top {
            for ring in [Ring::Z, Ring::Fp(2), Ring::Fp(3)] {
                let c = sphere_complex(kind, n, ring);
                for d in 1..c.top() as i64 {
                    let dd = c.d(d).mul(&c.d(d + 1));
                    let zero = match ring {
                        Ring::Z => dd.is_zero(),
                        Ring::Fp(p) => dd.reduce_mod(&BigInt::from(p)).is_zero(),
                    };
                    assert!(zero, "{kind:?} {ring:?} n={n} d={d}");
                }
            }
        }
    }
}

/// Cohomology of invariant cochains from ranks and elementary divisors of the maps δ.
fn oracle_cochain_homology(ic: &InvariantComplex) -> Vec<FgAbelian> {
    let top = ic.orbits.len() as i64 - 1;
    let into = |d: i64| -> Vec<Vec<BigInt>> {
        if d >= 1 && (d as usize) < ic.maps.len() {
            rows(&ic.maps[d as usize])
        } else {
            vec![]
        }
    };
    (0..=top)
        .map(|d| {
            let (inc, out) = (into(d), into(d + 1));
            let rk = ic.size(d) - rank_q(&inc) - rank_q(&out);
            let mut moduli: Vec<BigInt> = elementary_divisors(&inc).into_iter().filter(|x| *x != BigInt::from(1)).collect();
            moduli.extend(std::iter::repeat_n(BigInt::zero(), rk));
            FgAbelian::from_moduli(&moduli)
        })
        .collect()
}

fn spheres() -> Vec<EquivariantSphere> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for kind in kinds() {
            out.push(EquivariantSphere::catalog(kind, n));
        }
        out.push(EquivariantSphere::with_normalizer(ModelKind::Lens(3), n));
        out.push(EquivariantSphere::with_normalizer(ModelKind::Klein, n));
    }
    out
}

#[test]
fn invariant_complexes_match_oracle() {
    for s in spheres() {
        for h in s.group.lattice().all_subgroups() {
            if !h.is_subset_of(&s.base) {
                continue;
            }
            let chains = s.invariant_complex(h, false);
            let cc = chains.as_chain_complex();
            for d in 1..cc.top() as i64 {
                assert!(is_zero_product(&cc.d(d), &cc.d(d + 1)));
            }
            assert_eq!(chains.homology_groups(), oracle_homology(&cc), "{} |H|={}", s.group.name(), h.order());
            let co = s.invariant_complex(h, true);
            assert_eq!(co.homology_groups(), oracle_cochain_homology(&co), "{} |H|={} cochains", s.group.name(), h.order());
        }
    }
}

#[test]
fn catalog_homology_matches_oracle() {
    for kind in kinds() {
        let top = if kind == ModelKind::Klein { 4 } else { 6 };
        for n in 1..=top {
            let c = sphere_complex(kind, n, Ring::Z);
            let h = c.homology();
            assert_eq!(h, oracle_homology(&c), "{kind:?} n={n}");
            for p in [2u64, 3, 5] {
                for (d, g) in h.iter().enumerate() {
                    assert_eq!(g.primary(p).len(), p_torsion_count(&c, d, p), "{kind:?} n={n} d={d} p={p}");
                }
                let dims = c.dims_mod(p);
                for d in 0..=c.top() {
                    let b = rows(&c.d(d as i64));
                    let inc = rows(&c.d(d as i64 + 1));
                    assert_eq!(dims[d], c.size(d) - rank_mod(&b, p) - rank_mod(&inc, p));
                }
            }
        }
    }
}

fn small_matrix() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(-12i64..=12, r * c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn snf_agrees_with_naive_diagonalization((r, c, e) in small_matrix()) {
        let m = Mat::from_i64(r, c, &e);
        let s = snf(&m, Track::NONE);
        let ours: Vec<BigInt> = s.diag.iter().filter(|x| !x.is_zero()).cloned().collect();
        let theirs = elementary_divisors(&rows(&m));
        prop_assert_eq!(FgAbelian::from_moduli(&ours), FgAbelian::from_moduli(&theirs));
        prop_assert_eq!(rank(&m), rank_q(&rows(&m)));
        for p in [2u64, 3, 5] {
            prop_assert_eq!(rank_mod_p(&m, p), rank_mod(&rows(&m), p));
        }
    }

    #[test]
    fn snf_transforms_diagonalize((r, c, e) in small_matrix()) {
        let m = Mat::from_i64(r, c, &e);
        let s = snf(&m, Track { u: true, u_inv: true, v: true, v_inv: true });
        let (u, v) = (s.u.unwrap(), s.v.unwrap());
        prop_assert!(u.mul(&s.u_inv.unwrap()) == Mat::identity(r));
        prop_assert!(v.mul(&s.v_inv.unwrap()) == Mat::identity(c));
        let d = u.mul(&m).mul(&v);
        for i in 0..r {
            for j in 0..c {
                let want = if i == j { s.diag[i].clone() } else { BigInt::zero() };
                prop_assert_eq!(d.get(i, j), &want);
            }
        }
    }
}

#[test]
fn subgroup_lattice_is_complete() {
    for name in GROUPS {
        let g = make_group(name).unwrap();
        let lat = g.lattice();
        // Every subgroup of these groups is generated by two elements.
        let mut brute = HashSet::new();
        for a in 0..g.order() {
            for b in a..g.order() {
                brute.insert(g.generate(&[a, b]));
            }
        }
        assert_eq!(brute.len(), lat.subgroup_count(), "{name}");
        for (c, class) in lat.classes.iter().enumerate() {
            let n = g.normalizer(&class.representative);
            assert_eq!(class.members.len() * n.order(), g.order());
            assert_eq!(class.weyl_order * class.order(), n.order());
            for (m, w) in class.members.iter().zip(&class.witnesses) {
                assert!(brute.contains(m));
                assert_eq!(&g.conjugate_subgroup(*w, &class.representative), m);
                assert_eq!(lat.class_of(m), c);
            }
        }
        for k in 0..lat.len() {
            for h in 0..lat.len() {
                let sub = (0..g.order()).any(|x| g.conjugate_subgroup(x, lat.rep(k)).is_subset_of(lat.rep(h)));
                assert_eq!(lat.subconjugacy[k][h], sub, "{name} {k} {h}");
            }
        }
    }
}

#[test]
fn marks_determine_products() {
    for name in GROUPS {
        let g = make_group(name).unwrap();
        let lat = g.lattice();
        let tom = marks(&g);
        let n = lat.len();
        for k in 0..n {
            assert_eq!(tom.matrix[k][k] as usize, lat.classes[k].weyl_order);
            for h in 0..n {
                assert_eq!(tom.matrix[k][h] != 0, lat.subconjugacy[k][h]);
            }
        }
        let m: Vec<Vec<BigInt>> = tom.matrix.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        assert_eq!(rank_q(&m), n, "{name}: mark homomorphism not injective");
        let none = BTreeSet::new();
        for h in 0..n {
            for k in 0..n {
                let prod = burnside_mul(&BurnsideElt::basis(&g, h, &none), &BurnsideElt::basis(&g, k, &none)).unwrap();
                let want: Vec<BigInt> = product_by_orbits(&g, h, k).into_iter().map(BigInt::from).collect();
                let got: Vec<BigInt> = prod.coeff_values().iter().map(|q| q.to_integer()).collect();
                assert!(prod.coeff_values().iter().all(|q| q.is_integer()));
                assert_eq!(got, want, "{name} {h}x{k}");
            }
        }
    }
}

#[test]
fn idempotents_are_orthogonal_and_complete() {
    for name in GROUPS {
        let g = make_group(name).unwrap();
        let s = all_primes(&g);
        let es = idempotents(&g, &s).unwrap();
        let mut sum = BurnsideElt::zero(&g, &s);
        for (i, e) in es.iter().enumerate() {
            let chi = mark_hom(e).unwrap();
            for (k, c) in chi.iter().enumerate() {
                assert_eq!(c.value().clone(), num_rational::BigRational::from_integer(BigInt::from((k == i) as i64)));
            }
            for (j, f) in es.iter().enumerate() {
                let p = burnside_mul(e, f).unwrap();
                if i == j {
                    assert_eq!(p.coeff_values(), e.coeff_values());
                } else {
                    assert!(p.is_zero());
                }
            }
            sum = sum.add(e).unwrap();
        }
        assert_eq!(sum.coeff_values(), BurnsideElt::unit(&g, &s).coeff_values(), "{name}");
    }
}

#[test]
fn frobenius_reciprocity() {
    for name in ["D6", "A4"] {
        let g = make_group(name).unwrap();
        let s = BTreeSet::new();
        let lat = g.lattice();
        for c in 0..lat.len() {
            let l = g.subgroup_as_group(lat.rep(c), "L");
            for a in 0..l.lattice().len() {
                for b in 0..lat.len() {
                    let x = BurnsideElt::basis(&l, a, &s);
                    let y = BurnsideElt::basis(&g, b, &s);
                    let lhs = transfer(&burnside_mul(&x, &restriction(&y, &l).unwrap()).unwrap(), &g).unwrap();
                    let rhs = burnside_mul(&transfer(&x, &g).unwrap(), &y).unwrap();
                    assert_eq!(lhs.coeff_values(), rhs.coeff_values(), "{name} L={c} {a} {b}");
                }
            }
        }
    }
}

#[test]
fn families_are_exhaustive_and_solvable() {
    for name in ["C2", "C3", "K4", "D6", "D10", "A4", "A5"] {
        let g = make_group(name).unwrap();
        let lat = g.lattice();
        let n = lat.len();
        let closed = (0u32..1 << n)
            .filter(|mask| {
                (0..n).all(|h| mask & (1 << h) == 0 || (0..n).all(|k| !lat.subconjugacy[k][h] || mask & (1 << k) != 0))
            })
            .count();
        let fams = all_families(&g);
        assert_eq!(fams.len(), closed, "{name}");
        for f in &fams {
            let req = required_inverted_primes(f);
            let (_, used) = solve_c_h(f, &req).unwrap();
            assert_eq!(used, req, "{name}");
            if g.order() <= 12 {
                assert!(check_mf_closure(f, &req).unwrap(), "{name}");
                assert!(check_mf_closure(f, &all_primes(&g)).unwrap(), "{name}");
            }
        }
    }
}

#[test]
fn family_operations_stay_closed() {
    let g = make_group("A4").unwrap();
    let fams = all_families(&g);
    for a in &fams {
        for b in &fams {
            let u: Family = a.union(b).unwrap();
            let i = a.intersection(b).unwrap();
            assert!(fams.iter().any(|f| f.member_classes() == u.member_classes()));
            assert!(fams.iter().any(|f| f.member_classes() == i.member_classes()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn restriction_is_transitive(c in prop::collection::vec(-3i64..=3, 4)) {
        let g = make_group("A5").unwrap();
        let v = VirtualRep::new(group_kind(&g).unwrap(), c);
        let lat = g.lattice();
        let a4 = lat.classes.iter().find(|c| c.order() == 12).unwrap().representative.clone();
        let k4 = lat.classes.iter().find(|c| c.order() == 4).unwrap().representative.clone();
        let direct = restrict(&g, &v, &k4).unwrap();
        let a4g = g.subgroup_as_group(&a4, "A4");
        let mid = restrict(&g, &v, &a4).unwrap();
        let k4_in = a4g.embed(&g, &k4);
        let two = restrict(&a4g, &mid, &k4_in).unwrap();
        prop_assert_eq!(direct.dim(), v.dim());
        prop_assert_eq!(two.coeffs, direct.coeffs);
    }

    #[test]
    fn localization_is_coherent(group in prop::sample::select(vec!["C2", "C3", "K4", "D6", "D10", "A4"]), c in prop::collection::vec(-2i64..=2, 4)) {
        let g = make_group(group).unwrap();
        let kind = group_kind(&g).unwrap();
        let mut c = c[..kind.dims().len()].to_vec();
        if group == "K4" {
            c = vec![c[0], c[1], c[1], c[1]];
        }
        let v = VirtualRep::new(kind, c);
        let whole = compute_homotopy(&g, &v).unwrap().value;
        for p in all_primes(&g) {
            let local = localized_homotopy(&g, &v, p).unwrap().value;
            prop_assert_eq!(whole.localize(p), local);
        }
    }

    #[test]
    fn assembled_functors_are_lawful(group in prop::sample::select(vec!["C2", "C3", "D6", "D10", "A4"]), c in prop::collection::vec(-2i64..=2, 4)) {
        let g = make_group(group).unwrap();
        let kind = group_kind(&g).unwrap();
        let v = VirtualRep::new(kind, c[..kind.dims().len()].to_vec());
        let m = assemble(&g, &v).unwrap();
        prop_assert!(m.check_axioms().is_empty());
        prop_assert!(m.check_double_coset(64).is_empty());
        prop_assert!(m.check_cohomological().passes());
        for p in all_primes(&g) {
            prop_assert!(m.check_stable_subgroup(p));
            prop_assert_eq!(m.top_level_via_transfers(p), m.level(&g.whole()).invariants().localize(p));
        }
    }
}

#[test]
fn template_functors_are_lawful() {
    for name in GROUPS {
        let g = make_group(name).unwrap();
        for m in [MackeyFunctor::zero(&g), MackeyFunctor::constant(&g), MackeyFunctor::dual_constant(&g), MackeyFunctor::burnside(&g)] {
            assert!(m.check_axioms().is_empty(), "{name}");
        }
    }
}
