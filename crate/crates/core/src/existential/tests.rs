use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::cat::FinCategory;

use crate::fibred::{FibMorphism, IndexedCat};
use crate::fixtures::{self, P2_NAMES};
use crate::report::{Guards, Status};
use crate::topology::{generate_topology, GrothendieckTopology, Sieve};

fn mask(name: &str) -> u64 {
    P2_NAMES.iter().position(|&n| n == name).unwrap() as u64
}

fn pow2_site() -> ExistentialSite {
    ExistentialSite::canonical("POW2", Arc::new(fixtures::pow2()), &Guards::default()).unwrap()
}

fn fpre_site() -> ExistentialSite {
    ExistentialSite::canonical("FPRE", Arc::new(fixtures::fpre()), &Guards::default()).unwrap()
}

/// The POW2 site with `∃` along `{0} ⊆ {0,1}` replaced by the constant `∅`.
fn pow2_mutated() -> ExistentialSite {
    let s = pow2_site();
    let d = s.indexed().clone();
    let f = d.base.arrow("0<=01").unwrap();
    let empty = d.fibres[d.base.tgt(f)].obj("e").unwrap();
    let mut adjoints = s.adjoints.clone();
    adjoints[f] = Adjoint::from_preorder_table(&d, f, vec![empty; d.fibres[d.base.src(f)].num_objects()]).unwrap();
    ExistentialSite::new("POW2-mut", d, s.fibre_topologies.clone(), adjoints).unwrap()
}

#[test]
fn pow2_exists_is_direct_image() {
    let s = pow2_site();
    let b = s.base().clone();
    for f in b.arrows() {
        for x in s.fibre(b.src(f)).objects() {
            let y = s.exists(f).obj(x);
            assert_eq!(s.fibre(b.tgt(f)).object_name(y), s.fibre(b.src(f)).object_name(x));
        }
    }
    assert!(s.adjunction_violation().is_none());
}

#[test]
fn constant_fibre_has_identity_adjoints() {
    let base = Arc::new(fixtures::arrow());
    let sier = Arc::new(fixtures::sier());
    let id: Vec<usize> = sier.objects().collect();
    let d = IndexedCat::from_preorder_maps("const", base, vec![sier.clone(), sier], vec![id; 3]).unwrap();
    let adj = compute_adjoints(&d).unwrap();
    for a in &adj {
        assert!(a.exists.object_map().iter().enumerate().all(|(i, &j)| i == j));
    }
}

#[test]
fn non_monotone_table_is_an_input_error() {
    let s = pow2_site();
    let d = s.indexed();
    let f = d.base.arrow("0<=01").unwrap();
    let fib = &d.fibres[d.base.tgt(f)];
    let (e, full) = (fib.obj("e").unwrap(), fib.obj("01").unwrap());
    // {0} ↦ ∅ below ∅ ↦ {0,1} reverses the order.
    let src = &d.fibres[d.base.src(f)];
    let mut table = vec![0; 2];
    table[src.obj("e").unwrap()] = full;
    table[src.obj("0").unwrap()] = e;
    assert!(matches!(Adjoint::from_preorder_table(d, f, table), Err(Error::Input(_))));
}

#[test]
fn missing_adjoint_is_reported() {
    // A transition that does not preserve the top has no left adjoint at ⊤.
    let base = Arc::new(fixtures::arrow());
    let two = Arc::new(FinCategory::preorder("2", &["0", "1"], &[("0", "1")]).unwrap());
    let id: Vec<usize> = two.objects().collect();
    let zero = two.obj("0").unwrap();
    let mut maps = Vec::new();
    for f in base.arrows() {
        maps.push(if base.is_identity(f) { id.clone() } else { vec![zero, zero] });
    }
    let d = IndexedCat::from_preorder_maps("bad", base, vec![two.clone(), two], maps).unwrap();
    let r = compute_adjoints(&d).unwrap_err();
    let w = r.get("left-adjoints").unwrap().witness.clone().unwrap();
    assert_eq!(w.get("arrow"), Some("f"));
    assert_eq!(w.get("element"), Some("1"));
}

#[test]
fn relative_bc_on_fixtures() {
    let g = Guards::default();
    let r = check_relative_bc(&pow2_site(), &g);
    assert!(r.passed(), "{:?}", r.failing());
    assert_eq!(r.status("relative-bc-forms"), Some(Status::Pass));
    assert!(check_relative_bc(&fpre_site(), &g).passed());
    let bad = check_relative_bc(&pow2_mutated(), &g);
    assert_eq!(bad.status("relative-bc"), Some(Status::Fail));
    let w = bad.get("relative-bc").unwrap().witness.clone().unwrap();
    assert_eq!(w.get("c"), Some("0<=01"));
    assert_eq!(w.get("element"), Some("0"));
}

#[test]
fn relative_frobenius_on_fixtures() {
    let g = Guards::default();
    let r = check_relative_frobenius(&pow2_site(), &g);
    assert!(r.passed(), "{:?}", r.failing());
    assert!(check_relative_frobenius(&fpre_site(), &g).passed());
    let bad = ExistentialSite::canonical("frob", Arc::new(fixtures::frobenius_broken()), &g).unwrap();
    let r = check_relative_frobenius(&bad, &g);
    assert_eq!(r.status("relative-frobenius"), Some(Status::Fail));
    assert_eq!(r.status("relative-frobenius-forms"), Some(Status::Pass));
    let w = r.get("relative-frobenius").unwrap().witness.clone().unwrap();
    assert_eq!(w.get("arrow"), Some("f"));
    // Brute force: some l and l' ≤ ∃(l) with ∃(L(l') ∧ l) ≠ l'.
    let fa = bad.fibre(0);
    let fb = bad.fibre(1);
    let f = bad.base().arrow("f").unwrap();
    let lf = bad.indexed().transition(f);
    let l = fa.obj(w.get("element").unwrap()).unwrap();
    let alpha = fb.arrow(w.get("alpha").unwrap()).unwrap();
    let lp = fb.src(alpha);
    let meet = fa
        .objects()
        .filter(|&m| fa.leq(m, l) && fa.leq(m, lf.obj(lp)))
        .max_by_key(|&m| fa.objects().filter(|&k| fa.leq(k, m)).count())
        .unwrap();
    assert_ne!(bad.exists(f).obj(meet), lp);
}

#[test]
fn relative_bc_holds_where_frobenius_fails() {
    let g = Guards::default();
    let bad = ExistentialSite::canonical("frob", Arc::new(fixtures::frobenius_broken()), &g).unwrap();
    assert!(check_relative_bc(&bad, &g).passed());
}

#[test]
fn existential_topology_over_one_is_canonical() {
    let g = Guards::default();
    let s = fpre_site();
    let (ext, r) = existential_topology(&s, &g).unwrap();
    assert!(r.passed(), "{:?}", r.failing());
    let t = &*s.total.total;
    for o in t.objects() {
        for sv in crate::topology::enumerate_sieves(t, o, &g).unwrap() {
            let image = Sieve::generated(s.fibre(0), s.total.objects[o].1, sv.arrows(t).map(|a| s.total.arrows[a].1));
            assert_eq!(ext.covers(&sv), s.fibre_topologies[0].covers(&image));
        }
    }
}

#[test]
fn pow2_existential_covers_are_unions() {
    let g = Guards::default();
    let s = pow2_site();
    let (ext, r) = existential_topology(&s, &g).unwrap();
    assert!(r.passed(), "{:?}", r.failing());
    let t = &*s.total.total;
    for o in t.objects() {
        let (_, l) = s.total.objects[o];
        let lmask = mask(s.fibre(s.total.objects[o].0).object_name(l));
        for sv in crate::topology::enumerate_sieves(t, o, &g).unwrap() {
            let union = sv.arrows(t).fold(0u64, |acc, a| {
                let (c, x) = s.total.objects[t.src(a)];
                acc | mask(s.fibre(c).object_name(x))
            });
            assert_eq!(ext.covers(&sv), union == lmask, "{}", sv.display(t));
        }
    }
}

#[test]
fn broken_frobenius_breaks_the_topology() {
    let g = Guards::default();
    let s = ExistentialSite::canonical("frob", Arc::new(fixtures::frobenius_broken()), &g).unwrap();
    let (_, r) = existential_topology(&s, &g).unwrap();
    assert!(r.has_failure());
    assert_eq!(r.status("existential-biconditional"), Some(Status::Pass));
    assert_eq!(r.get("existential-biconditional").unwrap().witness.as_ref().unwrap().get("frobenius"), Some("false"));
}

fn canonical_base(c: Arc<FinCategory>) -> GrothendieckTopology {
    let frame = Arc::new(crate::frame::FiniteFrame::from_category(&c).unwrap());
    frame.canonical_topology(c, &Guards::default()).unwrap()
}

#[test]
fn pow2_site_predicates() {
    let g = Guards::default();
    let s = pow2_site();
    let j = canonical_base(s.base().clone());
    let r = existential_site_report(&s, &j, &g).unwrap();
    for name in [
        "open",
        "reflecting-linearization",
        "j-reflecting",
        "giraud-contained",
        "prestack",
        "stack",
        "linearization-implies-reflecting",
        "reflecting-implies-giraud",
    ] {
        assert_eq!(r.status(name), Some(Status::Pass), "{name}");
    }
}

#[test]
fn giraud_strictly_inside_existential() {
    let g = Guards::default();
    let s = pow2_site();
    let j = canonical_base(s.base().clone());
    let (ext, _) = existential_topology(&s, &g).unwrap();
    let gir = crate::fibred::giraud_topology(&s.total, &j, &g).unwrap();
    let t = &*s.total.total;
    let mut strict = false;
    for o in t.objects() {
        for sv in crate::topology::enumerate_sieves(t, o, &g).unwrap() {
            assert!(!gir.covers(&sv) || ext.covers(&sv));
            strict |= ext.covers(&sv) && !gir.covers(&sv);
        }
    }
    assert!(strict);
}

#[test]
fn single_fibre_trivial_topology() {
    let g = Guards::default();
    let d = Arc::new(fixtures::fpre());
    let tops = vec![GrothendieckTopology::trivial(d.fibres[0].clone())];
    let s = ExistentialSite::with_computed_adjoints("t", d, tops).unwrap();
    let j = GrothendieckTopology::trivial(s.base().clone());
    let r = existential_site_report(&s, &j, &g).unwrap();
    assert!(r.passes("open"));
    assert!(r.passes("giraud-contained"));
}

#[test]
fn j_reflecting_negative() {
    let g = Guards::default();
    let base = Arc::new(fixtures::arrow());
    let sier = Arc::new(fixtures::sier());
    let id: Vec<usize> = sier.objects().collect();
    let d = Arc::new(
        IndexedCat::from_preorder_maps("refl", base.clone(), vec![sier.clone(), sier.clone()], vec![id; 3]).unwrap(),
    );
    let u = sier.obj("u").unwrap();
    let below = sier.arrow("bot<=u").unwrap();
    let k = generate_topology(sier.clone(), "k", &[(u, vec![below])], &g).unwrap();
    let tops = vec![k, GrothendieckTopology::trivial(sier.clone())];
    let s = ExistentialSite::with_computed_adjoints("refl", d, tops).unwrap();
    let f = base.arrow("f").unwrap();
    let j = generate_topology(base.clone(), "j", &[(base.obj("b").unwrap(), vec![f])], &g).unwrap();
    let r = existential_site_report(&s, &j, &g).unwrap();
    assert!(r.passes("transitions-cover-preserving"));
    assert_eq!(r.status("j-reflecting"), Some(Status::Fail));
    let w = r.get("j-reflecting").unwrap().witness.clone().unwrap();
    assert_eq!(w.get("object"), Some("b"));
    assert_eq!(w.get("family"), Some("{bot<=u}"));
}

fn identity_morphism(s: &ExistentialSite) -> FibMorphism {
    let d = s.indexed().clone();
    let comps = d.fibres.iter().map(|f| FinFunctor::identity(f.clone())).collect();
    FibMorphism::new("id", d.clone(), d, comps).unwrap()
}

#[test]
fn identity_is_an_existential_morphism() {
    let g = Guards::default();
    let s = pow2_site();
    let r = check_existential_morphism(&identity_morphism(&s), &s, &s, &g).unwrap();
    assert!(r.passed(), "{:?}", r.failing());
}

#[test]
fn identity_into_mutated_site_breaks_a_square() {
    let g = Guards::default();
    let s = pow2_site();
    let bad = pow2_mutated();
    let d = s.indexed().clone();
    let comps = d.fibres.iter().map(|f| FinFunctor::identity(f.clone())).collect();
    let m = FibMorphism::new("id", d.clone(), bad.indexed().clone(), comps).unwrap();
    let r = check_existential_morphism(&m, &s, &bad, &g).unwrap();
    assert_eq!(r.status("exists-squares"), Some(Status::Fail));
    assert_eq!(r.get("exists-squares").unwrap().witness.as_ref().unwrap().get("arrow"), Some("0<=01"));
}

/// Fibres `{∅, X}` of POW2 with the inherited order and restriction.
fn two_point_pow2() -> IndexedCat {
    let big = fixtures::pow2();
    let b = big.base.clone();
    let fibres: Vec<Arc<FinCategory>> = b
        .objects()
        .map(|c| {
            let name = b.object_name(c);
            let els: Vec<&str> = if name == "e" { vec!["e"] } else { vec!["e", name] };
            let rel: Vec<(&str, &str)> = if name == "e" { vec![] } else { vec![("e", name)] };
            Arc::new(FinCategory::preorder(name, &els, &rel).unwrap())
        })
        .collect();
    let maps = b
        .arrows()
        .map(|f| {
            let (c, d) = (b.src(f), b.tgt(f));
            fibres[d]
                .objects()
                .map(|y| {
                    let m = mask(fibres[d].object_name(y)) & mask(b.object_name(c));
                    fibres[c].obj(P2_NAMES[m as usize]).unwrap()
                })
                .collect()
        })
        .collect();
    IndexedCat::from_preorder_maps("POW2-2", b, fibres, maps).unwrap()
}

#[test]
fn two_point_inclusion_fails_exists_square() {
    let g = Guards::default();
    let small = ExistentialSite::canonical("small", Arc::new(two_point_pow2()), &g).unwrap();
    let big = pow2_site();
    let comps = small
        .base()
        .objects()
        .map(|c| {
            let (sf, bf) = (small.fibre(c).clone(), big.fibre(c).clone());
            let obj = sf.objects().map(|x| bf.obj(sf.object_name(x)).unwrap()).collect();
            FinFunctor::into_preorder("incl", sf, bf, obj).unwrap()
        })
        .collect();
    let m = FibMorphism::new("incl", small.indexed().clone(), big.indexed().clone(), comps).unwrap();
    let r = check_existential_morphism(&m, &small, &big, &g).unwrap();
    assert!(r.passes("fibration/indexed-naturality"));
    assert!(r.passes("fibration/preserves-cartesian"));
    assert_eq!(r.status("exists-squares"), Some(Status::Fail));
    // ∃ in {∅, Y} sends X to Y, direct image sends it to X.
    let w = r.get("exists-squares").unwrap().witness.clone().unwrap();
    assert!(["0<=01", "1<=01"].contains(&w.get("arrow").unwrap()));
}

#[test]
fn coorthogonal_generation() {
    let g = Guards::default();
    for s in [pow2_site(), fpre_site()] {
        let (ext, _) = existential_topology(&s, &g).unwrap();
        let r = check_coorthogonal_generation(&s, &ext, &g).unwrap();
        assert!(r.passed(), "{}: {:?}", s.name, r.failing());
    }
    let s = pow2_site();
    let (ext, _) = existential_topology(&s, &g).unwrap();
    let vertical = coorthogonal_topology(&s, false, &g).unwrap();
    let t = &*s.total.total;
    let mut missing = None;
    for o in t.objects() {
        for sv in crate::topology::enumerate_sieves(t, o, &g).unwrap() {
            assert!(!vertical.covers(&sv) || ext.covers(&sv));
            if ext.covers(&sv) && !vertical.covers(&sv) && missing.is_none() {
                missing = Some(sv);
            }
        }
    }
    assert!(missing.is_some());
}

#[test]
fn factorization_composes_back() {
    let s = pow2_site();
    let t = &*s.total.total;
    for a in t.arrows() {
        let (first, second) = factor_cocartesian_vertical(&s, a).unwrap();
        assert_eq!(t.compose(second, first), a);
        assert!(s.total.is_cocartesian(first));
        assert!(s.base().is_identity(s.total.arrows[second].0));
        if s.base().is_identity(s.total.arrows[a].0) {
            assert_eq!(first, t.id(t.src(a)));
        }
    }
}

#[test]
fn pow2_factorization_example() {
    let s = pow2_site();
    let g = &s.total;
    let b = s.base();
    let (c0, c01) = (b.obj("0").unwrap(), b.obj("01").unwrap());
    let f = b.arrow("0<=01").unwrap();
    let from = g.object(c0, s.fibre(c0).obj("0").unwrap());
    let to = g.object(c01, s.fibre(c01).obj("01").unwrap());
    let a = *g.total.hom(from, to).iter().find(|&&a| g.arrows[a].0 == f).unwrap();
    let (first, _) = factor_cocartesian_vertical(&s, a).unwrap();
    assert_eq!(g.total.object_name(g.total.tgt(first)), "(01,0)");
    // Cartesian arrow (f, 1) : (0, L(f)(x)) → (01, x) factors through the counit.
    let x = s.fibre(c01).obj("1").unwrap();
    let cart = g.cartesian_lift(f, x);
    let (_, vertical) = factor_cocartesian_vertical(&s, cart).unwrap();
    let eps = s.adjoints[f].counit[x].unwrap();
    assert_eq!(g.arrows[vertical].1, eps);
}
