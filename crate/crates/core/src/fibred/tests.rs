use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::cat::{pullback, FinCategory};
use crate::fixtures::{self, P2_NAMES};
use crate::frame::FiniteFrame;
use crate::report::Status;
use crate::topology::{comorphism_report, validate_topology};

fn mask(name: &str) -> u64 {
    P2_NAMES.iter().position(|&n| n == name).unwrap() as u64
}

/// Whether `(c, x) ↦ x` style object maps induce an isomorphism of
/// categories, compared on hom-set sizes.
fn same_shape(a: &FinCategory, b: &FinCategory, obj: impl Fn(ObjId) -> ObjId) -> bool {
    a.num_objects() == b.num_objects()
        && a.num_arrows() == b.num_arrows()
        && a.objects().all(|x| a.objects().all(|y| a.hom(x, y).len() == b.hom(obj(x), obj(y)).len()))
}

#[test]
fn indexed_fixtures_validate() {
    assert!(validate_indexed(&fixtures::pow2()).passed());
    assert!(validate_indexed(&fixtures::fpre()).passed());
}

#[test]
fn total_over_one_is_the_fibre() {
    let g = grothendieck_construction(Arc::new(fixtures::fpre())).unwrap();
    let sier = fixtures::sier();
    assert!(grothendieck_report(&g).passed());
    assert!(same_shape(&g.total, &sier, |o| g.objects[o].1));
    assert_eq!(g.total.object_name(0), "(*,bot)");
}

#[test]
fn total_with_trivial_fibres_is_the_base() {
    let base = Arc::new(fixtures::arrow());
    let one = Arc::new(fixtures::one());
    let d = IndexedCat::from_preorder_maps("triv", base.clone(), vec![one.clone(), one], vec![vec![0]; 3]).unwrap();
    let g = grothendieck_construction(Arc::new(d)).unwrap();
    assert!(same_shape(&g.total, &base, |o| g.objects[o].0));
    assert!(g.tags.iter().all(|t| t.cartesian));
}

#[test]
fn pow2_total_counts() {
    let g = grothendieck_construction(Arc::new(fixtures::pow2())).unwrap();
    assert_eq!(g.total.num_objects(), 9);
    // Count (X ⊆ Y, x ⊆ X, y ⊆ Y, x ⊆ y ∩ X) directly on bitmasks.
    let sub = |a: u64, b: u64| a & !b == 0;
    let mut n = 0;
    for big_x in 0..4u64 {
        for big_y in 0..4u64 {
            for x in 0..4u64 {
                for y in 0..4u64 {
                    if sub(big_x, big_y) && sub(x, big_x) && sub(y, big_y) && sub(x, y & big_x) {
                        n += 1;
                    }
                }
            }
        }
    }
    assert_eq!(g.total.num_arrows(), n);
    assert!(grothendieck_report(&g).passed());
}

#[test]
fn pow2_cartesian_tags_match_restriction() {
    let g = grothendieck_construction(Arc::new(fixtures::pow2())).unwrap();
    let t = &*g.total;
    for a in t.arrows() {
        let (c, x) = g.objects[t.src(a)];
        let (_, y) = g.objects[t.tgt(a)];
        let (bx, sx, sy) = (mask(g.base().object_name(c)), mask(g.fibre(c).object_name(x)), {
            let d = g.objects[t.tgt(a)].0;
            mask(g.fibre(d).object_name(y))
        });
        assert_eq!(g.tags[a].cartesian, sx == sy & bx, "{}", t.arrow_name(a));
        assert_eq!(g.tags[a].vertical, g.base().is_identity(g.arrows[a].0));
    }
}

#[test]
fn pow2_cocartesian_tags_match_inclusion() {
    // Over inclusions X ⊆ Y the pushforward of x is x itself.
    let mut g = grothendieck_construction(Arc::new(fixtures::pow2())).unwrap();
    g.tag_cocartesian();
    let t = &*g.total;
    for a in t.arrows() {
        let (_, x) = g.objects[t.src(a)];
        let (d, y) = g.objects[t.tgt(a)];
        let c = g.objects[t.src(a)].0;
        let expect = mask(g.fibre(c).object_name(x)) == mask(g.fibre(d).object_name(y));
        assert_eq!(g.tags[a].cocartesian, Some(expect), "{}", t.arrow_name(a));
    }
}

#[test]
fn pow2_pullbacks_follow_the_fibrewise_recipe() {
    let g = grothendieck_construction(Arc::new(fixtures::pow2())).unwrap();
    let t = &*g.total;
    let name = |o: ObjId| {
        let (c, x) = g.objects[o];
        (mask(g.base().object_name(c)), mask(g.fibre(c).object_name(x)))
    };
    for a in t.arrows() {
        for &b in t.incoming(t.tgt(a)) {
            let pb = pullback(t, a, b).expect("total has pullbacks");
            let ((ba, xa), (bb, xb)) = (name(t.src(a)), name(t.src(b)));
            assert_eq!(name(pb.apex), (ba & bb, xa & xb));
        }
    }
}

#[test]
fn pow2_tau_is_right_adjoint() {
    let g = grothendieck_construction(Arc::new(fixtures::pow2())).unwrap();
    let (tau, r) = tau_and_adjunction(&g).unwrap();
    assert!(r.passed(), "{:?}", r.failing());
    for c in g.base().objects() {
        let (d, x) = g.objects[tau.obj(c)];
        assert_eq!(d, c);
        assert_eq!(g.fibre(c).object_name(x), g.base().object_name(c));
    }
}

#[test]
fn tau_requires_terminal_objects() {
    let base = Arc::new(fixtures::one());
    let disc = Arc::new(FinCategory::preorder("D2", &["p", "q"], &[]).unwrap());
    let d = IndexedCat::from_preorder_maps("disc", base, vec![disc], vec![vec![0, 1]]).unwrap();
    let g = grothendieck_construction(Arc::new(d)).unwrap();
    assert!(matches!(tau_and_adjunction(&g), Err(Error::Precondition(_))));
}

#[test]
fn non_strict_identity_is_reported() {
    let mut d = fixtures::pow2();
    let b = d.base.clone();
    let top = b.obj("01").unwrap();
    let id = b.id(top);
    let fib = d.fibres[top].clone();
    let up: Vec<ObjId> =
        fib.objects().map(|y| fib.obj(P2_NAMES[(mask(fib.object_name(y)) | 1) as usize]).unwrap()).collect();
    d.transitions[id] = FinFunctor::into_preorder("bad", fib.clone(), fib, up).unwrap();
    let r = validate_indexed(&d);
    assert_eq!(r.status("strict-identities"), Some(Status::Fail));
    assert_eq!(r.get("strict-identities").unwrap().witness.as_ref().unwrap().get("object"), Some("01"));
    assert!(r.passes("transition-functors"));
}

#[test]
fn giraud_topology_is_generated_by_preimages() {
    let g = grothendieck_construction(Arc::new(fixtures::pow2())).unwrap();
    let guards = Guards::default();
    let base_frame = Arc::new(FiniteFrame::from_category(g.base()).unwrap());
    let j = base_frame.canonical_topology(g.base().clone(), &guards).unwrap();
    let k = giraud_topology(&g, &j, &guards).unwrap();
    assert!(validate_topology(&k, &guards).passed());
    assert!(comorphism_report(&g.projection, &k, &j, &guards).passes("cover-lifting"));
    // Covering sieves are exactly those containing some p⁻¹(S).
    let t = &*g.total;
    for o in t.objects() {
        let pres: Vec<Sieve> =
            j.covering_sieves(g.objects[o].0, &guards).unwrap().iter().map(|s| g.preimage_sieve(o, s)).collect();
        for s in crate::topology::enumerate_sieves(t, o, &guards).unwrap() {
            let expect = pres.iter().any(|p| p.is_subset(&s));
            assert_eq!(k.covers(&s), expect, "{}", s.display(t));
        }
    }
}

#[test]
fn identity_morphism_preserves_everything() {
    let d = Arc::new(fixtures::pow2());
    let comps = d.fibres.iter().map(|f| FinFunctor::identity(f.clone())).collect();
    let m = FibMorphism::new("id", d.clone(), d, comps).unwrap();
    let r = fibration_morphism_report(&m).unwrap();
    assert!(r.passed(), "{:?}", r.failing());
    assert_eq!(r.status("preserves-terminal"), Some(Status::Pass));
}

#[test]
fn dropping_the_top_breaks_terminal_preservation() {
    let d = Arc::new(fixtures::fpre());
    let fib = d.fibres[0].clone();
    let u = fib.obj("u").unwrap();
    let cap: Vec<ObjId> = fib.objects().map(|x| if fib.leq(x, u) { x } else { u }).collect();
    let comp = FinFunctor::into_preorder("cap", fib.clone(), fib, cap).unwrap();
    let m = FibMorphism::new("cap", d.clone(), d, vec![comp]).unwrap();
    let r = fibration_morphism_report(&m).unwrap();
    assert_eq!(r.status("preserves-terminal"), Some(Status::Fail));
    let w = r.get("preserves-terminal").unwrap().witness.clone().unwrap();
    assert_eq!(w.get("terminal"), Some("(*,top)"));
    assert_eq!(w.get("image"), Some("(*,u)"));
    assert!(r.passes("preserves-pullbacks"));
    assert!(r.passes("commutes-with-projections"));
}

#[test]
fn unnatural_components_are_rejected() {
    let d = Arc::new(fixtures::pow2());
    let b = d.base.clone();
    let top = b.obj("01").unwrap();
    let mut comps: Vec<FinFunctor> = d.fibres.iter().map(|f| FinFunctor::identity(f.clone())).collect();
    let fib = d.fibres[top].clone();
    let full = fib.obj("01").unwrap();
    comps[top] = FinFunctor::into_preorder("const", fib.clone(), fib.clone(), vec![full; fib.num_objects()]).unwrap();
    let m = FibMorphism::new("bad", d.clone(), d, comps).unwrap();
    let r = fibration_morphism_report(&m).unwrap();
    assert_eq!(r.status("indexed-naturality"), Some(Status::Fail));
    assert!(r.get("total-functor/functor-typing").is_none());
}
